#include "mixsum/dpm.hpp"

#include <algorithm>
#include <cmath>

namespace mixsum {

namespace {
constexpr double kLogPi = 1.1447298858494001741;
}

NormalGamma ng_posterior(const NormalGamma& prior, const NormalGammaStats& stats) {
  if (stats.n == 0) return prior;
  const double n = static_cast<double>(stats.n);
  const double mean = stats.sum / n;
  NormalGamma post;
  post.k0 = prior.k0 + n;
  post.mu0 = (prior.k0 * prior.mu0 + stats.sum) / post.k0;
  post.alpha0 = prior.alpha0 + 0.5 * n;
  const double ss = std::max(0.0, stats.sum_sq - n * mean * mean);
  post.beta0 = prior.beta0 + 0.5 * ss +
               0.5 * prior.k0 * n * (mean - prior.mu0) * (mean - prior.mu0) / post.k0;
  return post;
}

double ng_log_predictive(const NormalGamma& p, double y) {
  const double nu = 2.0 * p.alpha0;
  const double scale_sq = p.beta0 * (p.k0 + 1.0) / (p.alpha0 * p.k0);
  const double z_sq = (y - p.mu0) * (y - p.mu0) / scale_sq;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * (std::log(nu) + kLogPi + std::log(scale_sq)) -
         0.5 * (nu + 1.0) * std::log1p(z_sq / nu);
}

std::pair<double, double> ng_sample(const NormalGamma& p, RngStream& rng) {
  const double precision = rng.gamma(p.alpha0, p.beta0);
  const double variance = 1.0 / precision;
  const double mean = p.mu0 + rng.normal() * std::sqrt(variance / p.k0);
  return {mean, variance};
}

void DpmConfig::validate() const {
  if (!(k0 > 0.0)) throw ValidationError("dpm config: k0 must be positive");
  if (!(alpha0 > 0.0)) throw ValidationError("dpm config: alpha0 must be positive");
  if (!(beta0 > 0.0)) throw ValidationError("dpm config: beta0 must be positive");
  if (!(concentration_shape > 0.0) || !(concentration_rate > 0.0))
    throw ValidationError("dpm config: concentration prior must be positive");
  if (iterations <= burn_in) throw ValidationError("dpm config: iterations must exceed burn_in");
  if (burn_in < 0) throw ValidationError("dpm config: burn_in must be nonnegative");
  if (thinning < 1) throw ValidationError("dpm config: thinning must be >= 1");
  if (draw_count() < 1) throw ValidationError("dpm config: no draws after burn-in and thinning");
  if (max_clusters < 0) throw ValidationError("dpm config: max_clusters must be nonnegative");
}

namespace {

struct GibbsState {
  std::vector<int> assignment;           // cluster index per point
  std::vector<NormalGammaStats> stats;   // per occupied cluster
  double alpha = 0.5;
};

// Remove point i, dropping its cluster if it empties (swap with the last
// cluster to keep indices dense).
void detach(GibbsState& s, long i, double y) {
  const int c = s.assignment[i];
  s.stats[c].remove(y);
  if (s.stats[c].n == 0) {
    const int last = static_cast<int>(s.stats.size()) - 1;
    if (c != last) {
      s.stats[c] = s.stats[last];
      for (int& a : s.assignment)
        if (a == last) a = c;
    }
    s.stats.pop_back();
  }
  s.assignment[i] = -1;
}

double escobar_west_alpha(double alpha, long n, int k_occupied, double shape, double rate,
                          RngStream& rng) {
  const double eta = rng.beta(alpha + 1.0, static_cast<double>(n));
  const double rate_post = rate - std::log(eta);
  const double odds = (shape + k_occupied - 1.0) / (static_cast<double>(n) * rate_post);
  const double pi_mix = odds / (1.0 + odds);
  if (rng.uniform() < pi_mix) return rng.gamma(shape + k_occupied, rate_post);
  return rng.gamma(shape + k_occupied - 1.0, rate_post);
}

MixtureDraw record_draw(const GibbsState& s, const NormalGamma& prior, long n, int index,
                        RngStream& rng) {
  const int k = static_cast<int>(s.stats.size());
  Vector weights(k);
  std::vector<Kernel> kernels;
  kernels.reserve(k);
  for (int q = 0; q < k; ++q) {
    weights[q] = static_cast<double>(s.stats[q].n) / static_cast<double>(n);
    const auto [mean, var] = ng_sample(ng_posterior(prior, s.stats[q]), rng);
    kernels.push_back(Kernel::gaussian(mean, var));
  }
  return MixtureDraw(std::move(weights), std::move(kernels), index);
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (hi + v[mid - 1]);
}

}  // namespace

DpmResult dpm_gibbs(const Dataset& data, const DpmConfig& config, RngStream& rng) {
  config.validate();
  if (data.dim() != 1)
    throw ValidationError("dpm_gibbs: only univariate data is supported (got d=" +
                          std::to_string(data.dim()) + ")");
  const long n = data.size();
  if (n < 1) throw ValidationError("dpm_gibbs: empty dataset");

  NormalGamma prior;
  prior.k0 = config.k0;
  prior.alpha0 = config.alpha0;
  prior.beta0 = config.beta0;
  if (config.mu0) {
    prior.mu0 = *config.mu0;
  } else {
    std::vector<double> ys(data.points.col(0).data(), data.points.col(0).data() + n);
    prior.mu0 = median(std::move(ys));
  }

  GibbsState state;
  state.assignment.assign(n, 0);
  state.stats.assign(1, {});
  for (long i = 0; i < n; ++i) state.stats[0].add(data.points(i, 0));
  state.alpha = config.concentration_shape / config.concentration_rate;

  DpmResult result;
  result.diagnostics.reserve(config.iterations);
  std::vector<MixtureDraw> draws;
  draws.reserve(config.draw_count());

  std::vector<double> log_probs;
  int next_index = 0;
  for (long sweep = 1; sweep <= config.iterations; ++sweep) {
    for (long i = 0; i < n; ++i) {
      const double y = data.points(i, 0);
      detach(state, i, y);
      const int k = static_cast<int>(state.stats.size());
      const bool allow_new = config.max_clusters == 0 || k < config.max_clusters;
      log_probs.assign(k + (allow_new ? 1 : 0), 0.0);
      for (int q = 0; q < k; ++q)
        log_probs[q] = std::log(static_cast<double>(state.stats[q].n)) +
                       ng_log_predictive(ng_posterior(prior, state.stats[q]), y);
      if (allow_new) log_probs[k] = std::log(state.alpha) + ng_log_predictive(prior, y);
      const double top = *std::max_element(log_probs.begin(), log_probs.end());
      for (double& lp : log_probs) lp = std::exp(lp - top);
      const int pick = rng.categorical(log_probs);
      if (pick == k) state.stats.push_back({});
      state.stats[pick].add(y);
      state.assignment[i] = pick;
    }
    state.alpha = escobar_west_alpha(state.alpha, n, static_cast<int>(state.stats.size()),
                                     config.concentration_shape, config.concentration_rate, rng);
    result.diagnostics.push_back(
        {sweep, static_cast<int>(state.stats.size()), state.alpha});
    if (sweep > config.burn_in && (sweep - config.burn_in) % config.thinning == 0 &&
        static_cast<long>(draws.size()) < config.draw_count()) {
      draws.push_back(record_draw(state, prior, n, next_index++, rng));
    }
  }

  BundleMeta meta;
  meta.model = "dpm";
  meta.d = 1;
  meta.seed = rng.seed();
  result.bundle = DrawBundle(std::move(meta), std::move(draws));
  return result;
}

}  // namespace mixsum
