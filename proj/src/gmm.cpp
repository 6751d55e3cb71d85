#include "mixsum/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsum/parallel.hpp"

namespace mixsum {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Params {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covs;
};

// N x k component log-densities (no weights), one Cholesky per component.
Matrix component_log_densities(const Matrix& x, const Params& p, double ridge) {
  const long n = x.rows();
  const long d = x.cols();
  const int k = static_cast<int>(p.means.size());
  Matrix logs(n, k);
  for (int q = 0; q < k; ++q) {
    const CholeskyFactor chol = chol_psd(p.covs[q], ridge);
    Matrix centered = x.rowwise() - p.means[q].transpose();
    Matrix z = chol.lower.triangularView<Eigen::Lower>().solve(centered.transpose());
    const double c = -0.5 * (d * kLog2Pi + chol.log_det);
    logs.col(q) = (c - 0.5 * z.colwise().squaredNorm().array()).matrix();
  }
  return logs;
}

Matrix add_log_weights(Matrix logs, const Vector& weights) {
  for (long q = 0; q < weights.size(); ++q) {
    const double lw = weights[q] > 0.0 ? std::log(weights[q]) : kNegInf;
    logs.col(q).array() += lw;
  }
  return logs;
}

// kmeans++ seeding: D^2-weighted choice of k rows.
std::vector<long> kmeanspp_indices(const Matrix& x, int k, RngStream& rng) {
  const long n = x.rows();
  std::vector<long> picked;
  picked.reserve(k);
  picked.push_back(std::min<long>(n - 1, static_cast<long>(rng.uniform() * n)));
  Vector d2 = (x.rowwise() - x.row(picked[0])).rowwise().squaredNorm();
  while (static_cast<int>(picked.size()) < k) {
    const double total = d2.sum();
    long next = -1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (long i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0.0) {
          next = i;
          break;
        }
      }
      if (next < 0) next = n - 1;
    } else {
      // All remaining points coincide with a chosen center.
      next = std::min<long>(n - 1, static_cast<long>(rng.uniform() * n));
    }
    picked.push_back(next);
    d2 = d2.cwiseMin((x.rowwise() - x.row(next)).rowwise().squaredNorm());
  }
  return picked;
}

Matrix global_scatter(const Matrix& x) {
  const Vector mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(x.rows());
}

struct MStepResult {
  Params params;
  bool reinitialized = false;
};

MStepResult m_step(const Matrix& x, const Matrix& resp, const Matrix& fallback_cov) {
  const long n = x.rows();
  const int k = static_cast<int>(resp.cols());
  Params p;
  p.weights.resize(k);
  p.means.resize(k);
  p.covs.resize(k);
  bool reinit = false;
  const double dead_weight = 1e-8 * k;
  // Variance collapse (a component shrinking onto one point) is treated like
  // weight death; the floor is relative to the overall scatter.
  const double trace_floor = 1e-10 * fallback_cov.trace();
  auto restart_component = [&](int q) {
    long worst = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i) {
      const double r = resp.row(i).maxCoeff();
      if (r < lowest) {
        lowest = r;
        worst = i;
      }
    }
    p.weights[q] = 1.0 / n;
    p.means[q] = x.row(worst).transpose();
    p.covs[q] = fallback_cov;
    reinit = true;
  };
  for (int q = 0; q < k; ++q) {
    const double nq = resp.col(q).sum();
    if (nq / n < dead_weight) {
      restart_component(q);
      continue;
    }
    p.weights[q] = nq / n;
    p.means[q] = (resp.col(q).transpose() * x).transpose() / nq;
    Matrix centered = x.rowwise() - p.means[q].transpose();
    Matrix cov = centered.transpose() * (resp.col(q).asDiagonal() * centered) / nq;
    p.covs[q] = 0.5 * (cov + cov.transpose());
    if (!(p.covs[q].trace() > trace_floor)) restart_component(q);
  }
  if (reinit) p.weights /= p.weights.sum();
  return {std::move(p), reinit};
}

struct EmRun {
  Params params;
  double loglik = kNegInf;
  std::vector<double> trace;
};

EmRun run_em(const Matrix& x, Params init, const EmConfig& config, const Matrix& fallback_cov) {
  EmRun run;
  run.params = std::move(init);
  double prev = kNegInf;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    Matrix logs = add_log_weights(component_log_densities(x, run.params, config.ridge),
                                  run.params.weights);
    Vector row_lse = log_sum_exp_rows(logs);
    const double ll = row_lse.sum();
    if (!std::isfinite(ll)) throw NumericalError("EM: non-finite log-likelihood");
    run.loglik = ll;
    run.trace.push_back(ll);
    if (iter > 0 && std::abs(ll - prev) <= config.rel_tol * std::max(1.0, std::abs(ll))) break;
    prev = ll;
    Matrix resp = (logs.colwise() - row_lse).array().exp();
    resp.array().colwise() /= resp.rowwise().sum().array();
    MStepResult ms = m_step(x, resp, fallback_cov);
    run.params = std::move(ms.params);
    // A reinitialized component breaks the monotone trace; start it over.
    if (ms.reinitialized) run.trace.clear();
    if (iter + 1 == config.max_iters) {
      Matrix final_logs = add_log_weights(
          component_log_densities(x, run.params, config.ridge), run.params.weights);
      run.loglik = log_sum_exp_rows(final_logs).sum();
      run.trace.push_back(run.loglik);
    }
  }
  return run;
}

Params init_from_kmeanspp(const Matrix& x, int k, RngStream& rng, const Matrix& fallback_cov) {
  const std::vector<long> seeds = kmeanspp_indices(x, k, rng);
  Matrix resp = Matrix::Zero(x.rows(), k);
  for (long i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int q = 0; q < k; ++q) {
      const double d2 = (x.row(i) - x.row(seeds[q])).squaredNorm();
      if (d2 < best_d) {
        best_d = d2;
        best = q;
      }
    }
    resp(i, best) = 1.0;
  }
  return m_step(x, resp, fallback_cov).params;
}

Params params_from_summary(const GmmSummary& s) {
  return {s.weights, s.means, s.covariances};
}

GmmSummary summary_from_run(EmRun run, int k) {
  GmmSummary out;
  out.k = k;
  out.weights = std::move(run.params.weights);
  out.means = std::move(run.params.means);
  out.covariances = std::move(run.params.covs);
  out.loglik = run.loglik;
  out.loglik_trace = std::move(run.trace);
  out.canonicalize();
  out.validate();
  return out;
}

GmmSummary fit_best(const Dataset& samples, int k, const EmConfig& config, const RngStream& rng,
                    const GmmSummary* warm) {
  config.validate();
  if (k < 1) throw ValidationError("fit_gmm: k must be >= 1");
  const Matrix& x = samples.points;
  if (x.rows() <= k)
    throw ValidationError("fit_gmm: need more samples than components (k=" + std::to_string(k) +
                          ", n=" + std::to_string(x.rows()) + ")");
  if (config.family != "gaussian")
    throw ValidationError("fit_gmm: summary family '" + config.family + "' is not implemented");
  if (warm && warm->k != k) throw ValidationError("fit_gmm: warm start has wrong k");

  const Matrix fallback_cov = global_scatter(x);
  std::optional<EmRun> best;
  std::string first_error;
  auto consider = [&](EmRun run) {
    if (!best || run.loglik > best->loglik) best = std::move(run);
  };
  if (warm) {
    try {
      consider(run_em(x, params_from_summary(*warm), config, fallback_cov));
    } catch (const std::exception& e) {
      first_error = e.what();
    }
  }
  for (int r = 0; r < config.restarts; ++r) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r));
    try {
      consider(run_em(x, init_from_kmeanspp(x, k, stream, fallback_cov), config, fallback_cov));
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!best)
    throw NumericalError("fit_gmm: all EM runs failed" +
                         (first_error.empty() ? std::string() : " (" + first_error + ")"));
  return summary_from_run(std::move(*best), k);
}

}  // namespace

void EmConfig::validate() const {
  if (max_iters < 1) throw ValidationError("em config: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ValidationError("em config: rel_tol must be positive");
  if (restarts < 0) throw ValidationError("em config: restarts must be >= 0");
  if (!(ridge >= 0.0)) throw ValidationError("em config: ridge must be nonnegative");
}

double GmmSummary::log_density(const Vector& point) const {
  Matrix pts = point.transpose();
  return log_density(pts)[0];
}

Vector GmmSummary::log_density(const Matrix& points) const {
  // Evaluate through the same kernel path as MixtureDraw so that a summary
  // holding exactly a draw's parameters reproduces its density bit for bit.
  return to_mixture().log_density(points);
}

Matrix GmmSummary::responsibilities(const Matrix& points) const {
  Params p{weights, means, covariances};
  return responsibilities_from_log_densities(component_log_densities(points, p, 1e-6), weights);
}

Matrix responsibilities_from_log_densities(const Matrix& log_densities, const Vector& weights) {
  if (log_densities.cols() != weights.size())
    throw ValidationError("responsibilities: component count mismatch");
  Matrix logs = add_log_weights(log_densities, weights);
  Vector row_lse = log_sum_exp_rows(logs);
  Matrix resp = (logs.colwise() - row_lse).array().exp();
  resp.array().colwise() /= resp.rowwise().sum().array();
  return resp;
}

void GmmSummary::canonicalize() {
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (means[a][0] != means[b][0]) return means[a][0] < means[b][0];
    if (dim() > 1 && means[a][1] != means[b][1]) return means[a][1] < means[b][1];
    return weights[a] > weights[b];
  });
  Vector w(k);
  std::vector<Vector> mu(k);
  std::vector<Matrix> cov(k);
  for (int q = 0; q < k; ++q) {
    w[q] = weights[order[q]];
    mu[q] = means[order[q]];
    cov[q] = covariances[order[q]];
  }
  weights = std::move(w);
  means = std::move(mu);
  covariances = std::move(cov);
}

bool GmmSummary::is_canonical() const {
  for (int q = 1; q < k; ++q)
    if (means[q][0] < means[q - 1][0]) return false;
  return true;
}

void GmmSummary::validate() const {
  if (k < 1) throw ValidationError("summary: k must be >= 1");
  if (weights.size() != k || static_cast<int>(means.size()) != k ||
      static_cast<int>(covariances.size()) != k)
    throw ValidationError("summary: field sizes do not match k");
  double total = 0.0;
  for (int q = 0; q < k; ++q) {
    if (!(weights[q] >= 0.0)) throw ValidationError("summary: negative weight");
    total += weights[q];
  }
  if (std::abs(total - 1.0) > 1e-8) throw ValidationError("summary: weights off the simplex");
  const int d = dim();
  for (int q = 0; q < k; ++q) {
    if (means[q].size() != d || covariances[q].rows() != d || covariances[q].cols() != d)
      throw ValidationError("summary: inconsistent component dimensions");
  }
}

MixtureDraw GmmSummary::to_mixture(int draw_index) const {
  std::vector<Kernel> kernels;
  kernels.reserve(k);
  for (int q = 0; q < k; ++q) {
    if (dim() == 1)
      kernels.push_back(Kernel::gaussian(means[q][0], covariances[q](0, 0)));
    else
      kernels.push_back(Kernel::gaussian(means[q], covariances[q]));
  }
  return MixtureDraw(weights, std::move(kernels), draw_index);
}

GmmSummary fit_gmm(const Dataset& samples, int k, const EmConfig& config, const RngStream& rng) {
  return fit_best(samples, k, config, rng, nullptr);
}

GmmSummary fit_gmm_warm(const Dataset& samples, const GmmSummary& warm, const EmConfig& config,
                        const RngStream& rng) {
  return fit_best(samples, warm.k, config, rng, &warm);
}

std::vector<GmmSummary> fit_summary_sequence(const Dataset& samples, int k_max,
                                             const EmConfig& config, const RngStream& rng,
                                             int threads) {
  if (k_max < 1) throw ValidationError("fit_summary_sequence: k_max must be >= 1");
  if (samples.size() <= k_max)
    throw ValidationError("fit_summary_sequence: k_max must be below the sample size");
  std::vector<GmmSummary> out(k_max);
  std::vector<std::string> errors(k_max);
  parallel_for_index(k_max, threads, [&](long i) {
    const int k = static_cast<int>(i) + 1;
    try {
      out[i] = fit_gmm(samples, k, config, rng);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < k_max; ++i) {
    if (!errors[i].empty())
      throw NumericalError("k=" + std::to_string(i + 1) + ": " + errors[i]);
  }
  return out;
}

}  // namespace mixsum
