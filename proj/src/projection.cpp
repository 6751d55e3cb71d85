#include "mixsum/projection.hpp"

#include <algorithm>
#include <cmath>

#include "mixsum/parallel.hpp"

namespace mixsum {

bool PosteriorSummarySet::aligned() const {
  return std::all_of(summaries.begin(), summaries.end(),
                     [](const GmmSummary& s) { return s.is_canonical(); });
}

void PosteriorSummarySet::validate() const {
  if (summaries.empty()) throw ValidationError("posterior summary set: empty");
  if (summaries.size() != draw_indices.size())
    throw ValidationError("posterior summary set: draw index count mismatch");
  for (const GmmSummary& s : summaries) {
    s.validate();
    if (s.k != k_star)
      throw ValidationError("posterior summary set: member has k=" + std::to_string(s.k) +
                            ", expected " + std::to_string(k_star));
  }
  if (!std::is_sorted(draw_indices.begin(), draw_indices.end()))
    throw ValidationError("posterior summary set: members out of draw order");
}

PosteriorSummarySet project_posterior(const DrawBundle& bundle, int k_star,
                                      const ProjectionConfig& config,
                                      const std::optional<GmmSummary>& warm_start,
                                      const RngStream& rng) {
  if (k_star < 1) throw ValidationError("project_posterior: k_star must be >= 1");
  if (config.h_per_draw < k_star)
    throw ValidationError("project_posterior: h must be at least k_star");
  if (warm_start && config.warm_start && warm_start->k != k_star)
    throw ValidationError("project_posterior: warm start has k=" +
                          std::to_string(warm_start->k) + ", expected " +
                          std::to_string(k_star));
  const long m = bundle.size();
  std::vector<std::optional<GmmSummary>> fits(m);
  std::vector<std::string> errors(m);
  const bool use_warm = warm_start.has_value() && config.warm_start;
  parallel_for_index(m, config.threads, [&](long i) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(i));
    try {
      Dataset pts(bundle.draws[i].sample_n(stream, config.h_per_draw));
      RngStream em_stream = stream.child(0x9a7);
      GmmSummary fit = use_warm ? fit_gmm_warm(pts, *warm_start, config.em, em_stream)
                                : fit_gmm(pts, k_star, config.em, em_stream);
      fit.canonicalize();
      fits[i] = std::move(fit);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  PosteriorSummarySet set;
  set.k_star = k_star;
  set.h_per_draw = config.h_per_draw;
  std::vector<long> order;
  for (long i = 0; i < m; ++i) {
    if (fits[i])
      order.push_back(i);
    else
      set.failed_draws.push_back(bundle.draws[i].draw_index);
  }
  // Members are kept in draw-index order even if the bundle file was not.
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return bundle.draws[a].draw_index < bundle.draws[b].draw_index;
  });
  for (long i : order) {
    set.summaries.push_back(std::move(*fits[i]));
    set.draw_indices.push_back(bundle.draws[i].draw_index);
  }
  const double failure_fraction =
      static_cast<double>(set.failed_draws.size()) / static_cast<double>(m);
  if (set.summaries.empty() || failure_fraction > config.max_failure_fraction) {
    std::string detail;
    for (long i = 0; i < m && detail.size() < 300; ++i)
      if (!errors[i].empty() && detail.find(errors[i]) == std::string::npos)
        detail += (detail.empty() ? "" : "; ") + errors[i];
    throw NumericalError("project_posterior: " + std::to_string(set.failed_draws.size()) +
                         " of " + std::to_string(m) + " per-draw fits failed (" + detail + ")");
  }
  set.validate();
  return set;
}

PosteriorSummarySet align_labels(PosteriorSummarySet set) {
  for (GmmSummary& s : set.summaries) s.canonicalize();
  return set;
}

DensityRibbon density_ribbon(const PosteriorSummarySet& set, const Matrix& grid) {
  if (set.summaries.empty()) throw ValidationError("density_ribbon: empty summary set");
  if (grid.rows() < 1) throw ValidationError("density_ribbon: empty grid");
  if (grid.cols() != set.summaries.front().dim())
    throw ValidationError("density_ribbon: grid dimension does not match summaries");
  const long g = grid.rows();
  const long m = set.size();
  Matrix densities(m, g);
  for (long j = 0; j < m; ++j)
    densities.row(j) = set.summaries[j].log_density(grid).array().exp().transpose();

  auto percentile = [](std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const long lo = static_cast<long>(std::floor(pos));
    const long hi = std::min<long>(lo + 1, static_cast<long>(sorted.size()) - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };

  DensityRibbon ribbon;
  ribbon.grid = grid;
  ribbon.lower2_5.resize(g);
  ribbon.upper97_5.resize(g);
  ribbon.mean.resize(g);
  std::vector<double> column(m);
  for (long i = 0; i < g; ++i) {
    for (long j = 0; j < m; ++j) column[j] = densities(j, i);
    std::sort(column.begin(), column.end());
    ribbon.lower2_5[i] = percentile(column, 0.025);
    ribbon.upper97_5[i] = percentile(column, 0.975);
    ribbon.mean[i] = densities.col(i).mean();
  }
  return ribbon;
}

Vector posterior_mean_logdensity(const PosteriorSummarySet& set, const Matrix& points) {
  if (set.summaries.empty()) throw ValidationError("posterior mean density: empty set");
  const long n = points.rows();
  Matrix logs(n, set.size());
  for (long j = 0; j < set.size(); ++j) logs.col(j) = set.summaries[j].log_density(points);
  return log_sum_exp_rows(logs).array() - std::log(static_cast<double>(set.size()));
}

Matrix default_grid_univariate(const Dataset& data, long points) {
  if (data.dim() != 1) throw ValidationError("default grid: univariate data required");
  if (points < 2) throw ValidationError("default grid: need at least 2 points");
  const double lo = data.points.col(0).minCoeff();
  const double hi = data.points.col(0).maxCoeff();
  const double pad = 0.1 * std::max(hi - lo, 1e-12);
  Matrix grid(points, 1);
  const double start = lo - pad;
  const double step = (hi + pad - start) / static_cast<double>(points - 1);
  for (long i = 0; i < points; ++i) grid(i, 0) = start + step * static_cast<double>(i);
  return grid;
}

}  // namespace mixsum
