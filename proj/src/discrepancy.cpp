#include "mixsum/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixsum {

long DiscrepancyTable::column_of(int k) const {
  for (std::size_t i = 0; i < k_values.size(); ++i)
    if (k_values[i] == k) return static_cast<long>(i);
  throw ValidationError("discrepancy table: no column for k=" + std::to_string(k));
}

Vector posterior_predictive_logdensity(const DrawBundle& bundle, const Matrix& points) {
  if (bundle.draws.empty()) throw ValidationError("posterior predictive: empty bundle");
  if (points.cols() != bundle.dim())
    throw ValidationError("posterior predictive: point dimension does not match bundle");
  const long n = points.rows();
  const long m = bundle.size();
  // Streaming log-sum-exp across draws keeps memory at O(n) for large M.
  Vector run_max = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  Vector run_sum = Vector::Zero(n);
  for (const MixtureDraw& draw : bundle.draws) {
    Vector v = draw.log_density(points);
    for (long i = 0; i < n; ++i) {
      const double vi = v[i];
      if (std::isinf(vi) && vi < 0.0) continue;  // zero density contributes nothing
      if (vi <= run_max[i]) {
        run_sum[i] += std::exp(vi - run_max[i]);
      } else {
        run_sum[i] = run_sum[i] * std::exp(run_max[i] - vi) + 1.0;
        run_max[i] = vi;
      }
    }
  }
  Vector out(n);
  const double log_m = std::log(static_cast<double>(m));
  for (long i = 0; i < n; ++i) {
    out[i] = std::isfinite(run_max[i]) ? run_max[i] + std::log(run_sum[i]) - log_m
                                       : run_max[i];
  }
  return out;
}

DiscrepancyTable discrepancy_samples(const DrawBundle& bundle,
                                     const std::vector<GmmSummary>& summaries,
                                     const Dataset& predictive) {
  if (summaries.empty()) throw ValidationError("discrepancy: empty summary list");
  if (predictive.dim() != bundle.dim())
    throw ValidationError("discrepancy: predictive dimension does not match bundle");
  const long n = predictive.size();
  const Vector log_f = posterior_predictive_logdensity(bundle, predictive.points);

  DiscrepancyTable table;
  table.k_values.reserve(summaries.size());
  table.samples.resize(n, static_cast<long>(summaries.size()));
  table.mean_d.resize(static_cast<long>(summaries.size()));
  table.sd_d.resize(static_cast<long>(summaries.size()));
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    const GmmSummary& s = summaries[j];
    if (s.dim() != predictive.dim())
      throw ValidationError("discrepancy: summary dimension mismatch at k=" +
                            std::to_string(s.k));
    table.k_values.push_back(s.k);
    Vector d = s.log_density(predictive.points) - log_f;
    table.samples.col(static_cast<long>(j)) = d;
    const double mean = d.mean();
    table.mean_d[static_cast<long>(j)] = mean;
    table.sd_d[static_cast<long>(j)] =
        n > 1 ? std::sqrt((d.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  }
  for (long j = 0; j < table.mean_d.size(); ++j) {
    const double three_se = 3.0 * table.sd_d[j] / std::sqrt(static_cast<double>(n));
    if (table.mean_d[j] > three_se + 1e-12) table.mean_positive_warning = true;
  }
  return table;
}

int select_k_star(DiscrepancyTable& table, double delta, double sd_cap) {
  if (!(delta > 0.0)) throw ValidationError("select_k_star: delta must be positive");
  if (table.k_values.empty()) throw ValidationError("select_k_star: empty table");
  const double cap = std::isnan(sd_cap) ? 3.0 * table.sd_d.minCoeff() : sd_cap;
  table.delta = delta;
  table.sd_cap = cap;
  std::vector<long> order(table.k_values.size());
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(),
            [&](long a, long b) { return table.k_values[a] < table.k_values[b]; });
  long best = order[0];
  for (long j : order)
    if (table.mean_d[j] > table.mean_d[best]) best = j;
  table.k_star = table.k_values[best];
  table.selected_by_rule = false;
  for (long j : order) {
    if (table.mean_d[j] >= -delta && table.sd_d[j] <= cap) {
      table.k_star = table.k_values[j];
      table.selected_by_rule = true;
      break;
    }
  }
  return table.k_star;
}

}  // namespace mixsum
