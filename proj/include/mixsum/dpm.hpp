#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/mixture.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

// Conjugate Normal-Gamma base measure for the univariate DPM:
//   precision ~ Gamma(alpha0, beta0),  mean | precision ~ N(mu0, 1/(k0*precision)).
struct NormalGamma {
  double mu0 = 0.0;
  double k0 = 0.2;
  double alpha0 = 2.0;
  double beta0 = 1.0;
};

struct NormalGammaStats {
  long n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double y) { ++n, sum += y, sum_sq += y * y; }
  void remove(double y) { --n, sum -= y, sum_sq -= y * y; }
};

NormalGamma ng_posterior(const NormalGamma& prior, const NormalGammaStats& stats);
// Student-t predictive density of one observation under the (posterior) params.
double ng_log_predictive(const NormalGamma& params, double y);
// One (mean, variance) draw from the Normal-Gamma.
std::pair<double, double> ng_sample(const NormalGamma& params, RngStream& rng);

struct DpmConfig {
  std::optional<double> mu0;          // default: data median
  double k0 = 0.2;
  double alpha0 = 2.0;
  double beta0 = 1.0;
  double concentration_shape = 2.0;   // Gamma prior on the DP concentration
  double concentration_rate = 4.0;
  long iterations = 7000;
  long burn_in = 1000;
  long thinning = 1;
  long max_clusters = 0;              // 0 = unbounded; >0 caps occupied clusters

  void validate() const;
  long draw_count() const { return (iterations - burn_in) / thinning; }
};

struct DpmSweepStats {
  long sweep = 0;
  int occupied_clusters = 0;
  double alpha = 0.0;
};

struct DpmResult {
  DrawBundle bundle;
  std::vector<DpmSweepStats> diagnostics;  // one row per sweep
};

// Collapsed conjugate Gibbs sampler (marginalized cluster parameters for the
// assignment scan, per-cluster parameter refresh when a draw is recorded).
// Each recorded draw is the Gaussian mixture over occupied clusters with
// weights n_q/N; the concentration is refreshed every sweep with the
// auxiliary-variable update. Univariate data only.
DpmResult dpm_gibbs(const Dataset& data, const DpmConfig& config, RngStream& rng);

}  // namespace mixsum
