#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/mixture.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

struct EmConfig {
  int max_iters = 500;
  double rel_tol = 1e-6;
  int restarts = 5;
  double ridge = 1e-6;
  // Summary kernel family; only "gaussian" is implemented, the tag exists so
  // other kernels can be slotted in without changing call sites.
  std::string family = "gaussian";

  void validate() const;
};

// k-component Gaussian mixture summary (the action gamma^k). Components are
// kept in canonical order: ascending first mean coordinate, ties broken by
// the second coordinate, then by weight descending.
struct GmmSummary {
  int k = 0;
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  double loglik = std::numeric_limits<double>::quiet_NaN();  // sum_n log g(y_n)
  std::vector<double> loglik_trace;  // per-iteration values of the winning run

  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

  double log_density(const Vector& point) const;
  Vector log_density(const Matrix& points) const;
  // N x k responsibilities; rows sum to 1.
  Matrix responsibilities(const Matrix& points) const;

  void canonicalize();
  bool is_canonical() const;
  void validate() const;
  MixtureDraw to_mixture(int draw_index = 0) const;
};

// Responsibilities from a precomputed N x k matrix of component log-densities
// (stabilized; invariant to adding a common constant to every entry of a row).
Matrix responsibilities_from_log_densities(const Matrix& log_densities, const Vector& weights);

// Best-of-restarts EM fit of a k-component full-covariance Gaussian mixture.
// Restart r runs on stream child(k, r) of `rng`, so the outcome does not
// depend on evaluation order.
GmmSummary fit_gmm(const Dataset& samples, int k, const EmConfig& config, const RngStream& rng);

// As fit_gmm, with one extra run initialized from `warm` (used when
// projecting posterior draws); the best log-likelihood wins.
GmmSummary fit_gmm_warm(const Dataset& samples, const GmmSummary& warm, const EmConfig& config,
                        const RngStream& rng);

// One summary per k = 1..k_max, independently fit. Errors are rethrown with
// the failing k named. threads = 0 picks hardware concurrency.
std::vector<GmmSummary> fit_summary_sequence(const Dataset& samples, int k_max,
                                             const EmConfig& config, const RngStream& rng,
                                             int threads = 0);

}  // namespace mixsum
