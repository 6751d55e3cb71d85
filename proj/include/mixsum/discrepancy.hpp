#pragma once

#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/mixture.hpp"

namespace mixsum {

// Per-k log-density-ratio samples d_n^k = log g_k(y_n) - log f_hat(y_n) with
// their means and standard deviations; drives the choice of K*.
struct DiscrepancyTable {
  std::vector<int> k_values;
  Matrix samples;        // N x |k_values|
  Vector mean_d;
  Vector sd_d;
  int k_star = 0;
  bool selected_by_rule = false;
  double delta = 0.1;
  double sd_cap = std::numeric_limits<double>::quiet_NaN();
  // Set when some mean exceeds its Monte-Carlo 3-sigma band above zero
  // (E d = -KL <= 0, but in-sample fitting can push the estimate slightly
  // positive); reported instead of thrown so pipelines keep running.
  bool mean_positive_warning = false;

  long n() const { return samples.rows(); }
  long column_of(int k) const;
  double mean_for(int k) const { return mean_d[column_of(k)]; }
  double sd_for(int k) const { return sd_d[column_of(k)]; }
};

// log f_hat(y) per point: log-mean-exp over the per-draw mixture
// log-densities, numerically stabilized.
Vector posterior_predictive_logdensity(const DrawBundle& bundle, const Matrix& points);

// Discrepancy columns for every summary against the bundle's posterior
// predictive density, computed on the same predictive sample that was used
// to fit the summaries.
DiscrepancyTable discrepancy_samples(const DrawBundle& bundle,
                                     const std::vector<GmmSummary>& summaries,
                                     const Dataset& predictive);

// Smallest k with mean >= -delta and sd <= sd_cap. When no k qualifies the
// best mean wins and the table is flagged unselected-by-rule. Passing NaN for
// sd_cap applies the default cap of 3x the smallest sd over k. Updates the
// table in place and returns K*.
int select_k_star(DiscrepancyTable& table, double delta = 0.1,
                  double sd_cap = std::numeric_limits<double>::quiet_NaN());

}  // namespace mixsum
