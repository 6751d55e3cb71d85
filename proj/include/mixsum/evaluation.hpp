#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/mixture.hpp"

namespace mixsum {

struct EvalScore {
  std::string metric;  // "hellinger" | "ari" | "err"
  double value = 0.0;
  std::optional<double> standard_error;
  long excluded = 0;   // points dropped (zero truth density in the MC integral)
};

// Batch log-density of a candidate model at given points.
using LogDensityFn = std::function<Vector(const Matrix&)>;

// Monte-Carlo Hellinger distance between a known truth mixture and a
// candidate density, using samples drawn from the truth:
//   H = sqrt(max(0, 1 - mean_s sqrt(g(y_s)/f(y_s)))),  y_s ~ f.
// The standard error comes from the delta method on the inner mean.
EvalScore hellinger_mc(const MixtureDraw& truth, const LogDensityFn& candidate_logdensity,
                       const Dataset& samples_from_truth);

// Closed-form Hellinger distance between two univariate Gaussians (test oracle
// and sanity grid).
double hellinger_gaussian(double mean1, double var1, double mean2, double var2);

// Pair-counting adjusted Rand index.
EvalScore adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Misclassification rate minimized over label permutations (Hungarian
// assignment on the confusion matrix). Requires equally sized label alphabets.
EvalScore classification_error(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace mixsum
