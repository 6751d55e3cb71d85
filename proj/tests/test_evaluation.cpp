#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mixsum/evaluation.hpp"
#include "mixsum/sim_data.hpp"
#include "support/test_support.hpp"

using namespace mixsum;

namespace {

MixtureDraw gaussian_mixture(std::vector<double> means, std::vector<double> vars,
                             std::vector<double> weights) {
  Vector w(static_cast<long>(weights.size()));
  std::vector<Kernel> kernels;
  for (std::size_t q = 0; q < means.size(); ++q) {
    w[static_cast<long>(q)] = weights[q];
    kernels.push_back(Kernel::gaussian(means[q], vars[q]));
  }
  return MixtureDraw(w, std::move(kernels), 0);
}

// Exhaustive pair-count ARI for small instances.
double brute_force_ari(const std::vector<int>& a, const std::vector<int>& b) {
  const long n = static_cast<long>(a.size());
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      const bool same_a = a[i] == a[j];
      const bool same_b = b[i] == b[j];
      if (same_a && same_b) ++n11;
      else if (!same_a && !same_b) ++n00;
      else if (same_a) ++n10;
      else ++n01;
    }
  const double total = n11 + n00 + n10 + n01;
  const double expected = (n11 + n10) * (n11 + n01) / total;
  const double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
  if (max_index == expected) return 1.0;
  return (n11 - expected) / (max_index - expected);
}

// Exhaustive permutation-minimized error for K <= 4.
double brute_force_err(const std::vector<int>& a, const std::vector<int>& b, int k) {
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i + 1;
  double best = 1.0;
  do {
    long mismatches = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != perm[b[i] - 1]) ++mismatches;
    best = std::min(best, static_cast<double>(mismatches) / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("hellinger of a density against itself is zero") {
  const MixtureDraw truth = gaussian_mixture({0.0, 3.0}, {1.0, 0.5}, {0.6, 0.4});
  RngStream rng(2, 2);
  const Dataset samples(truth.sample_n(rng, 3000));
  const EvalScore s = hellinger_mc(
      truth, [&](const Matrix& pts) { return truth.log_density(pts); }, samples);
  CHECK(s.metric == "hellinger");
  CHECK(s.value <= 3.0 * s.standard_error.value() + 1e-12);
  CHECK(s.excluded == 0);
}

TEST_CASE("hellinger recovers the gaussian closed form") {
  const MixtureDraw truth = gaussian_mixture({0.0}, {1.0}, {1.0});
  const MixtureDraw candidate = gaussian_mixture({1.0}, {1.0}, {1.0});
  RngStream rng(3, 3);
  const Dataset samples(truth.sample_n(rng, 20000));
  const EvalScore s = hellinger_mc(
      truth, [&](const Matrix& pts) { return candidate.log_density(pts); }, samples);
  const double closed = hellinger_gaussian(0.0, 1.0, 1.0, 1.0);
  CHECK(closed == doctest::Approx(std::sqrt(1.0 - std::exp(-0.125))).epsilon(1e-12));
  CHECK(std::abs(s.value - closed) <= 3.0 * s.standard_error.value());
}

TEST_CASE("hellinger grows with gaussian separation on a grid") {
  double previous = -1.0;
  for (double gap : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double h = hellinger_gaussian(0.0, 1.0, gap, 1.0);
    CHECK(h > previous);
    previous = h;
    // Monte-Carlo agrees with the closed form at each grid point.
    const MixtureDraw truth = gaussian_mixture({0.0}, {1.0}, {1.0});
    const MixtureDraw cand = gaussian_mixture({gap}, {1.0}, {1.0});
    RngStream rng(static_cast<std::uint64_t>(17 + gap * 8), 1);
    const Dataset samples(truth.sample_n(rng, 20000));
    const EvalScore s = hellinger_mc(
        truth, [&](const Matrix& pts) { return cand.log_density(pts); }, samples);
    CHECK(std::abs(s.value - h) <= 3.0 * std::max(s.standard_error.value(), 1e-4));
  }
}

TEST_CASE("hellinger excludes zero-truth-density points with a count") {
  const MixtureDraw truth_beta =
      MixtureDraw((Vector(1) << 1.0).finished(), {Kernel::beta(2.0, 2.0)}, 0);
  Matrix pts(4, 1);
  pts << 0.25, 0.5, 0.75, 1.5;  // last point falls outside the support
  const EvalScore s = hellinger_mc(
      truth_beta, [&](const Matrix& p) { return truth_beta.log_density(p); }, Dataset(pts));
  CHECK(s.excluded == 1);
  CHECK(s.value == doctest::Approx(0.0));
}

TEST_CASE("ari matches hand and brute-force values") {
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 1, 2, 2}).value == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {2, 2, 1, 1}).value == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}).value == doctest::Approx(-0.5));
  CHECK_THROWS_AS(adjusted_rand_index({1, 2}, {1, 2, 3}), ValidationError);

  RngStream rng(404, 4);
  for (int rep = 0; rep < 50; ++rep) {
    const long n = 4 + static_cast<long>(rng.uniform() * 9);  // up to 12
    std::vector<int> a(n), b(n);
    for (long i = 0; i < n; ++i) {
      a[i] = 1 + static_cast<int>(rng.uniform() * 4.0);
      b[i] = 1 + static_cast<int>(rng.uniform() * 4.0);
    }
    CHECK(adjusted_rand_index(a, b).value ==
          doctest::Approx(brute_force_ari(a, b)).epsilon(1e-12));
    CHECK(adjusted_rand_index(a, b).value ==
          doctest::Approx(adjusted_rand_index(b, a).value).epsilon(1e-12));
  }
}

TEST_CASE("ari is invariant to relabeling either partition") {
  const std::vector<int> a = {1, 1, 2, 3, 3, 3, 2, 1};
  const std::vector<int> b = {2, 2, 1, 1, 3, 3, 3, 2};
  std::vector<int> a_relabelled(a.size());
  const int bijection[4] = {0, 7, 5, 9};  // 1->7, 2->5, 3->9
  for (std::size_t i = 0; i < a.size(); ++i) a_relabelled[i] = bijection[a[i]];
  CHECK(adjusted_rand_index(a, b).value ==
        doctest::Approx(adjusted_rand_index(a_relabelled, b).value).epsilon(1e-14));
}

TEST_CASE("classification error uses the optimal label matching") {
  CHECK(classification_error({1, 2, 1, 2}, {1, 2, 1, 2}).value == doctest::Approx(0.0));
  // Perfectly swapped binary labels are a relabeling, not errors.
  CHECK(classification_error({1, 2, 1, 2}, {2, 1, 2, 1}).value == doctest::Approx(0.0));
  // Ten points, one genuine misassignment after optimal matching.
  const std::vector<int> truth = {1, 1, 1, 2, 2, 2, 3, 3, 3, 3};
  std::vector<int> pred = {2, 2, 2, 3, 3, 3, 1, 1, 1, 2};  // cyclic relabel + one flip
  CHECK(classification_error(truth, pred).value == doctest::Approx(0.1));
  CHECK_THROWS_AS(classification_error({1, 1, 2}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(classification_error({1, 2}, {1, 2, 2}), ValidationError);

  RngStream rng(505, 5);
  for (int rep = 0; rep < 50; ++rep) {
    const long n = 6 + static_cast<long>(rng.uniform() * 7);  // up to 12
    const int k = 2 + static_cast<int>(rng.uniform() * 3.0);  // up to 4
    std::vector<int> a(n), b(n);
    for (long i = 0; i < n; ++i) {
      a[i] = 1 + static_cast<int>(rng.uniform() * k);
      b[i] = 1 + static_cast<int>(rng.uniform() * k);
    }
    // Make sure both use the full alphabet so the sizes agree.
    for (int c = 1; c <= k; ++c) {
      a[(c - 1) % n] = c;
      b[n - c % n - 1] = c;
    }
    int ka = 0, kb = 0;
    {
      std::vector<int> ua = a, ub = b;
      std::sort(ua.begin(), ua.end());
      ua.erase(std::unique(ua.begin(), ua.end()), ua.end());
      std::sort(ub.begin(), ub.end());
      ub.erase(std::unique(ub.begin(), ub.end()), ub.end());
      ka = static_cast<int>(ua.size());
      kb = static_cast<int>(ub.size());
    }
    if (ka != kb) continue;
    CHECK(classification_error(a, b).value ==
          doctest::Approx(brute_force_err(a, b, ka)).epsilon(1e-12));
  }
}
