#include <doctest.h>

#include <cmath>

#include "mixsum/discrepancy.hpp"
#include "mixsum/dpm.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/sim_data.hpp"
#include "support/test_support.hpp"

using namespace mixsum;

namespace {

DrawBundle single_gaussian_bundle(double mean, double var) {
  Vector w(1);
  w << 1.0;
  std::vector<MixtureDraw> draws;
  draws.emplace_back(w, std::vector<Kernel>{Kernel::gaussian(mean, var)}, 0);
  return DrawBundle({"test", 1, 1, 0}, std::move(draws));
}

GmmSummary single_gaussian_summary(double mean, double var) {
  GmmSummary s;
  s.k = 1;
  s.weights = Vector::Ones(1);
  Vector m(1);
  m[0] = mean;
  Matrix c(1, 1);
  c(0, 0) = var;
  s.means = {m};
  s.covariances = {c};
  s.loglik = 0.0;
  return s;
}

double gaussian_kl(double mean_f, double var_f, double mean_g, double var_g) {
  return 0.5 * (var_f / var_g + (mean_g - mean_f) * (mean_g - mean_f) / var_g - 1.0 +
                std::log(var_g / var_f));
}

}  // namespace

TEST_CASE("posterior predictive density trivial cases") {
  const DrawBundle one = single_gaussian_bundle(0.0, 1.0);
  Matrix pts(3, 1);
  pts << -1.0, 0.0, 2.5;
  const Vector single = posterior_predictive_logdensity(one, pts);
  const Vector direct = one.draws[0].log_density(pts);
  for (long i = 0; i < 3; ++i) CHECK(single[i] == direct[i]);

  // Two identical draws give the single-draw value.
  std::vector<MixtureDraw> dup = {one.draws[0], one.draws[0]};
  dup[1].draw_index = 1;
  const DrawBundle two({"test", 1, 2, 0}, std::move(dup));
  const Vector doubled = posterior_predictive_logdensity(two, pts);
  for (long i = 0; i < 3; ++i) CHECK(std::abs(doubled[i] - direct[i]) < 1e-12);
}

TEST_CASE("two-draw bundle at the origin matches the two-term oracle") {
  Vector w(1);
  w << 1.0;
  std::vector<MixtureDraw> draws;
  draws.emplace_back(w, std::vector<Kernel>{Kernel::gaussian(0.0, 1.0)}, 0);
  draws.emplace_back(w, std::vector<Kernel>{Kernel::gaussian(10.0, 1.0)}, 1);
  const DrawBundle bundle({"test", 1, 2, 0}, std::move(draws));
  Matrix origin(1, 1);
  origin(0, 0) = 0.0;
  const double got = posterior_predictive_logdensity(bundle, origin)[0];
  // Direct two-term evaluation, independent of the streaming path.
  const double phi0 = std::exp(-0.5 * 0.0) / std::sqrt(2.0 * M_PI);
  const double phi10 = std::exp(-0.5 * 100.0) / std::sqrt(2.0 * M_PI);
  const double expected = std::log(0.5 * phi0 + 0.5 * phi10);
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(-1.6120857).epsilon(1e-6));
}

TEST_CASE("empty bundle and dimension mismatches are rejected") {
  const DrawBundle bundle = single_gaussian_bundle(0.0, 1.0);
  Matrix wrong(2, 2);
  wrong.setZero();
  CHECK_THROWS_AS(posterior_predictive_logdensity(bundle, wrong), ValidationError);
  CHECK_THROWS_AS(
      discrepancy_samples(bundle, {}, Dataset(Matrix::Zero(3, 1))), ValidationError);
}

TEST_CASE("summary equal to the bundle density gives exactly zero discrepancy") {
  Vector w(2);
  w << 0.3, 0.7;
  std::vector<MixtureDraw> draws;
  draws.emplace_back(w, std::vector<Kernel>{Kernel::gaussian(-1.0, 0.8),
                                            Kernel::gaussian(2.0, 1.5)}, 0);
  const DrawBundle bundle({"test", 1, 1, 0}, std::move(draws));
  GmmSummary s;
  s.k = 2;
  s.weights = w;
  Vector m1(1), m2(1);
  m1 << -1.0;
  m2 << 2.0;
  Matrix c1(1, 1), c2(1, 1);
  c1 << 0.8;
  c2 << 1.5;
  s.means = {m1, m2};
  s.covariances = {c1, c2};
  s.loglik = 0.0;

  RngStream rng(2024, 9);
  const Dataset predictive = predictive_sample(bundle, 500, rng);
  const DiscrepancyTable table = discrepancy_samples(bundle, {s}, predictive);
  for (long i = 0; i < table.n(); ++i) CHECK(table.samples(i, 0) == 0.0);
  CHECK(table.mean_d[0] == 0.0);
  CHECK(table.sd_d[0] == 0.0);
}

TEST_CASE("negative mean discrepancy matches the closed-form gaussian KL") {
  const DrawBundle bundle = single_gaussian_bundle(0.0, 1.0);
  RngStream rng(607, 3);
  const Dataset predictive = predictive_sample(bundle, 4000, rng);
  const double settings[3][2] = {{0.0, 1.0}, {1.0, 1.0}, {0.0, 4.0}};
  for (const auto& setting : settings) {
    const GmmSummary g = single_gaussian_summary(setting[0], setting[1]);
    const DiscrepancyTable table = discrepancy_samples(bundle, {g}, predictive);
    const double kl = gaussian_kl(0.0, 1.0, setting[0], setting[1]);
    const double se = table.sd_d[0] / std::sqrt(static_cast<double>(table.n()));
    CHECK(std::abs(-table.mean_d[0] - kl) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("selection rule picks the smallest qualifying k") {
  DiscrepancyTable table;
  table.k_values = {1, 2, 3, 4};
  table.samples = Matrix::Zero(10, 4);
  table.mean_d.resize(4);
  table.sd_d.resize(4);
  table.mean_d << -0.9, -0.4, -0.05, -0.01;
  table.sd_d << 0.9, 0.5, 0.2, 0.19;

  SUBCASE("default cap accepts the first near-zero narrow column") {
    const int k = select_k_star(table, 0.1);
    CHECK(k == 3);
    CHECK(table.selected_by_rule);
    CHECK(table.sd_cap == doctest::Approx(3.0 * 0.19));
  }
  SUBCASE("k = 1 wins when already qualifying") {
    table.mean_d << 0.0, 0.0, 0.0, 0.0;
    table.sd_d << 0.1, 0.1, 0.1, 0.1;
    CHECK(select_k_star(table, 0.1) == 1);
    CHECK(table.selected_by_rule);
  }
  SUBCASE("no qualifying k returns the best mean, flagged") {
    const int k = select_k_star(table, 0.001, 0.001);
    CHECK(k == 4);  // argmax of mean_d
    CHECK_FALSE(table.selected_by_rule);
  }
  SUBCASE("delta must be positive") {
    CHECK_THROWS_AS(select_k_star(table, 0.0), ValidationError);
  }
}

TEST_CASE("univariate design: k=5 sits near zero, k=1 is worse and wider") {
  RngStream data_rng(1212, 0);
  const Dataset data = generate_sim_univariate(600, data_rng);
  DpmConfig cfg;
  cfg.iterations = 2000;
  cfg.burn_in = 500;
  cfg.thinning = 5;
  RngStream gibbs(1212, 1);
  const DpmResult res = dpm_gibbs(data, cfg, gibbs);
  RngStream pred_rng(1212, 2);
  const Dataset pred = predictive_sample(res.bundle, 2000, pred_rng);
  EmConfig em;
  const GmmSummary g1 = fit_gmm(pred, 1, em, RngStream(1212, 3));
  const GmmSummary g5 = fit_gmm(pred, 5, em, RngStream(1212, 3));
  const DiscrepancyTable table = discrepancy_samples(res.bundle, {g1, g5}, pred);
  CHECK(std::abs(table.mean_for(5)) <= 0.1);
  CHECK(table.mean_for(1) < table.mean_for(5));
  CHECK(table.sd_for(1) > table.sd_for(5));
}

TEST_CASE("in-sample moment fit keeps the mean discrepancy tiny") {
  const DrawBundle bundle = single_gaussian_bundle(0.0, 1.0);
  RngStream rng(11, 4);
  const Dataset predictive = predictive_sample(bundle, 200, rng);
  const double mean = predictive.points.col(0).mean();
  const double var =
      (predictive.points.col(0).array() - mean).square().sum() / predictive.size();
  const GmmSummary g = single_gaussian_summary(mean, var);
  const DiscrepancyTable table = discrepancy_samples(bundle, {g}, predictive);
  CHECK(std::abs(table.mean_d[0]) < 0.05);
}
