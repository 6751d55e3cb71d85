#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixsum/dpm.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/sim_data.hpp"
#include "support/test_support.hpp"

using namespace mixsum;

namespace {

Dataset two_blobs(long n_per, double gap, RngStream& rng) {
  Matrix pts(2 * n_per, 2);
  std::vector<int> labels(2 * n_per);
  for (long i = 0; i < n_per; ++i) {
    pts(i, 0) = rng.normal();
    pts(i, 1) = rng.normal();
    labels[i] = 1;
    pts(n_per + i, 0) = gap + rng.normal();
    pts(n_per + i, 1) = rng.normal();
    labels[n_per + i] = 2;
  }
  return Dataset(std::move(pts), std::move(labels));
}

}  // namespace

TEST_CASE("k = 1 fit equals the sample moments") {
  RngStream rng(101, 0);
  Matrix pts(400, 2);
  for (long i = 0; i < 400; ++i) {
    pts(i, 0) = 2.0 + 0.7 * rng.normal();
    pts(i, 1) = -1.0 + 1.3 * rng.normal();
  }
  const Dataset data{Matrix(pts), {}};
  const GmmSummary fit = fit_gmm(data, 1, EmConfig{}, RngStream(101, 1));
  REQUIRE(fit.k == 1);
  CHECK(fit.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  const Vector mean = pts.colwise().mean();
  Matrix centered = pts.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / 400.0;  // biased MLE
  for (int j = 0; j < 2; ++j) CHECK(std::abs(fit.means[0][j] - mean[j]) < 1e-8);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(std::abs(fit.covariances[0](r, c) - cov(r, c)) < 1e-8);
}

TEST_CASE("EM log-likelihood is monotone within a run") {
  RngStream rng(202, 0);
  const Dataset data = two_blobs(300, 6.0, rng);
  const GmmSummary fit = fit_gmm(data, 3, EmConfig{}, RngStream(202, 1));
  REQUIRE(fit.loglik_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
    CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-9);
  CHECK(fit.loglik == doctest::Approx(fit.loglik_trace.back()));
}

TEST_CASE("responsibilities rows sum to one") {
  RngStream rng(303, 0);
  const Dataset data = two_blobs(150, 4.0, rng);
  const GmmSummary fit = fit_gmm(data, 2, EmConfig{}, RngStream(303, 1));
  const Matrix resp = fit.responsibilities(data.points);
  for (long i = 0; i < resp.rows(); ++i)
    CHECK(std::abs(resp.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("well-separated blobs recover the labeled centroids") {
  RngStream rng(404, 0);
  const Dataset data = two_blobs(500, 8.0, rng);
  const GmmSummary fit = fit_gmm(data, 2, EmConfig{}, RngStream(404, 1));
  Vector mean1 = Vector::Zero(2), mean2 = Vector::Zero(2);
  long n1 = 0, n2 = 0;
  for (long i = 0; i < data.size(); ++i) {
    if (data.labels[i] == 1) {
      mean1 += data.row(i);
      ++n1;
    } else {
      mean2 += data.row(i);
      ++n2;
    }
  }
  mean1 /= static_cast<double>(n1);
  mean2 /= static_cast<double>(n2);
  // Canonical order sorts by first coordinate, so component 0 is the left blob.
  CHECK((fit.means[0] - mean1).norm() < 0.05);
  CHECK((fit.means[1] - mean2).norm() < 0.05);
}

TEST_CASE("canonical order is deterministic and density preserving") {
  RngStream rng(505, 0);
  const Dataset data = two_blobs(200, 5.0, rng);
  GmmSummary fit = fit_gmm(data, 3, EmConfig{}, RngStream(505, 1));
  CHECK(fit.is_canonical());

  GmmSummary shuffled = fit;
  std::swap(shuffled.means[0], shuffled.means[2]);
  std::swap(shuffled.covariances[0], shuffled.covariances[2]);
  std::swap(shuffled.weights[0], shuffled.weights[2]);
  const double permuted_loglik = shuffled.loglik;
  CHECK(permuted_loglik == fit.loglik);  // order-only transform

  Matrix grid(64, 2);
  RngStream grid_rng(505, 2);
  for (long i = 0; i < grid.rows(); ++i) {
    grid(i, 0) = 5.0 * grid_rng.normal();
    grid(i, 1) = 5.0 * grid_rng.normal();
  }
  const Vector before = shuffled.log_density(grid);
  shuffled.canonicalize();
  const Vector after = shuffled.log_density(grid);
  for (long i = 0; i < grid.rows(); ++i) CHECK(std::abs(before[i] - after[i]) < 1e-12);
  CHECK(shuffled.is_canonical());
}

TEST_CASE("scaling all component densities leaves responsibilities unchanged") {
  RngStream rng(606, 0);
  const Dataset data = two_blobs(100, 3.0, rng);
  const GmmSummary fit = fit_gmm(data, 2, EmConfig{}, RngStream(606, 1));
  Matrix logs(data.size(), 2);
  const MixtureDraw mix = fit.to_mixture();
  for (int q = 0; q < 2; ++q) logs.col(q) = mix.kernels[q].log_density(data.points);
  const Matrix base = responsibilities_from_log_densities(logs, fit.weights);
  const Matrix scaled =
      responsibilities_from_log_densities(Matrix(logs.array() + 37.5), fit.weights);
  for (long i = 0; i < base.rows(); ++i)
    for (int q = 0; q < 2; ++q) CHECK(std::abs(base(i, q) - scaled(i, q)) < 1e-12);
}

TEST_CASE("fit errors: k too large, degenerate data, unknown family") {
  Matrix pts(5, 1);
  pts << 1.0, 2.0, 3.0, 4.0, 5.0;
  const Dataset small{Matrix(pts), {}};
  CHECK_THROWS_AS(fit_gmm(small, 5, EmConfig{}, RngStream(1, 1)), ValidationError);
  CHECK_THROWS_AS(fit_gmm(small, 9, EmConfig{}, RngStream(1, 1)), ValidationError);

  Matrix same = Matrix::Constant(50, 1, 3.25);
  const Dataset identical{Matrix(same), {}};
  CHECK_THROWS_AS(fit_gmm(identical, 2, EmConfig{}, RngStream(1, 2)), NumericalError);

  EmConfig beta_cfg;
  beta_cfg.family = "beta";
  RngStream rng(7, 0);
  const Dataset blobs = two_blobs(50, 4.0, rng);
  CHECK_THROWS_AS(fit_gmm(blobs, 2, beta_cfg, RngStream(1, 3)), ValidationError);
}

TEST_CASE("sequence fits are deterministic and schedule independent") {
  RngStream rng(707, 0);
  const Dataset data = two_blobs(250, 5.0, rng);
  const std::vector<GmmSummary> seq1 =
      fit_summary_sequence(data, 4, EmConfig{}, RngStream(707, 1), 1);
  const std::vector<GmmSummary> seq2 =
      fit_summary_sequence(data, 4, EmConfig{}, RngStream(707, 1), 2);
  REQUIRE(seq1.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(seq1[i].k == i + 1);
    CHECK(seq1[i].loglik == seq2[i].loglik);
    for (int q = 0; q < seq1[i].k; ++q)
      CHECK((seq1[i].means[q] - seq2[i].means[q]).norm() == 0.0);
  }
  SUBCASE("k_max = 1 degenerates to a single fit") {
    const std::vector<GmmSummary> one =
        fit_summary_sequence(data, 1, EmConfig{}, RngStream(707, 1), 1);
    const GmmSummary direct = fit_gmm(data, 1, EmConfig{}, RngStream(707, 1));
    REQUIRE(one.size() == 1);
    CHECK(one[0].loglik == direct.loglik);
  }
}

TEST_CASE("achieved log-likelihoods are nondecreasing in k up to one nat") {
  RngStream rng(808, 0);
  const Dataset data = generate_sim_univariate(800, rng);
  const std::vector<GmmSummary> seq =
      fit_summary_sequence(data, 7, EmConfig{}, RngStream(808, 1), 0);
  for (std::size_t i = 1; i < seq.size(); ++i)
    CHECK(seq[i].loglik >= seq[i - 1].loglik - 1.0);
}

TEST_CASE("warm start never loses to its own initializer") {
  RngStream rng(909, 0);
  const Dataset data = two_blobs(200, 4.0, rng);
  const GmmSummary base = fit_gmm(data, 2, EmConfig{}, RngStream(909, 1));
  EmConfig no_restarts;
  no_restarts.restarts = 0;
  const GmmSummary warmed = fit_gmm_warm(data, base, no_restarts, RngStream(909, 2));
  CHECK(warmed.loglik >= base.loglik - 1e-9);
}

TEST_CASE("default restarts land within two nats of a 50-restart reference") {
  // Predictive sample from a quick DPM posterior on the univariate design.
  RngStream data_rng(1010, 0);
  const Dataset data = generate_sim_univariate(600, data_rng);
  DpmConfig dpm;
  dpm.iterations = 1200;
  dpm.burn_in = 200;
  dpm.thinning = 5;
  RngStream gibbs_rng(1010, 1);
  const DpmResult posterior = dpm_gibbs(data, dpm, gibbs_rng);
  RngStream pred_rng(1010, 2);
  const Dataset predictive = predictive_sample(posterior.bundle, 2000, pred_rng);

  const GmmSummary fit5 = fit_gmm(predictive, 5, EmConfig{}, RngStream(1010, 3));
  EmConfig heavy;
  heavy.restarts = 50;
  const GmmSummary reference = fit_gmm(predictive, 5, heavy, RngStream(1010, 4));
  CHECK(fit5.loglik >= reference.loglik - 2.0);
}
