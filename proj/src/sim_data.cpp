#include "mixsum/sim_data.hpp"

#include <cmath>

namespace mixsum {

namespace {

Dataset sample_labeled(const MixtureDraw& truth, long n, RngStream& rng) {
  if (n < 1) throw ValidationError("generator: n must be >= 1");
  Matrix pts(n, truth.dim());
  std::vector<int> labels(n);
  std::span<const double> w(truth.weights.data(), static_cast<std::size_t>(truth.weights.size()));
  for (long i = 0; i < n; ++i) {
    const int q = rng.categorical(w);
    labels[i] = q + 1;
    pts.row(i) = truth.kernels[q].sample(rng).transpose();
  }
  return Dataset(std::move(pts), std::move(labels));
}

}  // namespace

MixtureDraw sim_univariate_truth() {
  // Published weights (.2,.2,.25,.2,.25) sum to 1.1; normalized here so the
  // mixture is proper. Proportions are unchanged.
  Vector w(5);
  w << 0.2, 0.2, 0.25, 0.2, 0.25;
  w /= w.sum();
  const double means[5] = {19.0, 19.0, 23.0, 20.0, 33.0};
  const double vars[5] = {5.0, 1.0, 1.0, 0.7, 2.0};
  std::vector<Kernel> kernels;
  for (int q = 0; q < 5; ++q) kernels.push_back(Kernel::gaussian(means[q], vars[q]));
  return MixtureDraw(w, std::move(kernels));
}

MixtureDraw sim_bivariate_truth() {
  Vector w(3);
  w << 0.45, 0.30, 0.25;
  Vector mu1(2), mu2(2), mu3(2);
  mu1 << 4.0, 4.0;
  mu2 << 7.0, 4.0;
  mu3 << 6.0, 2.0;
  Matrix s1 = Matrix::Identity(2, 2);
  const double rho = M_PI / 4.0;
  Matrix rot(2, 2);
  rot << std::cos(rho), -std::sin(rho), std::sin(rho), std::cos(rho);
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 2.5;
  diag(1, 1) = 0.2;
  Matrix s2 = rot * diag * rot.transpose();
  Matrix s3 = Matrix::Zero(2, 2);
  s3(0, 0) = 3.0;
  s3(1, 1) = 0.1;
  std::vector<Kernel> kernels;
  kernels.push_back(Kernel::gaussian(mu1, s1));
  kernels.push_back(Kernel::gaussian(mu2, s2));
  kernels.push_back(Kernel::gaussian(mu3, s3));
  return MixtureDraw(w, std::move(kernels));
}

Dataset generate_sim_univariate(long n, RngStream& rng) {
  return sample_labeled(sim_univariate_truth(), n, rng);
}

Dataset generate_sim_bivariate(long n, RngStream& rng) {
  return sample_labeled(sim_bivariate_truth(), n, rng);
}

}  // namespace mixsum
