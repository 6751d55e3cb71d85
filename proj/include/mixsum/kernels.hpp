#pragma once

#include <memory>
#include <string>
#include <variant>

#include "mixsum/dataset.hpp"
#include "mixsum/errors.hpp"
#include "mixsum/linalg.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

enum class KernelFamily { GaussianUni, GaussianMulti, Beta };

std::string family_name(KernelFamily f);
KernelFamily family_from_name(const std::string& name);

// Probability kernel: univariate Gaussian, multivariate Gaussian (full
// covariance), or Beta on [0,1]. Immutable after construction; the
// multivariate variant caches its Cholesky factor, so values are cheap to
// share across threads.
class Kernel {
 public:
  static Kernel gaussian(double mean, double variance);
  static Kernel gaussian(Vector mean, Matrix covariance, double ridge_eps = 1e-6);
  static Kernel beta(double alpha, double beta);

  KernelFamily family() const;
  int dim() const;

  double log_density(const Vector& point) const;
  // One value per row of points; dimension checked once.
  Vector log_density(const Matrix& points) const;

  Vector sample(RngStream& rng) const;
  // Parameter access (throws if the variant does not match).
  double mean1() const;
  double var1() const;
  const Vector& mean() const;
  const Matrix& cov() const;
  double alpha() const;
  double beta_param() const;

 private:
  struct GaussUni {
    double mean, var;
  };
  struct GaussMulti {
    Vector mean;
    Matrix cov;
    std::shared_ptr<const CholeskyFactor> chol;
  };
  struct BetaK {
    double a, b, log_norm;  // log_norm = -log B(a,b)
  };
  using Rep = std::variant<GaussUni, GaussMulti, BetaK>;
  explicit Kernel(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

// n i.i.d. draws, one per row.
Matrix sample(const Kernel& kernel, RngStream& rng, long n);

}  // namespace mixsum
