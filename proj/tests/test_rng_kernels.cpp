#include <doctest.h>

#include <cmath>

#include "mixsum/kernels.hpp"
#include "mixsum/rng.hpp"

using namespace mixsum;

namespace {
Vector v1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}
}  // namespace

TEST_CASE("rng streams are deterministic and schedule independent") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 8);
  CHECK(RngStream(42, 7).next_u64() != c.next_u64());
  // Child derivation commutes with construction order.
  RngStream base(9, 1);
  CHECK(base.child(3, 4).next_u64() == RngStream(9, 1).child(3, 4).next_u64());
  CHECK(base.child(3, 4).stream_id() != base.child(4, 3).stream_id());
}

TEST_CASE("sampling determinism is bitwise") {
  const Kernel k = Kernel::gaussian(1.5, 2.0);
  RngStream a(1234, 5), b(1234, 5);
  const Matrix xa = sample(k, a, 128);
  const Matrix xb = sample(k, b, 128);
  REQUIRE(xa.rows() == 128);
  for (long i = 0; i < xa.rows(); ++i) CHECK(xa(i, 0) == xb(i, 0));
}

TEST_CASE("gaussian log densities match the closed forms") {
  const Kernel uni = Kernel::gaussian(0.0, 1.0);
  CHECK(uni.log_density(v1(0.0)) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  Vector mean = Vector::Zero(2);
  const Kernel multi = Kernel::gaussian(mean, Matrix::Identity(2, 2));
  Vector origin = Vector::Zero(2);
  CHECK(multi.log_density(origin) == doctest::Approx(-1.8378770664093453).epsilon(1e-12));
}

TEST_CASE("multivariate gaussian with d=1 matches the univariate formula") {
  const Kernel uni = Kernel::gaussian(0.7, 2.3);
  Vector mean(1);
  mean[0] = 0.7;
  Matrix cov(1, 1);
  cov(0, 0) = 2.3;
  const Kernel multi = Kernel::gaussian(mean, cov);
  for (double x : {-3.0, -0.5, 0.7, 1.9, 8.0}) {
    CHECK(std::abs(uni.log_density(v1(x)) - multi.log_density(v1(x))) < 1e-12);
  }
}

TEST_CASE("beta kernel density and support") {
  const Kernel b = Kernel::beta(2.0, 2.0);
  CHECK(b.log_density(v1(0.5)) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
  CHECK(b.log_density(v1(-0.1)) == -std::numeric_limits<double>::infinity());
  CHECK(b.log_density(v1(1.1)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("kernel construction rejects invalid parameters") {
  CHECK_THROWS_AS(Kernel::gaussian(5.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Kernel::gaussian(5.0, -1.0), ValidationError);
  CHECK_THROWS_AS(Kernel::beta(0.0, 1.0), ValidationError);
  Matrix bad(2, 2);
  bad << 1.0, 0.9, 0.2, 1.0;  // asymmetric
  Vector mean = Vector::Zero(2);
  CHECK_THROWS_AS(Kernel::gaussian(mean, bad), ValidationError);
  Matrix negdef(2, 2);
  negdef << -1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(Kernel::gaussian(mean, negdef), ValidationError);
}

TEST_CASE("dimension mismatch is a structured error") {
  const Kernel uni = Kernel::gaussian(0.0, 1.0);
  Vector two = Vector::Zero(2);
  CHECK_THROWS_AS(uni.log_density(two), ValidationError);
}

TEST_CASE("sample moments agree with the law of large numbers") {
  const Kernel k = Kernel::gaussian(0.0, 1.0);
  RngStream rng(20240601, 1);
  const Matrix x = sample(k, rng, 100000);
  const double mean = x.col(0).mean();
  const double var = (x.col(0).array() - mean).square().sum() / (x.rows() - 1.0);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("n = 0 sampling yields an empty matrix") {
  const Kernel k = Kernel::gaussian(0.0, 1.0);
  RngStream rng(1, 1);
  CHECK(sample(k, rng, 0).rows() == 0);
}

TEST_CASE("exp(log_density) integrates to one on a quadrature grid") {
  auto trapezoid = [](const Kernel& k, double lo, double hi, long pts) {
    const double step = (hi - lo) / static_cast<double>(pts - 1);
    double total = 0.0;
    for (long i = 0; i < pts; ++i) {
      const double x = lo + step * static_cast<double>(i);
      const double f = std::exp(k.log_density(v1(x)));
      total += (i == 0 || i + 1 == pts) ? 0.5 * f : f;
    }
    return total * step;
  };
  CHECK(trapezoid(Kernel::gaussian(1.0, 4.0), 1.0 - 16.0, 1.0 + 16.0, 10000) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK(trapezoid(Kernel::beta(2.5, 1.5), 0.0, 1.0, 10000) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK(trapezoid(Kernel::beta(1.0, 1.0), 0.0, 1.0, 10000) ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("gamma and beta samplers hit their moments") {
  RngStream rng(77, 3);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) sum += rng.gamma(3.0, 2.0);
  CHECK(sum / n == doctest::Approx(1.5).epsilon(0.02));
  double bsum = 0.0;
  for (int i = 0; i < n; ++i) bsum += rng.beta(2.0, 6.0);
  CHECK(bsum / n == doctest::Approx(0.25).epsilon(0.02));
}
