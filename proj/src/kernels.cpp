#include "mixsum/kernels.hpp"

#include <cmath>
#include <limits>

namespace mixsum {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

CholeskyFactor chol_psd(const Matrix& sym, double eps) {
  const long d = sym.rows();
  if (sym.cols() != d) throw ValidationError("chol_psd: matrix is not square");
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    Matrix lower = llt.matrixL();
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    if (std::isfinite(log_det)) return {std::move(lower), log_det, 0.0};
  }
  const double ridge = eps * sym.trace() / static_cast<double>(d);
  if (ridge > 0.0) {
    Matrix bumped = sym;
    bumped.diagonal().array() += ridge;
    Eigen::LLT<Matrix> retry(bumped);
    if (retry.info() == Eigen::Success) {
      Matrix lower = retry.matrixL();
      const double log_det = 2.0 * lower.diagonal().array().log().sum();
      if (std::isfinite(log_det)) return {std::move(lower), log_det, ridge};
    }
  }
  throw NumericalError("covariance not positive definite after regularization");
}

Vector log_sum_exp_rows(const Matrix& logs) {
  const long n = logs.rows();
  Vector out(n);
  for (long i = 0; i < n; ++i) {
    const double m = logs.row(i).maxCoeff();
    if (!std::isfinite(m)) {
      out[i] = m;  // all -inf (or a NaN/inf row propagates)
      continue;
    }
    out[i] = m + std::log((logs.row(i).array() - m).exp().sum());
  }
  return out;
}

std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::GaussianUni: return "gaussian_uni";
    case KernelFamily::GaussianMulti: return "gaussian_multi";
    case KernelFamily::Beta: return "beta";
  }
  throw ValidationError("unknown kernel family");
}

KernelFamily family_from_name(const std::string& name) {
  if (name == "gaussian_uni") return KernelFamily::GaussianUni;
  if (name == "gaussian_multi") return KernelFamily::GaussianMulti;
  if (name == "beta") return KernelFamily::Beta;
  throw ValidationError("unknown kernel family '" + name + "'");
}

Kernel Kernel::gaussian(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
    throw ValidationError("gaussian kernel: variance must be positive and finite");
  return Kernel(GaussUni{mean, variance});
}

Kernel Kernel::gaussian(Vector mean, Matrix covariance, double ridge_eps) {
  const long d = mean.size();
  if (d < 1) throw ValidationError("gaussian kernel: empty mean");
  if (covariance.rows() != d || covariance.cols() != d)
    throw ValidationError("gaussian kernel: covariance shape does not match mean dimension");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw ValidationError("gaussian kernel: covariance is not symmetric");
  Matrix sym = 0.5 * (covariance + covariance.transpose());
  CholeskyFactor chol;
  try {
    chol = chol_psd(sym, ridge_eps);
  } catch (const NumericalError& e) {
    throw ValidationError(std::string("gaussian kernel: ") + e.what());
  }
  return Kernel(GaussMulti{std::move(mean), std::move(sym),
                           std::make_shared<const CholeskyFactor>(std::move(chol))});
}

Kernel Kernel::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ValidationError("beta kernel: alpha and beta must be positive and finite");
  const double log_norm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
  return Kernel(BetaK{alpha, beta, log_norm});
}

KernelFamily Kernel::family() const {
  if (std::holds_alternative<GaussUni>(rep_)) return KernelFamily::GaussianUni;
  if (std::holds_alternative<GaussMulti>(rep_)) return KernelFamily::GaussianMulti;
  return KernelFamily::Beta;
}

int Kernel::dim() const {
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) return static_cast<int>(g->mean.size());
  return 1;
}

namespace {

double beta_log_density(double x, double a, double b, double log_norm) {
  if (x < 0.0 || x > 1.0) return kNegInf;
  double v = log_norm;
  if (a != 1.0) v += (a - 1.0) * std::log(x);
  if (b != 1.0) v += (b - 1.0) * std::log1p(-x);
  return v;
}

}  // namespace

double Kernel::log_density(const Vector& point) const {
  if (point.size() != dim())
    throw ValidationError("log_density: point dimension does not match kernel dimension");
  if (const auto* g = std::get_if<GaussUni>(&rep_)) {
    const double z = point[0] - g->mean;
    return -0.5 * (kLog2Pi + std::log(g->var) + z * z / g->var);
  }
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) {
    const Vector c = point - g->mean;
    const Vector z = g->chol->lower.triangularView<Eigen::Lower>().solve(c);
    return -0.5 * (dim() * kLog2Pi + g->chol->log_det + z.squaredNorm());
  }
  const auto& bk = std::get<BetaK>(rep_);
  return beta_log_density(point[0], bk.a, bk.b, bk.log_norm);
}

Vector Kernel::log_density(const Matrix& points) const {
  if (points.cols() != dim())
    throw ValidationError("log_density: point dimension does not match kernel dimension");
  const long n = points.rows();
  if (const auto* g = std::get_if<GaussUni>(&rep_)) {
    const double c = -0.5 * (kLog2Pi + std::log(g->var));
    return (c - 0.5 / g->var * (points.col(0).array() - g->mean).square()).matrix();
  }
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) {
    Matrix centered = points.rowwise() - g->mean.transpose();
    Matrix z = g->chol->lower.triangularView<Eigen::Lower>().solve(centered.transpose());
    const double c = -0.5 * (dim() * kLog2Pi + g->chol->log_det);
    return (c - 0.5 * z.colwise().squaredNorm().array()).matrix();
  }
  const auto& bk = std::get<BetaK>(rep_);
  Vector out(n);
  for (long i = 0; i < n; ++i) out[i] = beta_log_density(points(i, 0), bk.a, bk.b, bk.log_norm);
  return out;
}

Vector Kernel::sample(RngStream& rng) const {
  if (const auto* g = std::get_if<GaussUni>(&rep_)) {
    Vector v(1);
    v[0] = g->mean + std::sqrt(g->var) * rng.normal();
    return v;
  }
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) {
    Vector z(dim());
    for (long j = 0; j < z.size(); ++j) z[j] = rng.normal();
    return g->mean + g->chol->lower.triangularView<Eigen::Lower>() * z;
  }
  const auto& bk = std::get<BetaK>(rep_);
  Vector v(1);
  v[0] = rng.beta(bk.a, bk.b);
  return v;
}

double Kernel::mean1() const {
  if (const auto* g = std::get_if<GaussUni>(&rep_)) return g->mean;
  throw ValidationError("kernel is not univariate gaussian");
}

double Kernel::var1() const {
  if (const auto* g = std::get_if<GaussUni>(&rep_)) return g->var;
  throw ValidationError("kernel is not univariate gaussian");
}

const Vector& Kernel::mean() const {
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) return g->mean;
  throw ValidationError("kernel is not multivariate gaussian");
}

const Matrix& Kernel::cov() const {
  if (const auto* g = std::get_if<GaussMulti>(&rep_)) return g->cov;
  throw ValidationError("kernel is not multivariate gaussian");
}

double Kernel::alpha() const {
  if (const auto* b = std::get_if<BetaK>(&rep_)) return b->a;
  throw ValidationError("kernel is not beta");
}

double Kernel::beta_param() const {
  if (const auto* b = std::get_if<BetaK>(&rep_)) return b->b;
  throw ValidationError("kernel is not beta");
}

Matrix sample(const Kernel& kernel, RngStream& rng, long n) {
  if (n < 0) throw ValidationError("sample: n must be nonnegative");
  Matrix out(n, kernel.dim());
  for (long i = 0; i < n; ++i) out.row(i) = kernel.sample(rng).transpose();
  return out;
}

}  // namespace mixsum
