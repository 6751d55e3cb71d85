#include "mixsum/mixture.hpp"

#include <cmath>

namespace mixsum {

MixtureDraw::MixtureDraw(Vector w, std::vector<Kernel> ks, int index)
    : weights(std::move(w)), kernels(std::move(ks)), draw_index(index) {
  if (kernels.empty()) throw ValidationError("mixture draw: no components");
  if (weights.size() != static_cast<long>(kernels.size()))
    throw ValidationError("mixture draw: weight count does not match kernel count");
  double total = 0.0;
  for (long q = 0; q < weights.size(); ++q) {
    if (!(weights[q] >= 0.0))
      throw ValidationError("mixture draw: negative weight at component " + std::to_string(q));
    total += weights[q];
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw ValidationError("mixture draw: weights sum to " + std::to_string(total) +
                          ", expected 1");
  const KernelFamily fam = kernels.front().family();
  const int d = kernels.front().dim();
  for (const Kernel& k : kernels) {
    if (k.family() != fam) throw ValidationError("mixture draw: mixed kernel families");
    if (k.dim() != d) throw ValidationError("mixture draw: mixed kernel dimensions");
  }
}

double MixtureDraw::log_density(const Vector& point) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(kernels.size());
  for (std::size_t q = 0; q < kernels.size(); ++q) {
    terms[q] = weights[q] > 0.0 ? std::log(weights[q]) + kernels[q].log_density(point)
                                : -std::numeric_limits<double>::infinity();
    best = std::max(best, terms[q]);
  }
  if (!std::isfinite(best)) return best;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s);
}

Vector MixtureDraw::log_density(const Matrix& points) const {
  Matrix logs(points.rows(), size());
  for (int q = 0; q < size(); ++q) {
    const double lw = weights[q] > 0.0 ? std::log(weights[q])
                                       : -std::numeric_limits<double>::infinity();
    logs.col(q) = kernels[q].log_density(points).array() + lw;
  }
  return log_sum_exp_rows(logs);
}

Vector MixtureDraw::sample(RngStream& rng) const {
  const int q = rng.categorical({weights.data(), static_cast<std::size_t>(weights.size())});
  return kernels[q].sample(rng);
}

Matrix MixtureDraw::sample_n(RngStream& rng, long n) const {
  Matrix out(n, dim());
  for (long i = 0; i < n; ++i) out.row(i) = sample(rng).transpose();
  return out;
}

DrawBundle::DrawBundle(BundleMeta m, std::vector<MixtureDraw> ds)
    : meta(std::move(m)), draws(std::move(ds)) {
  if (draws.empty()) throw ValidationError("draw bundle: at least one draw required");
  const KernelFamily fam = draws.front().family();
  const int d = draws.front().dim();
  for (const MixtureDraw& draw : draws) {
    if (draw.family() != fam) throw ValidationError("draw bundle: mixed kernel families");
    if (draw.dim() != d) throw ValidationError("draw bundle: mixed dimensions");
  }
  meta.d = d;
  meta.m_count = static_cast<long>(draws.size());
}

Dataset predictive_sample(const DrawBundle& bundle, long n_total, RngStream& rng) {
  if (n_total < 1) throw ValidationError("predictive_sample: n_total must be >= 1");
  if (bundle.draws.empty()) throw ValidationError("predictive_sample: empty bundle");
  const long m = bundle.size();
  Matrix out(n_total, bundle.dim());
  for (long i = 0; i < n_total; ++i) {
    const long pick = std::min<long>(m - 1, static_cast<long>(rng.uniform() * m));
    out.row(i) = bundle.draws[pick].sample(rng).transpose();
  }
  return Dataset(std::move(out));
}

Dataset per_draw_predictive(const MixtureDraw& draw, long h, RngStream& rng) {
  if (h < 1) throw ValidationError("per_draw_predictive: h must be >= 1");
  return Dataset(draw.sample_n(rng, h));
}

}  // namespace mixsum
