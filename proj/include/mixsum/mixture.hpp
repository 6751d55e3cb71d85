#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/kernels.hpp"

namespace mixsum {

// One posterior draw of the reference model, expressed as a finite mixture
// of same-family kernels. Weights live on the simplex (checked to 1e-8).
struct MixtureDraw {
  Vector weights;
  std::vector<Kernel> kernels;
  int draw_index = 0;

  MixtureDraw() = default;
  MixtureDraw(Vector w, std::vector<Kernel> ks, int index = 0);

  int size() const { return static_cast<int>(kernels.size()); }
  int dim() const { return kernels.empty() ? 0 : kernels.front().dim(); }
  KernelFamily family() const { return kernels.front().family(); }

  double log_density(const Vector& point) const;
  Vector log_density(const Matrix& points) const;
  Vector sample(RngStream& rng) const;
  Matrix sample_n(RngStream& rng, long n) const;
};

struct BundleMeta {
  std::string model = "unknown";
  int d = 0;
  long m_count = 0;
  std::uint64_t seed = 0;
};

// Posterior sample of the reference model: M mixture draws sharing kernel
// family and dimension.
struct DrawBundle {
  BundleMeta meta;
  std::vector<MixtureDraw> draws;

  DrawBundle() = default;
  DrawBundle(BundleMeta m, std::vector<MixtureDraw> ds);

  long size() const { return static_cast<long>(draws.size()); }
  int dim() const { return meta.d; }
};

// n_total points drawn by repeatedly picking a draw uniformly at random and
// sampling its mixture.
Dataset predictive_sample(const DrawBundle& bundle, long n_total, RngStream& rng);

// h i.i.d. points from a single draw's mixture.
Dataset per_draw_predictive(const MixtureDraw& draw, long h, RngStream& rng);

}  // namespace mixsum
