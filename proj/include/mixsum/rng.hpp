#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "mixsum/errors.hpp"

namespace mixsum {

// Deterministic random stream keyed by (seed, stream_id): the same pair
// yields the same sequence on every run and under any thread schedule.
// Parallel work derives one child stream per task index instead of sharing
// a generator. Distributions are generated from raw 64-bit output rather
// than std::*_distribution so the sequence does not depend on the standard
// library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id) {
    gen_.seed(splitmix64(splitmix64(seed_) ^ splitmix64(stream_ ^ 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Fresh stream under the same seed; ids are hashed so (k, restart)-style
  // keys do not collide across call sites.
  RngStream child(std::uint64_t a) const { return RngStream(seed_, mix(stream_, a)); }
  RngStream child(std::uint64_t a, std::uint64_t b) const {
    return RngStream(seed_, mix(mix(stream_, a), b));
  }

  std::uint64_t next_u64() { return gen_(); }

  // U[0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // U(0,1], safe under log().
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * kPi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Marsaglia-Tsang; shape/rate parameterization.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw ValidationError("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0, v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  // Index sampled proportionally to nonnegative (unnormalized) weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ValidationError("categorical: negative or NaN weight");
      total += w;
    }
    if (!(total > 0.0)) throw ValidationError("categorical: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v * 0x9e3779b97f4a7c15ull + 0xd1b54a32d192ed03ull));
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mixsum
