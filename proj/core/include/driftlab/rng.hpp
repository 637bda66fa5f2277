#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "driftlab/geometry.hpp"

namespace driftlab {

/// Deterministic splitmix64 stream; identical across platforms and standard
/// libraries, so seeded runs reproduce byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double normal() {
    const double u = std::max(uniform(), 1e-300);
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  geom::Point unit_vector(int dim) {
    geom::Point p{0.0, 0.0, 0.0};
    double n = 0.0;
    do {
      for (int d = 0; d < dim; ++d) p[d] = normal();
      n = geom::norm(p, dim);
    } while (n < 1e-12);
    for (int d = 0; d < dim; ++d) p[d] /= n;
    return p;
  }

  geom::Point point_in_ball(const geom::Ball& b) {
    geom::Point p{0.0, 0.0, 0.0};
    for (;;) {
      for (int d = 0; d < b.dim; ++d) p[d] = uniform(-1.0, 1.0);
      if (geom::norm(p, b.dim) < 1.0) break;
    }
    for (int d = 0; d < b.dim; ++d) p[d] = b.center[d] + b.radius * p[d];
    return p;
  }

  /// Independent substream for trial `index` of a seeded family.
  static Rng fork(std::uint64_t seed, std::uint64_t index) {
    Rng mix(seed ^ (0x517cc1b727220a95ULL * (index + 1)));
    mix.next();
    return mix;
  }

 private:
  std::uint64_t state_;
};

}  // namespace driftlab
