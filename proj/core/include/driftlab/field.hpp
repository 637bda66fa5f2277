#pragma once

#include <functional>
#include <vector>

#include "driftlab/geometry.hpp"

namespace driftlab {

using ScalarRule = std::function<double(const geom::Point&)>;
using SpaceTimeRule = std::function<double(const geom::Point&, double)>;

/// Nodal scalar values over a grid (interior nodes first, then boundary).
struct DiscreteField {
  const geom::Grid* grid = nullptr;
  std::vector<double> v;

  DiscreteField() = default;
  explicit DiscreteField(const geom::Grid& g) : grid(&g), v(g.node_count(), 0.0) {}

  static DiscreteField from_rule(const geom::Grid& g, const ScalarRule& f);

  double operator[](int id) const { return v[id]; }
  double& operator[](int id) { return v[id]; }

  /// Multilinear interpolation using available node values; cells with
  /// missing corners renormalize over the present ones.
  double sample(const geom::Point& x) const;
};

/// Nodal values per time slab; slab 0 is the bottom (initial) slab.
struct SpaceTimeField {
  const geom::Grid* grid = nullptr;
  std::vector<std::vector<double>> slabs;

  SpaceTimeField() = default;
  explicit SpaceTimeField(const geom::Grid& g)
      : grid(&g), slabs(g.steps() + 1, std::vector<double>(g.node_count(), 0.0)) {}

  static SpaceTimeField from_rule(const geom::Grid& g, const SpaceTimeRule& f);

  double at(int slab, int id) const { return slabs[slab][id]; }
  double& at(int slab, int id) { return slabs[slab][id]; }

  /// Space-time interpolation: multilinear in space, linear in time.
  double sample(const geom::Point& x, double t) const;
};

}  // namespace driftlab
