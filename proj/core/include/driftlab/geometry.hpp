#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace driftlab::geom {

using Point = std::array<double, 3>;

inline double dot(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

inline double norm(const Point& a, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += a[d] * a[d];
  return std::sqrt(s);
}

inline double dist(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double e = a[d] - b[d];
    s += e * e;
  }
  return std::sqrt(s);
}

/// Open ball B_R(x0) in dimension n (n = 2 or 3).
struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 1.0;
  int dim = 2;

  Ball() = default;
  Ball(Point c, double R, int n);

  bool contains(const Point& x) const { return dist(x, center, dim) < radius; }
  /// Lebesgue measure (pi R^2 or 4/3 pi R^3).
  double measure() const;
};

/// Space-time cylinder B_{lambda R}(x0) x ]t0 - theta R^2, t0[.
/// The unit-aspect cylinder with apex (x0;t0) and radius R has lambda = theta = 1.
struct Cylinder {
  Point center{0.0, 0.0, 0.0};
  double apex_time = 0.0;
  double radius = 1.0;
  double lambda = 1.0;
  double theta = 1.0;
  int dim = 2;

  Cylinder() = default;
  Cylinder(Point c, double t0, double R, double lam, double th, int n);

  /// Cylinder with given spatial radius and time depth re-expressed with unit
  /// spatial factor (any sub-cylinder request with lambda < 1 reduces to this).
  static Cylinder normalized(Point c, double t0, double spatial_radius, double depth, int n);

  double spatial_radius() const { return lambda * radius; }
  double depth() const { return theta * radius * radius; }
  double bottom_time() const { return apex_time - depth(); }
  bool contains(const Point& x, double t) const {
    return dist(x, center, dim) < spatial_radius() && t > bottom_time() && t < apex_time;
  }
  double measure() const;  // space-time measure
  Ball slab() const { return Ball(center, spatial_radius(), dim); }
};

/// Largest rho such that Q_rho(x;t) = B_rho(x) x ]t-rho^2, t[ fits inside Q.
double parabolic_dist(const Point& x, double t, const Cylinder& Q);

enum class NodeKind : std::uint8_t { Outside = 0, Interior = 1, Boundary = 2 };

/// Uniform cell-centered Cartesian lattice covering a Ball or Cylinder.
///
/// Nodes sit at box_lo + (i + 1/2) h per axis; the lattice is symmetric about
/// the region center, so the center itself is never a node. A node is interior
/// when its position satisfies the analytic inclusion; boundary nodes are
/// outside nodes with at least one face neighbor inside (they carry Dirichlet
/// data). Space-time grids add uniform slabs of width tau, slab 0 being the
/// bottom (initial-data) slab.
class Grid {
 public:
  static Grid over(const Ball& b, double h);
  static Grid over(const Cylinder& c, double h, double tau);

  int dim() const { return dim_; }
  double h() const { return h_; }
  bool spacetime() const { return spacetime_; }
  double tau() const { return tau_; }
  /// Number of time steps; slab times are bottom + k*tau, k = 0..steps().
  int steps() const { return steps_; }
  double slab_time(int k) const { return t_bottom_ + k * tau_; }
  double bottom_time() const { return t_bottom_; }

  int interior_count() const { return interior_count_; }
  int boundary_count() const { return boundary_count_; }
  int node_count() const { return interior_count_ + boundary_count_; }

  bool is_interior(int id) const { return id < interior_count_; }
  Point pos(int id) const;
  /// Compact id of the node at lattice coordinates, or -1.
  int node_at(int ix, int iy, int iz) const;
  std::array<int, 3> coords(int id) const;
  /// Face f in {0..2*dim-1}: axis f/2, direction - for even f, + for odd f.
  /// Returns the compact id of the neighbor, or -1 when outside both sets.
  int neighbor(int id, int face) const;

  /// Discrete measure: h^n * interior count (times depth for space-time).
  double measure() const;
  double slab_measure() const { return std::pow(h_, dim_) * interior_count_; }

  const Ball* ball() const;
  const Cylinder* cylinder() const;
  bool region_contains(const Point& x) const;
  /// Signed distance from x to the spatial region boundary (positive inside).
  double boundary_distance(const Point& x) const;

  std::array<int, 3> cells() const { return cells_; }
  Point box_lo() const { return lo_; }

 private:
  Grid() = default;
  void build_lattice(const Point& center, double spatial_radius);
  int lattice_index(const std::array<int, 3>& c) const;

  int dim_ = 2;
  double h_ = 0.0;
  Point lo_{0.0, 0.0, 0.0};
  std::array<int, 3> cells_{1, 1, 1};
  bool spacetime_ = false;
  double t_bottom_ = 0.0;
  double tau_ = 0.0;
  int steps_ = 0;

  bool is_ball_ = true;
  Ball ball_{};
  Cylinder cyl_{};

  std::vector<std::int32_t> compact_;     // lattice -> compact id, -1 outside
  std::vector<std::int32_t> lattice_of_;  // compact id -> lattice index
  int interior_count_ = 0;
  int boundary_count_ = 0;
};

/// One chain link: a ball (elliptic) or the spatial slab of a slanted
/// cylinder (parabolic), with exact containment margin inside the host region.
struct ChainLink {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;
  double time = 0.0;  // parabolic chains only
  double containment_margin = 0.0;
};

/// Dyadic chain carrying a positivity bound from a small ball near the rim of
/// B_{2R} (or near the parabolic boundary of Q_{2R}) to the centered region.
struct ChainPlan {
  int count = 0;             // number of doubling steps
  double seed_radius = 0.0;  // r_0
  std::vector<ChainLink> links;
  bool parabolic = false;
  double final_time = 0.0;  // parabolic: slab time of the last link
};

/// Elliptic chain: doubling balls from B_{r0}(y0) to B_R(0) inside B_{2R}.
/// Requires |y| < 2R and rho = (2R - |y|)/4 (quarter distance to the rim).
/// y = 0 yields an empty chain: the seed ball is already centered.
ChainPlan ball_chain(const Point& y, double rho, double R, int dim);

/// Raw parabolic link sequence for given (y; s), rho, R. No admissibility
/// validation; see parabolic_chain for the checked entry point.
ChainPlan parabolic_chain_links(const Point& y, double s, double rho, double R, int dim);

/// Parabolic chain of Q^{4,1}_{r_m}(y_m; t_m) inside Q_{2R}, stepping centers
/// toward the spatial origin and times forward by r_m^2. Requires
/// (y;s) in B_{2R} x ]-4R^2, -2R^2] and rho <= quarter parabolic distance to
/// the parabolic boundary of Q_{2R} = Q^{1,1}_{2R}(0;0).
ChainPlan parabolic_chain(const Point& y, double s, double rho, double R, int dim);

/// Spherical layer K = { r - w < |x| < r + w }, w = 2*delta*R, delta = 1/(2M).
struct Layer {
  double mid_radius = 0.0;
  double half_width = 0.0;
  double norm_value = 0.0;  // drift norm over the layer as measured by the scan
  int layer_index = 0;
};

struct LayerSplit {
  int subdivisions = 0;  // M
  Layer layer;
};

/// Vector field sampled pointwise; used by the layer scan.
using VectorRule = std::function<Point(const Point&)>;

/// Find a thin spherical layer inside B_{2R} \ B_R on which the drift norm
/// (L_n for n = 3, log-weighted L_2 for n = 2) falls below eps. M is the
/// smallest power of two for which the pigeonhole bound total*(2/M)^{1/n}
/// guarantees such a layer; layers are scanned in increasing radius.
LayerSplit layer_split(const VectorRule& b, double R, double eps, int dim);

}  // namespace driftlab::geom
