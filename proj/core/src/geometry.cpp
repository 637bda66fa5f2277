#include "driftlab/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace driftlab::geom {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Ball::Ball(Point c, double R, int n) : center(c), radius(R), dim(n) {
  require(R > 0.0, "ball radius must be positive");
  require(n == 2 || n == 3, "dimension must be 2 or 3");
  for (int d = n; d < 3; ++d) center[d] = 0.0;
}

double Ball::measure() const {
  if (dim == 2) return std::numbers::pi * radius * radius;
  return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

Cylinder::Cylinder(Point c, double t0, double R, double lam, double th, int n)
    : center(c), apex_time(t0), radius(R), lambda(lam), theta(th), dim(n) {
  require(R > 0.0, "cylinder radius must be positive");
  require(lam >= 1.0, "spatial factor must be >= 1");
  require(th > 0.0, "temporal factor must be positive");
  require(n == 2 || n == 3, "dimension must be 2 or 3");
  for (int d = n; d < 3; ++d) center[d] = 0.0;
}

Cylinder Cylinder::normalized(Point c, double t0, double spatial_radius, double depth, int n) {
  require(spatial_radius > 0.0 && depth > 0.0, "degenerate cylinder");
  return Cylinder(c, t0, spatial_radius, 1.0, depth / (spatial_radius * spatial_radius), n);
}

double Cylinder::measure() const { return slab().measure() * depth(); }

double parabolic_dist(const Point& x, double t, const Cylinder& Q) {
  if (t > Q.apex_time) return 0.0;
  const double spatial = Q.spatial_radius() - dist(x, Q.center, Q.dim);
  const double temporal = t - Q.bottom_time();
  if (spatial <= 0.0 || temporal <= 0.0) return 0.0;
  return std::min(spatial, std::sqrt(temporal));
}

// ---------------------------------------------------------------------------
// Grid

int Grid::lattice_index(const std::array<int, 3>& c) const {
  return (c[2] * cells_[1] + c[1]) * cells_[0] + c[0];
}

void Grid::build_lattice(const Point& center, double spatial_radius) {
  const int half = static_cast<int>(std::ceil(spatial_radius / h_ - 1e-12)) + 1;
  for (int d = 0; d < 3; ++d) {
    if (d < dim_) {
      cells_[d] = 2 * half;
      lo_[d] = center[d] - half * h_;
    } else {
      cells_[d] = 1;
      lo_[d] = -0.5 * h_;
    }
  }

  const std::size_t total =
      std::size_t(cells_[0]) * std::size_t(cells_[1]) * std::size_t(cells_[2]);
  compact_.assign(total, -1);

  std::vector<std::uint8_t> kind(total, 0);
  std::array<int, 3> c{0, 0, 0};
  std::size_t idx = 0;
  int interior = 0;
  for (c[2] = 0; c[2] < cells_[2]; ++c[2])
    for (c[1] = 0; c[1] < cells_[1]; ++c[1])
      for (c[0] = 0; c[0] < cells_[0]; ++c[0], ++idx) {
        Point x{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d) x[d] = lo_[d] + (c[d] + 0.5) * h_;
        if (region_contains(x)) {
          kind[idx] = 1;
          ++interior;
        }
      }
  if (interior == 0) throw std::invalid_argument("degenerate region");

  int boundary = 0;
  idx = 0;
  for (c[2] = 0; c[2] < cells_[2]; ++c[2])
    for (c[1] = 0; c[1] < cells_[1]; ++c[1])
      for (c[0] = 0; c[0] < cells_[0]; ++c[0], ++idx) {
        if (kind[idx]) continue;
        for (int f = 0; f < 2 * dim_; ++f) {
          std::array<int, 3> nb = c;
          nb[f / 2] += (f % 2) ? 1 : -1;
          if (nb[f / 2] < 0 || nb[f / 2] >= cells_[f / 2]) continue;
          if (kind[lattice_index(nb)] == 1) {
            kind[idx] = 2;
            ++boundary;
            break;
          }
        }
      }

  interior_count_ = interior;
  boundary_count_ = boundary;
  lattice_of_.resize(interior + boundary);
  int next_interior = 0;
  int next_boundary = interior;
  for (std::size_t i = 0; i < total; ++i) {
    if (kind[i] == 1) {
      compact_[i] = next_interior;
      lattice_of_[next_interior++] = static_cast<std::int32_t>(i);
    } else if (kind[i] == 2) {
      compact_[i] = next_boundary;
      lattice_of_[next_boundary++] = static_cast<std::int32_t>(i);
    }
  }
}

Grid Grid::over(const Ball& b, double h) {
  require(h > 0.0, "spacing must be positive");
  if (h > b.radius / 2.0 + 1e-12) throw std::invalid_argument("grid too coarse");
  Grid g;
  g.dim_ = b.dim;
  g.h_ = h;
  g.is_ball_ = true;
  g.ball_ = b;
  g.build_lattice(b.center, b.radius);
  return g;
}

Grid Grid::over(const Cylinder& c, double h, double tau) {
  require(h > 0.0, "spacing must be positive");
  require(tau > 0.0, "time step must be positive");
  require(tau <= h + 1e-12, "time step must not exceed spacing");
  if (h > c.spatial_radius() / 2.0 + 1e-12) throw std::invalid_argument("grid too coarse");
  Grid g;
  g.dim_ = c.dim;
  g.h_ = h;
  g.is_ball_ = false;
  g.cyl_ = c;
  g.spacetime_ = true;
  const double depth = c.depth();
  g.steps_ = std::max(1, static_cast<int>(std::ceil(depth / tau - 1e-9)));
  g.tau_ = depth / g.steps_;
  g.t_bottom_ = c.bottom_time();
  g.build_lattice(c.center, c.spatial_radius());
  return g;
}

Point Grid::pos(int id) const {
  const int idx = lattice_of_[id];
  const int ix = idx % cells_[0];
  const int iy = (idx / cells_[0]) % cells_[1];
  const int iz = idx / (cells_[0] * cells_[1]);
  Point x{0.0, 0.0, 0.0};
  const int c[3] = {ix, iy, iz};
  for (int d = 0; d < dim_; ++d) x[d] = lo_[d] + (c[d] + 0.5) * h_;
  return x;
}

int Grid::node_at(int ix, int iy, int iz) const {
  if (ix < 0 || ix >= cells_[0] || iy < 0 || iy >= cells_[1] || iz < 0 || iz >= cells_[2])
    return -1;
  return compact_[lattice_index({ix, iy, iz})];
}

std::array<int, 3> Grid::coords(int id) const {
  const int idx = lattice_of_[id];
  return {idx % cells_[0], (idx / cells_[0]) % cells_[1], idx / (cells_[0] * cells_[1])};
}

int Grid::neighbor(int id, int face) const {
  const int idx = lattice_of_[id];
  const int axis = face / 2;
  const int step = (face % 2) ? 1 : -1;
  const int ix = idx % cells_[0];
  const int iy = (idx / cells_[0]) % cells_[1];
  const int iz = idx / (cells_[0] * cells_[1]);
  std::array<int, 3> c{ix, iy, iz};
  c[axis] += step;
  if (c[axis] < 0 || c[axis] >= cells_[axis]) return -1;
  return compact_[lattice_index(c)];
}

double Grid::measure() const {
  const double slab = slab_measure();
  if (!spacetime_) return slab;
  return slab * (tau_ * steps_);
}

const Ball* Grid::ball() const { return is_ball_ ? &ball_ : nullptr; }
const Cylinder* Grid::cylinder() const { return is_ball_ ? nullptr : &cyl_; }

bool Grid::region_contains(const Point& x) const {
  if (is_ball_) return ball_.contains(x);
  return dist(x, cyl_.center, dim_) < cyl_.spatial_radius();
}

double Grid::boundary_distance(const Point& x) const {
  const double R = is_ball_ ? ball_.radius : cyl_.spatial_radius();
  const Point& c = is_ball_ ? ball_.center : cyl_.center;
  return R - dist(x, c, dim_);
}

// ---------------------------------------------------------------------------
// Chains

ChainPlan ball_chain(const Point& y, double rho, double R, int dim) {
  require(R > 0.0, "chain radius must be positive");
  const double ry = norm(y, dim);
  require(ry < 2.0 * R, "chain start out of range");

  ChainPlan plan;
  plan.parabolic = false;
  plan.seed_radius = rho;

  if (ry < 1e-14 * R) {
    // Already centered: the seed ball B_rho(0) sits inside B_R.
    if (std::abs(4.0 * rho - 2.0 * R) > 1e-9 * R)
      throw std::invalid_argument("inconsistent chain input");
    plan.count = 0;
    return plan;
  }

  const double quarter = 0.25 * (2.0 * R - ry);
  if (std::abs(rho - quarter) > 1e-9 * R)
    throw std::invalid_argument("inconsistent chain input");

  // 2^-(N+1) R < rho <= 2^-N R
  int N = 0;
  while (rho <= R * std::ldexp(1.0, -(N + 1))) ++N;

  Point e{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) e[d] = y[d] / ry;

  double r = std::ldexp(R, -N);
  plan.seed_radius = r;
  double c = 2.0 * R * (1.0 - std::ldexp(1.0, -N));
  plan.count = N;
  plan.links.reserve(N + 1);
  for (int m = 0; m <= N; ++m) {
    if (m > 0) {
      r *= 2.0;
      c -= r;
    }
    ChainLink link;
    for (int d = 0; d < dim; ++d) link.center[d] = c * e[d];
    link.radius = r;
    link.containment_margin = 2.0 * R - (std::abs(c) + 2.0 * r);
    plan.links.push_back(link);
  }
  return plan;
}

ChainPlan parabolic_chain_links(const Point& y, double s, double rho, double R, int dim) {
  require(R > 0.0 && rho > 0.0, "chain parameters must be positive");

  // 2^-(N+1) R <= rho < 2^-N R
  int N = 0;
  while (rho < R * std::ldexp(1.0, -(N + 1))) ++N;

  const double ry = norm(y, dim);
  Point e{0.0, 0.0, 0.0};
  if (ry > 0.0)
    for (int d = 0; d < dim; ++d) e[d] = y[d] / ry;

  ChainPlan plan;
  plan.parabolic = true;
  plan.count = N;
  double r = std::ldexp(R, -(N + 1));
  plan.seed_radius = r;
  double c = ry;
  double t = s + r * r;
  plan.links.reserve(N + 1);
  for (int m = 0; m <= N; ++m) {
    if (m > 0) {
      r *= 2.0;
      c -= std::min(2.0 * r, c);
      t += r * r;
    }
    ChainLink link;
    for (int d = 0; d < dim; ++d) link.center[d] = c * e[d];
    link.radius = r;
    link.time = t;
    const double spatial = 2.0 * R - (c + 4.0 * r);
    const double top = -t;
    const double bottom = (t - r * r) + 4.0 * R * R;
    link.containment_margin = std::min({spatial, top, bottom});
    plan.links.push_back(link);
  }
  plan.final_time = t;
  return plan;
}

ChainPlan parabolic_chain(const Point& y, double s, double rho, double R, int dim) {
  require(R > 0.0, "chain radius must be positive");
  const double ry = norm(y, dim);
  if (!(ry < 2.0 * R && s > -4.0 * R * R && s <= -2.0 * R * R + 1e-12 * R * R))
    throw std::invalid_argument("chain start out of range");

  const Cylinder host(Point{0.0, 0.0, 0.0}, 0.0, 2.0 * R, 1.0, 1.0, dim);
  const double quarter = 0.25 * parabolic_dist(y, s, host);
  if (!(rho > 0.0) || rho > quarter + 1e-9 * R)
    throw std::invalid_argument("inconsistent chain input");

  return parabolic_chain_links(y, s, rho, R, dim);
}

// ---------------------------------------------------------------------------
// Layer split

namespace {

// Norm of b over the radial shell [r0, r1] (clipped to the annulus), by
// midpoint product quadrature in spherical coordinates. For dim = 3 this is
// the L_3 norm; for dim = 2 the log-weighted L_2 norm with weight scale w.
double shell_norm(const VectorRule& b, double r0, double r1, double w, int dim) {
  constexpr int kRadial = 24;
  const double dr = (r1 - r0) / kRadial;
  if (dr <= 0.0) return 0.0;
  double acc = 0.0;
  if (dim == 2) {
    constexpr int kAng = 192;
    const double dth = 2.0 * std::numbers::pi / kAng;
    for (int i = 0; i < kRadial; ++i) {
      const double r = r0 + (i + 0.5) * dr;
      for (int j = 0; j < kAng; ++j) {
        const double th = (j + 0.5) * dth;
        const Point x{r * std::cos(th), r * std::sin(th), 0.0};
        const Point v = b(x);
        const double m = norm(v, 2);
        acc += m * m * std::log1p(w * m) * r * dr * dth;
      }
    }
    return std::sqrt(acc);
  }
  constexpr int kPolar = 48;
  constexpr int kAzim = 96;
  const double dph = std::numbers::pi / kPolar;
  const double dps = 2.0 * std::numbers::pi / kAzim;
  for (int i = 0; i < kRadial; ++i) {
    const double r = r0 + (i + 0.5) * dr;
    for (int j = 0; j < kPolar; ++j) {
      const double ph = (j + 0.5) * dph;
      const double sph = std::sin(ph);
      for (int k = 0; k < kAzim; ++k) {
        const double ps = (k + 0.5) * dps;
        const Point x{r * sph * std::cos(ps), r * sph * std::sin(ps), r * std::cos(ph)};
        const Point v = b(x);
        const double m = norm(v, 3);
        acc += m * m * m * r * r * sph * dr * dph * dps;
      }
    }
  }
  return std::cbrt(acc);
}

}  // namespace

LayerSplit layer_split(const VectorRule& b, double R, double eps, int dim) {
  require(R > 0.0 && eps > 0.0, "layer split needs positive R and eps");
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");

  // Hypothesis-scale norm over the whole annulus drives the pigeonhole bound.
  const double total = shell_norm(b, R, 2.0 * R, R, dim);

  int M = 1;
  const double inv_n = 1.0 / dim;
  while (total * std::pow(2.0 / M, inv_n) > eps && M < (1 << 22)) M *= 2;

  while (M <= (1 << 22)) {
    const double w = R / M;  // half-width 2*delta*R with delta = 1/(2M)
    for (int i = 1; i <= M; ++i) {
      const double r = R + (i - 0.5) * (R / M);
      const double lo = std::max(R, r - w);
      const double hi = std::min(2.0 * R, r + w);
      const double value = shell_norm(b, lo, hi, w, dim);
      if (value <= eps) {
        LayerSplit out;
        out.subdivisions = M;
        out.layer = Layer{r, w, value, i};
        return out;
      }
    }
    M *= 2;
  }
  throw std::runtime_error("drift too singular for layer split");
}

}  // namespace driftlab::geom
