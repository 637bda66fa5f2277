#include "driftlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "driftlab/rng.hpp"

namespace driftlab::fields {

using nlohmann::json;

// ---------------------------------------------------------------------------
// EllipticTensor

EllipticTensor::EllipticTensor(Rule rule, double nu, int dim, bool diagonal, json descriptor)
    : rule_(std::move(rule)), nu_(nu), dim_(dim), diagonal_(diagonal),
      descriptor_(std::move(descriptor)) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in ]0, 1]");
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

Mat EllipticTensor::at(const Point& x, double t) const {
  Mat a{};
  rule_(x, t, a);
  return a;
}

double EllipticTensor::entry(const Point& x, int i, int j, double t) const {
  return at(x, t)[3 * i + j];
}

EllipticityReport validate_ellipticity(const EllipticTensor& a, int samples,
                                       double box_halfwidth, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  Rng rng(seed);
  const int dim = a.dim();
  EllipticityReport rep;
  rep.min_quotient = std::numeric_limits<double>::infinity();
  rep.max_quotient = 0.0;

  const int lattice = (dim == 2) ? 8 : 4;
  std::vector<Point> points;
  for (int i = 0; i < lattice; ++i)
    for (int j = 0; j < lattice; ++j)
      for (int k = 0; k < (dim == 3 ? lattice : 1); ++k) {
        Point x{0.0, 0.0, 0.0};
        const int c[3] = {i, j, k};
        for (int d = 0; d < dim; ++d)
          x[d] = -box_halfwidth + (2.0 * box_halfwidth) * (c[d] + 0.5) / lattice;
        points.push_back(x);
      }
  while (static_cast<int>(points.size()) < samples) {
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = rng.uniform(-box_halfwidth, box_halfwidth);
    points.push_back(x);
  }

  std::vector<Point> dirs;
  for (int d = 0; d < dim; ++d) {
    Point e{0.0, 0.0, 0.0};
    e[d] = 1.0;
    dirs.push_back(e);
  }
  for (int k = 0; k < 16; ++k) dirs.push_back(rng.unit_vector(dim));

  for (const Point& x : points) {
    const Mat m = a.at(x);
    for (const Point& xi : dirs) {
      double q = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) q += m[3 * i + j] * xi[i] * xi[j];
      rep.min_quotient = std::min(rep.min_quotient, q);
      rep.max_quotient = std::max(rep.max_quotient, q);
    }
  }
  rep.samples = static_cast<int>(points.size());
  const double tol = 1e-10;
  rep.pass = rep.min_quotient >= a.nu() - tol && rep.max_quotient <= 1.0 / a.nu() + tol;
  return rep;
}

EllipticTensor make_identity_tensor(int dim) {
  auto rule = [dim](const Point&, double, Mat& a) {
    a.fill(0.0);
    for (int d = 0; d < dim; ++d) a[3 * d + d] = 1.0;
  };
  return EllipticTensor(rule, 1.0, dim, true, json{{"kind", "identity"}, {"dim", dim}});
}

EllipticTensor make_diagonal_tensor(int dim, std::array<double, 3> base,
                                    std::array<double, 3> amp, std::array<double, 3> freq,
                                    std::array<double, 3> phase, double nu) {
  auto rule = [dim, base, amp, freq, phase](const Point& x, double, Mat& a) {
    a.fill(0.0);
    for (int d = 0; d < dim; ++d)
      a[3 * d + d] =
          base[d] + amp[d] * std::sin(2.0 * std::numbers::pi * freq[d] * x[0] + phase[d]);
  };
  json desc{{"kind", "diagonal"},
            {"dim", dim},
            {"base", {base[0], base[1], base[2]}},
            {"amp", {amp[0], amp[1], amp[2]}},
            {"freq", {freq[0], freq[1], freq[2]}},
            {"phase", {phase[0], phase[1], phase[2]}},
            {"nu", nu}};
  EllipticTensor a(rule, nu, dim, true, desc);
  if (!validate_ellipticity(a, 512).pass) throw std::invalid_argument("ellipticity violated");
  return a;
}

EllipticTensor make_diagonal_tensor(int dim, std::array<double, 3> entries, double nu) {
  return make_diagonal_tensor(dim, entries, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0},
                              {0.0, 0.0, 0.0}, nu);
}

EllipticTensor make_rotation_mixed_tensor(int dim, double mu1, double mu2, double mu3,
                                          double angle0, double wobble, double nu) {
  auto rule = [dim, mu1, mu2, mu3, angle0, wobble](const Point& x, double, Mat& a) {
    const double th = angle0 + wobble * std::sin(2.0 * std::numbers::pi * x[0]);
    const double c = std::cos(th), s = std::sin(th);
    // Q diag(mu) Q^T with Q the rotation in the (x1, x2) plane.
    a.fill(0.0);
    a[0] = mu1 * c * c + mu2 * s * s;
    a[1] = (mu1 - mu2) * c * s;
    a[3] = a[1];
    a[4] = mu1 * s * s + mu2 * c * c;
    if (dim == 3) a[8] = mu3;
  };
  json desc{{"kind", "rotation_mixed"}, {"dim", dim},   {"mu", {mu1, mu2, mu3}},
            {"angle", angle0},          {"wobble", wobble}, {"nu", nu}};
  EllipticTensor a(rule, nu, dim, false, desc);
  if (!validate_ellipticity(a, 512).pass) throw std::invalid_argument("ellipticity violated");
  return a;
}

// ---------------------------------------------------------------------------
// DriftField

std::string to_string(DivergenceClass c) {
  switch (c) {
    case DivergenceClass::Zero: return "zero";
    case DivergenceClass::Nonpositive: return "nonpositive";
    case DivergenceClass::NonpositiveSingular: return "nonpositive-with-singular-part";
    case DivergenceClass::Unconstrained: return "unconstrained";
  }
  return "unknown";
}

DriftField::DriftField(Rule rule, int dim, DivergenceClass cls, SingularSet sing,
                       double div_tol_scale, json descriptor)
    : rule_(std::move(rule)), dim_(dim), class_(cls), singular_(sing),
      div_tol_scale_(div_tol_scale), descriptor_(std::move(descriptor)) {}

Point DriftField::raw(const Point& x, double t) const {
  if (!rule_) return Point{0.0, 0.0, 0.0};
  Point xs{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) xs[d] = scale_ * x[d];
  Point v = rule_(xs, scale_ * scale_ * t);
  for (int d = 0; d < dim_; ++d) v[d] *= scale_;
  return v;
}

Point DriftField::capped(const Point& x, double h, double t) const {
  Point v = raw(x, t);
  if (singular_ == SingularSet::None) return v;
  if (singular_distance(x) < h) {
    const double m = geom::norm(v, dim_);
    const double cap = 1.0 / h;
    if (m > cap) {
      const double f = cap / m;
      for (int d = 0; d < dim_; ++d) v[d] *= f;
    }
  }
  return v;
}

double DriftField::magnitude_capped(const Point& x, double h, double t) const {
  return geom::norm(capped(x, h, t), dim_);
}

double DriftField::singular_distance(const Point& x) const {
  switch (singular_) {
    case SingularSet::None: return std::numeric_limits<double>::infinity();
    case SingularSet::Origin: return geom::norm(x, dim_);
    case SingularSet::Axis: return std::hypot(x[0], x[1]);
  }
  return std::numeric_limits<double>::infinity();
}

DriftField DriftField::rescaled(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("rescaling factor must be positive");
  DriftField out = *this;
  out.scale_ *= r;
  out.descriptor_["scale"] = out.scale_;
  return out;
}

DriftField make_zero_drift(int dim) {
  return DriftField(nullptr, dim, DivergenceClass::Zero, SingularSet::None, 1.0,
                    json{{"kind", "zero"}, {"dim", dim}});
}

DriftField make_constant_drift(Point v, int dim) {
  auto rule = [v](const Point&, double) { return v; };
  return DriftField(rule, dim, DivergenceClass::Zero, SingularSet::None,
                    1.0 + geom::norm(v, dim),
                    json{{"kind", "constant"}, {"dim", dim}, {"v", {v[0], v[1], v[2]}}});
}

DriftField make_stream2d_drift(double amp, double k1, double k2) {
  auto rule = [amp, k1, k2](const Point& x, double) {
    return Point{amp * k2 * std::sin(k1 * x[0]) * std::cos(k2 * x[1]),
                 -amp * k1 * std::cos(k1 * x[0]) * std::sin(k2 * x[1]), 0.0};
  };
  const double mag = std::abs(amp) * std::max(std::abs(k1), std::abs(k2));
  return DriftField(rule, 2, DivergenceClass::Zero, SingularSet::None, 1.0 + mag,
                    json{{"kind", "stream2d"}, {"amp", amp}, {"k", {k1, k2}}});
}

DriftField make_compact_stream2d_drift(double amp, double r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("support radius must be positive");
  auto rule = [amp, r0](const Point& x, double) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double w = 1.0 - r2 / (r0 * r0);
    if (w <= 0.0) return Point{0.0, 0.0, 0.0};
    // b = (d2 psi, -d1 psi), psi = amp w^2
    const double f = -4.0 * amp * w / (r0 * r0);
    return Point{f * x[1], -f * x[0], 0.0};
  };
  return DriftField(rule, 2, DivergenceClass::Zero, SingularSet::None,
                    1.0 + 4.0 * std::abs(amp) / r0,
                    json{{"kind", "stream2d_compact"}, {"amp", amp}, {"r0", r0}});
}

DriftField make_potential3d_drift(Point omega, double sink) {
  if (sink < 0.0) throw std::invalid_argument("sink strength must be nonnegative");
  auto rule = [omega, sink](const Point& x, double) {
    return Point{omega[1] * x[2] - omega[2] * x[1] - 2.0 * sink * x[0],
                 omega[2] * x[0] - omega[0] * x[2] - 2.0 * sink * x[1],
                 omega[0] * x[1] - omega[1] * x[0] - 2.0 * sink * x[2]};
  };
  const auto cls = sink > 0.0 ? DivergenceClass::Nonpositive : DivergenceClass::Zero;
  return DriftField(rule, 3, cls, SingularSet::None,
                    1.0 + geom::norm(omega, 3) + 6.0 * sink,
                    json{{"kind", "potential3d"},
                         {"omega", {omega[0], omega[1], omega[2]}},
                         {"sink", sink}});
}

DriftField make_radial_drift(double kappa, int dim) {
  auto rule = [kappa, dim](const Point& x, double) {
    const double r2 = geom::dot(x, x, dim);
    Point v{0.0, 0.0, 0.0};
    if (r2 > 0.0)
      for (int d = 0; d < dim; ++d) v[d] = kappa * x[d] / r2;
    return v;
  };
  DivergenceClass cls;
  if (kappa == 0.0) {
    cls = DivergenceClass::Zero;
  } else if (kappa < 0.0) {
    // smooth part kappa(n-2)/|x|^2 <= 0; the 2-d point mass 2 pi kappa < 0
    cls = dim == 2 ? DivergenceClass::NonpositiveSingular : DivergenceClass::Nonpositive;
  } else {
    cls = DivergenceClass::Unconstrained;
  }
  const auto sing = kappa == 0.0 ? SingularSet::None : SingularSet::Origin;
  return DriftField(rule, dim, cls, sing, 1.0 + std::abs(kappa),
                    json{{"kind", "radial"}, {"dim", dim}, {"kappa", kappa}});
}

namespace {

Point swirl_velocity(SwirlBackground bg, double amp, const Point& x) {
  switch (bg) {
    case SwirlBackground::None: return Point{0.0, 0.0, 0.0};
    case SwirlBackground::Rigid: return Point{-amp * x[1], amp * x[0], 0.0};
    case SwirlBackground::Gaussian: {
      const double g = amp * std::exp(-(x[0] * x[0] + x[1] * x[1]));
      return Point{-g * x[1], g * x[0], 0.0};
    }
  }
  return Point{0.0, 0.0, 0.0};
}

const char* swirl_name(SwirlBackground bg) {
  switch (bg) {
    case SwirlBackground::None: return "none";
    case SwirlBackground::Rigid: return "rigid";
    case SwirlBackground::Gaussian: return "gaussian";
  }
  return "none";
}

}  // namespace

DriftField make_axisymmetric_drift(double eps, SwirlBackground bg, double bg_amp) {
  if (eps != 1.0 && eps != -1.0) throw std::invalid_argument("eps must be +1 or -1");
  auto rule = [eps, bg, bg_amp](const Point& x, double) {
    Point v = swirl_velocity(bg, bg_amp, x);
    const double rho2 = x[0] * x[0] + x[1] * x[1];
    if (rho2 > 0.0) {
      v[0] += eps * 2.0 * x[0] / rho2;
      v[1] += eps * 2.0 * x[1] / rho2;
    }
    return v;
  };
  const auto cls =
      eps < 0.0 ? DivergenceClass::NonpositiveSingular : DivergenceClass::Unconstrained;
  return DriftField(rule, 3, cls, SingularSet::Axis, 4.0 + std::abs(bg_amp),
                    json{{"kind", "axisymmetric"},
                         {"eps", eps},
                         {"background", swirl_name(bg)},
                         {"bg_amp", bg_amp}});
}

DriftField make_swirl_background(SwirlBackground bg, double bg_amp) {
  auto rule = [bg, bg_amp](const Point& x, double) { return swirl_velocity(bg, bg_amp, x); };
  return DriftField(rule, 3, DivergenceClass::Zero, SingularSet::None, 1.0 + std::abs(bg_amp),
                    json{{"kind", "swirl_background"},
                         {"background", swirl_name(bg)},
                         {"bg_amp", bg_amp}});
}

// ---------------------------------------------------------------------------
// Weak divergence certification

DivergenceReport validate_divergence(const DriftField& b, const Grid& grid) {
  const int dim = grid.dim();
  const double h = grid.h();
  const double region_R = grid.ball() ? grid.ball()->radius : grid.cylinder()->spatial_radius();
  const double support = std::max(4.0 * h, region_R / 6.0);

  // Candidate bump centers on a coarse sublattice of interior nodes.
  std::vector<Point> centers;
  const int stride = std::max(1, static_cast<int>(std::round(region_R / (4.0 * h))));
  for (int id = 0; id < grid.interior_count(); id += stride) {
    const Point x = grid.pos(id);
    if (grid.boundary_distance(x) < support + h) continue;
    if (b.singular_distance(x) < support + 2.0 * h) continue;
    centers.push_back(x);
    if (centers.size() >= 64) break;
  }
  if (centers.empty()) throw std::runtime_error("test family intersects singular set");

  DivergenceReport rep;
  rep.tests = static_cast<int>(centers.size());
  rep.pairings.reserve(centers.size());
  const double cell = std::pow(h, dim);
  double maxp = -std::numeric_limits<double>::infinity();
  double minp = std::numeric_limits<double>::infinity();
  for (const Point& c : centers) {
    double pairing = 0.0;
    for (int id = 0; id < grid.interior_count(); ++id) {
      const Point x = grid.pos(id);
      const double r2 = geom::dot(
          Point{x[0] - c[0], x[1] - c[1], x[2] - c[2]},
          Point{x[0] - c[0], x[1] - c[1], x[2] - c[2]}, dim);
      const double s2 = support * support;
      if (r2 >= s2) continue;
      const double w = 1.0 - r2 / s2;  // eta = w^2, grad eta = -4 w (x-c)/s^2
      const Point v = b.capped(x, h);
      double dotv = 0.0;
      for (int d = 0; d < dim; ++d) dotv += v[d] * (x[d] - c[d]);
      pairing -= (-4.0 * w / s2) * dotv * cell;
    }
    rep.pairings.push_back(pairing);
    maxp = std::max(maxp, pairing);
    minp = std::min(minp, pairing);
  }
  rep.max_pairing = maxp;
  rep.min_pairing = minp;
  rep.tolerance = b.divergence_tolerance_scale() * h;
  rep.sign_condition_met = maxp <= rep.tolerance;

  switch (b.divergence_class()) {
    case DivergenceClass::Zero:
      rep.pass = std::max(std::abs(maxp), std::abs(minp)) <= rep.tolerance;
      break;
    case DivergenceClass::Nonpositive:
    case DivergenceClass::NonpositiveSingular:
      rep.pass = rep.sign_condition_met;
      break;
    case DivergenceClass::Unconstrained:
      rep.pass = true;  // nothing declared; report carries the sign flag
      break;
  }
  return rep;
}

}  // namespace driftlab::fields
