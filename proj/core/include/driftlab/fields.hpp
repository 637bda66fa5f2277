#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "driftlab/geometry.hpp"
#include "json.hpp"

namespace driftlab::fields {

using geom::Grid;
using geom::Point;

using Mat = std::array<double, 9>;  // row-major n x n block of a 3x3 store

/// Uniformly elliptic symmetric tensor a_ij with two-sided bound
/// nu |xi|^2 <= a_ij xi_i xi_j <= nu^-1 |xi|^2.
class EllipticTensor {
 public:
  using Rule = std::function<void(const Point&, double, Mat&)>;

  EllipticTensor(Rule rule, double nu, int dim, bool diagonal, nlohmann::json descriptor);

  Mat at(const Point& x, double t = 0.0) const;
  double entry(const Point& x, int i, int j, double t = 0.0) const;
  double nu() const { return nu_; }
  int dim() const { return dim_; }
  /// True when every off-diagonal entry vanishes identically (by family).
  bool diagonal() const { return diagonal_; }
  const nlohmann::json& descriptor() const { return descriptor_; }

 private:
  Rule rule_;
  double nu_;
  int dim_;
  bool diagonal_;
  nlohmann::json descriptor_;
};

struct EllipticityReport {
  double min_quotient = 0.0;
  double max_quotient = 0.0;
  int samples = 0;
  bool pass = false;
};

/// Min/max Rayleigh quotients over sampled points (lattice + seeded random)
/// and seeded random directions; pass iff within [nu, 1/nu].
EllipticityReport validate_ellipticity(const EllipticTensor& a, int samples,
                                       double box_halfwidth = 2.0,
                                       std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

EllipticTensor make_identity_tensor(int dim);

/// a = diag(d_1(x), .., d_n(x)), d_i(x) = base_i + amp_i sin(2 pi freq_i x_1 + phase_i).
/// Throws "ellipticity violated" when the sampled range leaves [nu, 1/nu].
EllipticTensor make_diagonal_tensor(int dim, std::array<double, 3> base,
                                    std::array<double, 3> amp, std::array<double, 3> freq,
                                    std::array<double, 3> phase, double nu);

/// Constant-coefficient diagonal tensor.
EllipticTensor make_diagonal_tensor(int dim, std::array<double, 3> entries, double nu);

/// Eigenvalues (mu1, mu2[, mu3]) conjugated by an in-plane rotation of angle
/// angle0 + wobble*sin(2 pi x_1) acting on the (x_1, x_2) coordinates.
EllipticTensor make_rotation_mixed_tensor(int dim, double mu1, double mu2, double mu3,
                                          double angle0, double wobble, double nu);

enum class DivergenceClass : std::uint8_t {
  Zero,
  Nonpositive,
  NonpositiveSingular,
  Unconstrained,
};

enum class SingularSet : std::uint8_t { None, Origin, Axis };

std::string to_string(DivergenceClass c);

/// Lower-order drift b with declared distributional divergence sign.
///
/// Singular families are evaluated pointwise off their singular set; at
/// points within h of the set the capped evaluation clamps |b| to 1/h.
class DriftField {
 public:
  using Rule = std::function<Point(const Point&, double)>;

  DriftField() = default;
  DriftField(Rule rule, int dim, DivergenceClass cls, SingularSet sing, double div_tol_scale,
             nlohmann::json descriptor);

  Point raw(const Point& x, double t = 0.0) const;
  Point capped(const Point& x, double h, double t = 0.0) const;
  double magnitude_capped(const Point& x, double h, double t = 0.0) const;

  int dim() const { return dim_; }
  DivergenceClass divergence_class() const { return class_; }
  SingularSet singular_set() const { return singular_; }
  double singular_distance(const Point& x) const;
  /// Recommended constant C for the weak-divergence tolerance tol = C*h.
  double divergence_tolerance_scale() const { return div_tol_scale_; }
  const nlohmann::json& descriptor() const { return descriptor_; }
  bool trivial() const { return !rule_; }

  /// Scale-invariant rescaling b_r(x;t) = r * b(r x; r^2 t).
  DriftField rescaled(double r) const;

 private:
  Rule rule_;
  int dim_ = 2;
  DivergenceClass class_ = DivergenceClass::Zero;
  SingularSet singular_ = SingularSet::None;
  double div_tol_scale_ = 1.0;
  double scale_ = 1.0;
  nlohmann::json descriptor_;
};

DriftField make_zero_drift(int dim);
DriftField make_constant_drift(Point v, int dim);

/// 2-d divergence-free field from the stream function
/// psi = amp sin(k1 x_1) sin(k2 x_2): b = (d2 psi, -d1 psi).
DriftField make_stream2d_drift(double amp, double k1, double k2);

/// Compactly supported 2-d divergence-free field from the stream function
/// psi = amp (1 - |x|^2/r0^2)_+^2; vanishes outside B_{r0}.
DriftField make_compact_stream2d_drift(double amp, double r0);

/// 3-d field omega x x - 2 sink x (rotation part divergence free, sink part
/// the gradient of -sink |x|^2 whose Laplacian is -6 sink <= 0).
DriftField make_potential3d_drift(Point omega, double sink);

/// b = kappa x/|x|^2. Smooth divergence kappa(n-2)/|x|^2 off the origin; in
/// 2-d the divergence is purely the point mass 2 pi kappa at the origin.
DriftField make_radial_drift(double kappa, int dim);

enum class SwirlBackground : std::uint8_t { None, Rigid, Gaussian };

/// Axisymmetric 3-d drift b = v + eps * 2 x'/|x'|^2 where x' = (x_1, x_2) and
/// v is a certified divergence-free swirl background. The distributional
/// divergence is 4 pi eps per unit length of the axis {|x'| = 0}.
DriftField make_axisymmetric_drift(double eps, SwirlBackground bg = SwirlBackground::None,
                                   double bg_amp = 0.0);

/// Divergence-free axisymmetric background alone (for certification runs).
DriftField make_swirl_background(SwirlBackground bg, double bg_amp);

struct DivergenceReport {
  std::vector<double> pairings;
  double max_pairing = 0.0;
  double min_pairing = 0.0;
  double tolerance = 0.0;
  int tests = 0;
  bool sign_condition_met = false;  // all pairings <= tolerance
  bool pass = false;                // declared class certified
};

/// Weak divergence pairings <div b, eta> = -sum b . grad(eta) h^n against a
/// family of nonnegative smooth bumps centered well inside the grid region
/// and away from the singular set. Certifies the declared divergence class
/// at tolerance C*h.
DivergenceReport validate_divergence(const DriftField& b, const Grid& grid);

}  // namespace driftlab::fields
