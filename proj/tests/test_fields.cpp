#include <cmath>

#include "doctest.h"
#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"
#include "driftlab/rng.hpp"

using namespace driftlab;
using fields::DivergenceClass;
using fields::DriftField;
using fields::EllipticTensor;
using geom::Ball;
using geom::Grid;
using geom::Point;

namespace {

// 2x2 symmetric eigenvalues, the oracle for tensor extremes.
std::pair<double, double> eigen2(double a11, double a12, double a22) {
  const double tr = a11 + a22;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * (a11 * a22 - a12 * a12)));
  return {(tr - disc) / 2.0, (tr + disc) / 2.0};
}

// Centered finite-difference divergence of a drift rule.
double fd_divergence(const DriftField& b, const Point& x, int dim, double eps = 1e-5) {
  double div = 0.0;
  for (int d = 0; d < dim; ++d) {
    Point xp = x, xm = x;
    xp[d] += eps;
    xm[d] -= eps;
    div += (b.raw(xp)[d] - b.raw(xm)[d]) / (2.0 * eps);
  }
  return div;
}

}  // namespace

TEST_CASE("identity tensor has unit Rayleigh quotients") {
  const EllipticTensor a = fields::make_identity_tensor(3);
  const auto rep = fields::validate_ellipticity(a, 64);
  CHECK(rep.min_quotient == doctest::Approx(1.0));
  CHECK(rep.max_quotient == doctest::Approx(1.0));
  CHECK(rep.pass);
}

TEST_CASE("sinusoidal diagonal tensor against its declared bound") {
  const std::array<double, 3> base{1.0, 1.0, 1.0};
  const std::array<double, 3> amp{0.5, 0.5, 0.5};
  const std::array<double, 3> freq{1.0, 1.0, 1.0};
  const std::array<double, 3> phase{0.0, 0.0, 0.0};
  SUBCASE("nu = 2/3 overdeclares: min eigenvalue 1/2 violates it") {
    CHECK_THROWS_WITH(fields::make_diagonal_tensor(2, base, amp, freq, phase, 2.0 / 3.0),
                      "ellipticity violated");
  }
  SUBCASE("nu = 1/2 matches the eigenvalue range [1/2, 3/2]") {
    const EllipticTensor a = fields::make_diagonal_tensor(2, base, amp, freq, phase, 0.5);
    const auto rep = fields::validate_ellipticity(a, 512);
    CHECK(rep.pass);
    CHECK(rep.min_quotient == doctest::Approx(0.5).epsilon(0.01));
    CHECK(rep.max_quotient == doctest::Approx(1.5).epsilon(0.01));
  }
}

TEST_CASE("constant diagonal tensor reports its entries as extremes") {
  const EllipticTensor a = fields::make_diagonal_tensor(2, {0.5, 2.0, 0.0}, 0.5);
  const auto rep = fields::validate_ellipticity(a, 256);
  CHECK(rep.pass);
  CHECK(rep.min_quotient == doctest::Approx(0.5));
  CHECK(rep.max_quotient == doctest::Approx(2.0));
}

TEST_CASE("rotation-mixed tensor keeps its spectrum at any angle") {
  for (double angle : {0.3, 1.1, 2.7}) {
    const EllipticTensor a = fields::make_rotation_mixed_tensor(2, 0.5, 2.0, 1.0, angle, 0.4, 0.5);
    // eigen-decomposition oracle at sampled points
    Rng rng(11);
    for (int i = 0; i < 32; ++i) {
      const Point x{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
      const auto m = a.at(x);
      const auto [lo, hi] = eigen2(m[0], m[1], m[4]);
      CHECK(lo == doctest::Approx(0.5));
      CHECK(hi == doctest::Approx(2.0));
    }
    const auto rep = fields::validate_ellipticity(a, 512);
    CHECK(rep.pass);
    CHECK(rep.min_quotient >= 0.5 - 1e-9);
    CHECK(rep.max_quotient <= 2.0 + 1e-9);
  }
}

TEST_CASE("constant drift is divergence free") {
  const DriftField b = fields::make_constant_drift({1.0, 0.0, 0.0}, 3);
  CHECK(b.divergence_class() == DivergenceClass::Zero);
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 8);
  const auto rep = fields::validate_divergence(b, g);
  CHECK(rep.pass);
  CHECK(std::abs(rep.max_pairing) <= rep.tolerance);
}

TEST_CASE("stream-function drift pairs to zero") {
  const DriftField b = fields::make_stream2d_drift(1.0, 1.0, 1.0);
  CHECK(b.divergence_class() == DivergenceClass::Zero);
  // symbolic check: div b = 0 pointwise
  Rng rng(5);
  for (int i = 0; i < 16; ++i) {
    const Point x{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    CHECK(std::abs(fd_divergence(b, x, 2)) <= 1e-6);
  }
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 16);
  const auto rep = fields::validate_divergence(b, g);
  CHECK(rep.pass);
}

TEST_CASE("radial drift divergence sign from kappa and dimension") {
  SUBCASE("kappa = -1 in 3-d: smooth part -1/|x|^2") {
    const DriftField b = fields::make_radial_drift(-1.0, 3);
    CHECK(b.divergence_class() == DivergenceClass::Nonpositive);
    Rng rng(17);
    for (int i = 0; i < 16; ++i) {
      Point x = rng.point_in_ball(Ball({0, 0, 0}, 1.0, 3));
      if (geom::norm(x, 3) < 0.2) continue;
      const double r2 = geom::dot(x, x, 3);
      CHECK(fd_divergence(b, x, 3) == doctest::Approx(-1.0 / r2).epsilon(1e-3));
    }
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 12);
    const auto rep = fields::validate_divergence(b, g);
    CHECK(rep.pass);
    CHECK(rep.max_pairing <= rep.tolerance);
  }
  SUBCASE("kappa = +2 in 3-d flags the sign condition") {
    const DriftField b = fields::make_radial_drift(2.0, 3);
    CHECK(b.divergence_class() == DivergenceClass::Unconstrained);
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 12);
    const auto rep = fields::validate_divergence(b, g);
    CHECK(!rep.sign_condition_met);
    CHECK(rep.max_pairing > rep.tolerance);
  }
  SUBCASE("kappa = -1 in 2-d carries a singular part") {
    const DriftField b = fields::make_radial_drift(-1.0, 2);
    CHECK(b.divergence_class() == DivergenceClass::NonpositiveSingular);
    CHECK(b.singular_set() == fields::SingularSet::Origin);
  }
}

TEST_CASE("axisymmetric drift classes follow the sign of eps") {
  const DriftField minus = fields::make_axisymmetric_drift(-1.0);
  CHECK(minus.divergence_class() == DivergenceClass::NonpositiveSingular);
  CHECK(minus.singular_set() == fields::SingularSet::Axis);
  const Point x{0.5, 0.0, 0.3};
  const Point v = minus.raw(x);
  CHECK(v[0] == doctest::Approx(-2.0 / 0.5).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(0.0));

  const DriftField plus = fields::make_axisymmetric_drift(1.0);
  CHECK(plus.divergence_class() == DivergenceClass::Unconstrained);

  // backgrounds are divergence free (symbolic check)
  for (auto bg : {fields::SwirlBackground::Rigid, fields::SwirlBackground::Gaussian}) {
    const DriftField v_only = fields::make_swirl_background(bg, 1.3);
    Rng rng(23);
    for (int i = 0; i < 16; ++i) {
      const Point p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      CHECK(std::abs(fd_divergence(v_only, p, 3)) <= 1e-6);
    }
  }
}

TEST_CASE("capped evaluation clamps magnitude near the singular set") {
  const DriftField b = fields::make_radial_drift(2.0, 3);
  const double h = 1.0 / 16;
  const Point near{h / 4, 0.0, 0.0};  // |b| = 2/(h/4) = 8/h raw
  CHECK(geom::norm(b.raw(near), 3) == doctest::Approx(8.0 / h));
  CHECK(b.magnitude_capped(near, h) == doctest::Approx(1.0 / h));
  const Point far{0.5, 0.0, 0.0};  // outside the cap tube: raw value stands
  CHECK(b.magnitude_capped(far, h) == doctest::Approx(4.0));
}

TEST_CASE("divergence certification requires room around the singular set") {
  const DriftField b = fields::make_radial_drift(-1.0, 2);
  // A disk centered at the origin at coarse h leaves no admissible bump.
  const Grid tiny = Grid::over(Ball({0, 0, 0}, 0.4, 2), 0.2);
  CHECK_THROWS_WITH(fields::validate_divergence(b, tiny),
                    "test family intersects singular set");
}
