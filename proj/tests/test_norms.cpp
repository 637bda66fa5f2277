#include <cmath>
#include <numbers>

#include "doctest.h"
#include "driftlab/field.hpp"
#include "driftlab/norms.hpp"
#include "driftlab/rng.hpp"

using namespace driftlab;
using geom::Ball;
using geom::Cylinder;
using geom::Grid;
using geom::Point;
using norms::kInf;

TEST_CASE("constant field on the unit 3-ball") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 32);
  const double val = norms::lebesgue_norm(g, [](const Point&) { return 1.0; }, 2.0);
  CHECK(val == doctest::Approx(std::sqrt(4.0 * std::numbers::pi / 3.0)).epsilon(0.01));
  CHECK(norms::lebesgue_norm(g, [](const Point&) { return 0.0; }, 2.0) == 0.0);
  CHECK(norms::lebesgue_norm(g, [](const Point&) { return 0.0; }, kInf) == 0.0);
}

TEST_CASE("inverse-distance field integrates to 4 pi") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 64);
  const double val =
      norms::lebesgue_norm(g, [](const Point& x) { return 1.0 / geom::norm(x, 3); }, 2.0);
  CHECK(val == doctest::Approx(std::sqrt(4.0 * std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("anisotropic norm of constants and the q = l identity") {
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 16, 1.0 / 32);
  SpaceTimeField ones = SpaceTimeField::from_rule(g, [](const Point&, double) { return 1.0; });
  // slab measure pi, time length 1
  CHECK(norms::anisotropic_norm(ones, 2.0, 4.0) ==
        doctest::Approx(std::pow(std::numbers::pi, 0.5)).epsilon(0.01));
  CHECK(norms::anisotropic_norm(ones, 3.0, kInf) ==
        doctest::Approx(std::pow(std::numbers::pi, 1.0 / 3.0)).epsilon(0.01));

  SpaceTimeField zero = SpaceTimeField::from_rule(g, [](const Point&, double) { return 0.0; });
  CHECK(norms::anisotropic_norm(zero, 2.0, 2.0) == 0.0);

  // L_{q,q} = L_q to 1e-12 relative, on seeded random nodal data
  Rng rng(41);
  SpaceTimeField noisy(g);
  for (auto& slab : noisy.slabs)
    for (double& x : slab) x = rng.uniform(-2.0, 2.0);
  for (double qq : {1.0, 2.0, 3.5}) {
    const double a = norms::anisotropic_norm(noisy, qq, qq);
    const double b = norms::lebesgue_norm(noisy, qq);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("morrey norm of a constant peaks on the largest admissible ball") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 32);
  const auto rep = norms::morrey_norm(g, [](const Point&) { return 1.0; }, 2.0, 0.5);
  // value rho^{-1/2} (4/3 pi rho^3)^{1/2} is increasing in rho; maximizer ~ B_1
  const double expect = std::sqrt(4.0 * std::numbers::pi / 3.0) * rep.maximizer_radius;
  CHECK(rep.value == doctest::Approx(expect).epsilon(0.02));
  CHECK(rep.maximizer_radius >= 0.9);
  CHECK(geom::norm(rep.maximizer_center, 3) <= 0.1);
}

TEST_CASE("morrey norm of the inverse-distance field is scale free") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 32);
  const auto rep =
      norms::morrey_norm(g, [](const Point& x) { return 1.0 / geom::norm(x, 3); }, 2.0, 0.5);
  CHECK(rep.value == doctest::Approx(std::sqrt(4.0 * std::numbers::pi)).epsilon(0.03));
  CHECK(geom::norm(rep.maximizer_center, 3) <= 2.0 * g.h());  // origin-centered balls dominate
  CHECK(norms::morrey_norm(g, [](const Point&) { return 0.0; }, 2.0, 0.5).value == 0.0);
}

TEST_CASE("morrey lattice refinement never lowers the reported value") {
  const Grid g = Grid::over(Ball({0.0, 0.0, 0.0}, 1.0, 2), 1.0 / 32);
  Rng rng(4242);
  // fixed random positive nodal data
  DiscreteField f(g);
  for (double& x : f.v) x = rng.uniform(0.0, 1.0);
  norms::MorreyOptions coarse{.center_stride = 8, .dyadic_levels = 3};
  norms::MorreyOptions fine{.center_stride = 4, .dyadic_levels = 6};
  const double lo = norms::morrey_norm(f, 2.0, 0.25, coarse).value;
  const double hi = norms::morrey_norm(f, 2.0, 0.25, fine).value;
  CHECK(hi >= lo - 1e-15);
}

TEST_CASE("norms are monotone in the region and the integrand") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 16);
  Rng rng(7);
  DiscreteField f(g);
  for (double& x : f.v) x = rng.uniform(-1.0, 1.0);
  DiscreteField bigger = f;
  for (double& x : bigger.v) x = std::abs(x) + 0.1;
  for (double q : {1.0, 2.0, kInf}) {
    CHECK(norms::lebesgue_norm(bigger, q) >= norms::lebesgue_norm(f, q));
    CHECK(norms::lebesgue_norm_over(f, q, Ball({0, 0, 0}, 0.5, 2)) <=
          norms::lebesgue_norm_over(f, q, Ball({0, 0, 0}, 0.9, 2)) + 1e-15);
  }
}

TEST_CASE("drift quantity on constants and under region scaling") {
  const fields::DriftField b = fields::make_constant_drift({1.0, 0.0, 0.0}, 3);
  const double v1 = norms::quantity_N(b, {0, 0, 0}, 1.0, 1.0, 2.0, 1.0 / 24);
  CHECK(v1 == doctest::Approx(std::sqrt(4.0 * std::numbers::pi / 3.0)).epsilon(0.01));
  const double v2 = norms::quantity_N(b, {0, 0, 0}, 2.0, 1.0, 2.0, 1.0 / 24);
  CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(0.01));
  CHECK(norms::quantity_N(fields::make_zero_drift(3), {0, 0, 0}, 1.0, 1.0, 2.0, 1.0 / 24) ==
        0.0);
}

TEST_CASE("drift quantity is invariant under the parabolic rescaling") {
  const fields::DriftField b = fields::make_stream2d_drift(1.0, 1.0, 2.0);
  const double q = 1.5;
  const double direct = norms::quantity_N(b, {0, 0, 0}, 2.0, 1.5, q, 1.0 / 32);
  const double scaled = norms::quantity_N(b.rescaled(2.0), {0, 0, 0}, 1.0, 1.5, q, 1.0 / 64);
  CHECK(scaled == doctest::Approx(direct).epsilon(0.01));
}

TEST_CASE("inadmissible exponents are rejected with the violated constraint") {
  const fields::DriftField b = fields::make_constant_drift({1.0, 0.0, 0.0}, 3);
  CHECK_THROWS_AS(norms::quantity_N(b, {0, 0, 0}, 1.0, 1.0, 1.4, 1.0 / 8),
                  std::invalid_argument);  // q <= n/2
  CHECK_THROWS_AS(norms::quantity_N(b, {0, 0, 0}, 1.0, 1.0, 3.5, 1.0 / 8),
                  std::invalid_argument);  // q > n
  CHECK_THROWS_AS(norms::NormParams::parabolic(1.2, 1.0, 3), std::invalid_argument);
  CHECK_NOTHROW(norms::NormParams::parabolic(7.0 / 4.0, kInf, 3));
}

TEST_CASE("parabolic drift quantity for the planar inverse-distance drift") {
  // |b| = 2/|x'| on Q_R^{1,1}: N_hat at q = 7/4, l = inf is R-stable
  const fields::DriftField b = fields::make_axisymmetric_drift(-1.0);
  const double q = 7.0 / 4.0;
  const Cylinder q1({0, 0, 0}, 0.0, 0.5, 1.0, 1.0, 3);
  const Cylinder q2({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 3);
  const double v1 = norms::quantity_N_hat(b, q1, q, kInf, 1.0 / 32, 1.0 / 32);
  const double v2 = norms::quantity_N_hat(b, q2, q, kInf, 1.0 / 16, 1.0 / 16);
  CHECK(v1 == doctest::Approx(v2).epsilon(0.05));
  CHECK(std::isfinite(v1));
}

TEST_CASE("energy norm of simple space-time fields") {
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 16, 1.0 / 32);
  SUBCASE("constants have no gradient part") {
    SpaceTimeField c = SpaceTimeField::from_rule(g, [](const Point&, double) { return 1.7; });
    CHECK(norms::v_norm(c) == doctest::Approx(1.7 * std::sqrt(g.slab_measure())).epsilon(1e-9));
  }
  SUBCASE("linear profile matches the closed form") {
    SpaceTimeField f = SpaceTimeField::from_rule(g, [](const Point& x, double) { return x[0]; });
    // ||f||^2_{2,inf} = pi/4, ||Df||^2_{2,2} = pi
    const double expect = std::sqrt(std::numbers::pi / 4.0 + std::numbers::pi);
    CHECK(norms::v_norm(f) == doctest::Approx(expect).epsilon(0.02));
  }
  SUBCASE("zero field") {
    SpaceTimeField z = SpaceTimeField::from_rule(g, [](const Point&, double) { return 0.0; });
    CHECK(norms::v_norm(z) == 0.0);
  }
}

TEST_CASE("parabolic morrey norm of a time-constant field") {
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 16, 1.0 / 32);
  SpaceTimeField ones = SpaceTimeField::from_rule(g, [](const Point&, double) { return 1.0; });
  // alpha = 2/2 + 2/2 - 1 = 1; value = rho^{-1}*sqrt(pi rho^2 * rho^2) = sqrt(pi) rho
  const auto rep = norms::parabolic_morrey_norm(ones, 2.0, 2.0, 1.0);
  CHECK(rep.value == doctest::Approx(std::sqrt(std::numbers::pi) * rep.maximizer_radius)
                         .epsilon(0.03));
  CHECK(rep.maximizer_radius >= 0.85);

  SpaceTimeField zero = SpaceTimeField::from_rule(g, [](const Point&, double) { return 0.0; });
  CHECK(norms::parabolic_morrey_norm(zero, 2.0, 2.0, 1.0).value == 0.0);

  // q = l consistency against a direct space-time sum on sampled sub-cylinders
  Rng rng(3);
  SpaceTimeField noisy(g);
  for (auto& slab : noisy.slabs)
    for (double& x : slab) x = rng.uniform(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    const Point c{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0};
    const double t = rng.uniform(-0.3, 0.0);
    const double rho = rng.uniform(0.2, 0.45);
    const Cylinder sub = Cylinder::normalized(c, t, rho, rho * rho, 2);
    const double aniso = norms::anisotropic_norm_over(noisy, 2.0, 2.0, sub);
    double acc = 0.0;  // independent direct sum
    for (int k = 1; k <= g.steps(); ++k) {
      const double tk = g.slab_time(k);
      if (!(tk > sub.bottom_time() + 1e-12 && tk <= sub.apex_time + 1e-12)) continue;
      for (int id = 0; id < g.interior_count(); ++id)
        if (geom::dist(g.pos(id), c, 2) < rho)
          acc += noisy.slabs[k][id] * noisy.slabs[k][id] * g.h() * g.h() * g.tau();
    }
    CHECK(aniso == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
  }
}
