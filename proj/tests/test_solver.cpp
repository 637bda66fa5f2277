#include <cmath>
#include <numbers>

#include "doctest.h"
#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"
#include "driftlab/norms.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/solver.hpp"

using namespace driftlab;
using fields::DriftField;
using fields::EllipticTensor;
using geom::Ball;
using geom::Cylinder;
using geom::Grid;
using geom::Point;
using solver::DiscreteOperator;

namespace {

double linf_error(const DiscreteField& u, const ScalarRule& exact) {
  const Grid& g = *u.grid;
  double worst = 0.0;
  for (int id = 0; id < g.interior_count(); ++id)
    worst = std::max(worst, std::abs(u.v[id] - exact(g.pos(id))));
  return worst;
}

}  // namespace

TEST_CASE("drift-free assembly reproduces the 5-point stencil") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 8);
  const auto op = DiscreteOperator::elliptic(fields::make_identity_tensor(2),
                                             fields::make_zero_drift(2), g);
  const double h2 = 64.0;
  // pick a node with all-interior neighbors
  for (int id = 0; id < g.interior_count(); ++id) {
    bool inner = true;
    for (int f = 0; f < 4; ++f) inner = inner && g.neighbor(id, f) < g.interior_count();
    if (!inner) continue;
    CHECK(op.diagonal(id) == doctest::Approx(4.0 * h2));
    for (int f = 0; f < 4; ++f) CHECK(op.face_coefficient(id, f) == doctest::Approx(-h2));
    break;
  }
  CHECK(op.info().symmetric);
  CHECK(op.info().monotone);
}

TEST_CASE("central drift adds +-1/(2h) on the x1 neighbors") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 8);
  const auto op = DiscreteOperator::elliptic(fields::make_identity_tensor(2),
                                             fields::make_constant_drift({1, 0, 0}, 2), g);
  const double h2 = 64.0, inv2h = 4.0;
  for (int id = 0; id < g.interior_count(); ++id) {
    bool inner = true;
    for (int f = 0; f < 4; ++f) inner = inner && g.neighbor(id, f) < g.interior_count();
    if (!inner) continue;
    CHECK(op.face_coefficient(id, 0) == doctest::Approx(-h2 - inv2h));
    CHECK(op.face_coefficient(id, 1) == doctest::Approx(-h2 + inv2h));
    CHECK(op.face_coefficient(id, 2) == doctest::Approx(-h2));
    break;
  }
  CHECK(!op.info().upwind_used);
}

TEST_CASE("operator is symmetric for drift-free variable diagonal tensors") {
  const auto a = fields::make_diagonal_tensor(2, {1.0, 0.8, 0.0}, {0.4, 0.3, 0.0},
                                              {1.0, 2.0, 0.0}, {0.3, 0.9, 0.0}, 0.4);
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 8);
  const auto op = DiscreteOperator::elliptic(a, fields::make_zero_drift(2), g);
  for (int id = 0; id < g.interior_count(); ++id)
    for (int f = 0; f < 4; ++f) {
      const int nb = g.neighbor(id, f);
      if (nb < 0 || nb >= g.interior_count()) continue;
      const int back = f ^ 1;  // opposite face
      const double rel = std::abs(op.face_coefficient(id, f) - op.face_coefficient(nb, back)) /
                         std::abs(op.face_coefficient(id, f));
      CHECK(rel <= 1e-12);
    }
}

TEST_CASE("linear boundary data is reproduced exactly at interior nodes") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 16);
  const auto res = solver::solve_elliptic(fields::make_identity_tensor(2),
                                          fields::make_zero_drift(2), g,
                                          [](const Point& x) { return x[0]; });
  CHECK(linf_error(res.u, [](const Point& x) { return x[0]; }) <= 1e-9);
}

TEST_CASE("exponential solution converges at second order with unit drift") {
  // u = e^{x1} solves -Lap(u) + (1,0,0).Du = 0
  const auto exact = [](const Point& x) { return std::exp(x[0]); };
  double errs[2];
  int k = 0;
  for (double h : {1.0 / 8, 1.0 / 16}) {
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), h);
    const auto res = solver::solve_elliptic(fields::make_identity_tensor(3),
                                            fields::make_constant_drift({1, 0, 0}, 3), g, exact);
    errs[k++] = linf_error(res.u, exact);
  }
  CHECK(errs[0] / errs[1] >= 3.0);
  CHECK(errs[0] / errs[1] <= 5.0);
}

TEST_CASE("strong-drift regime keeps first order under upwinding") {
  // forced problem with known solution u = sin(pi x1) sin(pi x2), b = (80, 0)
  const double pi = std::numbers::pi;
  const auto exact = [pi](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  const auto forcing = [pi](const Point& x) {
    return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]) +
           80.0 * pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
  };
  double errs[3];
  int k = 0;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), h);
    const auto op = DiscreteOperator::elliptic(fields::make_identity_tensor(2),
                                               fields::make_constant_drift({80, 0, 0}, 2), g,
                                               forcing);
    CHECK(op.info().upwind_used);
    errs[k++] = linf_error(solver::solve_elliptic(op, exact).u, exact);
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 >= 0.9);
  CHECK(order2 >= 0.9);
}

TEST_CASE("smooth-regime ladder shows order at least 1.8") {
  const auto exact = [](const Point& x) { return std::exp(x[0]); };
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double h = 1.0 / (8 << k);
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), h);
    const auto res = solver::solve_elliptic(fields::make_identity_tensor(2),
                                            fields::make_constant_drift({1, 0, 0}, 2), g, exact);
    const double err = linf_error(res.u, exact);
    if (k > 0) CHECK(std::log2(prev / err) >= 1.8);
    prev = err;
  }
}

TEST_CASE("upwind activates where the radial drift crosses the Peclet bound") {
  // |b| = 2/r crosses 2 nu/h on r < h/nu; with nu = 1/2 the band (h, 2h) sits
  // outside the cap tube, so the switch really fires there.
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 8);
  const auto half = fields::make_diagonal_tensor(3, {0.5, 0.5, 0.5}, 0.5);
  const auto op = DiscreteOperator::elliptic(half, fields::make_radial_drift(2.0, 3), g);
  CHECK(op.info().max_peclet > 1.0);
  CHECK(op.info().upwind_used);
  // with unit ellipticity the cap keeps every Peclet at or below one
  const auto op1 = DiscreteOperator::elliptic(fields::make_identity_tensor(3),
                                              fields::make_radial_drift(2.0, 3), g);
  CHECK(!op1.info().upwind_used);
}

TEST_CASE("discrete maximum principle holds exactly on seeded draws") {
  Rng rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = (trial % 2) ? 3 : 2;
    const double h = dim == 2 ? 1.0 / 16 : 1.0 / 8;
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, dim), h);

    const double nu = 0.5;
    const double a0 = rng.uniform(0.8, 1.2);
    const double a1 = rng.uniform(0.0, std::min(a0 - nu, 1.0 / nu - a0) * 0.9);
    const auto a = fields::make_diagonal_tensor(
        dim, {a0, a0, a0}, {a1, a1, a1}, {1.0, 2.0, 1.0},
        {rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)}, nu);

    DriftField b = fields::make_zero_drift(dim);
    switch (trial % 4) {
      case 0: {
        Point v{rng.uniform(-30, 30), rng.uniform(-30, 30), 0.0};
        if (dim == 3) v[2] = rng.uniform(-30, 30);
        b = fields::make_constant_drift(v, dim);
        break;
      }
      case 1:
        if (dim == 2) b = fields::make_stream2d_drift(rng.uniform(-8, 8), 1.0, 2.0);
        break;
      case 2:
        b = fields::make_radial_drift(rng.uniform(-3, 3), dim);
        break;
      default:
        if (dim == 3) b = fields::make_axisymmetric_drift(trial % 8 < 4 ? -1.0 : 1.0);
        break;
    }

    const Point pole = rng.unit_vector(dim);
    const double amp = rng.uniform(0.5, 2.0);
    const double shift = rng.uniform(-1.0, 1.0);
    const auto data = [=](const Point& x) {
      Point p{1.3 * pole[0], 1.3 * pole[1], 1.3 * pole[2]};
      return amp * std::exp(-4.0 * geom::dist(x, p, dim)) + shift;
    };

    const auto res = solver::solve_elliptic(a, b, g, data);
    double lo = 1e300, hi = -1e300;
    for (int id = g.interior_count(); id < g.node_count(); ++id) {
      lo = std::min(lo, res.u.v[id]);
      hi = std::max(hi, res.u.v[id]);
    }
    for (int id = 0; id < g.interior_count(); ++id) {
      CHECK(res.u.v[id] >= lo);
      CHECK(res.u.v[id] <= hi);
    }
  }
}

TEST_CASE("comparison principle: ordered data gives ordered solutions") {
  Rng rng(2718);
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 2), 1.0 / 16);
  const auto a = fields::make_identity_tensor(2);
  for (int trial = 0; trial < 10; ++trial) {
    const DriftField b = fields::make_radial_drift(rng.uniform(-2, 2), 2);
    const Point c = rng.unit_vector(2);
    const auto g1 = [&](const Point& x) { return std::sin(3.0 * x[0]) + x[1]; };
    const auto g2 = [&](const Point& x) {
      Point p{1.2 * c[0], 1.2 * c[1], 0.0};
      return g1(x) + 0.3 * std::exp(-6.0 * geom::dist(x, p, 2));
    };
    const auto u1 = solver::solve_elliptic(a, b, g, g1);
    const auto u2 = solver::solve_elliptic(a, b, g, g2);
    for (int id = 0; id < g.interior_count(); ++id) CHECK(u2.u.v[id] >= u1.u.v[id] - 1e-10);
  }
}

TEST_CASE("space-time linear solution is exact for the implicit scheme") {
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 16, 1.0 / 32);
  const auto data = [](const Point& x, double t) { return x[0] - t; };
  const auto res = solver::solve_parabolic(fields::make_identity_tensor(2),
                                           fields::make_constant_drift({1, 0, 0}, 2), g, data);
  double worst = 0.0;
  for (int k = 0; k <= g.steps(); ++k)
    for (int id = 0; id < g.interior_count(); ++id)
      worst = std::max(worst,
                       std::abs(res.u.slabs[k][id] - (g.pos(id)[0] - g.slab_time(k))));
  CHECK(worst <= 1e-9);
}

TEST_CASE("heat kernel slice is tracked at first order in tau") {
  const auto kernel = [](const Point& x, double t) {
    const double s = t + 1.5;  // pole at t0 = -1.5, x0 = (0.3, 0)
    const double dx = x[0] - 0.3, dy = x[1];
    return std::exp(-(dx * dx + dy * dy) / (4.0 * s)) / (4.0 * std::numbers::pi * s);
  };
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 1.0, 1.0, 2);
  double errs[2];
  int k = 0;
  for (double h : {1.0 / 8, 1.0 / 16}) {
    const Grid g = Grid::over(q, h, h / 2.0);
    const auto res = solver::solve_parabolic(fields::make_identity_tensor(2),
                                             fields::make_zero_drift(2), g, kernel);
    double worst = 0.0;
    for (int kk = 1; kk <= g.steps(); ++kk)
      for (int id = 0; id < g.interior_count(); ++id)
        worst = std::max(worst, std::abs(res.u.slabs[kk][id] - kernel(g.pos(id), g.slab_time(kk))));
    errs[k++] = worst;
  }
  CHECK(errs[1] <= errs[0] / 1.7);
  CHECK(errs[1] <= 2e-3);
}

TEST_CASE("constant data is a fixed point of the time stepper") {
  const Cylinder q({0, 0, 0}, 0.0, 1.0, 2.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 8, 1.0 / 16);
  const auto res = solver::solve_parabolic(fields::make_identity_tensor(2),
                                           fields::make_stream2d_drift(2.0, 1.0, 1.0), g,
                                           [](const Point&, double) { return 3.25; });
  for (int k = 0; k <= g.steps(); ++k)
    for (int id = 0; id < g.interior_count(); ++id)
      CHECK(res.u.slabs[k][id] == doctest::Approx(3.25).epsilon(1e-10));
}

TEST_CASE("residual check certifies candidates") {
  const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), 1.0 / 16);
  const auto a = fields::make_identity_tensor(3);
  const DriftField b = fields::make_constant_drift({1, 0, 0}, 3);
  const auto op = DiscreteOperator::elliptic(a, b, g);

  SUBCASE("the discrete solution itself") {
    const auto res = solver::solve_elliptic(op, [](const Point& x) { return std::exp(x[0]); });
    // scale-invariant certificate: residual of the solved field
    DiscreteField sol = res.u;
    CHECK(op.residual_max(sol) <= 1e-4);  // A u - rhs folding differs at boundary rows
  }
  SUBCASE("an analytic candidate shows its truncation order") {
    double prev = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double h = 1.0 / (8 << k);
      const Grid gh = Grid::over(Ball({0, 0, 0}, 1.0, 3), h);
      const auto oph = DiscreteOperator::elliptic(a, b, gh);
      const DiscreteField cand =
          DiscreteField::from_rule(gh, [](const Point& x) { return std::exp(x[0]); });
      const double r = oph.residual_max(cand);
      if (k > 0) CHECK(prev / r >= 3.0);
      prev = r;
    }
  }
  SUBCASE("garbage candidates report large residuals without throwing") {
    Rng rng(1);
    DiscreteField junk(g);
    for (double& x : junk.v) x = rng.uniform(-1, 1);
    CHECK(op.residual_max(junk) > 1.0);
  }
}

TEST_CASE("singular outward drift admits the cone candidate off the origin") {
  // b = 2x/|x|^2 in 3-d: u = |x| solves the equation away from the origin.
  const auto cone = [](const Point& x) { return geom::norm(x, 3); };
  const auto b = fields::make_radial_drift(2.0, 3);
  const auto a = fields::make_identity_tensor(3);
  double prev = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double h = 1.0 / (8 << k);
    const Grid g = Grid::over(Ball({0, 0, 0}, 1.0, 3), h);
    const auto op = DiscreteOperator::elliptic(a, b, g);
    const DiscreteField cand = DiscreteField::from_rule(g, cone);
    const auto off_origin = [](const Point& x) { return geom::norm(x, 3) > 0.25; };
    const double r = op.residual_max(cand, off_origin);
    if (k > 0) CHECK(r <= prev);  // truncation decreases with h off the singular point
    prev = r;
    CHECK(r <= 60.0 * h * h);  // second-order truncation of |x| away from 0
  }
}
