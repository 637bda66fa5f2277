#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "driftlab/geometry.hpp"
#include "driftlab/rng.hpp"

using namespace driftlab;
using geom::Ball;
using geom::ChainPlan;
using geom::Cylinder;
using geom::Grid;
using geom::Point;

namespace {

// Independent lattice count for cell-centered disks: nodes at ((i+1/2)h, (j+1/2)h).
int brute_disk_count(double R, double h) {
  int count = 0;
  const int m = static_cast<int>(std::ceil(R / h)) + 2;
  for (int i = -m; i < m; ++i)
    for (int j = -m; j < m; ++j) {
      const double x = (i + 0.5) * h, y = (j + 0.5) * h;
      if (x * x + y * y < R * R) ++count;
    }
  return count;
}

// Exact lens area/volume of two overlapping balls at center distance d.
double lens_measure(double r1, double r2, double d, int dim) {
  if (d >= r1 + r2) return 0.0;
  if (dim == 2) {
    auto seg = [](double r, double x) {
      const double c = std::clamp(x / r, -1.0, 1.0);
      return r * r * std::acos(c) - x * std::sqrt(std::max(0.0, r * r - x * x));
    };
    const double x1 = (d * d - r2 * r2 + r1 * r1) / (2.0 * d);
    const double x2 = d - x1;
    return seg(r1, x1) + seg(r2, x2);
  }
  const double num = (r1 + r2 - d) * (r1 + r2 - d) *
                     (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2) * (r1 - r2));
  return std::numbers::pi * num / (12.0 * d);
}

}  // namespace

TEST_CASE("coarse disk grid by direct count") {
  const Ball disk({0.0, 0.0, 0.0}, 1.0, 2);
  const Grid g = Grid::over(disk, 0.5);
  CHECK(g.interior_count() == brute_disk_count(1.0, 0.5));
  CHECK(g.interior_count() == 12);  // the h = R/2 cell-centered disk
  CHECK(g.measure() == doctest::Approx(12 * 0.25));
  CHECK(std::abs(g.measure() - disk.measure()) <= 2.0 * 0.5);
}

TEST_CASE("3-d ball measure within 5 percent at h=1/32") {
  const Ball ball({0.0, 0.0, 0.0}, 1.0, 3);
  const Grid g = Grid::over(ball, 1.0 / 32);
  const double exact = 4.0 / 3.0 * std::numbers::pi;
  CHECK(std::abs(g.measure() - exact) / exact <= 0.05);
}

TEST_CASE("discrete measure converges at first order on the h ladder") {
  const Ball disk({0.3, -0.2, 0.0}, 1.0, 2);
  for (int k = 0; k < 3; ++k) {
    const double h = 1.0 / (8 << k);
    const double err = std::abs(Grid::over(disk, h).measure() - disk.measure());
    CHECK(err <= 4.0 * h);  // O(h): boundary-cell volume with explicit constant
  }
}

TEST_CASE("cylinder grid classifies lateral and bottom slabs") {
  const Cylinder q({0.0, 0.0, 0.0}, 0.0, 1.0, 2.0, 1.0, 2);
  const Grid g = Grid::over(q, 1.0 / 16, 1.0 / 64);
  CHECK(g.spacetime());
  CHECK(g.steps() == 64);
  CHECK(g.slab_time(0) == doctest::Approx(-1.0));
  CHECK(g.slab_time(g.steps()) == doctest::Approx(0.0));
  // boundary nodes hug |x| = 2
  for (int id = g.interior_count(); id < g.node_count(); ++id) {
    const double r = geom::norm(g.pos(id), 2);
    CHECK(r >= 2.0 - 1e-12);
    CHECK(r <= 2.0 + 2.0 * g.h());
  }
  // every interior node's face neighbors are classified
  for (int id = 0; id < g.interior_count(); ++id)
    for (int f = 0; f < 4; ++f) CHECK(g.neighbor(id, f) >= 0);
}

TEST_CASE("grid rejects bad input") {
  const Ball disk({0.0, 0.0, 0.0}, 1.0, 2);
  CHECK_THROWS_WITH(Grid::over(disk, 0.6), "grid too coarse");
  const Cylinder q({0.0, 0.0, 0.0}, 0.0, 1.0, 1.0, 1.0, 2);
  CHECK_THROWS(Grid::over(q, 1.0 / 8, 1.0 / 4));  // tau > h
}

TEST_CASE("ball chain reproduces the dyadic construction") {
  SUBCASE("|y| = 1.5, R = 1") {
    const ChainPlan plan = geom::ball_chain({1.5, 0.0, 0.0}, 0.125, 1.0, 3);
    CHECK(plan.count == 3);
    CHECK(plan.seed_radius == doctest::Approx(0.125));
    CHECK(geom::norm(plan.links.front().center, 3) == doctest::Approx(1.75));
    CHECK(plan.links.back().radius == doctest::Approx(1.0));
    CHECK(geom::norm(plan.links.back().center, 3) == doctest::Approx(0.0));
  }
  SUBCASE("|y| = 1.0, R = 1") {
    const ChainPlan plan = geom::ball_chain({0.0, 1.0, 0.0}, 0.25, 1.0, 2);
    CHECK(plan.count == 2);
    CHECK(plan.seed_radius == doctest::Approx(0.25));
    CHECK(geom::norm(plan.links.front().center, 2) == doctest::Approx(1.5));
  }
  SUBCASE("centered start gives the empty chain") {
    const ChainPlan plan = geom::ball_chain({0.0, 0.0, 0.0}, 0.5, 1.0, 2);
    CHECK(plan.count == 0);
    CHECK(plan.links.empty());
  }
  SUBCASE("inconsistent quarter distance is rejected") {
    CHECK_THROWS_WITH(geom::ball_chain({1.5, 0.0, 0.0}, 0.2, 1.0, 3),
                      "inconsistent chain input");
  }
}

TEST_CASE("ball chain invariants hold exactly on random draws") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = (trial % 2) ? 3 : 2;
    const double R = rng.uniform(0.5, 2.0);
    const Point e = rng.unit_vector(dim);
    const double ry = rng.uniform(1e-3, 2.0 * R * 0.999);
    Point y{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) y[d] = ry * e[d];
    const double rho = 0.25 * (2.0 * R - ry);

    const ChainPlan plan = geom::ball_chain(y, rho, R, dim);
    REQUIRE(!plan.links.empty());

    // seed ball sits inside B_{3 rho}(y)
    const double off = geom::dist(plan.links.front().center, y, dim);
    CHECK(off + plan.seed_radius <= 3.0 * rho + 1e-12);

    for (std::size_t m = 0; m < plan.links.size(); ++m) {
      CHECK(plan.links[m].containment_margin >= -1e-12);  // B_{2 r_m}(y_m) inside B_{2R}
      if (m > 0) {
        const auto& prev = plan.links[m - 1];
        const auto& cur = plan.links[m];
        CHECK(cur.radius == doctest::Approx(2.0 * prev.radius));
        const double d = geom::dist(prev.center, cur.center, dim);
        const double overlap = lens_measure(prev.radius, cur.radius, d, dim);
        const double ball_meas = Ball({0, 0, 0}, cur.radius, dim).measure();
        // every link is in the same similarity class (radii r, 2r at distance
        // 2r); the lens fraction is 0.1117 (2-d) and 0.0508 (3-d)
        const double frac = dim == 2 ? 0.11 : 0.05;
        CHECK(overlap >= frac * ball_meas);
      }
    }
    CHECK(plan.links.back().radius == doctest::Approx(R));
    CHECK(geom::norm(plan.links.back().center, dim) <= 1e-12);
  }
}

TEST_CASE("parabolic chain formulas and containments") {
  SUBCASE("time accumulation follows the dyadic sum") {
    // t^N = s + r0^2 (4^{N+1} - 1)/3 < s + R^2/3
    const ChainPlan plan = geom::parabolic_chain({0.9, 0.0, 0.0}, -2.5, 1.0 / 16, 1.0, 3);
    const double r0 = plan.seed_radius;
    const int N = plan.count;
    const double expected = -2.5 + r0 * r0 * (std::pow(4.0, N + 1) - 1.0) / 3.0;
    CHECK(plan.final_time == doctest::Approx(expected));
    CHECK(plan.final_time < -2.5 + 1.0 / 3.0);
  }
  SUBCASE("|y| = 0.5, s = -2.5, rho = 1/16 on R = 1") {
    const ChainPlan plan = geom::parabolic_chain({0.5, 0.0, 0.0}, -2.5, 1.0 / 16, 1.0, 3);
    CHECK(plan.count == 3);
    for (const auto& link : plan.links) CHECK(link.containment_margin >= -1e-12);
    CHECK(geom::norm(plan.links.back().center, 3) <= 1e-12);
    // brute-force containment of Q^{4,1}_{r}(y;t) in Q_2 over sample points
    Rng rng(7);
    for (const auto& link : plan.links)
      for (int i = 0; i < 200; ++i) {
        const Point x = rng.point_in_ball(Ball(link.center, 4.0 * link.radius, 3));
        const double t = rng.uniform(link.time - link.radius * link.radius, link.time);
        CHECK(geom::norm(x, 3) <= 2.0 + 1e-9);
        CHECK(t <= 0.0 + 1e-9);
        CHECK(t >= -4.0 - 1e-9);
      }
  }
  SUBCASE("degenerate single link via the raw builder") {
    const ChainPlan plan = geom::parabolic_chain_links({0.0, 0.0, 0.0}, -1.0, 0.5, 1.0, 2);
    CHECK(plan.count == 0);
    CHECK(plan.links.size() == 1);
    CHECK(plan.seed_radius == doctest::Approx(0.5));
    CHECK(plan.links[0].time == doctest::Approx(-1.0 + 0.25));
  }
  SUBCASE("start outside the admissible window is rejected") {
    CHECK_THROWS_WITH(geom::parabolic_chain({0.0, 0.0, 0.0}, -1.0, 0.1, 1.0, 2),
                      "chain start out of range");
  }
}

TEST_CASE("parabolic chain final-time bound holds on random draws") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = (trial % 2) ? 3 : 2;
    const double R = rng.uniform(0.5, 2.0);
    const Point e = rng.unit_vector(dim);
    const double ry = rng.uniform(0.0, 1.999 * R);
    Point y{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) y[d] = ry * e[d];
    const double s = rng.uniform(-3.999 * R * R, -2.0 * R * R);
    const Cylinder host({0.0, 0.0, 0.0}, 0.0, 2.0 * R, 1.0, 1.0, dim);
    const double quarter = 0.25 * geom::parabolic_dist(y, s, host);
    if (quarter <= 1e-6) continue;
    const double rho = quarter * rng.uniform(0.2, 1.0);

    const ChainPlan plan = geom::parabolic_chain(y, s, rho, R, dim);
    CHECK(plan.final_time <= -5.0 / 3.0 * R * R + 1e-9);
    CHECK(plan.links.back().radius == doctest::Approx(R / 2.0));
    CHECK(geom::norm(plan.links.back().center, dim) <= 1e-12);
    for (const auto& link : plan.links) CHECK(link.containment_margin >= -1e-12);
  }
}

TEST_CASE("layer split finds small-norm layers") {
  SUBCASE("zero drift") {
    const auto out =
        geom::layer_split([](const Point&) { return Point{0, 0, 0}; }, 1.0, 0.5, 3);
    CHECK(out.subdivisions == 1);
    CHECK(out.layer.norm_value == doctest::Approx(0.0));
  }
  SUBCASE("constant unit drift in 3-d") {
    const auto out =
        geom::layer_split([](const Point&) { return Point{1, 0, 0}; }, 1.0, 0.5, 3);
    // oracle: for |b| = 1 the layer norm is the clipped shell volume^(1/3)
    const double lo = std::max(1.0, out.layer.mid_radius - out.layer.half_width);
    const double hi = std::min(2.0, out.layer.mid_radius + out.layer.half_width);
    const double vol = 4.0 / 3.0 * std::numbers::pi * (hi * hi * hi - lo * lo * lo);
    CHECK(out.layer.norm_value == doctest::Approx(std::cbrt(vol)).epsilon(0.02));
    CHECK(out.layer.norm_value <= 0.5);
  }
  SUBCASE("inverse-square radial drift in 3-d") {
    auto b = [](const Point& x) {
      const double r2 = geom::dot(x, x, 3);
      return Point{x[0] / r2, x[1] / r2, x[2] / r2};
    };
    const auto out = geom::layer_split(b, 1.0, 0.3, 3);
    const double lo = std::max(1.0, out.layer.mid_radius - out.layer.half_width);
    const double hi = std::min(2.0, out.layer.mid_radius + out.layer.half_width);
    // |b| = 1/r: integral of r^-3 over the shell is 4 pi ln(hi/lo)
    const double exact = std::cbrt(4.0 * std::numbers::pi * std::log(hi / lo));
    CHECK(out.layer.norm_value == doctest::Approx(exact).epsilon(0.02));
    CHECK(out.layer.norm_value <= 0.3);
  }
}
