#include "driftlab/field.hpp"

#include <cmath>

namespace driftlab {

using geom::Grid;
using geom::Point;

DiscreteField DiscreteField::from_rule(const Grid& g, const ScalarRule& f) {
  DiscreteField out(g);
  for (int id = 0; id < g.node_count(); ++id) out.v[id] = f(g.pos(id));
  return out;
}

SpaceTimeField SpaceTimeField::from_rule(const Grid& g, const SpaceTimeRule& f) {
  SpaceTimeField out(g);
  for (int k = 0; k <= g.steps(); ++k) {
    const double t = g.slab_time(k);
    for (int id = 0; id < g.node_count(); ++id) out.slabs[k][id] = f(g.pos(id), t);
  }
  return out;
}

namespace {

bool gather(const Grid& g, const std::vector<double>& vals, const Point& x, double& out) {
  const int dim = g.dim();
  const Point lo = g.box_lo();
  const double h = g.h();
  int base[3] = {0, 0, 0};
  double frac[3] = {0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    const double u = (x[d] - lo[d]) / h - 0.5;
    base[d] = static_cast<int>(std::floor(u));
    frac[d] = u - base[d];
  }
  double acc = 0.0, wsum = 0.0;
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    int ix = base[0] + (c & 1);
    int iy = base[1] + ((c >> 1) & 1);
    int iz = dim == 3 ? base[2] + ((c >> 2) & 1) : 0;
    const int id = g.node_at(ix, iy, iz);
    if (id < 0) continue;
    double w = 1.0;
    const int bits[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
    for (int d = 0; d < dim; ++d) w *= bits[d] ? frac[d] : 1.0 - frac[d];
    acc += w * vals[id];
    wsum += w;
  }
  if (wsum < 1e-14) return false;
  out = acc / wsum;
  return true;
}

double sample_with_fallback(const Grid& g, const std::vector<double>& vals, Point x) {
  double out = 0.0;
  if (gather(g, vals, x, out)) return out;
  // Walk toward the region center until the stencil picks up nodes.
  const Point c = g.ball() ? g.ball()->center : g.cylinder()->center;
  for (int i = 0; i < 8; ++i) {
    const double d = geom::dist(x, c, g.dim());
    if (d < 1e-14) break;
    const double step = std::min(g.h(), d);
    for (int k = 0; k < g.dim(); ++k) x[k] += (c[k] - x[k]) / d * step;
    if (gather(g, vals, x, out)) return out;
  }
  return out;
}

}  // namespace

double DiscreteField::sample(const Point& x) const { return sample_with_fallback(*grid, v, x); }

double SpaceTimeField::sample(const Point& x, double t) const {
  const Grid& g = *grid;
  const double u = (t - g.bottom_time()) / g.tau();
  int k = static_cast<int>(std::floor(u));
  k = std::max(0, std::min(k, g.steps() - 1));
  const double frac = std::max(0.0, std::min(1.0, u - k));
  const double lo = sample_with_fallback(g, slabs[k], x);
  const double hi = sample_with_fallback(g, slabs[k + 1], x);
  return (1.0 - frac) * lo + frac * hi;
}

}  // namespace driftlab
