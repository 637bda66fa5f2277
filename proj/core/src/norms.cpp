#include "driftlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace driftlab::norms {

namespace {

void check_q(double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("exponent must satisfy q >= 1");
}

double finalize(double acc, double q) { return std::pow(acc, 1.0 / q); }

// Accumulate |f|^q over interior nodes inside `sub` (whole region if null).
double spatial_accum(const Grid& g, const std::function<double(int)>& value, double q,
                     const Ball* sub, double* max_out) {
  const double cell = std::pow(g.h(), g.dim());
  double acc = 0.0, mx = 0.0;
  for (int id = 0; id < g.interior_count(); ++id) {
    if (sub && !sub->contains(g.pos(id))) continue;
    const double a = std::abs(value(id));
    if (a > mx) mx = a;
    if (q != kInf) acc += std::pow(a, q) * cell;
  }
  if (max_out) *max_out = mx;
  return acc;
}

}  // namespace

NormParams NormParams::elliptic(double q, int dim) {
  if (!(q > dim / 2.0 && q <= dim))
    throw std::invalid_argument("inadmissible exponent: requires n/2 < q <= n");
  NormParams p;
  p.q = q;
  p.ell = q;
  p.alpha = dim / q - 1.0;
  return p;
}

NormParams NormParams::parabolic(double q, double ell, int dim) {
  if (!(q >= 1.0) || !(ell >= 1.0))
    throw std::invalid_argument("inadmissible exponents: require q, l >= 1");
  const double alpha = (q == kInf ? 0.0 : dim / q) + (ell == kInf ? 0.0 : 2.0 / ell) - 1.0;
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("inadmissible exponents: require n/q + 2/l - 1 in [0, 1[");
  NormParams p;
  p.q = q;
  p.ell = ell;
  p.alpha = alpha;
  return p;
}

// --- Lebesgue ----------------------------------------------------------------

double lebesgue_norm(const DiscreteField& f, double q) {
  check_q(q);
  const Grid& g = *f.grid;
  double mx = 0.0;
  const double acc = spatial_accum(g, [&](int id) { return f.v[id]; }, q, nullptr, &mx);
  return q == kInf ? mx : finalize(acc, q);
}

double lebesgue_norm(const Grid& g, const ScalarRule& f, double q) {
  check_q(q);
  double mx = 0.0;
  const double acc = spatial_accum(g, [&](int id) { return f(g.pos(id)); }, q, nullptr, &mx);
  return q == kInf ? mx : finalize(acc, q);
}

double lebesgue_norm_over(const DiscreteField& f, double q, const Ball& sub) {
  check_q(q);
  const Grid& g = *f.grid;
  double mx = 0.0;
  const double acc = spatial_accum(g, [&](int id) { return f.v[id]; }, q, &sub, &mx);
  return q == kInf ? mx : finalize(acc, q);
}

double lebesgue_norm_over(const Grid& g, const ScalarRule& f, double q, const Ball& sub) {
  check_q(q);
  double mx = 0.0;
  const double acc = spatial_accum(g, [&](int id) { return f(g.pos(id)); }, q, &sub, &mx);
  return q == kInf ? mx : finalize(acc, q);
}

double lebesgue_norm(const SpaceTimeField& f, double q) {
  check_q(q);
  const Grid& g = *f.grid;
  const double cell = std::pow(g.h(), g.dim()) * g.tau();
  double acc = 0.0, mx = 0.0;
  for (int k = 1; k <= g.steps(); ++k)
    for (int id = 0; id < g.interior_count(); ++id) {
      const double a = std::abs(f.slabs[k][id]);
      if (a > mx) mx = a;
      if (q != kInf) acc += std::pow(a, q) * cell;
    }
  return q == kInf ? mx : finalize(acc, q);
}

// --- Anisotropic -------------------------------------------------------------

namespace {

double aniso_core(const SpaceTimeField& f, double q, double ell, const Cylinder* sub) {
  const Grid& g = *f.grid;
  const Ball slab = sub ? sub->slab() : Ball{};
  double outer = 0.0, outer_max = 0.0;
  for (int k = 1; k <= g.steps(); ++k) {
    const double t = g.slab_time(k);
    if (sub && !(t > sub->bottom_time() + 1e-12 && t <= sub->apex_time + 1e-12)) continue;
    double mx = 0.0;
    const double acc =
        spatial_accum(g, [&](int id) { return f.slabs[k][id]; }, q, sub ? &slab : nullptr, &mx);
    const double inner = q == kInf ? mx : finalize(acc, q);
    if (ell == kInf)
      outer_max = std::max(outer_max, inner);
    else
      outer += std::pow(inner, ell) * g.tau();
  }
  return ell == kInf ? outer_max : finalize(outer, ell);
}

}  // namespace

double anisotropic_norm(const SpaceTimeField& f, double q, double ell) {
  check_q(q);
  check_q(ell);
  return aniso_core(f, q, ell, nullptr);
}

double anisotropic_norm_over(const SpaceTimeField& f, double q, double ell,
                             const Cylinder& sub) {
  check_q(q);
  check_q(ell);
  return aniso_core(f, q, ell, &sub);
}

// --- Morrey ------------------------------------------------------------------

namespace {

std::vector<int> candidate_centers(const Grid& g, int stride) {
  std::vector<int> out;
  const auto cells = g.cells();
  if (stride <= 0) stride = std::max(1, (*std::max_element(cells.begin(), cells.end())) / 12);
  for (int iz = 0; iz < cells[2]; iz += (g.dim() == 3 ? stride : 1))
    for (int iy = 0; iy < cells[1]; iy += stride)
      for (int ix = 0; ix < cells[0]; ix += stride) {
        const int id = g.node_at(ix, iy, iz);
        if (id >= 0 && g.is_interior(id)) out.push_back(id);
      }
  // The node closest to the region center is always a candidate.
  const Point c = g.ball() ? g.ball()->center : g.cylinder()->center;
  int best = -1;
  double bestd = kInf;
  for (int id = 0; id < g.interior_count(); ++id) {
    const double d = geom::dist(g.pos(id), c, g.dim());
    if (d < bestd) {
      bestd = d;
      best = id;
    }
  }
  if (best >= 0) out.push_back(best);
  return out;
}

double ball_norm_q(const Grid& g, const std::function<double(int)>& value, double q,
                   const Point& x, double rho) {
  const double cell = std::pow(g.h(), g.dim());
  const Point lo = g.box_lo();
  const double h = g.h();
  int a[3] = {0, 0, 0}, b[3] = {0, 0, 0};
  for (int d = 0; d < g.dim(); ++d) {
    a[d] = std::max(0, static_cast<int>(std::floor((x[d] - rho - lo[d]) / h - 0.5)));
    b[d] = std::min(g.cells()[d] - 1,
                    static_cast<int>(std::ceil((x[d] + rho - lo[d]) / h - 0.5)));
  }
  double acc = 0.0, mx = 0.0;
  for (int iz = (g.dim() == 3 ? a[2] : 0); iz <= (g.dim() == 3 ? b[2] : 0); ++iz)
    for (int iy = a[1]; iy <= b[1]; ++iy)
      for (int ix = a[0]; ix <= b[0]; ++ix) {
        const int id = g.node_at(ix, iy, iz);
        if (id < 0 || !g.is_interior(id)) continue;
        if (geom::dist(g.pos(id), x, g.dim()) >= rho) continue;
        const double v = std::abs(value(id));
        if (v > mx) mx = v;
        if (q != kInf) acc += std::pow(v, q) * cell;
      }
  return q == kInf ? mx : finalize(acc, q);
}

NormReport morrey_core(const Grid& g, const std::function<double(int)>& value, double q,
                       double alpha, const MorreyOptions& opts) {
  const double R = g.ball() ? g.ball()->radius : g.cylinder()->spatial_radius();
  NormReport rep;
  rep.resolution = g.h();
  for (int center : candidate_centers(g, opts.center_stride)) {
    const Point x = g.pos(center);
    const double rho_max = g.boundary_distance(x);
    if (rho_max <= g.h()) continue;
    for (int j = 0; j < opts.dyadic_levels; ++j) {
      for (double rho : {rho_max * std::ldexp(1.0, -j), R * std::ldexp(1.0, -j)}) {
        if (rho > rho_max || rho <= g.h()) continue;
        const double val = std::pow(rho, -alpha) * ball_norm_q(g, value, q, x, rho);
        if (val > rep.value) {
          rep.value = val;
          rep.maximizer_center = x;
          rep.maximizer_radius = rho;
        }
      }
    }
  }
  return rep;
}

}  // namespace

NormReport morrey_norm(const DiscreteField& f, double q, double alpha, MorreyOptions opts) {
  check_q(q);
  return morrey_core(*f.grid, [&](int id) { return f.v[id]; }, q, alpha, opts);
}

NormReport morrey_norm(const Grid& g, const ScalarRule& f, double q, double alpha,
                       MorreyOptions opts) {
  check_q(q);
  return morrey_core(g, [&](int id) { return f(g.pos(id)); }, q, alpha, opts);
}

NormReport parabolic_morrey_norm(const SpaceTimeField& f, double q, double ell, double alpha,
                                 MorreyOptions opts) {
  check_q(q);
  check_q(ell);
  const Grid& g = *f.grid;
  NormReport rep;
  rep.resolution = g.h();
  const int slab_stride = std::max(1, g.steps() / 8);
  for (int center : candidate_centers(g, opts.center_stride)) {
    const Point x = g.pos(center);
    const double rho_space = g.boundary_distance(x);
    if (rho_space <= g.h()) continue;
    for (int k = g.steps(); k >= 1; k -= slab_stride) {
      const double t = g.slab_time(k);
      const double rho_max = std::min(rho_space, std::sqrt(t - g.bottom_time()));
      if (rho_max <= g.h()) continue;
      for (int j = 0; j < opts.dyadic_levels; ++j) {
        const double rho = rho_max * std::ldexp(1.0, -j);
        if (rho <= g.h()) continue;
        const Cylinder sub = Cylinder::normalized(x, t, rho, rho * rho, g.dim());
        const double val = std::pow(rho, -alpha) * aniso_core(f, q, ell, &sub);
        if (val > rep.value) {
          rep.value = val;
          rep.maximizer_center = x;
          rep.maximizer_radius = rho;
          rep.maximizer_time = t;
        }
      }
    }
  }
  return rep;
}

// --- Drift quantities ----------------------------------------------------------

double quantity_N(const fields::DriftField& b, const Point& x0, double R, double lambda,
                  double q, double h) {
  NormParams::elliptic(q, b.dim());
  const Ball host(x0, lambda * R, b.dim());
  const Grid g = Grid::over(host, h);
  return quantity_N(b, g, R, q);
}

double quantity_N(const fields::DriftField& b, const Grid& g, double R, double q) {
  NormParams::elliptic(q, b.dim());
  const double h = g.h();
  const double nrm =
      lebesgue_norm(g, [&](const Point& x) { return b.magnitude_capped(x, h); }, q);
  return std::pow(R, 1.0 - b.dim() / q) * nrm;
}

double quantity_N_hat(const fields::DriftField& b, const Cylinder& Q, double q, double ell,
                      double h, double tau) {
  const NormParams p = NormParams::parabolic(q, ell, b.dim());
  const Grid g = Grid::over(Q, h, tau);
  SpaceTimeField f = SpaceTimeField::from_rule(
      g, [&](const Point& x, double t) { return b.magnitude_capped(x, h, t); });
  return std::pow(Q.radius, -p.alpha) * anisotropic_norm(f, q, ell);
}

// --- Energy norm ---------------------------------------------------------------

double v_norm(const SpaceTimeField& f) {
  const Grid& g = *f.grid;
  const double h = g.h();
  const double cell = std::pow(h, g.dim());
  double sup_sq = 0.0;
  double grad_sq = 0.0;
  for (int k = 1; k <= g.steps(); ++k) {
    const auto& u = f.slabs[k];
    double slab_sq = 0.0;
    for (int id = 0; id < g.interior_count(); ++id) {
      slab_sq += u[id] * u[id] * cell;
      double gsq = 0.0;
      for (int d = 0; d < g.dim(); ++d) {
        const int lo = g.neighbor(id, 2 * d);
        const int hi = g.neighbor(id, 2 * d + 1);
        double der = 0.0;
        if (lo >= 0 && hi >= 0)
          der = (u[hi] - u[lo]) / (2.0 * h);
        else if (hi >= 0)
          der = (u[hi] - u[id]) / h;
        else if (lo >= 0)
          der = (u[id] - u[lo]) / h;
        gsq += der * der;
      }
      grad_sq += gsq * cell * g.tau();
    }
    sup_sq = std::max(sup_sq, slab_sq);
  }
  return std::sqrt(sup_sq + grad_sq);
}

}  // namespace driftlab::norms
