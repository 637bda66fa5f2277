#include "driftlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace driftlab::solver {

namespace {

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

int corner_neighbor(const Grid& g, int id, int axis_i, int si, int axis_j, int sj) {
  auto c = g.coords(id);
  c[axis_i] += si;
  c[axis_j] += sj;
  return g.node_at(c[0], c[1], c[2]);
}

}  // namespace

DiscreteOperator DiscreteOperator::elliptic(const EllipticTensor& a, const DriftField& b,
                                            const Grid& g, const ScalarRule& forcing,
                                            double time) {
  DiscreteOperator op;
  op.grid_ = &g;
  const int n = g.dim();
  const int ni = g.interior_count();
  const double h = g.h();
  const double inv_h2 = 1.0 / (h * h);
  op.diag_.assign(ni, 0.0);
  op.face_.assign(std::size_t(ni) * 6, 0.0);
  const bool diagonal = a.diagonal();
  if (!diagonal) op.cross_.assign(std::size_t(ni) * 12, 0.0);
  if (forcing) op.forcing_.assign(ni, 0.0);

  op.info_.symmetric = b.trivial();
  op.info_.monotone = diagonal;

  const double nu = a.nu();
  for (int id = 0; id < ni; ++id) {
    const Point x = g.pos(id);
    double diag = 0.0;
    double* face = &op.face_[std::size_t(id) * 6];

    const fields::Mat ax = a.at(x, time);
    for (int d = 0; d < n; ++d) {
      for (int s = 0; s < 2; ++s) {
        Point xn = x;
        xn[d] += (s ? h : -h);
        const double an = a.entry(xn, d, d, time);
        const double am = ax[3 * d + d];
        const double hm = 2.0 * am * an / (am + an);
        face[2 * d + s] -= hm * inv_h2;
        diag += hm * inv_h2;
      }
    }

    if (!b.trivial()) {
      const Point v = b.capped(x, h, time);
      const double pe = geom::norm(v, n) * h / (2.0 * nu);
      op.info_.max_peclet = std::max(op.info_.max_peclet, pe);
      if (pe <= 1.0 + 1e-12) {
        for (int d = 0; d < n; ++d) {
          face[2 * d + 1] += v[d] / (2.0 * h);
          face[2 * d] -= v[d] / (2.0 * h);
        }
      } else {
        op.info_.upwind_used = true;
        ++op.info_.upwinded_nodes;
        for (int d = 0; d < n; ++d) {
          if (v[d] > 0.0) {
            diag += v[d] / h;
            face[2 * d] -= v[d] / h;
          } else if (v[d] < 0.0) {
            diag -= v[d] / h;
            face[2 * d + 1] += v[d] / h;
          }
        }
      }
    }

    if (!diagonal) {
      double* cr = &op.cross_[std::size_t(id) * 12];
      const int npairs = (n == 3) ? 3 : 1;
      for (int p = 0; p < npairs; ++p) {
        const int i = kPairs[p][0], j = kPairs[p][1];
        Point xp = x, xm = x, yp = x, ym = x;
        xp[i] += 0.5 * h;
        xm[i] -= 0.5 * h;
        yp[j] += 0.5 * h;
        ym[j] -= 0.5 * h;
        const double aP = a.entry(xp, i, j, time);
        const double aM = a.entry(xm, i, j, time);
        const double bP = a.entry(yp, i, j, time);
        const double bM = a.entry(ym, i, j, time);
        const double c4 = 0.25 * inv_h2;
        // corners (+i+j), (+i-j), (-i+j), (-i-j)
        cr[4 * p + 0] = -(aP + bP) * c4;
        cr[4 * p + 1] = (aP + bM) * c4;
        cr[4 * p + 2] = (aM + bP) * c4;
        cr[4 * p + 3] = -(aM + bM) * c4;
        // edge folds from variable off-diagonal coefficients
        face[2 * j + 1] += -(aP - aM) * c4;
        face[2 * j] += (aP - aM) * c4;
        face[2 * i + 1] += -(bP - bM) * c4;
        face[2 * i] += (bP - bM) * c4;
      }
    }

    op.diag_[id] = diag;
    if (forcing) op.forcing_[id] = forcing(x);

    bool finite = std::isfinite(diag);
    for (int f = 0; f < 2 * n; ++f) finite = finite && std::isfinite(face[f]);
    if (forcing) finite = finite && std::isfinite(op.forcing_[id]);
    if (!finite) {
      std::ostringstream msg;
      msg << "non-finite coefficient at node " << id << " (" << x[0] << ", " << x[1];
      if (n == 3) msg << ", " << x[2];
      msg << ")";
      throw std::runtime_error(msg.str());
    }
  }
  return op;
}

double DiscreteOperator::stencil_apply(int id, const std::function<double(int)>& value) const {
  const Grid& g = *grid_;
  const int n = g.dim();
  double acc = diag_[id] * value(id);
  const double* face = &face_[std::size_t(id) * 6];
  for (int f = 0; f < 2 * n; ++f) {
    if (face[f] == 0.0) continue;
    const int nb = g.neighbor(id, f);
    if (nb >= 0) acc += face[f] * value(nb);
  }
  if (!cross_.empty()) {
    const double* cr = &cross_[std::size_t(id) * 12];
    const int npairs = (n == 3) ? 3 : 1;
    for (int p = 0; p < npairs; ++p) {
      const int i = kPairs[p][0], j = kPairs[p][1];
      const int si[4] = {1, 1, -1, -1};
      const int sj[4] = {1, -1, 1, -1};
      for (int c = 0; c < 4; ++c) {
        if (cr[4 * p + c] == 0.0) continue;
        const int nb = corner_neighbor(g, id, i, si[c], j, sj[c]);
        if (nb >= 0) acc += cr[4 * p + c] * value(nb);
      }
    }
  }
  return acc;
}

void DiscreteOperator::apply(const std::vector<double>& u, std::vector<double>& y) const {
  const Grid& g = *grid_;
  const int ni = g.interior_count();
  const int n = g.dim();
  y.resize(ni);
  const bool has_cross = !cross_.empty();
  for (int id = 0; id < ni; ++id) {
    double acc = diag_[id] * u[id];
    const double* face = &face_[std::size_t(id) * 6];
    for (int f = 0; f < 2 * n; ++f) {
      const int nb = g.neighbor(id, f);
      if (nb >= 0 && nb < ni) acc += face[f] * u[nb];
    }
    if (has_cross) {
      const double* cr = &cross_[std::size_t(id) * 12];
      const int npairs = (n == 3) ? 3 : 1;
      for (int p = 0; p < npairs; ++p) {
        const int i = kPairs[p][0], j = kPairs[p][1];
        const int si[4] = {1, 1, -1, -1};
        const int sj[4] = {1, -1, 1, -1};
        for (int c = 0; c < 4; ++c) {
          if (cr[4 * p + c] == 0.0) continue;
          const int nb = corner_neighbor(g, id, i, si[c], j, sj[c]);
          if (nb >= 0 && nb < ni) acc += cr[4 * p + c] * u[nb];
        }
      }
    }
    y[id] = acc;
  }
}

std::vector<double> DiscreteOperator::rhs(const std::vector<double>& node_values) const {
  const Grid& g = *grid_;
  const int ni = g.interior_count();
  const int n = g.dim();
  std::vector<double> out(ni, 0.0);
  for (int id = 0; id < ni; ++id) {
    double acc = forcing_.empty() ? 0.0 : forcing_[id];
    const double* face = &face_[std::size_t(id) * 6];
    for (int f = 0; f < 2 * n; ++f) {
      const int nb = g.neighbor(id, f);
      if (nb >= ni) acc -= face[f] * node_values[nb];
    }
    if (!cross_.empty()) {
      const double* cr = &cross_[std::size_t(id) * 12];
      const int npairs = (n == 3) ? 3 : 1;
      for (int p = 0; p < npairs; ++p) {
        const int i = kPairs[p][0], j = kPairs[p][1];
        const int si[4] = {1, 1, -1, -1};
        const int sj[4] = {1, -1, 1, -1};
        for (int c = 0; c < 4; ++c) {
          const int nb = corner_neighbor(g, id, i, si[c], j, sj[c]);
          if (nb >= ni) acc -= cr[4 * p + c] * node_values[nb];
        }
      }
    }
    out[id] = acc;
  }
  return out;
}

double DiscreteOperator::residual_max(const DiscreteField& candidate,
                                      const std::function<bool(const Point&)>& mask) const {
  const Grid& g = *grid_;
  double worst = 0.0;
  for (int id = 0; id < g.interior_count(); ++id) {
    if (mask && !mask(g.pos(id))) continue;
    const double f = forcing_.empty() ? 0.0 : forcing_[id];
    const double r = stencil_apply(id, [&](int nb) { return candidate.v[nb]; }) - f;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

void DiscreteOperator::shift_diagonal(double c) {
  for (double& d : diag_) d += c;
}

// ---------------------------------------------------------------------------
// Krylov solvers (Jacobi-preconditioned, deterministic)

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct KrylovOut {
  int iterations = 0;
  double relative_residual = 0.0;
};

KrylovOut conjugate_gradient(const DiscreteOperator& op, const std::vector<double>& rhs,
                             std::vector<double>& x, double tol, int max_iter,
                             std::vector<double>* history) {
  const int ni = static_cast<int>(rhs.size());
  std::vector<double> r(ni), z(ni), p(ni), ap(ni);
  op.apply(x, ap);
  for (int i = 0; i < ni; ++i) r[i] = rhs[i] - ap[i];
  const double bnorm = std::max(norm2(rhs), 1e-300);
  std::vector<double> invd(ni);
  for (int i = 0; i < ni; ++i) invd[i] = 1.0 / op.diagonal(i);

  for (int i = 0; i < ni; ++i) z[i] = invd[i] * r[i];
  p = z;
  double rz = dot(r, z);
  KrylovOut out;
  out.relative_residual = norm2(r) / bnorm;
  for (int it = 0; it < max_iter && out.relative_residual > tol; ++it) {
    op.apply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (int i = 0; i < ni; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    out.relative_residual = norm2(r) / bnorm;
    if (history) history->push_back(out.relative_residual);
    for (int i = 0; i < ni; ++i) z[i] = invd[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < ni; ++i) p[i] = z[i] + beta * p[i];
    out.iterations = it + 1;
  }
  return out;
}

KrylovOut bicgstab(const DiscreteOperator& op, const std::vector<double>& rhs,
                   std::vector<double>& x, double tol, int max_iter,
                   std::vector<double>* history) {
  const int ni = static_cast<int>(rhs.size());
  std::vector<double> r(ni), rhat(ni), p(ni, 0.0), v(ni, 0.0), s(ni), t(ni), phat(ni), shat(ni);
  op.apply(x, t);
  for (int i = 0; i < ni; ++i) r[i] = rhs[i] - t[i];
  rhat = r;
  const double bnorm = std::max(norm2(rhs), 1e-300);
  std::vector<double> invd(ni);
  for (int i = 0; i < ni; ++i) invd[i] = 1.0 / op.diagonal(i);

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  KrylovOut out;
  out.relative_residual = norm2(r) / bnorm;
  for (int it = 0; it < max_iter && out.relative_residual > tol; ++it) {
    double rho_new = dot(rhat, r);
    if (std::abs(rho_new) < 1e-280) {  // restart on breakdown
      rhat = r;
      rho_new = dot(rhat, r);
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      alpha = omega = 1.0;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < ni; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (int i = 0; i < ni; ++i) phat[i] = invd[i] * p[i];
    op.apply(phat, v);
    alpha = rho / dot(rhat, v);
    for (int i = 0; i < ni; ++i) s[i] = r[i] - alpha * v[i];
    for (int i = 0; i < ni; ++i) shat[i] = invd[i] * s[i];
    op.apply(shat, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < ni; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    out.relative_residual = norm2(r) / bnorm;
    if (history) history->push_back(out.relative_residual);
    out.iterations = it + 1;
    if (omega == 0.0) break;
  }
  return out;
}

KrylovOut linear_solve(const DiscreteOperator& op, const std::vector<double>& rhs,
                       std::vector<double>& x, double tol, int max_iter) {
  std::vector<double> history;
  const bool spd = op.info().symmetric && op.info().monotone;
  KrylovOut out = spd ? conjugate_gradient(op, rhs, x, tol, max_iter, &history)
                      : bicgstab(op, rhs, x, tol, max_iter, &history);
  if (out.relative_residual > tol) {
    std::ostringstream msg;
    msg << "linear solve did not converge: residual " << out.relative_residual << " after "
        << out.iterations << " iterations";
    throw ConvergenceError(msg.str(), history);
  }
  return out;
}

int default_max_iter(int unknowns) { return std::max(2000, 12 * static_cast<int>(std::sqrt(double(unknowns)) * 40)); }

std::vector<double> boundary_values(const Grid& g, const ScalarRule& boundary) {
  std::vector<double> vals(g.node_count(), 0.0);
  for (int id = g.interior_count(); id < g.node_count(); ++id) vals[id] = boundary(g.pos(id));
  return vals;
}

}  // namespace

SolveResult solve_elliptic(const DiscreteOperator& op, const ScalarRule& boundary,
                           SolverOptions opts) {
  const Grid& g = op.grid();
  const int ni = g.interior_count();
  std::vector<double> vals = boundary_values(g, boundary);
  const std::vector<double> rhs = op.rhs(vals);

  // Deterministic start at the boundary mean: exact for constant data.
  double mean = 0.0;
  for (int id = ni; id < g.node_count(); ++id) mean += vals[id];
  mean /= std::max(1, g.boundary_count());
  std::vector<double> x(ni, mean);

  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : default_max_iter(ni);
  const KrylovOut out = linear_solve(op, rhs, x, opts.tolerance, max_iter);

  SolveResult res;
  res.u = DiscreteField(g);
  for (int i = 0; i < ni; ++i) res.u.v[i] = x[i];
  for (int id = ni; id < g.node_count(); ++id) res.u.v[id] = vals[id];
  res.iterations = out.iterations;
  res.residual = out.relative_residual;
  res.scheme = op.info();
  return res;
}

SolveResult solve_elliptic(const EllipticTensor& a, const DriftField& b, const Grid& g,
                           const ScalarRule& boundary, SolverOptions opts) {
  return solve_elliptic(DiscreteOperator::elliptic(a, b, g), boundary, opts);
}

ParabolicResult solve_parabolic(const EllipticTensor& a, const DriftField& b, const Grid& g,
                                const SpaceTimeRule& boundary, const SpaceTimeRule& forcing,
                                SolverOptions opts) {
  if (!g.spacetime()) throw std::invalid_argument("parabolic solve needs a space-time grid");
  const int ni = g.interior_count();
  const double tau = g.tau();

  ParabolicResult res;
  res.u = SpaceTimeField(g);

  // Bottom slab: data everywhere.
  for (int id = 0; id < g.node_count(); ++id)
    res.u.slabs[0][id] = boundary(g.pos(id), g.bottom_time());

  DiscreteOperator op = DiscreteOperator::elliptic(
      a, b, g, forcing ? ScalarRule([&](const Point& x) { return forcing(x, g.slab_time(1)); })
                       : ScalarRule(),
      g.slab_time(1));
  op.shift_diagonal(1.0 / tau);
  res.scheme = op.info();

  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : default_max_iter(ni);
  std::vector<double> x(ni);
  for (int k = 1; k <= g.steps(); ++k) {
    const double t = g.slab_time(k);
    if (opts.coefficients_time_dependent && k > 1) {
      op = DiscreteOperator::elliptic(
          a, b, g, forcing ? ScalarRule([&](const Point& x_) { return forcing(x_, t); })
                           : ScalarRule(),
          t);
      op.shift_diagonal(1.0 / tau);
      res.scheme.max_peclet = std::max(res.scheme.max_peclet, op.info().max_peclet);
      res.scheme.upwind_used = res.scheme.upwind_used || op.info().upwind_used;
    }
    std::vector<double>& slab = res.u.slabs[k];
    for (int id = ni; id < g.node_count(); ++id) slab[id] = boundary(g.pos(id), t);
    std::vector<double> rhs = op.rhs(slab);
    for (int i = 0; i < ni; ++i) rhs[i] += res.u.slabs[k - 1][i] / tau;

    for (int i = 0; i < ni; ++i) x[i] = res.u.slabs[k - 1][i];  // warm start
    KrylovOut out;
    try {
      out = linear_solve(op, rhs, x, opts.slab_tolerance, max_iter);
    } catch (const ConvergenceError& e) {
      std::ostringstream msg;
      msg << "slab " << k << ": " << e.what();
      throw ConvergenceError(msg.str(), e.residual_history);
    }
    for (int i = 0; i < ni; ++i) slab[i] = x[i];
    res.total_iterations += out.iterations;
    res.max_slab_residual = std::max(res.max_slab_residual, out.relative_residual);
  }
  return res;
}

double parabolic_residual_max(const EllipticTensor& a, const DriftField& b, const Grid& g,
                              const SpaceTimeField& candidate,
                              const std::function<bool(const Point&)>& mask) {
  const DiscreteOperator op = DiscreteOperator::elliptic(a, b, g);
  const double tau = g.tau();
  double worst = 0.0;
  for (int k = 1; k <= g.steps(); ++k) {
    const auto& now = candidate.slabs[k];
    const auto& before = candidate.slabs[k - 1];
    for (int id = 0; id < g.interior_count(); ++id) {
      if (mask && !mask(g.pos(id))) continue;
      double spatial = op.diagonal(id) * now[id];
      for (int f = 0; f < 2 * g.dim(); ++f) {
        const int nb = g.neighbor(id, f);
        if (nb >= 0) spatial += op.face_coefficient(id, f) * now[nb];
      }
      const double r = (now[id] - before[id]) / tau + spatial;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace driftlab::solver
