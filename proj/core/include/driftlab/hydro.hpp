#pragma once

#include <vector>

#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"
#include "driftlab/report.hpp"
#include "driftlab/verify.hpp"

namespace driftlab::hydro {

using fields::DriftField;
using fields::SwirlBackground;
using geom::Ball;
using geom::Cylinder;
using geom::Point;
using report::EstimateReport;

/// Axisymmetric swirl problem: drift b = v + eps * 2 x'/|x'|^2 whose
/// distributional divergence is 4 pi eps per unit axis length. The
/// background v is a certified divergence-free swirl field.
struct SwirlProblem {
  DriftField background;
  DriftField drift;       // v + singular part
  DriftField axis_part;   // the singular part alone
  double eps = -1.0;
  nlohmann::json descriptor;
};

/// Certifies the background (divergence-free, axisymmetric) and records the
/// admissibility metadata of the singular part (finite scale-invariant
/// anisotropic quantity at q in ]3/2, 2[, l = inf).
SwirlProblem build_swirl_problem(SwirlBackground bg, double bg_amp, double eps);

/// Axis trace of a space-time field: interpolated values at (0, 0, x3; t).
struct AxisData {
  std::vector<double> values;  // flattened over (slab, x3 sample)
  double min = 0.0;
  double max = 0.0;
  bool constant(double tol) const { return max - min <= tol; }
};

AxisData axis_trace(const SpaceTimeField& u, double half_length, int samples);

/// Weak pairing of the singular drift part against product bumps
/// eta = phi(|x'|) psi(x3): -sum b . grad(eta) h^3 approaches
/// 4 pi eps * integral of eta along the axis, at rate >= O(h^(1/2)).
EstimateReport check_dirac_divergence(const SwirlProblem& p, const Ball& region,
                                      const std::vector<double>& h_ladder, double bump_radius,
                                      double plateau_half_length, double tolerance);

/// eps = -1 scenario: the structure condition holds, so bounded solutions on
/// growing cylinders flatten. Runs the parabolic scale probe after gating on
/// the discrete maximum principle, and certifies the exact steady radial
/// solution 1/|x'|^2 off the axis.
EstimateReport check_swirl_liouville(const SwirlProblem& p, double window_R,
                                     const verify::TrialOptions& opts);

/// eps = +1 scenario: an axis lower bound plus a global cap force a positive
/// bound on the half cylinder; with a constant axis trace the two-sided split
/// yields oscillation decay.
EstimateReport check_axis_growth(const SwirlProblem& p, double R, double cap_ratio,
                                 const verify::TrialOptions& opts);

}  // namespace driftlab::hydro
