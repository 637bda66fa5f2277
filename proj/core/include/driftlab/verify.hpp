#pragma once

#include <cstdint>
#include <vector>

#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"
#include "driftlab/report.hpp"
#include "driftlab/solver.hpp"

namespace driftlab::verify {

using fields::DriftField;
using fields::EllipticTensor;
using geom::Ball;
using geom::Cylinder;
using geom::Point;
using report::EstimateReport;

struct TrialOptions {
  std::uint64_t seed = 1;
  int trials = 20;
  std::vector<double> h_ladder = {1.0 / 16, 1.0 / 32};
  double tau_factor = 1.0;  // tau = tau_factor * h on space-time grids
  int jobs = 1;

  double q = 0.0;    // drift-quantity exponents recorded in reports (0 = default)
  double ell = 0.0;

  double delta = 0.25;            // measure-hypothesis fraction
  double prescribed_level = 0.0;  // growth checks: fixed level k (0 = quantile mode)
  double kappa_reference = 0.95;  // scale-probe per-step oscillation bound
  int scale_steps = 3;
  double scale_factor = 3.0;
  std::size_t node_budget = 6000000;
  double n4_empirical = 0.0;  // measure propagation: empirical sup-bound constant
  bool nonnegative_data = true;
};

/// Seeded generator of boundary/initial data: nonnegative mixtures of
/// fundamental-solution traces (with closed-form extensions for the
/// drift-free identity-tensor oracle) and boundary bumps. Shape parameters
/// are drawn in unit coordinates, so the same (seed, index) instantiates the
/// exactly rescaled datum on a rescaled region.
class TrialFamily {
 public:
  struct Trial {
    ScalarRule data;             // spatial rule
    ScalarRule extension;        // closed-form harmonic extension (may be empty)
    std::uint64_t seed = 0;
    bool has_extension = false;
  };
  struct SpaceTimeTrial {
    SpaceTimeRule data;
    SpaceTimeRule extension;     // closed-form caloric extension (may be empty)
    std::uint64_t seed = 0;
    bool has_extension = false;
  };

  TrialFamily(std::uint64_t seed, bool nonnegative = true);

  /// Mixture datum on the sphere of `region` (kernel poles sit outside it).
  Trial make(const Ball& region, int index) const;
  /// Mixture datum on the parabolic boundary of `region`.
  SpaceTimeTrial make(const Cylinder& region, int index) const;
  /// Bump datum concentrated around boundary direction `e`.
  Trial make_directional(const Ball& region, const Point& e, int index) const;

 private:
  std::uint64_t seed_;
  bool nonnegative_;
};

// --- Elliptic estimate checks ----------------------------------------------

/// sup_{B_R} u_+ against the mean-square over B_{lambda R}: refinement
/// stability and invariance across the scaling family R in {R/2, R, 2R}.
EstimateReport check_local_max(const EllipticTensor& a, const DriftField& b, const Ball& inner,
                               double lambda, const TrialOptions& opts);

/// Measure hypothesis at level k forces inf_{B_R} V >= beta k.
EstimateReport check_growth(const EllipticTensor& a, const DriftField& b, const Ball& inner,
                            double lambda, const TrialOptions& opts);

/// osc over B_R against osc over B_{3R}, with a dyadic-radius decay fit.
EstimateReport check_oscillation(const EllipticTensor& a, const DriftField& b,
                                 const Point& center, double R, const TrialOptions& opts);

/// sup/inf quotient over B_R for nonnegative solutions on B_{2R}.
EstimateReport check_harnack(const EllipticTensor& a, const DriftField& b, double R,
                             const TrialOptions& opts);

/// Interior minimum stays strictly above the boundary minimum.
EstimateReport check_max_principle(const EllipticTensor& a, const DriftField& b,
                                   const Ball& region, const TrialOptions& opts);

/// Positivity carried from a small ball near the rim to the centered ball by
/// the dyadic chain, with the decay power fitted over dyadic seed radii.
EstimateReport check_chain(const EllipticTensor& a, const DriftField& b, double R,
                           const TrialOptions& opts);

/// Oscillation of solves on growing balls measured over a fixed window,
/// zooming scale by scale; includes the drift-quantity sequence.
EstimateReport liouville_probe(const EllipticTensor& a, const DriftField& b, double window_R,
                               const TrialOptions& opts);

// --- Parabolic estimate checks ----------------------------------------------

/// sup over Q^{1,theta/2} against the mean-square over Q^{lambda,theta};
/// data nonpositive on the bottom slab extend the bound to the full window.
EstimateReport check_local_max_parabolic(const EllipticTensor& a, const DriftField& b,
                                         const Cylinder& base, const TrialOptions& opts);

/// Space-time measure hypothesis forces a positive bound on the half-size
/// shifted cylinder.
EstimateReport check_growth_parabolic(const EllipticTensor& a, const DriftField& b, double R,
                                      const TrialOptions& opts);

EstimateReport check_oscillation_parabolic(const EllipticTensor& a, const DriftField& b,
                                           double R, const TrialOptions& opts);

/// sup over the time-lagged cylinder Q_R(0;-2R^2) against inf over Q_R.
EstimateReport check_harnack_parabolic(const EllipticTensor& a, const DriftField& b, double R,
                                       const TrialOptions& opts);

EstimateReport check_max_principle_parabolic(const EllipticTensor& a, const DriftField& b,
                                             const Cylinder& region, const TrialOptions& opts);

/// Bottom-slab measure propagation across the time window plus the level
/// shrinking fit; reports the largest window for which propagation holds.
EstimateReport check_measure_propagation(const EllipticTensor& a, const DriftField& b, double R,
                                         double level, const TrialOptions& opts);

/// Parabolic chain propagation plus the moving-frame consistency check for
/// the slanted-cylinder drift shift.
EstimateReport check_chain_parabolic(const EllipticTensor& a, const DriftField& b, double R,
                                     const TrialOptions& opts);

EstimateReport liouville_probe_parabolic(const EllipticTensor& a, const DriftField& b,
                                         double window_R, const TrialOptions& opts);

// --- Shared helpers ----------------------------------------------------------

/// Oscillation over the interior nodes inside a sub-ball (0 if < 2 nodes).
double nodal_osc(const DiscreteField& u, const Ball& sub);
/// min over interior nodes inside a sub-ball (+inf if empty).
double nodal_min(const DiscreteField& u, const Ball& sub);
double nodal_max(const DiscreteField& u, const Ball& sub);

/// Deterministic parallel map over trial indices.
void for_each_trial(int count, int jobs, const std::function<void(int)>& body);

}  // namespace driftlab::verify
