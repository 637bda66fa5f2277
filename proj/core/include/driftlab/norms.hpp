#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "driftlab/field.hpp"
#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"

namespace driftlab::norms {

using geom::Ball;
using geom::Cylinder;
using geom::Grid;
using geom::Point;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Validated exponent set. Elliptic admissibility asks n/2 < q <= n with
/// alpha = n/q - 1; parabolic admissibility asks alpha = n/q + 2/l - 1 in [0,1[.
struct NormParams {
  double q = 2.0;
  double ell = 2.0;
  double alpha = 0.0;

  static NormParams elliptic(double q, int dim);
  static NormParams parabolic(double q, double ell, int dim);
};

struct NormReport {
  double value = 0.0;
  Point maximizer_center{0.0, 0.0, 0.0};
  double maximizer_radius = 0.0;
  double maximizer_time = 0.0;
  double resolution = 0.0;
};

// --- Lebesgue and anisotropic norms ----------------------------------------

/// L_q over the grid's interior nodes by midpoint quadrature; q = inf is the
/// max over nodes. Space-time grids integrate slabs 1..K with weight tau.
double lebesgue_norm(const DiscreteField& f, double q);
double lebesgue_norm(const Grid& g, const ScalarRule& f, double q);
double lebesgue_norm(const SpaceTimeField& f, double q);

/// L_q over the interior nodes lying in the sub-ball (0 when empty).
double lebesgue_norm_over(const DiscreteField& f, double q, const Ball& sub);
double lebesgue_norm_over(const Grid& g, const ScalarRule& f, double q, const Ball& sub);

/// Inner spatial L_q per slab, outer L_l over slab times.
double anisotropic_norm(const SpaceTimeField& f, double q, double ell);
/// Restriction to a sub-cylinder (slabs in its time window, nodes in its slab).
double anisotropic_norm_over(const SpaceTimeField& f, double q, double ell, const Cylinder& sub);

// --- Morrey scales ----------------------------------------------------------

struct MorreyOptions {
  int center_stride = 0;   // 0: choose automatically (bounded center budget)
  int dyadic_levels = 6;
};

/// sup over candidate balls of rho^-alpha ||f||_{q, B_rho(x)}. Candidates are
/// a strided lattice of interior nodes; per center the radii are dyadic
/// fractions of the largest admissible radius (plus the global dyadic set),
/// so the report is a certified lower bound for the true supremum.
NormReport morrey_norm(const DiscreteField& f, double q, double alpha,
                       MorreyOptions opts = {});
NormReport morrey_norm(const Grid& g, const ScalarRule& f, double q, double alpha,
                       MorreyOptions opts = {});

/// Parabolic variant over sub-cylinders Q_rho(x;t) with apex at (x;t).
NormReport parabolic_morrey_norm(const SpaceTimeField& f, double q, double ell, double alpha,
                                 MorreyOptions opts = {});

// --- Scale-invariant drift quantities ---------------------------------------

/// R^{1 - n/q} ||b||_{q, B_{lambda R}(x0)} on a grid of spacing h.
double quantity_N(const fields::DriftField& b, const Point& x0, double R, double lambda,
                  double q, double h);
double quantity_N(const fields::DriftField& b, const Grid& host_grid, double R, double q);

/// R^{-alpha} ||b||_{q,l,Q_R^{lambda,theta}(x0;t0)}.
double quantity_N_hat(const fields::DriftField& b, const Cylinder& Q, double q, double ell,
                      double h, double tau);

// --- Energy norm ------------------------------------------------------------

/// ||f||^2 = ||f||^2_{2,inf} + ||Df||^2_{2,2}; the gradient uses central
/// differences where both neighbors carry values, one-sided otherwise.
double v_norm(const SpaceTimeField& f);

}  // namespace driftlab::norms
