#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftlab/field.hpp"
#include "driftlab/fields.hpp"
#include "driftlab/geometry.hpp"

namespace driftlab::solver {

using fields::DriftField;
using fields::EllipticTensor;
using geom::Grid;
using geom::Point;

struct SchemeInfo {
  double max_peclet = 0.0;
  bool upwind_used = false;
  bool symmetric = false;  // drift-free
  bool monotone = true;    // no cross-diffusion fluxes (diagonal tensor)
  int upwinded_nodes = 0;
};

struct SolverOptions {
  double tolerance = 1e-10;        // relative residual, elliptic solves
  double slab_tolerance = 1e-12;   // per-slab tolerance, time stepping
  int max_iterations = 0;          // 0: scaled with problem size
  bool coefficients_time_dependent = false;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Finite-volume operator for -D_i(a_ij D_j u) + b_i D_i u on the interior
/// nodes of a grid. Diffusive fluxes use face-harmonic averaging of the
/// diagonal entries; the drift term is centrally differenced at nodes where
/// the cell Peclet number |b| h/(2 nu) stays <= 1 and first-order upwinded
/// otherwise, which keeps the matrix an M-matrix for diagonal tensors.
/// Off-diagonal tensor entries add corner fluxes and clear the monotone flag.
class DiscreteOperator {
 public:
  static DiscreteOperator elliptic(const EllipticTensor& a, const DriftField& b, const Grid& g,
                                   const ScalarRule& forcing = nullptr, double time = 0.0);

  const Grid& grid() const { return *grid_; }
  const SchemeInfo& info() const { return info_; }
  double diagonal(int id) const { return diag_[id]; }
  double face_coefficient(int id, int face) const { return face_[6 * id + face]; }
  double forcing(int id) const { return forcing_.empty() ? 0.0 : forcing_[id]; }

  /// y = A u over interior unknowns (boundary connections contribute nothing).
  void apply(const std::vector<double>& u, std::vector<double>& y) const;

  /// Right-hand side for Dirichlet values at boundary nodes plus forcing.
  std::vector<double> rhs(const std::vector<double>& node_values) const;

  /// Max |A u - f| over interior nodes passing `mask`, with the candidate
  /// supplying values at interior and boundary nodes alike. Certifies
  /// analytic candidates against the discrete equation.
  double residual_max(const DiscreteField& candidate,
                      const std::function<bool(const Point&)>& mask = nullptr) const;

  /// Add c to every diagonal entry (time-stepping shift I/tau).
  void shift_diagonal(double c);

 private:
  const Grid* grid_ = nullptr;
  std::vector<double> diag_;
  std::vector<double> face_;     // 6 per node
  std::vector<double> cross_;    // 12 per node (3 pairs x 4 corners); empty if diagonal
  std::vector<double> forcing_;  // empty when no forcing
  SchemeInfo info_;

  double stencil_apply(int id, const std::function<double(int)>& value) const;
  friend struct OperatorTestAccess;
};

struct SolveResult {
  DiscreteField u;       // interior solution, boundary nodes = data
  int iterations = 0;
  double residual = 0.0;  // relative
  SchemeInfo scheme;
};

/// Solve the Dirichlet problem: conjugate gradients when the operator is
/// symmetric, stabilized bi-conjugate gradients otherwise, both with Jacobi
/// preconditioning and a deterministic start at the boundary mean.
SolveResult solve_elliptic(const DiscreteOperator& op, const ScalarRule& boundary,
                           SolverOptions opts = {});

SolveResult solve_elliptic(const EllipticTensor& a, const DriftField& b, const Grid& g,
                           const ScalarRule& boundary, SolverOptions opts = {});

struct ParabolicResult {
  SpaceTimeField u;
  int total_iterations = 0;
  double max_slab_residual = 0.0;
  SchemeInfo scheme;
};

/// Implicit Euler on the slabs of a space-time grid: each step solves
/// (I/tau + L) u^{k+1} = u^k/tau + f, with Dirichlet data on the bottom slab
/// and the lateral boundary nodes.
ParabolicResult solve_parabolic(const EllipticTensor& a, const DriftField& b, const Grid& g,
                                const SpaceTimeRule& boundary,
                                const SpaceTimeRule& forcing = nullptr,
                                SolverOptions opts = {});

/// Max interior residual of a space-time candidate under the implicit-Euler
/// discretization (slabs 1..K).
double parabolic_residual_max(const EllipticTensor& a, const DriftField& b, const Grid& g,
                              const SpaceTimeField& candidate,
                              const std::function<bool(const Point&)>& mask = nullptr);

}  // namespace driftlab::solver
