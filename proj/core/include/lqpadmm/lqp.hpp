#pragma once

#include <vector>

#include "lqpadmm/types.hpp"

namespace lqpadmm {

/// Logarithmic-quadratic proximal term anchored at an interior point z > 0:
///   d(v, z) = sum_j [ (1/2)(v_j - z_j)^2
///                     + mu * (z_j^2 log(z_j / v_j) + v_j z_j - z_j^2) ]
/// for v > 0, +inf otherwise. The log part acts as an interior barrier that
/// keeps minimizers strictly positive; mu in (0, 1) trades it off against
/// the quadratic part.
struct LqpTerm {
  double mu = 0.0;
  Vector anchor_z;
  double weight_r = 0.0;

  void validate() const;
};

/// One strictly convex block subproblem
///   min_{v > 0} (1/2) v'Qv + q'v + r * d(v, z)
/// with symmetric positive semidefinite Q.
struct SubproblemInstance {
  Matrix quad_matrix;
  Vector linear_term;
  LqpTerm lqp;

  void validate() const;
};

/// Optional per-call diagnostics for the subproblem solver.
struct SubproblemLog {
  int newton_iterations = 0;
  /// Objective value after each accepted Newton step (starting value first).
  std::vector<double> objective_trajectory;
};

/// d(v, z). Returns +inf if any component of v is nonpositive.
double lqp_value(const LqpTerm& term, const Vector& v);

/// Gradient of d(., z) at an interior point v > 0:
///   (v - z) + mu * (z - z^2 / v)  componentwise.
/// Throws DomainError when v has a nonpositive component.
Vector lqp_gradient(const LqpTerm& term, const Vector& v);

/// Solves a SubproblemInstance by damped Newton iteration with Armijo
/// backtracking and a per-coordinate fraction-to-boundary safeguard that
/// keeps every iterate strictly positive. Stops when the projected
/// optimality measure ||v - max(v - grad, 0)|| falls below max(tol, a
/// roundoff floor scaled to the gradient's own terms) or when the objective
/// stops decreasing in floating point; throws ConvergenceError (with the
/// last measure) after 100 Newton steps.
Vector solve_block_subproblem(const SubproblemInstance& inst,
                              const Vector& warm_start, double tol,
                              SubproblemLog* log = nullptr);

}  // namespace lqpadmm
