#pragma once

#include <optional>
#include <vector>

#include "lqpadmm/problem.hpp"
#include "lqpadmm/types.hpp"

namespace lqpadmm {

/// A point in the product space (x_1, ..., x_p, y, lambda). Also the shape
/// of the per-iteration predictor.
struct WPoint {
  std::vector<Vector> x;
  Vector y;
  Vector lambda;
};

/// Stacks a point into one flat vector ordered (x_1, ..., x_p, y, lambda);
/// the same ordering the certification matrices use.
Vector stack_point(const ProblemSpec& spec, const WPoint& w);

/// Full solver state after one outer iteration. `predictor` holds the
/// auxiliary point the convergence certificates are phrased in: its x and y
/// agree with the accepted iterate while its multiplier uses the unit-step
/// dual update taken before the y refresh. Absent on externally supplied
/// initial states.
struct IterateState {
  std::vector<Vector> x;
  Vector y;
  Vector lambda;
  Vector lambda_half;
  std::optional<WPoint> predictor;
};

/// One row of the iteration trace.
struct TraceRecord {
  int iter = 0;
  double feas_norm = 0.0;
  double objective = 0.0;
  /// Squared distance to the reference point in the contraction metric;
  /// NaN when no reference was supplied.
  double h_distance_sq = 0.0;
  /// Left-minus-right slack of the per-iteration contraction certificate
  /// (nonpositive when the certificate holds); NaN without a reference.
  double certificate_slack = 0.0;
  /// ||A_i (x_i^{k+1} - x_i^k)|| per block.
  std::vector<double> block_move_norms;
  /// ||B (y^{k+1} - y^k)||.
  double y_move_norm = 0.0;
};

struct SolverParams {
  double beta = 1.0;   // augmented Lagrangian penalty, > 0
  double alpha = 0.0;  // dual half-step factor, -1 < alpha < 1
  double tau = 1.0;    // dual step factor, alpha + tau > 0
  double mu = 0.01;    // interior barrier share, 0 < mu < 1
  double gamma = 1.0;  // proximal weight multiplier
  std::vector<double> r;  // per-block proximal weights, r_i >= gamma*beta*||A_i'A_i||
  int max_iter = 5000;
  double feas_tol = 1e-8;
  double subproblem_tol = 1e-10;
};

/// Fills defaults for a given problem: r_i = gamma * beta * ||A_i'A_i||
/// with gamma = 1.05 (p-1)/(1-mu) for p > 1 and gamma = 1 for p = 1.
SolverParams default_params(const ProblemSpec& spec, double alpha, double tau,
                            double beta = 1.0, double mu = 0.01);

/// Validates params against the problem; throws ParameterError quoting the
/// violated inequality.
void validate_params(const ProblemSpec& spec, const SolverParams& params);

enum class TerminationReason { kConverged, kIterationCap, kSubproblemFailure };

/// Per-iteration certificate monitor. When supplied to solve(), every trace
/// row gets the distance to `reference` in the metric `h` and the slack of
/// the contraction inequality with constants (xi1, xi2, xi3).
struct ReferenceMonitor {
  Matrix h;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double xi3 = 0.0;
  WPoint reference;
};

struct SolveOptions {
  std::optional<ReferenceMonitor> monitor;
  /// Keep the full state history (needed by the certification routines).
  bool record_states = true;
};

struct SolveResult {
  IterateState final_state;
  std::vector<TraceRecord> trace;     // trace[0] describes the initial point
  std::vector<IterateState> states;   // w^0 .. w^K when recorded
  TerminationReason reason = TerminationReason::kIterationCap;
};

/// Default start: every block at the all-ones vector, y solved from its own
/// subproblem against a zero multiplier, and the multiplier warmed with one
/// dual step. Starting from a y that satisfies its optimality system makes
/// the run's very first transition carry the same certificates as all later
/// ones.
IterateState default_initial_state(const ProblemSpec& spec,
                                   const SolverParams& params);

/// One outer iteration: p independent interior proximal block updates (each
/// against the other blocks' current values), a dual half-step scaled by
/// alpha, an exact y update, and a dual step scaled by tau.
IterateState step(const ProblemSpec& spec, const SolverParams& params,
                  const IterateState& state);

/// Runs step() until max(feasibility residual, largest block move, y move)
/// falls below feas_tol or max_iter is reached. A block subproblem failure
/// ends the run with reason kSubproblemFailure instead of propagating.
SolveResult solve(const ProblemSpec& spec, const SolverParams& params,
                  std::optional<IterateState> init = std::nullopt,
                  const SolveOptions& options = {});

/// Mean of the predictors produced by transitions kappa .. kappa+t (both
/// inclusive). Requires the state history of a solve() run.
WPoint ergodic_average(const ProblemSpec& spec,
                       const std::vector<IterateState>& states, int kappa,
                       int t);

/// Reference scheme without the interior proximal term: cyclic (most recent
/// values) block updates, exact y update, single dual step. No convergence
/// certificate is attached; offered for comparison runs only.
SolveResult baseline_gauss_seidel_admm(const ProblemSpec& spec, double beta,
                                       int max_iter, double feas_tol = 1e-8,
                                       double subproblem_tol = 1e-10);

/// True when the plain algorithm can solve this problem's y subproblem in
/// closed form: a free y, or a separable tail quadratic over a box/orthant
/// domain. Composite tails and coupled quadratics over a constrained y need
/// the linearized variant instead.
bool exact_y_update_supported(const ProblemSpec& spec);

}  // namespace lqpadmm
