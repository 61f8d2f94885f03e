#pragma once

#include "lqpadmm/solver.hpp"

namespace lqpadmm {

/// Parameters of the linearized variant. The tail update replaces the exact
/// y subproblem by one proximal step of weight sigma on the nonsmooth part,
/// taken at a point that linearizes the smooth part. Guarantees require
///   sigma >= beta * ||B'B|| + (3 - alpha) / (1 + alpha) * L_g.
struct ExtensionParams {
  SolverParams base;
  double sigma = 0.0;
};

/// Defaults with sigma placed exactly at its lower bound.
ExtensionParams default_extension_params(const ProblemSpec& spec, double alpha,
                                         double tau, double beta = 1.0,
                                         double mu = 0.01);

/// Validates base params plus the sigma lower bound; throws ParameterError
/// quoting the violated inequality.
void validate_extension_params(const ProblemSpec& spec,
                               const ExtensionParams& params);

/// The nonsmooth tail handled by the proximal map: the declared h when y is
/// free, otherwise the indicator of the declared y domain (only when no h
/// was declared; the combination of both is unsupported).
struct EffectiveNonsmoothTail {
  TailFunction::HKind kind = TailFunction::HKind::kZero;
  double weight = 0.0;
  Vector lower, upper;
};
EffectiveNonsmoothTail effective_nonsmooth_tail(const ProblemSpec& spec);

/// Candidate point of the linearized tail update,
///   y_c = y - (grad g(y) - B' lambda_half + beta B'(A x + B y - b)) / sigma,
/// evaluated at a mid-iteration state whose x already holds the new block
/// values while y and lambda_half are the current tail value and half-step
/// multiplier.
Vector prox_point(const ProblemSpec& spec, const ExtensionParams& params,
                  const IterateState& mid);

/// Proximal map of the nonsmooth tail at weight sigma:
///   argmin_y h(y) + (sigma/2) ||y - candidate||^2.
Vector prox_map(const EffectiveNonsmoothTail& h, double sigma,
                const Vector& candidate);

/// One outer iteration of the linearized variant: identical to step() except
/// that the y refresh is prox_map(effective h, sigma, prox_point(...)).
IterateState extended_step(const ProblemSpec& spec,
                           const ExtensionParams& params,
                           const IterateState& state);

/// Default start for the linearized variant (same scheme as the plain
/// solver, with the linearized y refresh).
IterateState default_initial_state_extended(const ProblemSpec& spec,
                                            const ExtensionParams& params);

/// Runs extended_step() under the same stopping rule as solve().
SolveResult solve_extended(const ProblemSpec& spec,
                           const ExtensionParams& params,
                           std::optional<IterateState> init = std::nullopt,
                           const SolveOptions& options = {});

}  // namespace lqpadmm
