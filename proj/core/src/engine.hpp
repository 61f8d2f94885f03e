#pragma once

// Internal iteration engine shared by the plain and linearized variants.
// Not installed.

#include <optional>
#include <vector>

#include "lqpadmm/extension.hpp"
#include "lqpadmm/solver.hpp"
#include "lqpadmm/numeric.hpp"

namespace lqpadmm::detail {

enum class YMode { kExact, kLinearized };

/// Precomputed exact tail solve: either a dense factorization of
/// P + beta*B'B for a free y, or its diagonal plus clip bounds when the
/// system separates over a box/orthant domain.
struct ExactYSystem {
  enum class Mode { kDense, kDiagonal };
  Mode mode = Mode::kDense;
  std::optional<numeric::Cholesky> chol;
  Vector diag;
  Vector lower, upper;  // clip bounds (kDiagonal)
};

/// Builds the exact tail solve; throws ConfigurationError for combinations
/// without a closed form.
ExactYSystem build_exact_y_system(const ProblemSpec& spec, double beta);

class Stepper {
 public:
  Stepper(const ProblemSpec& spec, const SolverParams& params, YMode mode,
          double sigma);

  IterateState advance(const IterateState& state) const;

  /// Default start shared by both variants: blocks at all-ones, y solved
  /// from its own update against a zero multiplier, multiplier warmed with
  /// one tau-scaled dual step.
  IterateState initial_state() const;

  const SolverParams& params() const { return params_; }

 private:
  Vector y_refresh(const Vector& ax_new, const Vector& y_old,
                   const Vector& lambda_half) const;

  const ProblemSpec& spec_;
  SolverParams params_;
  YMode mode_;
  double sigma_;
  std::vector<Matrix> block_quad_;
  std::vector<Vector> block_lin_;
  std::optional<ExactYSystem> y_system_;
  EffectiveNonsmoothTail eff_h_;
};

/// Shared outer loop: advances until max(feasibility, block moves, y move)
/// <= feas_tol or the iteration cap; fills the trace (and the certificate
/// columns when a monitor is present).
SolveResult run_loop(const ProblemSpec& spec, const Stepper& stepper,
                     std::optional<IterateState> init,
                     const SolveOptions& options);

}  // namespace lqpadmm::detail
