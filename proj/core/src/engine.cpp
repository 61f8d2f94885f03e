#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lqpadmm/lqp.hpp"

namespace lqpadmm::detail {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kAnchorFloor = 1e-100;

Matrix tail_quad_matrix(const ProblemSpec& spec, double beta) {
  const Matrix& b = spec.b_mat();
  Matrix k = beta * (b.transpose() * b);
  if (spec.tail().g_kind == TailFunction::GKind::kQuadratic) {
    k += spec.tail().g_p;
  }
  return k;
}

bool is_diagonal(const Matrix& k) {
  const double scale = 1.0 + k.diagonal().cwiseAbs().maxCoeff();
  Matrix off = k;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

Vector tail_linear_coeff(const ProblemSpec& spec) {
  if (spec.tail().g_kind == TailFunction::GKind::kZero) {
    return Vector::Zero(spec.y_dim());
  }
  return spec.tail().g_c;
}

}  // namespace

ExactYSystem build_exact_y_system(const ProblemSpec& spec, double beta) {
  if (spec.tail().h_kind != TailFunction::HKind::kZero) {
    throw ConfigurationError(
        "exact y update: the problem declares a nonsmooth tail; use the "
        "linearized variant");
  }
  const Matrix k = tail_quad_matrix(spec, beta);
  ExactYSystem sys;
  if (spec.y_domain().kind == YDomain::Kind::kFree) {
    sys.mode = ExactYSystem::Mode::kDense;
    sys.chol.emplace(k);
    return sys;
  }
  if (!is_diagonal(k)) {
    throw ConfigurationError(
        "exact y update: constrained y with coupled tail curvature has no "
        "closed form; use the linearized variant");
  }
  sys.mode = ExactYSystem::Mode::kDiagonal;
  sys.diag = k.diagonal();
  if ((sys.diag.array() <= 0.0).any()) {
    throw ConfigurationError("exact y update: singular separable tail system");
  }
  const Index d = spec.y_dim();
  if (spec.y_domain().kind == YDomain::Kind::kNonnegOrthant) {
    sys.lower = Vector::Zero(d);
    sys.upper = Vector::Constant(d, std::numeric_limits<double>::infinity());
  } else {
    sys.lower = spec.y_domain().lower;
    sys.upper = spec.y_domain().upper;
  }
  return sys;
}

Stepper::Stepper(const ProblemSpec& spec, const SolverParams& params,
                 YMode mode, double sigma)
    : spec_(spec), params_(params), mode_(mode), sigma_(sigma) {
  const Index p = spec.num_blocks();
  block_quad_.reserve(static_cast<size_t>(p));
  block_lin_.reserve(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    const Block& blk = spec.block(i);
    const Index m = blk.a.cols();
    Matrix quad = params.beta * (blk.a.transpose() * blk.a);
    quad.diagonal() += blk.f.model_quad_diag(m);
    block_quad_.push_back(std::move(quad));
    block_lin_.push_back(blk.f.model_linear(m));
  }
  if (mode_ == YMode::kExact) {
    y_system_ = build_exact_y_system(spec, params.beta);
  } else {
    eff_h_ = effective_nonsmooth_tail(spec);
  }
}

Vector Stepper::y_refresh(const Vector& ax_new, const Vector& y_old,
                          const Vector& lambda_half) const {
  const Matrix& b = spec_.b_mat();
  if (mode_ == YMode::kExact) {
    const Vector rhs = b.transpose() * lambda_half - tail_linear_coeff(spec_) -
                       params_.beta * (b.transpose() * (ax_new - spec_.rhs()));
    const ExactYSystem& sys = *y_system_;
    if (sys.mode == ExactYSystem::Mode::kDense) {
      return sys.chol->solve(rhs);
    }
    return (rhs.array() / sys.diag.array())
        .matrix()
        .cwiseMax(sys.lower)
        .cwiseMin(sys.upper);
  }
  const Vector bracket =
      spec_.tail().g_gradient(y_old) - b.transpose() * lambda_half +
      params_.beta * (b.transpose() * (ax_new + b * y_old - spec_.rhs()));
  const Vector candidate = y_old - bracket / sigma_;
  return prox_map(eff_h_, sigma_, candidate);
}

IterateState Stepper::advance(const IterateState& state) const {
  spec_.check_point_dims(state.x, state.y);
  if (state.lambda.size() != spec_.n()) {
    throw DimensionError("step: multiplier length mismatch");
  }
  const Index p = spec_.num_blocks();
  const double beta = params_.beta;
  const Matrix& b = spec_.b_mat();

  const Vector ax_old = spec_.apply_a(state.x);
  const Vector by_old = b * state.y;

  // Block refreshes see the other blocks at their current values; the p
  // subproblems are independent of one another.
  std::vector<Vector> x_new(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    const Block& blk = spec_.block(i);
    const Vector partial =
        ax_old - blk.a * state.x[static_cast<size_t>(i)] + by_old - spec_.rhs();
    SubproblemInstance inst;
    inst.quad_matrix = block_quad_[static_cast<size_t>(i)];
    inst.linear_term = block_lin_[static_cast<size_t>(i)] -
                       blk.a.transpose() * state.lambda +
                       beta * (blk.a.transpose() * partial);
    // Components converging to zero shrink like the square of the previous
    // value; flooring the prox anchor (far below anything the residuals can
    // resolve) keeps the barrier representable in doubles.
    const Vector anchor =
        state.x[static_cast<size_t>(i)].cwiseMax(kAnchorFloor);
    inst.lqp =
        LqpTerm{params_.mu, anchor, params_.r[static_cast<size_t>(i)]};
    x_new[static_cast<size_t>(i)] =
        solve_block_subproblem(inst, anchor, params_.subproblem_tol);
  }

  const Vector ax_new = spec_.apply_a(x_new);
  const Vector e_half = ax_new + by_old - spec_.rhs();
  const Vector lambda_half = state.lambda - params_.alpha * beta * e_half;
  Vector lambda_tilde = state.lambda - beta * e_half;

  const Vector y_new = y_refresh(ax_new, state.y, lambda_half);
  const Vector e_new = ax_new + b * y_new - spec_.rhs();
  Vector lambda_new = lambda_half - params_.tau * beta * e_new;

  IterateState next;
  next.x = x_new;
  next.y = y_new;
  next.lambda = std::move(lambda_new);
  next.lambda_half = lambda_half;
  next.predictor = WPoint{std::move(x_new), y_new, std::move(lambda_tilde)};
  return next;
}

IterateState Stepper::initial_state() const {
  const Index p = spec_.num_blocks();
  std::vector<Vector> x0(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    x0[static_cast<size_t>(i)] = Vector::Ones(spec_.block_dim(i));
  }
  const Vector y_pre = spec_.y_domain().project(Vector::Zero(spec_.y_dim()));
  const Vector zero_multiplier = Vector::Zero(spec_.n());
  const Vector ax0 = spec_.apply_a(x0);
  const Vector y0 = y_refresh(ax0, y_pre, zero_multiplier);
  const Vector e0 = ax0 + spec_.b_mat() * y0 - spec_.rhs();

  IterateState init;
  init.x = std::move(x0);
  init.y = y0;
  init.lambda = -params_.tau * params_.beta * e0;
  init.lambda_half = zero_multiplier;
  init.predictor = std::nullopt;
  return init;
}

SolveResult run_loop(const ProblemSpec& spec, const Stepper& stepper,
                     std::optional<IterateState> init,
                     const SolveOptions& options) {
  const SolverParams& params = stepper.params();
  IterateState state = init ? std::move(*init) : stepper.initial_state();
  spec.check_point_dims(state.x, state.y);

  const bool monitored = options.monitor.has_value();
  Vector ref_stacked;
  if (monitored) {
    ref_stacked = stack_point(spec, options.monitor->reference);
  }
  const auto h_dist_sq = [&](const IterateState& s) {
    const Vector v =
        stack_point(spec, WPoint{s.x, s.y, s.lambda}) - ref_stacked;
    return v.dot(options.monitor->h * v);
  };

  SolveResult result;
  result.reason = TerminationReason::kIterationCap;

  TraceRecord rec0;
  rec0.iter = 0;
  rec0.feas_norm = primal_residual(spec, state.x, state.y).norm();
  rec0.objective = evaluate_objective(spec, state.x, state.y);
  rec0.block_move_norms.assign(static_cast<size_t>(spec.num_blocks()), 0.0);
  rec0.y_move_norm = 0.0;
  rec0.h_distance_sq = monitored ? h_dist_sq(state) : kNan;
  rec0.certificate_slack = monitored ? 0.0 : kNan;
  result.trace.push_back(std::move(rec0));
  if (options.record_states) result.states.push_back(state);

  for (int k = 0; k < params.max_iter; ++k) {
    IterateState next;
    try {
      next = stepper.advance(state);
    } catch (const ConvergenceError&) {
      result.reason = TerminationReason::kSubproblemFailure;
      break;
    }

    TraceRecord rec;
    rec.iter = k + 1;
    rec.feas_norm = primal_residual(spec, next.x, next.y).norm();
    rec.objective = evaluate_objective(spec, next.x, next.y);
    rec.block_move_norms.resize(static_cast<size_t>(spec.num_blocks()));
    double max_block_move = 0.0;
    for (Index i = 0; i < spec.num_blocks(); ++i) {
      const double mv =
          (spec.block(i).a *
           (next.x[static_cast<size_t>(i)] - state.x[static_cast<size_t>(i)]))
              .norm();
      rec.block_move_norms[static_cast<size_t>(i)] = mv;
      max_block_move = std::max(max_block_move, mv);
    }
    rec.y_move_norm = (spec.b_mat() * (next.y - state.y)).norm();

    if (monitored) {
      const ReferenceMonitor& mon = *options.monitor;
      const double prev_feas = result.trace.back().feas_norm;
      const double prev_dist = result.trace.back().h_distance_sq;
      double move_sq = 0.0;
      for (const double mv : rec.block_move_norms) move_sq += mv * mv;
      rec.h_distance_sq = h_dist_sq(next);
      const double lhs = rec.h_distance_sq + mon.xi3 * rec.feas_norm * rec.feas_norm;
      const double rhs = prev_dist + mon.xi3 * prev_feas * prev_feas -
                         mon.xi1 * move_sq -
                         mon.xi2 * rec.feas_norm * rec.feas_norm;
      rec.certificate_slack = lhs - rhs;
    } else {
      rec.h_distance_sq = kNan;
      rec.certificate_slack = kNan;
    }

    const double progress =
        std::max({rec.feas_norm, max_block_move, rec.y_move_norm});
    result.trace.push_back(std::move(rec));
    state = std::move(next);
    if (options.record_states) result.states.push_back(state);

    if (progress <= params.feas_tol) {
      result.reason = TerminationReason::kConverged;
      break;
    }
  }

  result.final_state = std::move(state);
  return result;
}

}  // namespace lqpadmm::detail
