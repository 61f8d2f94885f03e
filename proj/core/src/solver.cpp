#include "lqpadmm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "engine.hpp"
#include "lqpadmm/certify.hpp"
#include "lqpadmm/numeric.hpp"

namespace lqpadmm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Minimizes (1/2) x'Kx + q'x over x >= 0 for a positive definite K by a
/// projected Newton iteration; used by the reference scheme, which has no
/// interior proximal term to keep its blocks positive.
Vector projected_newton_qp(const Matrix& k, const Vector& q,
                           const Vector& warm, double tol) {
  const Index m = q.size();
  const auto objective = [&](const Vector& v) {
    return 0.5 * v.dot(k * v) + q.dot(v);
  };
  Vector x = warm.cwiseMax(0.0);
  double fx = objective(x);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const Vector g = k * x + q;
    const Vector projected_grad = x - (x - g).cwiseMax(0.0);
    const double floor =
        32.0 * kEps * ((k * x).lpNorm<Eigen::Infinity>() + q.lpNorm<Eigen::Infinity>());
    if (projected_grad.lpNorm<Eigen::Infinity>() <= std::max(tol, floor)) return x;

    std::vector<Index> free;
    free.reserve(static_cast<size_t>(m));
    for (Index j = 0; j < m; ++j) {
      if (!(x(j) <= 1e-12 && g(j) > 0.0)) free.push_back(j);
    }
    Vector dir = Vector::Zero(m);
    if (!free.empty()) {
      const Index nf = static_cast<Index>(free.size());
      Matrix kf(nf, nf);
      Vector gf(nf);
      for (Index a = 0; a < nf; ++a) {
        gf(a) = g(free[static_cast<size_t>(a)]);
        for (Index c = 0; c < nf; ++c) {
          kf(a, c) = k(free[static_cast<size_t>(a)], free[static_cast<size_t>(c)]);
        }
      }
      const Vector df = numeric::Cholesky(kf).solve(-gf);
      for (Index a = 0; a < nf; ++a) dir(free[static_cast<size_t>(a)]) = df(a);
    }

    double t = 1.0;
    Vector candidate = (x + t * dir).cwiseMax(0.0);
    double fc = objective(candidate);
    int halvings = 0;
    while (fc > fx + 1e-4 * g.dot(candidate - x) && halvings < 60) {
      t *= 0.5;
      candidate = (x + t * dir).cwiseMax(0.0);
      fc = objective(candidate);
      ++halvings;
    }
    if (halvings >= 60) {
      throw ConvergenceError("projected newton: line search failed",
                             projected_grad.norm());
    }
    const bool progressed = fc < fx;
    x = candidate;
    fx = fc;
    if (!progressed) return x;
  }
  const Vector g = k * x + q;
  throw ConvergenceError("projected newton: iteration cap reached",
                         (x - (x - g).cwiseMax(0.0)).norm());
}

}  // namespace

Vector stack_point(const ProblemSpec& spec, const WPoint& w) {
  spec.check_point_dims(w.x, w.y);
  if (w.lambda.size() != spec.n()) {
    throw DimensionError("stack_point: multiplier length mismatch");
  }
  Vector out(spec.x_dim() + spec.y_dim() + spec.n());
  Index at = 0;
  for (const Vector& xi : w.x) {
    out.segment(at, xi.size()) = xi;
    at += xi.size();
  }
  out.segment(at, w.y.size()) = w.y;
  at += w.y.size();
  out.segment(at, w.lambda.size()) = w.lambda;
  return out;
}

SolverParams default_params(const ProblemSpec& spec, double alpha, double tau,
                            double beta, double mu) {
  if (!(beta > 0.0)) throw ParameterError("beta > 0 is required");
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("0 < mu < 1 is required");
  const Index p = spec.num_blocks();
  SolverParams params;
  params.beta = beta;
  params.alpha = alpha;
  params.tau = tau;
  params.mu = mu;
  params.gamma = p > 1 ? 1.05 * static_cast<double>(p - 1) / (1.0 - mu) : 1.0;
  params.r.resize(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    const Matrix& a = spec.block(i).a;
    params.r[static_cast<size_t>(i)] =
        params.gamma * beta * numeric::spectral_norm(a.transpose() * a);
  }
  validate_params(spec, params);
  return params;
}

void validate_params(const ProblemSpec& spec, const SolverParams& params) {
  const certify::StepsizeCheck region =
      certify::check_stepsize_region(params.alpha, params.tau);
  if (!region.ok) throw ParameterError(region.failure);
  if (!(params.beta > 0.0)) throw ParameterError("beta > 0 is required");
  if (!(params.mu > 0.0 && params.mu < 1.0)) {
    throw ParameterError("0 < mu < 1 is required");
  }
  const Index p = spec.num_blocks();
  const double gamma_floor =
      p > 1 ? static_cast<double>(p - 1) / (1.0 - params.mu) : 0.0;
  if (!(params.gamma > gamma_floor)) {
    std::ostringstream os;
    os << "gamma > (p-1)/(1-mu) is required (gamma = " << params.gamma
       << ", floor = " << gamma_floor << ")";
    throw ParameterError(os.str());
  }
  if (params.r.size() != static_cast<size_t>(p)) {
    throw ParameterError("one proximal weight r_i per block is required");
  }
  for (Index i = 0; i < p; ++i) {
    const Matrix& a = spec.block(i).a;
    const double floor =
        params.gamma * params.beta * numeric::spectral_norm(a.transpose() * a);
    if (params.r[static_cast<size_t>(i)] < floor * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "r_" << i << " >= gamma*beta*||A_i'A_i|| is required (r = "
         << params.r[static_cast<size_t>(i)] << ", floor = " << floor << ")";
      throw ParameterError(os.str());
    }
  }
  if (params.max_iter < 0) throw ParameterError("max_iter >= 0 is required");
  if (!(params.feas_tol >= 0.0)) {
    throw ParameterError("feas_tol >= 0 is required");
  }
  if (!(params.subproblem_tol > 0.0)) {
    throw ParameterError("subproblem_tol > 0 is required");
  }
}

IterateState default_initial_state(const ProblemSpec& spec,
                                   const SolverParams& params) {
  validate_params(spec, params);
  return detail::Stepper(spec, params, detail::YMode::kExact, 0.0)
      .initial_state();
}

IterateState step(const ProblemSpec& spec, const SolverParams& params,
                  const IterateState& state) {
  validate_params(spec, params);
  return detail::Stepper(spec, params, detail::YMode::kExact, 0.0)
      .advance(state);
}

SolveResult solve(const ProblemSpec& spec, const SolverParams& params,
                  std::optional<IterateState> init,
                  const SolveOptions& options) {
  validate_params(spec, params);
  detail::Stepper stepper(spec, params, detail::YMode::kExact, 0.0);
  return detail::run_loop(spec, stepper, std::move(init), options);
}

WPoint ergodic_average(const ProblemSpec& spec,
                       const std::vector<IterateState>& states, int kappa,
                       int t) {
  if (kappa < 0 || t < 0) {
    throw DomainError("ergodic average: window must be nonnegative");
  }
  const size_t last = static_cast<size_t>(kappa) + static_cast<size_t>(t) + 1;
  if (last >= states.size()) {
    throw DomainError("ergodic average: window exceeds the recorded history");
  }
  const Index p = spec.num_blocks();
  WPoint avg;
  avg.x.resize(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    avg.x[static_cast<size_t>(i)] = Vector::Zero(spec.block_dim(i));
  }
  avg.y = Vector::Zero(spec.y_dim());
  avg.lambda = Vector::Zero(spec.n());
  for (size_t k = static_cast<size_t>(kappa) + 1; k <= last; ++k) {
    if (!states[k].predictor) {
      throw DomainError("ergodic average: history lacks predictors");
    }
    const WPoint& pred = *states[k].predictor;
    for (size_t i = 0; i < avg.x.size(); ++i) avg.x[i] += pred.x[i];
    avg.y += pred.y;
    avg.lambda += pred.lambda;
  }
  const double scale = 1.0 / static_cast<double>(t + 1);
  for (auto& xi : avg.x) xi *= scale;
  avg.y *= scale;
  avg.lambda *= scale;
  return avg;
}

SolveResult baseline_gauss_seidel_admm(const ProblemSpec& spec, double beta,
                                       int max_iter, double feas_tol,
                                       double subproblem_tol) {
  if (!(beta > 0.0)) throw ParameterError("beta > 0 is required");
  if (max_iter < 0) throw ParameterError("max_iter >= 0 is required");
  const Index p = spec.num_blocks();

  std::vector<Matrix> block_quad;
  std::vector<Vector> block_lin;
  for (Index i = 0; i < p; ++i) {
    const Block& blk = spec.block(i);
    const Index m = blk.a.cols();
    Matrix quad = beta * (blk.a.transpose() * blk.a);
    quad.diagonal() += blk.f.model_quad_diag(m);
    quad.diagonal().array() += 1e-12;  // ridge: blocks carry no proximal term
    block_quad.push_back(std::move(quad));
    block_lin.push_back(blk.f.model_linear(m));
  }
  detail::ExactYSystem y_system = detail::build_exact_y_system(spec, beta);
  const Vector tail_lin = spec.tail().g_kind == TailFunction::GKind::kZero
                              ? Vector::Zero(spec.y_dim())
                              : spec.tail().g_c;

  IterateState state;
  state.x.resize(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    state.x[static_cast<size_t>(i)] = Vector::Ones(spec.block_dim(i));
  }
  state.y = spec.y_domain().project(Vector::Zero(spec.y_dim()));
  state.lambda = Vector::Zero(spec.n());
  state.lambda_half = Vector::Zero(spec.n());

  SolveResult result;
  result.reason = TerminationReason::kIterationCap;
  TraceRecord rec0;
  rec0.iter = 0;
  rec0.feas_norm = primal_residual(spec, state.x, state.y).norm();
  rec0.objective = evaluate_objective(spec, state.x, state.y);
  rec0.block_move_norms.assign(static_cast<size_t>(p), 0.0);
  rec0.y_move_norm = 0.0;
  rec0.h_distance_sq = kNan;
  rec0.certificate_slack = kNan;
  result.trace.push_back(std::move(rec0));
  result.states.push_back(state);

  const Matrix& b = spec.b_mat();
  for (int k = 0; k < max_iter; ++k) {
    IterateState next = state;
    bool failed = false;
    try {
      // Cyclic sweep: each block sees the already refreshed earlier blocks.
      for (Index i = 0; i < p; ++i) {
        const Block& blk = spec.block(i);
        const Vector partial = spec.apply_a(next.x) -
                               blk.a * next.x[static_cast<size_t>(i)] +
                               b * state.y - spec.rhs();
        const Vector q = block_lin[static_cast<size_t>(i)] -
                         blk.a.transpose() * state.lambda +
                         beta * (blk.a.transpose() * partial);
        next.x[static_cast<size_t>(i)] =
            projected_newton_qp(block_quad[static_cast<size_t>(i)], q,
                                state.x[static_cast<size_t>(i)],
                                subproblem_tol);
      }
      const Vector ax_new = spec.apply_a(next.x);
      const Vector rhs_y =
          b.transpose() * state.lambda - tail_lin -
          beta * (b.transpose() * (ax_new - spec.rhs()));
      if (y_system.mode == detail::ExactYSystem::Mode::kDense) {
        next.y = y_system.chol->solve(rhs_y);
      } else {
        next.y = (rhs_y.array() / y_system.diag.array())
                     .matrix()
                     .cwiseMax(y_system.lower)
                     .cwiseMin(y_system.upper);
      }
      next.lambda =
          state.lambda - beta * (ax_new + b * next.y - spec.rhs());
      next.lambda_half = state.lambda;
      next.predictor = std::nullopt;
    } catch (const ConvergenceError&) {
      failed = true;
    }
    if (failed) {
      result.reason = TerminationReason::kSubproblemFailure;
      break;
    }

    TraceRecord rec;
    rec.iter = k + 1;
    rec.feas_norm = primal_residual(spec, next.x, next.y).norm();
    rec.objective = evaluate_objective(spec, next.x, next.y);
    rec.block_move_norms.resize(static_cast<size_t>(p));
    double max_block_move = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double mv =
          (spec.block(i).a *
           (next.x[static_cast<size_t>(i)] - state.x[static_cast<size_t>(i)]))
              .norm();
      rec.block_move_norms[static_cast<size_t>(i)] = mv;
      max_block_move = std::max(max_block_move, mv);
    }
    rec.y_move_norm = (b * (next.y - state.y)).norm();
    rec.h_distance_sq = kNan;
    rec.certificate_slack = kNan;

    const double progress =
        std::max({rec.feas_norm, max_block_move, rec.y_move_norm});
    result.trace.push_back(std::move(rec));
    state = std::move(next);
    result.states.push_back(state);
    if (progress <= feas_tol) {
      result.reason = TerminationReason::kConverged;
      break;
    }
  }
  result.final_state = std::move(state);
  return result;
}

bool exact_y_update_supported(const ProblemSpec& spec) {
  try {
    detail::build_exact_y_system(spec, 1.0);
    return true;
  } catch (const ConfigurationError&) {
    return false;
  }
}

}  // namespace lqpadmm
