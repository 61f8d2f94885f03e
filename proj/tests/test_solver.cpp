#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "lqpadmm/certify.hpp"
#include "lqpadmm/problem.hpp"
#include "lqpadmm/solver.hpp"
#include "oracles.hpp"

using namespace lqpadmm;

namespace {

// p = 1 problem with a diagonal coupling matrix, a coupled quadratic tail and
// a free tail variable; the shape the closed-form step oracle supports.
ProblemSpec make_diagonal_two_block_spec() {
  Vector c1(3);
  c1 << 0.5, -0.2, 0.9;
  Vector diag(3);
  diag << 1.5, 0.8, 2.0;
  Matrix a1 = diag.asDiagonal();
  Matrix b_mat(3, 2);
  b_mat << 1.0, 0.3, -0.2, 1.0, 0.4, -0.5;
  Matrix p_tail(2, 2);
  p_tail << 2.0, 0.3, 0.3, 1.5;
  Vector c_g(2);
  c_g << 0.1, -0.3;
  Vector rhs(3);
  rhs << 1.0, 2.0, 0.5;
  std::vector<Block> blocks;
  blocks.push_back({BlockFunction::linear(c1), a1});
  return ProblemSpec(std::move(blocks), TailFunction::quadratic_g(p_tail, c_g),
                     b_mat, rhs, YDomain::free_space());
}

IterateState state_from_point(const WPoint& w) {
  IterateState s;
  s.x = w.x;
  s.y = w.y;
  s.lambda = w.lambda;
  s.lambda_half = w.lambda;
  return s;
}

double quadratic_form(const Matrix& h, const Vector& u) { return u.dot(h * u); }

double stopping_measure(const TraceRecord& row) {
  double measure = row.feas_norm;
  for (double m : row.block_move_norms) measure = std::max(measure, m);
  return std::max(measure, row.y_move_norm);
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("stacking orders a point as blocks, tail, multiplier") {
  const auto fixture = oracle::make_saddle_fixture();
  const Vector s = stack_point(fixture.spec, fixture.w_star);
  REQUIRE(s.size() == 12);
  CHECK((s.segment(0, 4) - fixture.w_star.x[0]).norm() == 0.0);
  CHECK((s.segment(4, 4) - fixture.w_star.y).norm() == 0.0);
  CHECK((s.segment(8, 4) - fixture.w_star.lambda).norm() == 0.0);
}

TEST_CASE("default parameters for a single block") {
  const auto fixture = oracle::make_saddle_fixture();
  const auto params = default_params(fixture.spec, 0.0, 1.0, 0.7, 0.5);
  CHECK(params.gamma == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(params.r.size() == 1);
  // The coupling matrix is the identity, so the proximal weight collapses to
  // the bare penalty.
  CHECK(params.r[0] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(params.beta == 0.7);
  CHECK(params.mu == 0.5);
}

TEST_CASE("default proximal weights scale with the block Gram norms") {
  const auto inst = generate_sparse_signal_instance(8, 3, 3, 0.4, 7);
  const double beta = 1.3;
  const auto params = default_params(inst.spec, 0.2, 0.9, beta, 0.5);
  // Three blocks at barrier share 1/2: multiplier 1.05 * (p-1)/(1-mu).
  CHECK(params.gamma == doctest::Approx(4.2).epsilon(1e-14));
  REQUIRE(params.r.size() == 3);
  for (Index i = 0; i < 3; ++i) {
    const Matrix gram =
        inst.spec.block(i).a.transpose() * inst.spec.block(i).a;
    const auto eigs = oracle::characteristic_poly_eigenvalues(gram);
    CHECK(params.r[static_cast<size_t>(i)] ==
          doctest::Approx(4.2 * beta * eigs.back()).epsilon(1e-7));
  }
}

TEST_CASE("parameter validation quotes the violated inequality") {
  const auto fixture = oracle::make_saddle_fixture();
  auto params = default_params(fixture.spec, 0.0, 1.0);
  params.alpha = 1.0;
  params.tau = 0.5;
  try {
    validate_params(fixture.spec, params);
    FAIL("expected a parameter rejection");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }

  params = default_params(fixture.spec, 0.0, 1.0);
  params.r[0] *= 0.5;
  try {
    validate_params(fixture.spec, params);
    FAIL("expected a proximal weight rejection");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("r") != std::string::npos);
  }
}

TEST_CASE("the known saddle point is a fixed point of one iteration") {
  const auto fixture = oracle::make_saddle_fixture();
  const auto params = default_params(fixture.spec, 0.5, 0.9);
  const IterateState at_solution = state_from_point(fixture.w_star);
  const IterateState next = step(fixture.spec, params, at_solution);
  const Vector before = stack_point(fixture.spec, fixture.w_star);
  WPoint after{next.x, next.y, next.lambda};
  const Vector moved = stack_point(fixture.spec, after);
  CHECK((moved - before).norm() <= 1e-8);
}

TEST_CASE("one iteration matches the closed-form two-block oracle") {
  const ProblemSpec spec = make_diagonal_two_block_spec();
  const auto params = default_params(spec, 0.0, 1.0, 0.8, 0.3);
  IterateState state;
  state.x = {(Vector(3) << 1.0, 1.2, 0.7).finished()};
  state.y = (Vector(2) << 0.2, -0.4).finished();
  state.lambda = (Vector(3) << 0.1, 0.2, -0.3).finished();
  state.lambda_half = state.lambda;

  const IterateState lib = step(spec, params, state);
  const IterateState ref = oracle::two_block_step_oracle(spec, params, state);

  CHECK((lib.x[0] - ref.x[0]).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((lib.y - ref.y).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((lib.lambda_half - ref.lambda_half).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((lib.lambda - ref.lambda).lpNorm<Eigen::Infinity>() <= 1e-8);
  REQUIRE(lib.predictor.has_value());
  REQUIRE(ref.predictor.has_value());
  CHECK((lib.predictor->lambda - ref.predictor->lambda)
            .lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("dual updates satisfy their defining identities along a run") {
  const auto fixture = oracle::make_saddle_fixture();
  auto params = default_params(fixture.spec, 0.5, 0.9);
  params.max_iter = 40;
  const auto result = solve(fixture.spec, params);
  REQUIRE(result.states.size() >= 2);
  for (size_t k = 0; k + 1 < result.states.size(); ++k) {
    const auto& prev = result.states[k];
    const auto& next = result.states[k + 1];
    REQUIRE(next.predictor.has_value());
    const double scale = 1.0 + prev.lambda.norm();

    // Half-step and predictor multipliers against the recomputed residual at
    // (new blocks, old tail).
    const Vector e_half = primal_residual(fixture.spec, next.x, prev.y);
    CHECK((next.lambda_half - (prev.lambda - params.alpha * params.beta * e_half))
              .norm() <= 1e-12 * scale);
    CHECK((next.predictor->lambda - (prev.lambda - params.beta * e_half))
              .norm() <= 1e-12 * scale);

    // The same predictor multiplier phrased through the new residual and the
    // tail move.
    const Vector e_new = primal_residual(fixture.spec, next.x, next.y);
    const Vector tail_move = fixture.spec.b_mat() * (next.y - prev.y);
    CHECK((prev.lambda - next.predictor->lambda -
           params.beta * (e_new - tail_move))
              .norm() <= 1e-10 * scale);

    // Final multiplier: half step followed by the tau step on the new
    // residual.
    CHECK((next.lambda - (next.lambda_half - params.tau * params.beta * e_new))
              .norm() <= 1e-12 * scale);

    // Predictor blocks and tail agree with the accepted iterate.
    for (size_t i = 0; i < next.x.size(); ++i) {
      CHECK((next.predictor->x[i] - next.x[i]).norm() == 0.0);
    }
    CHECK((next.predictor->y - next.y).norm() == 0.0);
  }
}

TEST_CASE("every transition is the correction map applied to its predictor") {
  // One single-block run and one two-block run, at stepsize pairs on both
  // sides of the unit dual step.
  struct Case {
    ProblemSpec spec;
    double alpha;
    double tau;
  };
  const auto saddle = oracle::make_saddle_fixture();
  const auto lp = generate_lp_box_dual_instance(2, 5, 11);
  std::vector<Case> cases;
  cases.push_back({saddle.spec, 0.5, 0.9});
  cases.push_back({lp.spec, -0.3, 1.2});
  for (const auto& item : cases) {
    auto params = default_params(item.spec, item.alpha, item.tau);
    params.max_iter = 60;
    const auto result = solve(item.spec, params);
    REQUIRE(result.states.size() >= 2);
    const auto mats = certify::assemble(item.spec, params);
    for (size_t k = 0; k + 1 < result.states.size(); ++k) {
      const auto& prev = result.states[k];
      const auto& next = result.states[k + 1];
      REQUIRE(next.predictor.has_value());
      const Vector w_prev =
          stack_point(item.spec, {prev.x, prev.y, prev.lambda});
      const Vector w_next =
          stack_point(item.spec, {next.x, next.y, next.lambda});
      const Vector w_pred = stack_point(item.spec, *next.predictor);
      const Vector corrected = w_prev - mats.m * (w_prev - w_pred);
      CHECK((w_next - corrected).norm() <= 1e-10 * (1.0 + w_prev.norm()));
    }
  }
}

TEST_CASE("the box LP dual run reproduces the enumerated primal optimum") {
  const auto inst = generate_lp_box_dual_instance(2, 5, 3);
  const auto primal = oracle::enumerate_box_lp(inst.lp_b, inst.lp_c, inst.lp_d,
                                               inst.lp_lower, inst.lp_upper);
  REQUIRE(primal.feasible);
  const auto params = default_params(inst.spec, 0.0, 1.0);
  const auto result = solve(inst.spec, params);
  REQUIRE(result.reason == TerminationReason::kConverged);
  const double dual_value =
      evaluate_objective(inst.spec, result.final_state.x, result.final_state.y);
  CHECK(dual_value == doctest::Approx(-primal.optimum).epsilon(1e-6));
}

TEST_CASE("a zero iteration budget returns the initial point untouched") {
  const auto fixture = oracle::make_saddle_fixture();
  auto params = default_params(fixture.spec, 0.0, 1.0);
  params.max_iter = 0;
  IterateState init;
  init.x = {Vector::Constant(4, 2.0)};
  init.y = Vector::Constant(4, -0.5);
  init.lambda = Vector::Zero(4);
  init.lambda_half = Vector::Zero(4);
  const auto result = solve(fixture.spec, params, init);
  CHECK(result.reason == TerminationReason::kIterationCap);
  REQUIRE(result.trace.size() == 1);
  REQUIRE(result.states.size() == 1);
  CHECK(result.trace[0].iter == 0);
  CHECK((result.final_state.x[0] - init.x[0]).norm() == 0.0);
  CHECK((result.final_state.y - init.y).norm() == 0.0);
  CHECK((result.final_state.lambda - init.lambda).norm() == 0.0);
}

TEST_CASE("trace rows line up with states and stop at the right moment") {
  const auto fixture = oracle::make_saddle_fixture();
  const auto params = default_params(fixture.spec, 0.0, 1.0);
  const auto result = solve(fixture.spec, params);
  REQUIRE(result.reason == TerminationReason::kConverged);
  REQUIRE(result.trace.size() == result.states.size());
  REQUIRE(result.trace.size() >= 2);
  for (size_t k = 0; k < result.trace.size(); ++k) {
    CHECK(result.trace[k].iter == static_cast<int>(k));
    const Vector res = primal_residual(fixture.spec, result.states[k].x,
                                       result.states[k].y);
    CHECK(result.trace[k].feas_norm ==
          doctest::Approx(res.norm()).epsilon(1e-12));
    CHECK(result.trace[k].objective ==
          doctest::Approx(evaluate_objective(fixture.spec, result.states[k].x,
                                             result.states[k].y))
              .epsilon(1e-12));
  }
  // The run stops at the first transition whose progress measure falls below
  // the tolerance, and not earlier.
  for (size_t k = 1; k + 1 < result.trace.size(); ++k) {
    CHECK(stopping_measure(result.trace[k]) >= params.feas_tol);
  }
  CHECK(stopping_measure(result.trace.back()) < params.feas_tol);
}

TEST_CASE("block iterates stay strictly interior along a run") {
  const auto inst = generate_lp_box_dual_instance(2, 5, 21);
  auto params = default_params(inst.spec, 0.5, 0.9);
  params.max_iter = 80;
  const auto result = solve(inst.spec, params);
  for (const auto& state : result.states) {
    for (const auto& block : state.x) {
      CHECK(block.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("a reference monitor fills distances and certificate slacks") {
  const auto fixture = oracle::make_saddle_fixture();
  auto params = default_params(fixture.spec, 0.5, 0.9);
  params.max_iter = 120;
  const auto mats = certify::assemble(fixture.spec, params);
  const auto xi = certify::xi_constants(params, 1);

  SolveOptions options;
  options.monitor =
      ReferenceMonitor{mats.h, xi.xi1, xi.xi2, xi.xi3, fixture.w_star};
  const auto result = solve(fixture.spec, params, std::nullopt, options);
  const Vector w_star = stack_point(fixture.spec, fixture.w_star);
  REQUIRE(result.trace.size() >= 2);
  for (size_t k = 0; k < result.trace.size(); ++k) {
    const auto& state = result.states[k];
    const Vector w = stack_point(fixture.spec, {state.x, state.y, state.lambda});
    const double expected = quadratic_form(mats.h, w - w_star);
    CHECK(result.trace[k].h_distance_sq ==
          doctest::Approx(expected).epsilon(1e-8));
    if (k > 0) {
      // Left-minus-right of the per-transition contraction inequality stays
      // nonpositive up to roundoff against the exact reference.
      CHECK(result.trace[k].certificate_slack <=
            1e-10 * (1.0 + result.trace[k - 1].h_distance_sq));
    }
  }

  // Without a monitor the certificate columns are explicitly absent.
  const auto bare = solve(fixture.spec, params);
  CHECK(std::isnan(bare.trace[1].h_distance_sq));
  CHECK(std::isnan(bare.trace[1].certificate_slack));
}

TEST_CASE("window averages reproduce the recorded predictors") {
  const auto fixture = oracle::make_saddle_fixture();
  auto params = default_params(fixture.spec, 0.0, 1.0);
  params.max_iter = 10;
  const auto result = solve(fixture.spec, params);
  REQUIRE(result.states.size() >= 4);

  // A single-transition window is that transition's predictor.
  const WPoint first = ergodic_average(fixture.spec, result.states, 0, 0);
  CHECK((first.x[0] - result.states[1].predictor->x[0]).norm() <= 1e-14);
  CHECK((first.y - result.states[1].predictor->y).norm() <= 1e-14);
  CHECK((first.lambda - result.states[1].predictor->lambda).norm() <= 1e-14);

  // A two-transition window is the plain mean of the two predictors.
  const WPoint pair = ergodic_average(fixture.spec, result.states, 1, 1);
  const Vector want_y =
      0.5 * (result.states[2].predictor->y + result.states[3].predictor->y);
  CHECK((pair.y - want_y).norm() <= 1e-14);

  CHECK_THROWS_AS(ergodic_average(fixture.spec, result.states, 0, -1),
                  DomainError);
  CHECK_THROWS_AS(ergodic_average(fixture.spec, result.states, 0,
                                  static_cast<int>(result.states.size())),
                  DomainError);
  // Windows touching a state without a predictor are rejected.
  std::vector<IterateState> no_predictors(2, result.states[0]);
  no_predictors[1].predictor.reset();
  CHECK_THROWS_AS(ergodic_average(fixture.spec, no_predictors, 0, 0),
                  DomainError);
}

TEST_CASE("the cyclic baseline agrees with the regularized scheme") {
  const auto inst = generate_lp_box_dual_instance(2, 5, 3);
  const auto baseline = baseline_gauss_seidel_admm(inst.spec, 1.0, 5000);
  REQUIRE(baseline.reason == TerminationReason::kConverged);
  const auto params = default_params(inst.spec, 0.0, 1.0);
  const auto regularized = solve(inst.spec, params);
  REQUIRE(regularized.reason == TerminationReason::kConverged);
  const double a = evaluate_objective(inst.spec, baseline.final_state.x,
                                      baseline.final_state.y);
  const double b = evaluate_objective(inst.spec, regularized.final_state.x,
                                      regularized.final_state.y);
  CHECK(a == doctest::Approx(b).epsilon(1e-5));

  const auto capped = baseline_gauss_seidel_admm(inst.spec, 1.0, 0);
  CHECK(capped.reason == TerminationReason::kIterationCap);
  CHECK(capped.trace.size() == 1);
}

TEST_CASE("the plain scheme identifies problems needing linearization") {
  const auto lp = generate_lp_box_dual_instance(2, 5, 3);
  CHECK(exact_y_update_supported(lp.spec));
  const auto sparse = generate_sparse_signal_instance(12, 5, 3, 0.3, 21);
  CHECK(!exact_y_update_supported(sparse.spec));
  const auto saddle = oracle::make_saddle_fixture();
  CHECK(exact_y_update_supported(saddle.spec));
}

}  // TEST_SUITE("solver")
