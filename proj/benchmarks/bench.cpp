#include <benchmark/benchmark.h>

#include "lqpadmm/certify.hpp"
#include "lqpadmm/extension.hpp"
#include "lqpadmm/lqp.hpp"
#include "lqpadmm/problem.hpp"
#include "lqpadmm/solver.hpp"

namespace lq = lqpadmm;

namespace {

const lq::SparseSignalInstance& signal_instance() {
  static const lq::SparseSignalInstance inst =
      lq::generate_sparse_signal_instance(40, 5, 3, 0.2, 7);
  return inst;
}

const lq::LpBoxDualInstance& lp_instance() {
  static const lq::LpBoxDualInstance inst =
      lq::generate_lp_box_dual_instance(3, 8, 7);
  return inst;
}

lq::SubproblemInstance block_subproblem(lq::Index dim) {
  lq::Matrix a = lq::Matrix::Zero(dim, dim);
  for (lq::Index i = 0; i < dim; ++i) {
    a(i, i) = 2.0 + static_cast<double>(i % 3);
    if (i + 1 < dim) a(i, i + 1) = a(i + 1, i) = -0.5;
  }
  lq::SubproblemInstance inst;
  inst.quad_matrix = a;
  inst.linear_term = lq::Vector::Constant(dim, -1.0);
  inst.lqp.mu = 0.01;
  inst.lqp.anchor_z = lq::Vector::Constant(dim, 0.7);
  inst.lqp.weight_r = 3.0;
  return inst;
}

void bm_block_subproblem(benchmark::State& state) {
  const auto inst = block_subproblem(state.range(0));
  const lq::Vector warm = lq::Vector::Ones(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lq::solve_block_subproblem(inst, warm, 1e-10));
  }
}
BENCHMARK(bm_block_subproblem)->Arg(5)->Arg(20)->Arg(80);

void bm_plain_step(benchmark::State& state) {
  const auto& inst = lp_instance();
  const auto params = lq::default_params(inst.spec, 0.0, 1.0);
  const auto init = lq::default_initial_state(inst.spec, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lq::step(inst.spec, params, init));
  }
}
BENCHMARK(bm_plain_step);

void bm_linearized_step(benchmark::State& state) {
  const auto& inst = signal_instance();
  const auto params = lq::default_extension_params(inst.spec, 0.0, 1.0);
  const auto init = lq::default_initial_state_extended(inst.spec, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lq::extended_step(inst.spec, params, init));
  }
}
BENCHMARK(bm_linearized_step);

void bm_solve_lp_box_dual(benchmark::State& state) {
  const auto& inst = lp_instance();
  auto params = lq::default_params(inst.spec, 0.0, 1.0);
  params.feas_tol = 1e-6;
  lq::SolveOptions options;
  options.record_states = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lq::solve(inst.spec, params, std::nullopt, options));
  }
}
BENCHMARK(bm_solve_lp_box_dual);

void bm_assemble_certificates(benchmark::State& state) {
  const auto& inst = signal_instance();
  const auto params = lq::default_extension_params(inst.spec, 0.5, 0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lq::certify::assemble(
        inst.spec, params.base, lq::certify::Variant::kLinearized,
        params.sigma));
  }
}
BENCHMARK(bm_assemble_certificates);

}  // namespace

BENCHMARK_MAIN();
