#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lqpadmm/certify.hpp"
#include "lqpadmm/extension.hpp"
#include "lqpadmm/io.hpp"
#include "lqpadmm/problem.hpp"
#include "lqpadmm/solver.hpp"

namespace lq = lqpadmm;
using nlohmann::json;

namespace {

bool log_enabled() {
  const char* v = std::getenv("LQPADMM_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[lqpadmm] " << msg << "\n";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct CommonOpts {
  std::string problem_path;
  std::string generator;
  int rows = 40;
  int block_size = 5;
  int p = 3;
  double sparsity = 0.2;
  int m = 3;
  int n = 8;
  std::uint64_t seed = 1;
};

void add_common_options(CLI::App* cmd, CommonOpts& c) {
  auto* prob = cmd->add_option("--problem", c.problem_path,
                               "Problem description JSON file");
  auto* gen =
      cmd->add_option("--generator", c.generator, "Built-in instance family")
          ->check(CLI::IsMember({"sparse-signal", "lp-box-dual"}));
  prob->excludes(gen);
  gen->excludes(prob);
  cmd->add_option("--rows", c.rows, "sparse-signal: coupling rows")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--block-size", c.block_size, "sparse-signal: columns per block")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--p", c.p, "sparse-signal: number of nonnegative blocks")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sparsity", c.sparsity, "sparse-signal: support fraction")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--m", c.m, "lp-box-dual: primal constraint rows")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--n", c.n, "lp-box-dual: primal variables")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "generator seed");
}

lq::ProblemSpec load_problem(const CommonOpts& c) {
  if (!c.problem_path.empty()) {
    log_line("reading problem from " + c.problem_path);
    return lq::io::read_problem_json(c.problem_path);
  }
  if (c.generator == "sparse-signal") {
    log_line("generating sparse-signal instance");
    return lq::generate_sparse_signal_instance(c.rows, c.block_size, c.p,
                                               c.sparsity, c.seed)
        .spec;
  }
  if (c.generator == "lp-box-dual") {
    log_line("generating lp-box-dual instance");
    return lq::generate_lp_box_dual_instance(c.m, c.n, c.seed).spec;
  }
  throw lq::ConfigurationError("either --problem or --generator is required");
}

struct RunOpts {
  CommonOpts common;
  std::string config_path;
  std::string algorithm = "admm_lqp";
  double alpha = 0.0;
  double tau = 1.0;
  double beta = 1.0;
  double mu = 0.01;
  std::optional<double> gamma;
  std::optional<double> sigma;
  int max_iter = 5000;
  double feas_tol = 1e-8;
  std::string trace_out = "trace.csv";
  std::string report_out = "report.json";
};

struct RunFlags {
  CLI::Option* algorithm = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* mu = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* max_iter = nullptr;
  CLI::Option* feas_tol = nullptr;
};

void overlay_config(RunOpts& o, const RunFlags& f) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw lq::ConfigurationError("cannot open config: " + o.config_path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw lq::ConfigurationError(o.config_path + ": " + e.what());
  }
  static const std::vector<std::string> known = {
      "algorithm", "alpha", "tau",      "beta",    "mu",
      "gamma",     "sigma", "max_iter", "feas_tol"};
  for (const auto& item : cfg.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw lq::ConfigurationError(o.config_path + ": unknown key '" +
                                   item.key() + "'");
    }
  }
  try {
    if (f.algorithm->count() == 0 && cfg.contains("algorithm"))
      o.algorithm = cfg.at("algorithm").get<std::string>();
    if (f.alpha->count() == 0 && cfg.contains("alpha"))
      o.alpha = cfg.at("alpha").get<double>();
    if (f.tau->count() == 0 && cfg.contains("tau"))
      o.tau = cfg.at("tau").get<double>();
    if (f.beta->count() == 0 && cfg.contains("beta"))
      o.beta = cfg.at("beta").get<double>();
    if (f.mu->count() == 0 && cfg.contains("mu"))
      o.mu = cfg.at("mu").get<double>();
    if (f.gamma->count() == 0 && cfg.contains("gamma"))
      o.gamma = cfg.at("gamma").get<double>();
    if (f.sigma->count() == 0 && cfg.contains("sigma"))
      o.sigma = cfg.at("sigma").get<double>();
    if (f.max_iter->count() == 0 && cfg.contains("max_iter"))
      o.max_iter = cfg.at("max_iter").get<int>();
    if (f.feas_tol->count() == 0 && cfg.contains("feas_tol"))
      o.feas_tol = cfg.at("feas_tol").get<double>();
  } catch (const json::exception& e) {
    throw lq::ConfigurationError(o.config_path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw lq::ConfigurationError("cannot open file for writing: " + path);
  out << text;
}

const char* status_name(lq::TerminationReason reason) {
  switch (reason) {
    case lq::TerminationReason::kConverged:
      return "converged";
    case lq::TerminationReason::kIterationCap:
      return "iteration_cap";
    case lq::TerminationReason::kSubproblemFailure:
      return "subproblem_failure";
  }
  return "unknown";
}

int exit_code(lq::TerminationReason reason) {
  switch (reason) {
    case lq::TerminationReason::kConverged:
      return 0;
    case lq::TerminationReason::kIterationCap:
      return 2;
    case lq::TerminationReason::kSubproblemFailure:
      return 1;
  }
  return 1;
}

std::string routed_algorithm(const lq::ProblemSpec& spec,
                             const std::string& requested) {
  if (requested == "admm_lqp" && !lq::exact_y_update_supported(spec)) {
    std::cerr << "note: the tail subproblem has no closed-form update here; "
                 "running eadmm_lqp instead\n";
    return "eadmm_lqp";
  }
  return requested;
}

int do_run(const RunOpts& o) {
  const lq::ProblemSpec spec = load_problem(o.common);
  if (o.algorithm != "admm_lqp" && o.algorithm != "eadmm_lqp" &&
      o.algorithm != "baseline_gs") {
    throw lq::ConfigurationError("unknown algorithm '" + o.algorithm + "'");
  }

  if (o.algorithm == "baseline_gs") {
    log_line("baseline solve");
    const lq::SolveResult res = lq::baseline_gauss_seidel_admm(
        spec, o.beta, o.max_iter, o.feas_tol);
    lq::io::write_trace_csv(res.trace, o.trace_out);
    write_text(o.report_out,
               "{\n"
               "  \"H_min_eig\": null,\n"
               "  \"xi\": null,\n"
               "  \"contraction_min_slack\": null,\n"
               "  \"ergodic_lhs_rhs\": null,\n"
               "  \"K_membership\": null\n"
               "}\n");
    std::cout << "algorithm: baseline_gs\n"
              << "status: " << status_name(res.reason) << "\n"
              << "iterations: " << res.trace.back().iter << "\n"
              << "final_feas: " << fmtg(res.trace.back().feas_norm) << "\n"
              << "objective: " << fmt17(res.trace.back().objective) << "\n";
    return exit_code(res.reason);
  }

  const std::string algorithm = routed_algorithm(spec, o.algorithm);

  lq::SolverParams params =
      lq::default_params(spec, o.alpha, o.tau, o.beta, o.mu);
  if (o.gamma) {
    for (double& ri : params.r) ri *= *o.gamma / params.gamma;
    params.gamma = *o.gamma;
  }
  params.max_iter = o.max_iter;
  params.feas_tol = o.feas_tol;

  std::optional<lq::ExtensionParams> ext;
  lq::certify::Variant variant = lq::certify::Variant::kPlain;
  double sigma = 0.0;
  if (algorithm == "eadmm_lqp") {
    lq::ExtensionParams e = lq::default_extension_params(
        spec, params.alpha, params.tau, params.beta, params.mu);
    e.base = params;
    if (o.sigma) e.sigma = *o.sigma;
    lq::validate_extension_params(spec, e);
    ext = e;
    sigma = e.sigma;
    variant = lq::certify::Variant::kLinearized;
  } else {
    lq::validate_params(spec, params);
  }

  log_line("reference solve");
  lq::SolverParams ref_params = params;
  ref_params.feas_tol = 1e-12;
  ref_params.max_iter = params.max_iter * 10;
  ref_params.subproblem_tol = std::min(params.subproblem_tol, 1e-13);
  lq::SolveOptions ref_options;
  ref_options.record_states = false;
  lq::SolveResult ref_res;
  if (ext) {
    lq::ExtensionParams ref_ext = *ext;
    ref_ext.base = ref_params;
    ref_res = lq::solve_extended(spec, ref_ext, std::nullopt, ref_options);
  } else {
    ref_res = lq::solve(spec, ref_params, std::nullopt, ref_options);
  }
  log_line("reference: " + std::string(status_name(ref_res.reason)) + " at " +
           std::to_string(ref_res.trace.back().iter) + " iterations, feas " +
           fmtg(ref_res.trace.back().feas_norm));
  const lq::WPoint reference{ref_res.final_state.x, ref_res.final_state.y,
                             ref_res.final_state.lambda};

  log_line("assembling certificates");
  const auto mats = lq::certify::assemble(spec, params, variant, sigma);
  const double h_min =
      lq::certify::verify_h_positive_definite(mats, spec, params);
  const auto xi = lq::certify::xi_constants(params, spec.num_blocks());
  const auto region =
      lq::certify::check_stepsize_region(params.alpha, params.tau);

  lq::SolveOptions options;
  options.monitor =
      lq::ReferenceMonitor{mats.h, xi.xi1, xi.xi2, xi.xi3, reference};
  options.record_states = true;
  log_line("monitored solve");
  const lq::SolveResult res = ext
      ? lq::solve_extended(spec, *ext, std::nullopt, options)
      : lq::solve(spec, params, std::nullopt, options);

  lq::certify::CertificateReport report;
  report.h_min_eig = h_min;
  report.xi = xi;
  report.k_membership = region.ok;
  const auto slacks =
      lq::certify::check_contraction(spec, res.states, mats, xi, reference);
  if (!slacks.empty()) {
    report.contraction_min_slack =
        *std::min_element(slacks.begin(), slacks.end());
  }
  if (res.states.size() >= 2) {
    const int t = static_cast<int>(res.states.size()) - 2;
    const auto ergodic =
        lq::certify::check_ergodic_bound(spec, res.states, mats, xi, 0, t,
                                         reference);
    report.ergodic_lhs_rhs = {ergodic.lhs, ergodic.rhs};
  }
  lq::io::write_trace_csv(res.trace, o.trace_out);
  lq::io::write_report_json(report, o.report_out);

  std::cout << "algorithm: " << algorithm << "\n"
            << "status: " << status_name(res.reason) << "\n"
            << "iterations: " << res.trace.back().iter << "\n"
            << "final_feas: " << fmtg(res.trace.back().feas_norm) << "\n"
            << "objective: " << fmt17(res.trace.back().objective) << "\n"
            << "H_min_eig: " << fmtg(report.h_min_eig) << "\n"
            << "xi: " << fmtg(xi.xi1) << " " << fmtg(xi.xi2) << " "
            << fmtg(xi.xi3) << "\n";
  if (report.contraction_min_slack) {
    std::cout << "contraction_min_slack: " << fmtg(*report.contraction_min_slack)
              << "\n";
  }
  if (report.ergodic_lhs_rhs) {
    std::cout << "ergodic: lhs=" << fmtg(report.ergodic_lhs_rhs->first)
              << " rhs=" << fmtg(report.ergodic_lhs_rhs->second) << "\n";
  }
  return exit_code(res.reason);
}

struct CompareOpts {
  CommonOpts common;
  std::string pairs = "0:1";
  std::string algorithm = "admm_lqp";
  double beta = 1.0;
  double mu = 0.01;
  int max_iter = 5000;
  double feas_tol = 1e-8;
  bool no_baseline = false;
  std::string out = "compare.csv";
};

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw lq::ConfigurationError("--pairs expects alpha:tau entries, got '" +
                                   item + "'");
    }
    try {
      out.emplace_back(std::stod(item.substr(0, colon)),
                       std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw lq::ConfigurationError("--pairs expects numbers, got '" + item + "'");
    }
  }
  if (out.empty()) throw lq::ConfigurationError("--pairs is empty");
  return out;
}

int do_compare(const CompareOpts& o) {
  const lq::ProblemSpec spec = load_problem(o.common);
  const auto pairs = parse_pairs(o.pairs);

  std::ostringstream csv;
  csv << "label,algorithm,alpha,tau,status,iterations,final_feas_norm,"
         "final_objective,note\n";

  for (const auto& [alpha, tau] : pairs) {
    const std::string label = "alpha=" + fmtg(alpha) + " tau=" + fmtg(tau);
    const auto region = lq::certify::check_stepsize_region(alpha, tau);
    if (!region.ok) {
      csv << label << "," << o.algorithm << "," << fmtg(alpha) << ","
          << fmtg(tau) << ",skipped,0,,,violates " << region.failure << "\n";
      continue;
    }
    const std::string algorithm = routed_algorithm(spec, o.algorithm);
    lq::SolverParams params =
        lq::default_params(spec, alpha, tau, o.beta, o.mu);
    params.max_iter = o.max_iter;
    params.feas_tol = o.feas_tol;
    lq::SolveOptions options;
    options.record_states = false;
    log_line("running " + label);
    lq::SolveResult res;
    if (algorithm == "eadmm_lqp") {
      lq::ExtensionParams ext = lq::default_extension_params(
          spec, params.alpha, params.tau, params.beta, params.mu);
      ext.base = params;
      res = lq::solve_extended(spec, ext, std::nullopt, options);
    } else {
      res = lq::solve(spec, params, std::nullopt, options);
    }
    csv << label << "," << algorithm << "," << fmtg(alpha) << "," << fmtg(tau)
        << "," << status_name(res.reason) << "," << res.trace.back().iter
        << "," << fmt17(res.trace.back().feas_norm) << ","
        << fmt17(res.trace.back().objective) << ",\n";
  }

  if (!o.no_baseline) {
    log_line("running baseline");
    const lq::SolveResult res = lq::baseline_gauss_seidel_admm(
        spec, o.beta, o.max_iter, o.feas_tol);
    csv << "baseline,baseline_gs,,," << status_name(res.reason) << ","
        << res.trace.back().iter << "," << fmt17(res.trace.back().feas_norm)
        << "," << fmt17(res.trace.back().objective) << ",no certificate\n";
  }

  write_text(o.out, csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-block splitting solver with run-time convergence "
               "certificates"};
  app.require_subcommand(1);

  RunOpts run_opts;
  RunFlags run_flags;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Solve one instance and certify the run");
  add_common_options(run_cmd, run_opts.common);
  run_cmd->add_option("--config", run_opts.config_path,
                      "JSON file with solver keys (flags take precedence)");
  run_flags.algorithm =
      run_cmd->add_option("--algorithm", run_opts.algorithm,
                          "admm_lqp | eadmm_lqp | baseline_gs");
  run_flags.alpha = run_cmd->add_option("--alpha", run_opts.alpha,
                                        "dual half-step factor");
  run_flags.tau = run_cmd->add_option("--tau", run_opts.tau,
                                      "dual step factor");
  run_flags.beta = run_cmd->add_option("--beta", run_opts.beta,
                                       "penalty parameter");
  run_flags.mu = run_cmd->add_option("--mu", run_opts.mu,
                                     "interior barrier share");
  double gamma_val = 0.0;
  run_flags.gamma = run_cmd->add_option("--gamma", gamma_val,
                                        "proximal weight multiplier");
  double sigma_val = 0.0;
  run_flags.sigma = run_cmd->add_option("--sigma", sigma_val,
                                        "linearized tail proximal weight");
  run_flags.max_iter =
      run_cmd->add_option("--max-iter", run_opts.max_iter, "iteration cap")
          ->check(CLI::PositiveNumber);
  run_flags.feas_tol = run_cmd->add_option("--feas-tol", run_opts.feas_tol,
                                           "stopping tolerance");
  run_cmd->add_option("--trace-out", run_opts.trace_out,
                      "iteration trace CSV path");
  run_cmd->add_option("--report-out", run_opts.report_out,
                      "certificate report JSON path");

  CompareOpts cmp_opts;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "Run a stepsize sweep plus the uncertified baseline");
  add_common_options(cmp_cmd, cmp_opts.common);
  cmp_cmd->add_option("--pairs", cmp_opts.pairs,
                      "comma-separated alpha:tau pairs");
  cmp_cmd->add_option("--algorithm", cmp_opts.algorithm,
                      "admm_lqp | eadmm_lqp");
  cmp_cmd->add_option("--beta", cmp_opts.beta, "penalty parameter");
  cmp_cmd->add_option("--mu", cmp_opts.mu, "interior barrier share");
  cmp_cmd->add_option("--max-iter", cmp_opts.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--feas-tol", cmp_opts.feas_tol, "stopping tolerance");
  cmp_cmd->add_flag("--no-baseline", cmp_opts.no_baseline,
                    "skip the baseline row");
  cmp_cmd->add_option("--out", cmp_opts.out, "comparison CSV path");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(run_cmd)) {
      overlay_config(run_opts, run_flags);
      if (run_flags.gamma->count() > 0) run_opts.gamma = gamma_val;
      if (run_flags.sigma->count() > 0) run_opts.sigma = sigma_val;
      return do_run(run_opts);
    }
    return do_compare(cmp_opts);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const lq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
