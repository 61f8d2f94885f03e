#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("lqpadmm_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult run_cli(const std::string& args, const std::string& tag) {
  const fs::path out = work_dir() / (tag + ".out");
  const fs::path err = work_dir() / (tag + ".err");
  const std::string cmd = std::string(LQPADMM_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return CliResult{WEXITSTATUS(rc), slurp(out), slurp(err)};
}

std::string stdout_field(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return {};
}

size_t count_lines(const std::string& text) {
  size_t lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

const std::string kLpArgs =
    "--generator lp-box-dual --m 2 --n 5 --seed 3 "
    "--alpha 0.5 --tau 0.9 --max-iter 2000";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("rejects an out-of-range dual factor with a useful message") {
  const auto res = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --seed 3 --alpha 1.2 "
      "--trace-out " + (work_dir() / "never.csv").string() +
      " --report-out " + (work_dir() / "never.json").string(),
      "bad_alpha");
  CHECK(res.code == 1);
  CHECK(res.err.find("alpha") != std::string::npos);
}

TEST_CASE("rejects a non-positive iteration cap at the flag level") {
  const auto res = run_cli("run --generator lp-box-dual --max-iter 0",
                           "bad_cap");
  CHECK(res.code == 1);
  CHECK(res.err.find("--max-iter") != std::string::npos);
}

TEST_CASE("reports the iteration cap through the exit code") {
  const auto baseline = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --seed 3 "
      "--algorithm baseline_gs --max-iter 3 "
      "--trace-out " + (work_dir() / "cap_base.csv").string() +
      " --report-out " + (work_dir() / "cap_base.json").string(),
      "cap_base");
  CHECK(baseline.code == 2);
  CHECK(stdout_field(baseline.out, "status") == "iteration_cap");

  const auto certified = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --seed 3 --max-iter 200 "
      "--trace-out " + (work_dir() / "cap_cert.csv").string() +
      " --report-out " + (work_dir() / "cap_cert.json").string(),
      "cap_cert");
  CHECK(certified.code == 2);
  CHECK(stdout_field(certified.out, "status") == "iteration_cap");
}

TEST_CASE("a solved run writes a full trace and a certificate report") {
  const fs::path trace = work_dir() / "run.csv";
  const fs::path report = work_dir() / "run.json";
  const auto res = run_cli("run " + kLpArgs + " --trace-out " + trace.string() +
                               " --report-out " + report.string(),
                           "solved");
  CHECK(res.code == 0);
  CHECK(stdout_field(res.out, "status") == "converged");
  CHECK(stdout_field(res.out, "algorithm") == "admm_lqp");

  const int iterations = std::stoi(stdout_field(res.out, "iterations"));
  CHECK(iterations > 0);
  // Header plus one row per recorded state (initial point included).
  CHECK(count_lines(slurp(trace)) == static_cast<size_t>(iterations) + 2);

  const auto parsed = nlohmann::json::parse(slurp(report));
  CHECK(parsed.at("H_min_eig").get<double>() > 0.0);
  CHECK(parsed.at("K_membership").get<bool>());
  REQUIRE(parsed.at("xi").size() == 3);
  CHECK(parsed.at("xi")[0].get<double>() > 0.0);
  REQUIRE(parsed.at("contraction_min_slack").is_number());
  CHECK(parsed.at("contraction_min_slack").get<double>() >= -1e-8);
  REQUIRE(parsed.at("ergodic_lhs_rhs").size() == 2);
  CHECK(parsed.at("ergodic_lhs_rhs")[0].get<double>() <=
        parsed.at("ergodic_lhs_rhs")[1].get<double>() + 1e-8);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
  const fs::path trace_a = work_dir() / "rep_a.csv";
  const fs::path trace_b = work_dir() / "rep_b.csv";
  const fs::path report_a = work_dir() / "rep_a.json";
  const fs::path report_b = work_dir() / "rep_b.json";
  const auto a = run_cli("run " + kLpArgs + " --trace-out " + trace_a.string() +
                             " --report-out " + report_a.string(),
                         "rep_a");
  const auto b = run_cli("run " + kLpArgs + " --trace-out " + trace_b.string() +
                             " --report-out " + report_b.string(),
                         "rep_b");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const std::string bytes_a = slurp(trace_a);
  CHECK(!bytes_a.empty());
  CHECK(bytes_a == slurp(trace_b));
  CHECK(slurp(report_a) == slurp(report_b));
  CHECK(a.out == b.out);
}

TEST_CASE("config files fill in what flags leave unset, flags win") {
  const fs::path trace_flags = work_dir() / "cfg_flags.csv";
  const auto flags = run_cli(
      "run " + kLpArgs + " --trace-out " + trace_flags.string() +
          " --report-out " + (work_dir() / "cfg_flags.json").string(),
      "cfg_flags");
  REQUIRE(flags.code == 0);

  const fs::path config = work_dir() / "solver.json";
  {
    std::ofstream out(config);
    out << "{\"alpha\": 0.5, \"tau\": 0.9, \"max_iter\": 2000}\n";
  }
  const fs::path trace_cfg = work_dir() / "cfg_only.csv";
  const auto from_config = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --seed 3 --config " +
          config.string() + " --trace-out " + trace_cfg.string() +
          " --report-out " + (work_dir() / "cfg_only.json").string(),
      "cfg_only");
  REQUIRE(from_config.code == 0);
  CHECK(slurp(trace_cfg) == slurp(trace_flags));

  // A flag overrides the same key in the config file.
  const fs::path bad_config = work_dir() / "solver_bad_alpha.json";
  {
    std::ofstream out(bad_config);
    out << "{\"alpha\": 1.2, \"tau\": 0.9, \"max_iter\": 2000}\n";
  }
  const fs::path trace_override = work_dir() / "cfg_override.csv";
  const auto override_run = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --seed 3 --alpha 0.5 --config " +
          bad_config.string() + " --trace-out " + trace_override.string() +
          " --report-out " + (work_dir() / "cfg_override.json").string(),
      "cfg_override");
  REQUIRE(override_run.code == 0);
  CHECK(slurp(trace_override) == slurp(trace_flags));

  const fs::path unknown = work_dir() / "solver_unknown.json";
  {
    std::ofstream out(unknown);
    out << "{\"alhpa\": 0.5}\n";
  }
  const auto rejected = run_cli(
      "run --generator lp-box-dual --m 2 --n 5 --config " + unknown.string(),
      "cfg_unknown");
  CHECK(rejected.code == 1);
  CHECK(rejected.err.find("alhpa") != std::string::npos);
}

TEST_CASE("constrained tails route to the linearized algorithm") {
  const auto res = run_cli(
      "run --generator sparse-signal --rows 12 --block-size 5 --p 3 "
      "--sparsity 0.3 --seed 21 --alpha 0.5 --tau 0.9 --max-iter 4000 "
      "--trace-out " + (work_dir() / "routed.csv").string() +
      " --report-out " + (work_dir() / "routed.json").string(),
      "routed");
  CHECK(res.code == 0);
  CHECK(res.err.find("eadmm_lqp") != std::string::npos);
  CHECK(stdout_field(res.out, "algorithm") == "eadmm_lqp");
  CHECK(stdout_field(res.out, "status") == "converged");
}

TEST_CASE("the sweep labels inadmissible pairs instead of running them") {
  const fs::path out = work_dir() / "compare.csv";
  const auto res = run_cli(
      "compare --generator lp-box-dual --m 2 --n 5 --seed 3 "
      "--pairs 0:1,0.5:0.9,0:1.7 --max-iter 2000 --out " + out.string(),
      "sweep");
  CHECK(res.code == 0);
  const std::string csv = slurp(out);
  // Header, three pair rows, one baseline row.
  CHECK(count_lines(csv) == 5);
  CHECK(csv.find("alpha=0 tau=1.7") != std::string::npos);
  CHECK(csv.find("skipped") != std::string::npos);
  CHECK(csv.find("violates") != std::string::npos);
  CHECK(csv.find("baseline_gs") != std::string::npos);
  // The two admissible pairs actually converge.
  size_t converged = 0;
  size_t pos = 0;
  while ((pos = csv.find(",converged,", pos)) != std::string::npos) {
    ++converged;
    pos += 1;
  }
  CHECK(converged >= 2);
}

}  // TEST_SUITE("cli")
