#pragma once

#include <string>
#include <vector>

#include "lqpadmm/certify.hpp"
#include "lqpadmm/problem.hpp"
#include "lqpadmm/solver.hpp"

namespace lqpadmm::io {

/// Parses a problem description. Schema (matrices are row-major
/// {"rows", "cols", "data"} objects, vectors plain arrays):
/// {
///   "blocks": [{"kind": "linear" | "diag_quadratic" | "l1_nonneg",
///               "params": {...}, "A": matrix}, ...],
///   "tail": {"smooth_g": {"kind": "zero" | "linear" | "quadratic", ...},
///            "nonsmooth_h": {"kind": "zero" | "l1" | "indicator_box" |
///                            "indicator_nonneg", ...}},
///   "B": matrix,
///   "b": vector,
///   "y_domain": {"kind": "free" | "nonneg" | "box", ...}
/// }
/// Throws ConfigurationError naming the offending field.
ProblemSpec parse_problem_json(const std::string& text);
ProblemSpec read_problem_json(const std::string& path);
std::string problem_to_json(const ProblemSpec& spec);
void write_problem_json(const ProblemSpec& spec, const std::string& path);

/// Trace rows as CSV with header
///   iter,feas_norm,obj,h_dist_sq,xi_slack,block_move_1,...,block_move_p,y_move
/// Values print as %.17g so every double (including NaN) survives the trip.
void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::string& path);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// Certificate summary as JSON with fields H_min_eig, xi (array of three),
/// contraction_min_slack, ergodic_lhs_rhs (two-element array), K_membership;
/// absent measurements serialize as null.
std::string report_to_json(const certify::CertificateReport& report);
void write_report_json(const certify::CertificateReport& report,
                       const std::string& path);

}  // namespace lqpadmm::io
