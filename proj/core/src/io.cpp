#include "lqpadmm/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

using nlohmann::json;

namespace lqpadmm::io {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ConfigurationError(where + ": not a number: '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw ConfigurationError("failed writing file: " + path);
}

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw ConfigurationError(where + ": expected a {rows, cols, data} object");
  }
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<Index>(data.size()) != rows * cols) {
    throw ConfigurationError(where + ": data length does not match rows*cols");
  }
  Matrix m(rows, cols);
  size_t k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigurationError(where + ": expected an array");
  const auto data = j.get<std::vector<double>>();
  Vector v(static_cast<Index>(data.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = data[static_cast<size_t>(i)];
  return v;
}

BlockFunction block_function_from_json(const json& j, const std::string& where) {
  const auto kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (kind == "linear") {
    return BlockFunction::linear(
        vector_from_json(params.at("c"), where + ".params.c"));
  }
  if (kind == "diag_quadratic") {
    return BlockFunction::diag_quadratic(
        vector_from_json(params.at("p"), where + ".params.p"),
        vector_from_json(params.at("c"), where + ".params.c"));
  }
  if (kind == "l1_nonneg") {
    return BlockFunction::l1_nonneg(params.at("weight").get<double>());
  }
  throw ConfigurationError(where + ": unknown block kind '" + kind + "'");
}

json block_function_to_json(const BlockFunction& f) {
  json params = json::object();
  switch (f.kind) {
    case BlockFunction::Kind::kLinear:
      params["c"] = vector_to_json(f.c);
      return json{{"kind", "linear"}, {"params", params}};
    case BlockFunction::Kind::kDiagQuadratic:
      params["p"] = vector_to_json(f.p_diag);
      params["c"] = vector_to_json(f.c);
      return json{{"kind", "diag_quadratic"}, {"params", params}};
    case BlockFunction::Kind::kL1Nonneg:
      params["weight"] = f.weight;
      return json{{"kind", "l1_nonneg"}, {"params", params}};
  }
  throw ConfigurationError("unhandled block kind");
}

TailFunction tail_from_json(const json& j) {
  const json& g = j.at("smooth_g");
  const auto g_kind = g.at("kind").get<std::string>();
  TailFunction tail;
  if (g_kind == "zero") {
    tail = TailFunction::zero();
  } else if (g_kind == "linear") {
    tail = TailFunction::linear_g(
        vector_from_json(g.at("c"), "tail.smooth_g.c"));
  } else if (g_kind == "quadratic") {
    tail = TailFunction::quadratic_g(
        matrix_from_json(g.at("P"), "tail.smooth_g.P"),
        vector_from_json(g.at("c"), "tail.smooth_g.c"));
  } else {
    throw ConfigurationError("tail.smooth_g: unknown kind '" + g_kind + "'");
  }

  const json& h = j.at("nonsmooth_h");
  const auto h_kind = h.at("kind").get<std::string>();
  if (h_kind == "zero") {
    // nothing to fold in
  } else if (h_kind == "l1") {
    tail.with_l1_h(h.at("weight").get<double>());
  } else if (h_kind == "indicator_box") {
    tail.with_box_h(vector_from_json(h.at("lower"), "tail.nonsmooth_h.lower"),
                    vector_from_json(h.at("upper"), "tail.nonsmooth_h.upper"));
  } else if (h_kind == "indicator_nonneg") {
    tail.with_nonneg_h();
  } else {
    throw ConfigurationError("tail.nonsmooth_h: unknown kind '" + h_kind + "'");
  }
  return tail;
}

json tail_to_json(const TailFunction& tail) {
  json g;
  switch (tail.g_kind) {
    case TailFunction::GKind::kZero:
      g = json{{"kind", "zero"}};
      break;
    case TailFunction::GKind::kLinear:
      g = json{{"kind", "linear"}, {"c", vector_to_json(tail.g_c)}};
      break;
    case TailFunction::GKind::kQuadratic:
      g = json{{"kind", "quadratic"},
               {"P", matrix_to_json(tail.g_p)},
               {"c", vector_to_json(tail.g_c)}};
      break;
  }
  json h;
  switch (tail.h_kind) {
    case TailFunction::HKind::kZero:
      h = json{{"kind", "zero"}};
      break;
    case TailFunction::HKind::kL1:
      h = json{{"kind", "l1"}, {"weight", tail.h_weight}};
      break;
    case TailFunction::HKind::kIndicatorBox:
      h = json{{"kind", "indicator_box"},
               {"lower", vector_to_json(tail.h_lower)},
               {"upper", vector_to_json(tail.h_upper)}};
      break;
    case TailFunction::HKind::kIndicatorNonneg:
      h = json{{"kind", "indicator_nonneg"}};
      break;
  }
  return json{{"smooth_g", g}, {"nonsmooth_h", h},
              {"lipschitz_lg", tail.lipschitz_lg}};
}

YDomain y_domain_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "free") return YDomain::free_space();
  if (kind == "nonneg") return YDomain::nonneg_orthant();
  if (kind == "box") {
    return YDomain::box(vector_from_json(j.at("lower"), "y_domain.lower"),
                        vector_from_json(j.at("upper"), "y_domain.upper"));
  }
  throw ConfigurationError("y_domain: unknown kind '" + kind + "'");
}

json y_domain_to_json(const YDomain& dom) {
  switch (dom.kind) {
    case YDomain::Kind::kFree:
      return json{{"kind", "free"}};
    case YDomain::Kind::kNonnegOrthant:
      return json{{"kind", "nonneg"}};
    case YDomain::Kind::kBox:
      return json{{"kind", "box"},
                  {"lower", vector_to_json(dom.lower)},
                  {"upper", vector_to_json(dom.upper)}};
  }
  throw ConfigurationError("unhandled y domain kind");
}

}  // namespace

ProblemSpec parse_problem_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (!j.contains("blocks") || !j.at("blocks").is_array() ||
        j.at("blocks").empty()) {
      throw ConfigurationError("problem json: 'blocks' must be a nonempty array");
    }
    std::vector<Block> blocks;
    size_t index = 0;
    for (const json& bj : j.at("blocks")) {
      const std::string where = "blocks[" + std::to_string(index) + "]";
      Block block;
      block.f = block_function_from_json(bj, where);
      block.a = matrix_from_json(bj.at("A"), where + ".A");
      blocks.push_back(std::move(block));
      ++index;
    }
    TailFunction tail = tail_from_json(j.at("tail"));
    Matrix b_mat = matrix_from_json(j.at("B"), "B");
    Vector rhs = vector_from_json(j.at("b"), "b");
    YDomain y_domain = y_domain_from_json(j.at("y_domain"));
    return ProblemSpec(std::move(blocks), std::move(tail), std::move(b_mat),
                       std::move(rhs), std::move(y_domain));
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("problem json: ") + e.what());
  }
}

ProblemSpec read_problem_json(const std::string& path) {
  try {
    return parse_problem_json(read_file(path));
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
}

std::string problem_to_json(const ProblemSpec& spec) {
  json blocks = json::array();
  for (const Block& block : spec.blocks()) {
    json bj = block_function_to_json(block.f);
    bj["A"] = matrix_to_json(block.a);
    blocks.push_back(std::move(bj));
  }
  json j{{"blocks", blocks},
         {"tail", tail_to_json(spec.tail())},
         {"B", matrix_to_json(spec.b_mat())},
         {"b", vector_to_json(spec.rhs())},
         {"y_domain", y_domain_to_json(spec.y_domain())}};
  return j.dump(2) + "\n";
}

void write_problem_json(const ProblemSpec& spec, const std::string& path) {
  write_file(path, problem_to_json(spec));
}

void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::string& path) {
  const size_t p = trace.empty() ? 0 : trace.front().block_move_norms.size();
  std::ostringstream out;
  out << "iter,feas_norm,obj,h_dist_sq,xi_slack";
  for (size_t i = 1; i <= p; ++i) out << ",block_move_" << i;
  out << ",y_move\n";
  for (const TraceRecord& rec : trace) {
    if (rec.block_move_norms.size() != p) {
      throw ConfigurationError("trace rows disagree on the number of blocks");
    }
    out << rec.iter << ',' << fmt17(rec.feas_norm) << ',' << fmt17(rec.objective)
        << ',' << fmt17(rec.h_distance_sq) << ',' << fmt17(rec.certificate_slack);
    for (double move : rec.block_move_norms) out << ',' << fmt17(move);
    out << ',' << fmt17(rec.y_move_norm) << '\n';
  }
  write_file(path, out.str());
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigurationError("empty trace file: " + path);
  }
  const auto header = split_csv(line);
  const std::vector<std::string> head = {"iter", "feas_norm", "obj",
                                         "h_dist_sq", "xi_slack"};
  bool ok = header.size() >= head.size() + 1 && header.back() == "y_move";
  for (size_t i = 0; ok && i < head.size(); ++i) ok = header[i] == head[i];
  const size_t p = ok ? header.size() - head.size() - 1 : 0;
  for (size_t i = 0; ok && i < p; ++i) {
    ok = header[head.size() + i] == "block_move_" + std::to_string(i + 1);
  }
  if (!ok) throw ConfigurationError("unrecognized trace header in " + path);

  std::vector<TraceRecord> trace;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw ConfigurationError(where + ": wrong number of fields");
    }
    TraceRecord rec;
    rec.iter = static_cast<int>(parse_double(fields[0], where));
    rec.feas_norm = parse_double(fields[1], where);
    rec.objective = parse_double(fields[2], where);
    rec.h_distance_sq = parse_double(fields[3], where);
    rec.certificate_slack = parse_double(fields[4], where);
    rec.block_move_norms.resize(p);
    for (size_t i = 0; i < p; ++i) {
      rec.block_move_norms[i] = parse_double(fields[head.size() + i], where);
    }
    rec.y_move_norm = parse_double(fields.back(), where);
    trace.push_back(std::move(rec));
  }
  return trace;
}

std::string report_to_json(const certify::CertificateReport& report) {
  json j;
  j["H_min_eig"] = report.h_min_eig;
  j["xi"] = {report.xi.xi1, report.xi.xi2, report.xi.xi3};
  if (report.contraction_min_slack) {
    j["contraction_min_slack"] = *report.contraction_min_slack;
  } else {
    j["contraction_min_slack"] = nullptr;
  }
  if (report.ergodic_lhs_rhs) {
    j["ergodic_lhs_rhs"] = {report.ergodic_lhs_rhs->first,
                            report.ergodic_lhs_rhs->second};
  } else {
    j["ergodic_lhs_rhs"] = nullptr;
  }
  j["K_membership"] = report.k_membership;
  return j.dump(2) + "\n";
}

void write_report_json(const certify::CertificateReport& report,
                       const std::string& path) {
  write_file(path, report_to_json(report));
}

}  // namespace lqpadmm::io
