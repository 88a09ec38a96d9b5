#pragma once

// File formats: problem and reference documents (JSON), traces (CSV with a
// commented header), experiment reports (JSON).

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "pdama/bench_oracle.hpp"

namespace pdama::io {

using nlohmann::json;

/// Shortest text that parses back to the same double.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorCode::parse_error, "number formatting failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::parse_error, "cannot write " + path);
  out << text;
}

// ---- json helpers -----------------------------------------------------------

inline json to_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      a.push_back(v[i]);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

inline json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(VectorXd(m.row(i).transpose())));
  return rows;
}

inline json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw Error(ErrorCode::parse_error, std::string("missing field \"") + name + "\"");
  }
  return doc.at(name);
}

inline double as_number(const json& j, const char* name) {
  if (!j.is_number()) throw Error(ErrorCode::parse_error, std::string("field \"") + name + "\" must be a number");
  return j.get<double>();
}

inline VectorXd as_vector(const json& j, const char* name) {
  if (!j.is_array()) throw Error(ErrorCode::parse_error, std::string("field \"") + name + "\" must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = as_number(j[i], name);
  return v;
}

inline MatrixXd as_matrix(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::parse_error, std::string("field \"") + name + "\" must be a nested array");
  }
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw Error(ErrorCode::parse_error, std::string("field \"") + name + "\" has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(i), static_cast<Index>(c)) = as_number(j[i][c], name);
    }
  }
  return m;
}

// ---- problem ------------------------------------------------------------------

inline json problem_to_json(const QpInstance& p) {
  json j;
  j["D"] = to_json(p.D);
  j["q"] = to_json(p.q);
  j["A"] = to_json(p.A);
  j["a"] = to_json(p.a);
  j["b"] = to_json(p.b);
  j["r"] = num_or_null(p.r);
  return j;
}

/// Fields D, q, A, a, b, r (null for +inf). The anchor is not stored.
inline QpInstance problem_from_json(const json& j) {
  QpInstance p;
  p.D = as_vector(field(j, "D"), "D");
  p.q = as_vector(field(j, "q"), "q");
  p.A = as_matrix(field(j, "A"), "A");
  p.a = as_vector(field(j, "a"), "a");
  p.b = as_vector(field(j, "b"), "b");
  const json& r = field(j, "r");
  p.r = r.is_null() ? kInf : as_number(r, "r");
  return p;
}

inline QpInstance load_problem(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return problem_from_json(j);
}

// ---- reference --------------------------------------------------------------

struct ReferenceDoc {
  CertificateInputs inputs;
  StepPolicy mode = StepPolicy::fixed;
  bool has_norm_A = false;
  bool has_mu_g = false;
};

inline json reference_to_json(const CertificateInputs& in, StepPolicy mode) {
  json j;
  j["f_star"] = in.f_star;
  j["lambda_star"] = to_json(in.lambda_star);
  j["d_u"] = num_or_null(in.d_u);
  j["gamma"] = in.gamma;
  j["mode"] = to_string(mode);
  j["norm_A"] = in.norm_A;
  j["mu_g"] = in.mu_g;
  j["mu_p"] = in.mu_p;
  if (in.lambda0.size()) j["lambda0"] = to_json(in.lambda0);
  return j;
}

inline ReferenceDoc reference_from_json(const json& j) {
  ReferenceDoc d;
  d.inputs.f_star = as_number(field(j, "f_star"), "f_star");
  d.inputs.lambda_star = as_vector(field(j, "lambda_star"), "lambda_star");
  const json& du = field(j, "d_u");
  d.inputs.d_u = du.is_null() ? kInf : as_number(du, "d_u");
  d.inputs.gamma = as_number(field(j, "gamma"), "gamma");
  const json& mode = field(j, "mode");
  auto sp = mode.is_string() ? parse_step_policy(mode.get<std::string>()) : std::nullopt;
  if (!sp) throw Error(ErrorCode::parse_error, "field \"mode\" must be \"fixed\" or \"line_search\"");
  d.mode = *sp;
  if (j.contains("norm_A")) {
    d.inputs.norm_A = as_number(j["norm_A"], "norm_A");
    d.has_norm_A = true;
  }
  if (j.contains("mu_g")) {
    d.inputs.mu_g = as_number(j["mu_g"], "mu_g");
    d.has_mu_g = true;
  }
  if (j.contains("mu_p")) d.inputs.mu_p = as_number(j["mu_p"], "mu_p");
  d.inputs.lambda0 = j.contains("lambda0") ? as_vector(j["lambda0"], "lambda0")
                                           : VectorXd::Zero(d.inputs.lambda_star.size());
  return d;
}

inline ReferenceDoc load_reference(const std::string& path) {
  try {
    return reference_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

// ---- trace ------------------------------------------------------------------

inline constexpr const char* kTraceMagic = "# pdama-trace v1";
inline constexpr const char* kTraceColumns =
    "k,eta,f_avg,feas,d_gamma,d_plain,lemma_ok,linesearch_evals,tie_count";

inline std::string trace_to_csv(const Trace& t) {
  std::string s;
  s += kTraceMagic;
  s += '\n';
  const auto& i = t.info;
  s += std::string("# algorithm=") + to_string(i.variant.algorithm) + '\n';
  s += std::string("# regime=") + to_string(i.variant.regime) + '\n';
  s += std::string("# step=") + to_string(i.step) + '\n';
  s += std::string("# momentum=") + to_string(i.momentum) + '\n';
  s += "# gamma=" + fmt(i.gamma) + '\n';
  s += "# epsilon=" + fmt(i.epsilon) + '\n';
  s += "# norm_A=" + fmt(i.norm_A) + '\n';
  s += "# d_u=" + fmt(i.d_u) + '\n';
  s += "# mu_g=" + fmt(i.mu_g) + '\n';
  s += "# mu_p=" + fmt(i.mu_p) + '\n';
  s += kTraceColumns;
  s += '\n';
  for (const auto& r : t.records) {
    s += std::to_string(r.k) + ',' + fmt(r.eta) + ',' + fmt(r.f_avg) + ',' + fmt(r.feas) + ',' +
         fmt(r.d_gamma) + ',' + fmt(r.d_plain) + ',' + (r.lemma_ok ? "1" : "0") + ',' +
         std::to_string(r.linesearch_evals) + ',' + std::to_string(r.tie_count) + '\n';
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline Trace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceMagic) {
    throw Error(ErrorCode::parse_error, "trace must start with '" + std::string(kTraceMagic) + "'");
  }
  std::map<std::string, std::string> meta;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::parse_error, "bad header line: " + line);
      meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (line != kTraceColumns) throw Error(ErrorCode::parse_error, "unexpected column header: " + line);
    have_columns = true;
    break;
  }
  if (!have_columns) throw Error(ErrorCode::parse_error, "trace has no column header");

  auto get = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorCode::parse_error, std::string("trace header lacks ") + key);
    return it->second;
  };
  Trace t;
  auto alg = parse_algorithm(get("algorithm"));
  auto reg = parse_regime(get("regime"));
  auto step = parse_step_policy(get("step"));
  auto mom = parse_momentum(get("momentum"));
  if (!alg || !reg || !step || !mom) throw Error(ErrorCode::parse_error, "unknown trace header value");
  t.info.variant = {*alg, *reg};
  t.info.step = *step;
  t.info.momentum = *mom;
  t.info.gamma = parse_double(get("gamma"));
  t.info.epsilon = parse_double(get("epsilon"));
  t.info.norm_A = parse_double(get("norm_A"));
  t.info.d_u = parse_double(get("d_u"));
  t.info.mu_g = parse_double(get("mu_g"));
  t.info.mu_p = parse_double(get("mu_p"));

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw Error(ErrorCode::parse_error, "trace row needs 9 fields: " + line);
    IterationRecord r;
    r.k = parse_int(f[0]);
    r.eta = parse_double(f[1]);
    r.f_avg = parse_double(f[2]);
    r.feas = parse_double(f[3]);
    r.d_gamma = parse_double(f[4]);
    r.d_plain = parse_double(f[5]);
    r.lemma_ok = parse_int(f[6]) != 0;
    r.linesearch_evals = parse_int(f[7]);
    r.tie_count = parse_int(f[8]);
    t.records.push_back(r);
  }
  return t;
}

// ---- report -----------------------------------------------------------------

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json report_to_json(const ExperimentReport& rep) {
  json j;
  j["recipe"] = {{"seed", rep.recipe.seed},
                 {"n", rep.recipe.n},
                 {"p1", rep.recipe.p1},
                 {"strongly_convex", rep.recipe.strongly_convex},
                 {"r_policy", rep.recipe.resolved_r_policy() == RPolicy::infinite ? "infinite" : "from_anchor"}};
  j["problem"] = problem_to_json(rep.instance);
  j["oracle"] = {{"f_star", rep.reference.f_star},
                 {"u_star", to_json(rep.reference.x_star.u)},
                 {"v_star", to_json(rep.reference.x_star.v)},
                 {"lambda_star", to_json(rep.reference.lambda_star)},
                 {"active_set", rep.reference.active_set},
                 {"kkt_residual", rep.reference.kkt_residual}};
  j["constants"] = {{"norm_A", rep.inputs.norm_A},
                    {"d_u", num_or_null(rep.inputs.d_u)},
                    {"mu_g", rep.inputs.mu_g},
                    {"mu_p", rep.inputs.mu_p}};
  j["config"] = {{"max_iter", rep.config.max_iter},
                 {"epsilon", rep.config.epsilon},
                 {"step", to_string(rep.config.step)}};
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json jr;
    jr["algorithm"] = to_string(r.variant.algorithm);
    jr["regime"] = to_string(r.variant.regime);
    jr["momentum"] = to_string(r.momentum);
    jr["theorem"] = r.theorem;
    jr["gamma"] = r.trace.info.gamma;
    jr["pass"] = r.pass;
    jr["first_violation"] = opt_json(r.first_violation);
    jr["condition"] = r.condition;
    jr["predicted_iterations"] = opt_json(r.predicted);
    jr["first_eps_solution_k"] = opt_json(r.first_eps_k);
    jr["final_f"] = r.final_f;
    jr["final_feas"] = r.final_feas;
    json s = {{"k", json::array()},
              {"obj_err", json::array()},
              {"obj_bound", json::array()},
              {"feas", json::array()},
              {"feas_bound", json::array()}};
    for (const auto& p : r.series) {
      s["k"].push_back(p.k);
      s["obj_err"].push_back(p.obj_err);
      s["obj_bound"].push_back(p.obj_bound);
      s["feas"].push_back(p.feas);
      s["feas_bound"].push_back(p.feas_bound);
    }
    jr["series"] = std::move(s);
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  j["pass"] = rep.all_pass();
  return j;
}

}  // namespace pdama::io
