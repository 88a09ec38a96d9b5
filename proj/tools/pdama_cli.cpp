// pdama command-line front end.
//
// Exit codes: 0 pass, 1 certification failure, 2 input error, 3 runtime failure.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdama/pdama.hpp"

namespace {

using namespace pdama;
using io::json;

constexpr const char* kVersion = "0.1.0";

enum Exit { kPass = 0, kCertFail = 1, kInputError = 2, kRuntimeError = 3 };

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::non_convergence:
    case ErrorCode::step_too_small:
    case ErrorCode::unattained_min:
    case ErrorCode::infeasible:
      return kRuntimeError;
    default:
      return kInputError;
  }
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

json versions() {
  return {{"pdama", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}};
}

// Timing lives only in the manifest so that the main outputs stay byte-identical.
void write_manifest(const std::string& out, const std::string& command, const json& seed,
                    const json& config, double seconds) {
  json m;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["versions"] = versions();
  m["timing"] = {{"wall_seconds", seconds}};
  io::write_file(out + ".manifest.json", m.dump(2) + "\n");
}

std::string joined(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// ---- solve ------------------------------------------------------------------

struct SolveOpts {
  std::string problem;
  std::string algo = "ama";
  std::string regime = "smoothed";
  std::string momentum = "paper";
  double eps = 1e-2;
  int max_iter = 1000;
  bool line_search = false;
  std::optional<double> gamma;
  std::optional<double> lower_L;
  std::optional<double> f_star;
  bool swap = false;
  std::string out;
};

json solver_config_json(const SolverConfig& c) {
  return {{"algorithm", to_string(c.variant.algorithm)},
          {"regime", to_string(c.variant.regime)},
          {"epsilon", c.epsilon},
          {"gamma", c.gamma_policy == GammaPolicy::explicit_value ? json(c.gamma) : json("auto")},
          {"step", to_string(c.step)},
          {"lower_L", c.lower_L ? json(*c.lower_L) : json(nullptr)},
          {"max_iter", c.max_iter},
          {"momentum", to_string(c.momentum)},
          {"swap_sides", c.swap_sides},
          {"f_star", c.f_star ? json(*c.f_star) : json(nullptr)}};
}

int cmd_solve(const SolveOpts& o, const std::string& command) {
  Timer timer;
  SolverConfig cfg;
  auto alg = parse_algorithm(o.algo);
  auto reg = parse_regime(o.regime);
  auto mom = parse_momentum(o.momentum);
  if (!alg || !reg || !mom) throw Error(ErrorCode::invalid_config, "unknown --algo/--regime/--momentum value");
  cfg.variant = {*alg, *reg};
  cfg.epsilon = o.eps;
  cfg.max_iter = o.max_iter;
  cfg.step = o.line_search ? StepPolicy::line_search : StepPolicy::fixed;
  cfg.momentum = *mom;
  cfg.swap_sides = o.swap;
  cfg.lower_L = o.lower_L;
  cfg.f_star = o.f_star;
  if (o.gamma) {
    cfg.gamma_policy = GammaPolicy::explicit_value;
    cfg.gamma = *o.gamma;
  }

  const QpInstance p = io::load_problem(o.problem);
  const ProblemSpec spec = p.to_spec();
  validate(spec);
  const RunResult res = run(spec, cfg);

  if (!o.out.empty()) {
    io::write_file(o.out, io::trace_to_csv(res.trace));
    write_manifest(o.out, command, nullptr, solver_config_json(cfg), timer.seconds());
  }
  const double f = res.valid ? objective(spec, res.x_bar) : std::numeric_limits<double>::quiet_NaN();
  const double feas = res.valid ? feasibility_gap(spec, res.x_bar) : std::numeric_limits<double>::quiet_NaN();
  std::cout << "iterations " << res.iterations << "\n"
            << "f_avg " << io::fmt(f) << "\n"
            << "feasibility " << io::fmt(feas) << "\n"
            << "gamma " << io::fmt(res.trace.info.gamma) << "\n";
  if (res.swapped) std::cout << "swapped_sides 1\n";
  if (o.f_star) std::cout << "eps_solution " << (res.eps_reached ? 1 : 0) << "\n";
  std::cout << "wall_seconds " << timer.seconds() << "\n";
  return kPass;
}

// ---- bench ------------------------------------------------------------------

struct BenchOpts {
  std::uint64_t seed = 0;
  int n = 3;
  int p1 = 3;
  bool strongly_convex = false;
  std::vector<std::string> variants{"ama", "fama"};
  std::vector<std::string> momenta{"paper"};
  int iters = 1000;
  double eps = 1e-2;
  bool line_search = false;
  std::string out;
  std::string problem_out;
  std::string trace_dir;
};

int cmd_bench(const BenchOpts& o, const std::string& command) {
  Timer timer;
  InstanceRecipe recipe;
  recipe.seed = o.seed;
  recipe.n = o.n;
  recipe.p1 = o.p1;
  recipe.strongly_convex = o.strongly_convex;
  ExperimentConfig cfg;
  cfg.algorithms.clear();
  for (const auto& v : o.variants) {
    auto a = parse_algorithm(v);
    if (!a) throw Error(ErrorCode::invalid_config, "unknown variant '" + v + "'");
    cfg.algorithms.push_back(*a);
  }
  cfg.momenta.clear();
  for (const auto& m : o.momenta) {
    auto mm = parse_momentum(m);
    if (!mm) throw Error(ErrorCode::invalid_config, "unknown momentum '" + m + "'");
    cfg.momenta.push_back(*mm);
  }
  cfg.max_iter = o.iters;
  cfg.epsilon = o.eps;
  cfg.step = o.line_search ? StepPolicy::line_search : StepPolicy::fixed;

  const ExperimentReport rep = run_experiment(recipe, cfg);
  const json j = io::report_to_json(rep);
  if (!o.out.empty()) {
    io::write_file(o.out, j.dump(2) + "\n");
    write_manifest(o.out, command, o.seed, j["config"], timer.seconds());
  }
  if (!o.problem_out.empty()) io::write_file(o.problem_out, io::problem_to_json(rep.instance).dump(2) + "\n");
  if (!o.trace_dir.empty()) {
    std::filesystem::create_directories(o.trace_dir);
    for (const auto& r : rep.runs) {
      const std::string stem = o.trace_dir + "/" + r.theorem + "_" + to_string(r.momentum);
      io::write_file(stem + ".csv", io::trace_to_csv(r.trace));
      CertificateInputs in = rep.inputs;
      in.gamma = r.trace.info.gamma;
      io::write_file(stem + ".reference.json", io::reference_to_json(in, cfg.step).dump(2) + "\n");
    }
  }
  for (const auto& r : rep.runs) {
    std::cout << r.theorem << " " << to_string(r.momentum) << ": " << (r.pass ? "PASS" : "FAIL");
    if (r.first_violation) std::cout << " first violation k=" << *r.first_violation << " (" << r.condition << ")";
    std::cout << " predicted=" << (r.predicted ? std::to_string(*r.predicted) : "unreachable")
              << " first_eps_k=" << (r.first_eps_k ? std::to_string(*r.first_eps_k) : "none") << "\n";
  }
  return rep.all_pass() ? kPass : kCertFail;
}

// ---- verify -----------------------------------------------------------------

struct VerifyOpts {
  std::string trace;
  std::string reference;
  std::string variant;
  double tol = 1e-6;
};

Variant parse_variant_flag(const std::string& s) {
  if (s == "ama") return {Algorithm::ama, Regime::smoothed};
  if (s == "fama") return {Algorithm::fama, Regime::smoothed};
  if (s == "ama_sc") return {Algorithm::ama, Regime::strongly_convex};
  if (s == "fama_sc") return {Algorithm::fama, Regime::strongly_convex};
  throw Error(ErrorCode::invalid_config, "--variant must be ama, fama, ama_sc or fama_sc");
}

int cmd_verify(const VerifyOpts& o) {
  const Variant expected = parse_variant_flag(o.variant);
  const Trace trace = io::trace_from_csv(io::read_file(o.trace));
  io::ReferenceDoc ref = io::load_reference(o.reference);
  if (ref.mode != trace.info.step) {
    throw Error(ErrorCode::invalid_config, "reference mode differs from the trace's step policy");
  }
  CertificateInputs in = ref.inputs;
  if (!ref.has_norm_A) in.norm_A = trace.info.norm_A;
  if (!ref.has_mu_g) in.mu_g = trace.info.mu_g;
  CheckTolerance tol;
  tol.rel = o.tol;
  const CheckReport rep = check_trace(trace, in, expected, tol);
  std::cout << theorem_name(expected) << ": " << (rep.pass ? "PASS" : "FAIL");
  if (rep.first_violation) std::cout << " first violation k=" << *rep.first_violation << " (" << rep.condition << ")";
  std::cout << "\n";
  auto show = [](const char* name, const std::optional<std::int64_t>& v) {
    if (v) std::cout << "predicted_" << name << " " << *v << "\n";
  };
  show("thm31", rep.predicted_thm31);
  show("thm41", rep.predicted_thm41);
  show("cor51", rep.predicted_cor51);
  show("cor51_accel", rep.predicted_cor51_accel);
  return rep.pass ? kPass : kCertFail;
}

// ---- oracle -----------------------------------------------------------------

struct OracleOpts {
  std::string problem;
  std::string out;
  std::string algo = "ama";
  double eps = 1e-2;
  std::optional<double> gamma;
  bool line_search = false;
};

int cmd_oracle(const OracleOpts& o) {
  const QpInstance p = io::load_problem(o.problem);
  const ProblemSpec spec = p.to_spec();
  const ReferenceSolution sol = oracle_solve(spec);
  CertificateInputs in = certificate_inputs(spec, sol);
  auto alg = parse_algorithm(o.algo);
  if (!alg) throw Error(ErrorCode::invalid_config, "unknown --algo value");
  if (o.gamma) {
    in.gamma = *o.gamma;
  } else if (std::isfinite(in.d_u) && in.d_u > 0.0) {
    in = with_auto_gamma(in, {*alg, Regime::smoothed}, o.eps);
  }
  json j = io::reference_to_json(in, o.line_search ? StepPolicy::line_search : StepPolicy::fixed);
  j["u_star"] = io::to_json(sol.x_star.u);
  j["v_star"] = io::to_json(sol.x_star.v);
  j["active_set"] = sol.active_set;
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_file(o.out, text);
    std::cout << "f_star " << io::fmt(sol.f_star) << "\n";
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual alternating minimization solver and certificate checker"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SolveOpts so;
  auto* solve = app.add_subcommand("solve", "Run a solver variant on a problem file");
  solve->add_option("--problem", so.problem, "Problem JSON (fields D, q, A, a, b, r)")->required();
  solve->add_option("--algo", so.algo, "ama or fama")->check(CLI::IsMember({"ama", "fama"}));
  solve->add_option("--regime", so.regime, "smoothed or strongly_convex")
      ->check(CLI::IsMember({"smoothed", "strongly_convex", "strongly-convex"}));
  solve->add_option("--eps", so.eps, "Target accuracy");
  solve->add_option("--max-iter", so.max_iter, "Iteration budget")->check(CLI::NonNegativeNumber);
  solve->add_flag("--line-search", so.line_search, "Backtracking step instead of 1/L");
  solve->add_option("--gamma", so.gamma, "Explicit smoothing parameter");
  solve->add_option("--momentum", so.momentum, "paper or classic")->check(CLI::IsMember({"paper", "classic"}));
  solve->add_flag("--swap-sides", so.swap, "Exchange the two blocks when V has the smaller prox-diameter");
  solve->add_option("--lower-L", so.lower_L, "Line-search lower bound on L");
  solve->add_option("--f-star", so.f_star, "Known optimal value; stop at the first eps-solution");
  solve->add_option("--out", so.out, "Trace CSV path");

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "Generate a seeded instance, solve, certify");
  bench->add_option("--seed", bo.seed)->required();
  bench->add_option("--n", bo.n);
  bench->add_option("--p1", bo.p1);
  bench->add_flag("--strongly-convex", bo.strongly_convex);
  bench->add_option("--variants", bo.variants, "Comma list of ama,fama")->delimiter(',');
  bench->add_option("--momentum", bo.momenta, "Comma list of paper,classic")->delimiter(',');
  bench->add_option("--iters", bo.iters)->check(CLI::NonNegativeNumber);
  bench->add_option("--eps", bo.eps);
  bench->add_flag("--line-search", bo.line_search);
  bench->add_option("--out", bo.out, "Report JSON path");
  bench->add_option("--problem-out", bo.problem_out, "Also write the generated problem JSON");
  bench->add_option("--trace-dir", bo.trace_dir, "Write per-run traces and reference files here");

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify", "Check a trace against its convergence bound");
  verify->add_option("--trace", vo.trace)->required();
  verify->add_option("--reference", vo.reference)->required();
  verify->add_option("--variant", vo.variant, "ama, fama, ama_sc or fama_sc")->required();
  verify->add_option("--tol", vo.tol, "Relative tolerance on the bounds");

  OracleOpts oo;
  auto* oracle = app.add_subcommand("oracle", "Exact reference solution of a small problem");
  oracle->add_option("--problem", oo.problem)->required();
  oracle->add_option("--out", oo.out);
  oracle->add_option("--algo", oo.algo, "Scheme whose automatic gamma is recorded")
      ->check(CLI::IsMember({"ama", "fama"}));
  oracle->add_option("--eps", oo.eps);
  oracle->add_option("--gamma", oo.gamma);
  oracle->add_flag("--line-search", oo.line_search);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kInputError;
  }

  const std::string command = joined(argc, argv);
  try {
    if (*solve) return cmd_solve(so, command);
    if (*bench) return cmd_bench(bo, command);
    if (*verify) return cmd_verify(vo);
    if (*oracle) return cmd_oracle(oo);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kInputError;
}
