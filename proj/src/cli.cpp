#include "ica/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ica/curvature.hpp"
#include "ica/errors.hpp"
#include "ica/instance.hpp"
#include "ica/json_io.hpp"
#include "ica/oracle.hpp"
#include "ica/solvers.hpp"
#include "ica/wbb.hpp"

namespace ica {
namespace {

struct SolveArgs {
  std::string instance;
  std::string mode = "mult";
  double epsilon = 0.01;
  double omega = 1.0;
  std::string mu = "auto";
  std::string trace;
  std::string out;
  double tol = 1e-9;
};

struct CurvatureArgs {
  std::string valuation;
  double width = 1.0;
  std::string kind = "mult";
  bool numeric = false;
};

struct GapArgs {
  std::string valuation;
  double width = 1.0;
  long max_denominator = 64;
  std::string out;
};

struct OracleArgs {
  std::string instance;
  std::string objective = "util";
  double omega = 1.0;
};

struct BenchArgs {
  std::string suite = "random";
  std::size_t n = 2;
  std::size_t m = 4;
  std::size_t count = 10;
  std::uint64_t seed = 1;
  std::string family = "budget";
  double epsilon = 0.05;
  bool no_timing = false;
};

void emit_json(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(path, j);
  }
}

void write_trace(const std::string& path, const std::vector<std::string>& lines) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw ValidationError(path, "cannot open trace file");
  for (const auto& l : lines) f << l << '\n';
}

std::vector<std::string> trace_lines(const std::vector<TraceEvent>& trace) {
  std::vector<std::string> out;
  out.reserve(trace.size());
  for (const auto& ev : trace) out.push_back(to_json_line(ev));
  return out;
}

int run_solve(const SolveArgs& a, std::ostream& out) {
  const Instance inst = load_instance(a.instance);
  SolveOptions opts;
  opts.tol = a.tol;
  try {
    if (a.mode == "wbb") {
      const WbbReport rep = solve_wbb(inst, a.omega, a.epsilon, opts);
      write_trace(a.trace, trace_lines(rep.trace));
      emit_json(to_json(rep), a.out, out);
      return kExitOk;
    }
    SolveReport rep;
    if (a.mode == "add") {
      rep = solve_additive(inst, a.epsilon, std::nullopt, opts);
    } else if (a.mu == "guess") {
      rep = solve_multiplicative_guessing(inst, a.epsilon, opts);
    } else {
      rep = solve_multiplicative(inst, a.epsilon, std::nullopt, opts);
    }
    write_trace(a.trace, trace_lines(rep.trace));
    Json j = to_json(rep);
    if (!inst.warnings().empty()) j["warnings"] = inst.warnings();
    emit_json(j, a.out, out);
    return kExitOk;
  } catch (const InvariantViolation& e) {
    write_trace(a.trace, e.trace());
    throw;
  }
}

int run_curvature(const CurvatureArgs& a, std::ostream& out) {
  const Valuation v = valuation_from_json(read_json_file(a.valuation));
  CurvatureOptions opts;
  opts.force_numeric = a.numeric;
  const CurvatureReport rep =
      a.kind == "add" ? add_curvature(v, a.width, opts) : mult_curvature(v, a.width, opts);
  out << to_json(rep).dump(2) << '\n';
  return kExitOk;
}

int run_gap(const GapArgs& a, std::ostream& out) {
  const Valuation v = valuation_from_json(read_json_file(a.valuation));
  const GapInstance gap = gen_gap_instance(v, a.width, a.max_denominator);
  const GapVerification ver = verify_gap_certificate(gap);
  Json j{{"instance", to_json(gap.instance)},
         {"spec", to_json(gap.spec)},
         {"verification", to_json(ver)}};
  emit_json(j, a.out, out);
  return kExitOk;
}

int run_oracle(const OracleArgs& a, std::ostream& out) {
  const Instance inst = load_instance(a.instance);
  const Objective obj = a.objective == "nash" ? Objective::kNashLog : Objective::kUtilitarian;
  const OracleResult r = brute_force_opt(inst, obj, a.omega);
  out << to_json(r, obj).dump(2) << '\n';
  return kExitOk;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  out << "instance_id,primal,dual,certificate,oracle,updates,reassignments,wall_ms\n";
  for (std::size_t k = 0; k < a.count; ++k) {
    const std::uint64_t seed = a.seed + k;
    std::optional<Instance> inst;
    if (a.suite == "gap") {
      // Budget caps in [1, 2], width between half the cap and the cap.
      const Instance draw = gen_random(1, 2, "linear", seed);
      const double cap = 1.0 + draw.utility(0, 0);
      const double width = cap * (0.5 + 0.5 * draw.utility(0, 1));
      inst = gen_gap_instance(Valuation::budget(cap), width, 16).instance;
    } else {
      inst = gen_random(a.n, a.m, a.family, seed);
    }
    const auto start = std::chrono::steady_clock::now();
    const SolveReport rep = solve_multiplicative(*inst, a.epsilon);
    const auto stop = std::chrono::steady_clock::now();

    std::string oracle;
    try {
      oracle = fmt(brute_force_opt(*inst, Objective::kUtilitarian).value);
    } catch (const RangeError&) {
    }
    std::size_t updates = 0;
    for (std::size_t u : rep.slope_updates) updates += u;
    out << k << ',' << fmt(rep.primal) << ',' << fmt(rep.dual_objective) << ','
        << fmt(rep.certificate) << ',' << oracle << ',' << updates << ',' << rep.reassignments
        << ',';
    if (!a.no_timing) {
      out << fmt(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Indivisible allocation with concave-additive valuations"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Run a solver on an instance");
  s->add_option("--instance", solve.instance, "Instance JSON")->required();
  s->add_option("--mode", solve.mode)->check(CLI::IsMember({"mult", "add", "wbb"}));
  s->add_option("--epsilon", solve.epsilon)->check(CLI::PositiveNumber);
  s->add_option("--omega", solve.omega, "Smoothing for wbb");
  s->add_option("--mu", solve.mu)->check(CLI::IsMember({"auto", "guess"}));
  s->add_option("--trace", solve.trace, "Write trace events as JSON lines");
  s->add_option("--out", solve.out, "Write the report here instead of stdout");
  s->add_option("--tol", solve.tol, "Certificate tolerance");

  CurvatureArgs curv;
  auto* c = app.add_subcommand("curvature", "Local curvature of a valuation");
  c->add_option("--valuation", curv.valuation, "Valuation JSON")->required();
  c->add_option("--width", curv.width)->required();
  c->add_option("--kind", curv.kind)->check(CLI::IsMember({"mult", "add"}));
  c->add_flag("--numeric", curv.numeric, "Skip closed forms");

  GapArgs gap;
  auto* g = app.add_subcommand("gap-gen", "Generate and verify an integrality-gap instance");
  g->add_option("--valuation", gap.valuation, "Valuation JSON")->required();
  g->add_option("--width", gap.width)->required();
  g->add_option("--max-denominator", gap.max_denominator)->check(CLI::PositiveNumber);
  g->add_option("--out", gap.out);

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Brute-force optimum");
  o->add_option("--instance", orc.instance, "Instance JSON")->required();
  o->add_option("--objective", orc.objective)->check(CLI::IsMember({"util", "nash"}));
  o->add_option("--omega", orc.omega);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Batch solve with oracle comparison (CSV)");
  b->add_option("--suite", bench.suite)->check(CLI::IsMember({"random", "gap"}));
  b->add_option("--n", bench.n)->check(CLI::PositiveNumber);
  b->add_option("--m", bench.m)->check(CLI::PositiveNumber);
  b->add_option("--count", bench.count);
  b->add_option("--seed", bench.seed);
  b->add_option("--family", bench.family)
      ->check(CLI::IsMember({"linear", "budget", "piecewise", "power"}));
  b->add_option("--epsilon", bench.epsilon)->check(CLI::PositiveNumber);
  b->add_flag("--no-timing", bench.no_timing, "Leave the wall-time column empty");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (s->parsed()) return run_solve(solve, out);
    if (c->parsed()) return run_curvature(curv, out);
    if (g->parsed()) return run_gap(gap, out);
    if (o->parsed()) return run_oracle(orc, out);
    return run_bench(bench, out);
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::range_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace ica
