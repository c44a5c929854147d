// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "ica/curvature.hpp"
#include "ica/dual.hpp"
#include "ica/errors.hpp"
#include "ica/instance.hpp"
#include "ica/oracle.hpp"
#include "ica/solvers.hpp"
#include "ica/wbb.hpp"

using namespace ica;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Filled by criteria 5-8 and read back by 9 and 10.
struct Tally {
  std::size_t runs = 0;
  std::size_t violations = 0;
  std::size_t update_checks = 0;
  std::size_t update_breaches = 0;
  std::size_t worst_updates = 0;
  std::size_t worst_ceiling = 0;
};

Tally tally;

SolveOptions counting() {
  SolveOptions o;
  o.abort_on_violation = false;
  o.record_trace = false;
  return o;
}

double sum_of(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

double max_of(const std::vector<double>& xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  return m;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string event_key(const TraceEvent& ev) {
  const bool update =
      ev.kind == TraceEvent::Kind::kSlopeUpdate || ev.kind == TraceEvent::Kind::kBidUpdate;
  std::ostringstream os;
  os << (update ? 'u' : ev.kind == TraceEvent::Kind::kDefect ? 'd' : 'x') << ev.agent << ':'
     << (ev.item ? static_cast<long>(*ev.item) : -1L) << ':'
     << (ev.to ? static_cast<long>(*ev.to) : -1L);
  return os.str();
}

Instance weighted_instance(testgen::Gen& g) {
  const std::size_t n = 1 + g.below(3);
  const std::size_t m = 1 + g.below(6);
  const std::uint64_t seed = static_cast<std::uint64_t>(g.unit() * 1e12);
  const Instance base = gen_random(n, m, "linear", seed);
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < n; ++i) {
    agents.push_back({Valuation::linear(1.0), g.uniform(0.1, 5.0)});
  }
  return Instance(agents, m, base.utilities());
}

Outcome budget_curvature() {
  Outcome o;
  double worst = 0.0;
  for (double c : {0.25, 0.5, 1.0, 2.0, 7.5}) {
    const CurvatureReport r = mult_curvature(Valuation::budget(c), c);
    worst = std::max(worst, std::abs(r.value - 4.0 / 3.0));
    if (std::abs(r.value - 4.0 / 3.0) > 1e-9 || std::abs(r.witness_z - c / 2) > 1e-9) {
      o.pass = false;
    }
  }
  o.detail = "max |mu - 4/3| = " + num(worst) + " over 5 caps, witness z = c/2";
  return o;
}

Outcome piecewise_ceiling() {
  Outcome o;
  testgen::Gen g(2024);
  double worst = 0.0;
  const int count = 1200;
  for (int k = 0; k < count; ++k) {
    const double w = g.uniform(0.05, 3.0);
    const Valuation v = testgen::piecewise(g, w, 6);
    const double mu = mult_curvature(v, w).value;
    worst = std::max(worst, mu);
    if (mu > 4.0 / 3.0 + 1e-9) o.pass = false;
  }
  o.detail = std::to_string(count) + " valuations, max mu = " + num(worst);
  return o;
}

Outcome smooth_log_alpha() {
  Outcome o;
  const double closed = smooth_log_alpha_closed_form(1.0, 1.0);
  const double numeric =
      numeric_curvature_oracle(Valuation::smooth_log(1.0, 1.0), 1.0, CurvatureKind::kAdditive);
  const double ratio = std::exp(closed);
  o.pass = std::abs(closed - 0.059656) < 1e-5 && std::abs(numeric - closed) < 1e-5 &&
           std::abs(ratio - 1.061) < 1e-3 && std::abs(ratio - 1.0615) < 1e-3;
  o.detail = "alpha = " + num(closed) + ", grid oracle = " + num(numeric) +
             ", e^alpha = " + num(ratio);
  return o;
}

Outcome gap_reproduction() {
  Outcome o;
  const GapInstance gap = gen_gap_instance(Valuation::budget(2.0), 2.0);
  const OracleResult bf = brute_force_opt(gap.instance, Objective::kUtilitarian);
  const GapInstanceSpec& s = gap.spec;
  DualState dual;
  dual.agents.assign(gap.instance.agents(),
                     SlopePoint{s.dual_slope, s.t_star,
                                s.valuation.value(s.t_star) - s.t_star * s.dual_slope});
  const DualCheck dc = check_dual_feasible(dual, gap.instance, 1.0);
  const double ratio = dc.objective / bf.value;
  o.pass = dc.feasible && std::abs(bf.value - 3.0) < 1e-9 && std::abs(dc.objective - 4.0) < 1e-9 &&
           std::abs(ratio - 4.0 / 3.0) < 1e-9 && verify_gap_certificate(gap).passed;
  o.detail = "OPT_I = " + num(bf.value) + ", OPT_F = " + num(dc.objective) +
             ", ratio = " + num(ratio) + (dc.feasible ? "" : ", dual infeasible");
  return o;
}

Outcome multiplicative_bound() {
  Outcome o;
  testgen::Gen g(5);
  const double eps = 0.05;
  std::size_t failures = 0;
  std::size_t dual_failures = 0;
  std::size_t violations = 0;
  double worst_gap = kInf;  // min over runs of primal - bound
  for (std::string_view fam : {"budget", "piecewise", "power"}) {
    for (int k = 0; k < 500; ++k) {
      const Instance inst = gen_random(1 + g.below(3), 1 + g.below(6), fam, 50000 + k);
      const SolveReport r = solve_multiplicative(inst, eps, std::nullopt, counting());
      const double opt = brute_force_opt(inst, Objective::kUtilitarian).value;
      const double bound = opt / ((1.0 + eps) * max_of(r.targets));
      worst_gap = std::min(worst_gap, r.primal - bound);
      if (r.primal < bound - 1e-9) ++failures;
      if (r.dual_objective < opt - 1e-9) ++dual_failures;
      violations += r.under_allocation_violations;

      ++tally.runs;
      tally.violations += r.under_allocation_violations;
      const std::size_t ceiling = mult_update_ceiling(rho_max(inst), eps);
      for (std::size_t u : r.slope_updates) {
        ++tally.update_checks;
        if (u > ceiling) ++tally.update_breaches;
        if (u > tally.worst_updates) {
          tally.worst_updates = u;
          tally.worst_ceiling = ceiling;
        }
      }
    }
  }
  o.pass = failures == 0 && dual_failures == 0 && violations == 0;
  o.detail = "1500 runs, bound failures " + std::to_string(failures) + ", weak-duality failures " +
             std::to_string(dual_failures) + ", violations " + std::to_string(violations) +
             ", min slack " + num(worst_gap) + " (power: mu = inf, primal bound vacuous)";
  return o;
}

Outcome additive_bound() {
  Outcome o;
  testgen::Gen g(6);
  const double eps = 0.05;
  const double omegas[] = {0.25, 0.5, 1.0};
  std::size_t cert_failures = 0;
  std::size_t primal_failures = 0;
  double worst = -kInf;  // max of certificate - (sum alpha + eps)
  for (int k = 0; k < 500; ++k) {
    const double omega = omegas[k % 3];
    const Instance inst =
        gen_random(1 + g.below(3), 1 + g.below(6), "smooth_log", 60000 + k, omega);
    const SolveReport r = solve_additive(inst, eps, std::nullopt, counting());
    const double budget = sum_of(r.curvature) + eps;
    const double opt = brute_force_opt(inst, Objective::kUtilitarian).value;
    worst = std::max(worst, r.certificate - budget);
    if (r.certificate > budget + 1e-9) ++cert_failures;
    if (r.primal < opt - budget - 1e-9) ++primal_failures;
    ++tally.runs;
    tally.violations += r.under_allocation_violations;
  }
  o.pass = cert_failures == 0 && primal_failures == 0;
  o.detail = "500 runs, certificate failures " + std::to_string(cert_failures) +
             ", primal failures " + std::to_string(primal_failures) +
             ", max(cert - sum alpha - eps) = " + num(worst);
  return o;
}

Outcome wbb_equivalence() {
  Outcome o;
  testgen::Gen g(7);
  const double omegas[] = {0.25, 0.5, 1.0};
  std::size_t mismatches = 0;
  std::size_t events = 0;
  for (int k = 0; k < 200; ++k) {
    const double omega = omegas[k % 3];
    const double eps = 0.05;
    const Instance inst = weighted_instance(g);
    SolveOptions opts;
    opts.abort_on_violation = false;
    const WbbReport w = solve_wbb(inst, omega, eps, opts);
    const SolveReport a =
        solve_additive(smooth_log_instance(normalize_instance(inst).instance, omega), eps,
                       std::nullopt, opts);
    tally.runs += 2;
    tally.violations += w.under_allocation_violations + a.under_allocation_violations;

    bool same = w.trace.size() == a.trace.size() && w.allocation == a.allocation;
    for (std::size_t e = 0; same && e < w.trace.size(); ++e) {
      same = event_key(w.trace[e]) == event_key(a.trace[e]);
    }
    events += w.trace.size();
    if (!same) ++mismatches;
  }
  o.pass = mismatches == 0;
  o.detail = "200 instances, " + std::to_string(events) + " events compared, mismatches " +
             std::to_string(mismatches);
  return o;
}

Outcome wbb_bound() {
  Outcome o;
  testgen::Gen g(8);
  const double eps = 0.01;
  std::size_t failures = 0;
  std::size_t loose_failures = 0;
  double worst = kInf;  // min of product / OPT_prod
  double max_alpha = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Instance inst = weighted_instance(g);
    const WbbReport r = solve_wbb(inst, 1.0, eps, counting());
    tally.runs += 1;
    tally.violations += r.under_allocation_violations;
    const NormalizedInstance norm = normalize_instance(inst);
    const double opt_prod =
        std::exp(brute_force_opt(norm.instance, Objective::kNashLog, 1.0).value);
    double alpha = 0.0;
    for (std::size_t i = 0; i < r.weights.size(); ++i) alpha += r.weights[i] * r.alpha_bar[i];
    max_alpha = std::max(max_alpha, alpha);
    worst = std::min(worst, r.product_objective / opt_prod);
    if (r.product_objective < opt_prod / std::exp(alpha + eps) * (1.0 - 1e-12)) ++failures;
    if (r.product_objective < opt_prod / 1.073) ++loose_failures;
  }
  o.pass = failures == 0 && loose_failures == 0;
  o.detail = "200 runs, min product/OPT = " + num(worst) + " (floor " +
             num(1.0 / std::exp(max_alpha + eps)) + "), sum alpha = " + num(max_alpha);
  return o;
}

Outcome no_under_allocation() {
  Outcome o;
  o.pass = tally.violations == 0 && tally.runs > 0;
  o.detail = std::to_string(tally.runs) + " instrumented runs, violations " +
             std::to_string(tally.violations);
  return o;
}

Outcome update_ceiling() {
  Outcome o;
  o.pass = tally.update_breaches == 0 && tally.update_checks > 0;
  o.detail = std::to_string(tally.update_checks) + " agent runs, breaches " +
             std::to_string(tally.update_breaches) + ", max updates " +
             std::to_string(tally.worst_updates) + " (ceiling " +
             std::to_string(tally.worst_ceiling) + ")";
  return o;
}

bool report(int id, double limit_s, const std::function<Outcome()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = Outcome{false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0.0 && secs > limit_s) {
    o.pass = false;
    o.detail += ", over the " + num(limit_s) + " s limit";
  }
  std::printf("criterion %2d: %s  %s [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
              secs);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, 1.0, budget_curvature);
  ok &= report(2, 60.0, piecewise_ceiling);
  ok &= report(3, 0.0, smooth_log_alpha);
  ok &= report(4, 0.0, gap_reproduction);
  ok &= report(5, 300.0, multiplicative_bound);
  ok &= report(6, 300.0, additive_bound);
  ok &= report(7, 0.0, wbb_equivalence);
  ok &= report(8, 0.0, wbb_bound);
  ok &= report(9, 0.0, no_under_allocation);
  ok &= report(10, 0.0, update_ceiling);
  return ok ? 0 : 1;
}
