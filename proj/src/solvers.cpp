#include "ica/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ica/curvature.hpp"
#include "ica/errors.hpp"

namespace ica {
namespace {

// Largest utility agent i could ever hold: the sum of its row.
double total_utility(const Instance& inst, std::size_t i) {
  double sum = 0.0;
  for (double x : inst.utilities()[i]) sum += x;
  return sum;
}

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack on the loop condition so a rounding-level excess does not
// trigger another slope update.
constexpr double kConditionSlack = 1e-12;

const char* kind_name(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::kDefect:
      return "defect";
    case TraceEvent::Kind::kSlopeUpdate:
      return "slope_update";
    case TraceEvent::Kind::kAgentDone:
      return "agent_done";
    case TraceEvent::Kind::kBidUpdate:
      return "bid_update";
  }
  return "unknown";
}

double min_positive_utility(const Instance& inst, std::size_t i) {
  double best = kInf;
  for (double x : inst.utilities()[i]) {
    if (x > 0.0) best = std::min(best, x);
  }
  return std::isfinite(best) ? best : 1.0;
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("epsilon", "epsilon must be finite and > 0");
  }
}

struct RunSetup {
  DualMode mode = DualMode::kMultiplicative;
  double epsilon = 0.01;
  std::vector<double> curvature;
  std::vector<double> targets;
  std::vector<bool> clamped;
  std::vector<bool> skipped;
  bool guess_mode = false;
};

class Engine {
 public:
  Engine(const Instance& inst, RunSetup setup, const SolveOptions& opts)
      : inst_(inst), opts_(opts), guess_mode_(setup.guess_mode) {
    const std::size_t n = inst.agents();
    rep_.mode = setup.mode;
    rep_.epsilon = setup.epsilon;
    rep_.curvature = std::move(setup.curvature);
    rep_.targets = std::move(setup.targets);
    rep_.clamped = std::move(setup.clamped);
    rep_.skipped = std::move(setup.skipped);
    rep_.saturated.assign(n, false);
    rep_.slope_updates.assign(n, 0);
    rep_.update_bound.assign(n, 0);
    rep_.dual.mode = setup.mode;
    rep_.dual.epsilon = setup.epsilon;
    rep_.dual.agents.resize(n);
    s0_.resize(n);
    floor_.resize(n);
    u_.assign(n, 0.0);
    count_.assign(n, 0);

    const double m = static_cast<double>(inst.items());
    std::size_t budget_units = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Valuation& v = inst.valuation(i);
      s0_[i] = solver_initial_slope(inst, i);
      if (!(s0_[i] > 0.0) || !std::isfinite(s0_[i])) {
        throw ValidationError("agents[" + std::to_string(i) + "].valuation",
                              "initial slope must be positive and finite");
      }
      floor_[i] = std::max(opts.s_min, v.asymptotic_slope());
      rep_.dual.agents[i] = slope_point_from_slope(v, s0_[i]);

      if (setup.mode == DualMode::kMultiplicative) {
        const double umax = total_utility(inst, i);
        std::size_t h = 0;
        if (umax > 0.0 && v.value(umax) > 0.0) {
          const double ratio = s0_[i] * umax / (setup.epsilon * v.value(umax));
          h = mult_update_ceiling(ratio, setup.epsilon);
        }
        rep_.update_bound[i] = h;
      } else {
        rep_.update_bound[i] =
            static_cast<std::size_t>(std::ceil(s0_[i] * m / setup.epsilon)) + 1;
      }
      budget_units += rep_.update_bound[i] + 1;
    }
    rep_.iteration_budget = static_cast<std::size_t>(
        opts.budget_factor * static_cast<double>(inst.items() + 1) * budget_units);

    rep_.allocation.owner.assign(inst.items(), std::nullopt);
    for (std::size_t j = 0; j < inst.items(); ++j) {
      rep_.allocation.owner[j] = best_agent(rep_.dual, inst, j);
      if (!rep_.allocation.owner[j]) rep_.unvalued_items.push_back(j);
    }
    for (std::size_t i = 0; i < n; ++i) recompute(i);
  }

  // False when a guessing run found an under-allocated agent over its guess.
  bool run() {
    const std::size_t n = inst_.agents();
    std::size_t i = 0;
    while (i < n) {
      if (rep_.skipped[i] || rep_.saturated[i]) {
        ++i;
        continue;
      }
      bool changed = false;
      while (violated(i, kConditionSlack)) {
        if (++rep_.iterations > rep_.iteration_budget) {
          throw InvariantViolation("iteration budget exceeded", trace_lines());
        }
        changed = true;
        if (const auto j = worst_improper_item(i)) {
          const std::size_t to = *best_agent(rep_.dual, inst_, *j, i);
          rep_.allocation.owner[*j] = to;
          recompute(i);
          recompute(to);
          ++rep_.reassignments;
          emit(TraceEvent::Kind::kDefect, i, *j, to, rep_.dual.agents[i].slope);
          if (opts_.instrument && !check_under_allocation()) return false;
          continue;
        }
        const double s = rep_.dual.agents[i].slope;
        double next = rep_.mode == DualMode::kMultiplicative
                          ? s / (1.0 + rep_.epsilon)
                          : s - rep_.epsilon / static_cast<double>(inst_.items());
        if (next < floor_[i]) {
          if (s <= floor_[i]) {
            rep_.saturated[i] = true;
            break;
          }
          next = floor_[i];
        }
        rep_.dual.agents[i] = slope_point_from_slope(inst_.valuation(i), next);
        ++rep_.slope_updates[i];
        emit(TraceEvent::Kind::kSlopeUpdate, i, std::nullopt, std::nullopt, next);
      }
      if (changed) {
        emit(TraceEvent::Kind::kAgentDone, i, std::nullopt, std::nullopt,
             rep_.dual.agents[i].slope);
        i = 0;
      } else {
        ++i;
      }
    }
    return true;
  }

  SolveReport finish() && {
    rep_.utilities = u_;
    rep_.primal = utilitarian_welfare(inst_, rep_.allocation);
    const bool mult = rep_.mode == DualMode::kMultiplicative;
    const double adjust =
        mult ? 1.0 + rep_.epsilon : rep_.epsilon / static_cast<double>(inst_.items());
    const DualCheck dc = check_dual_feasible(rep_.dual, inst_, adjust, &rep_.allocation, opts_.tol);
    rep_.dual_objective = dc.objective;
    rep_.dual_feasible = dc.feasible;
    if (mult) {
      rep_.certificate = rep_.primal > 0.0 ? rep_.dual_objective / rep_.primal
                                           : (rep_.dual_objective > 0.0 ? kInf : 1.0);
    } else {
      rep_.certificate = rep_.dual_objective - rep_.primal;
    }
    rep_.termination = "converged";
    return std::move(rep_);
  }

 private:
  void recompute(std::size_t i) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < inst_.items(); ++j) {
      if (rep_.allocation.owner[j] == i) {
        total += inst_.utility(i, j);
        ++count;
      }
    }
    u_[i] = total;
    count_[i] = count;
  }

  bool violated(std::size_t i, double slack) const {
    const SlopePoint& sp = rep_.dual.agents[i];
    const double d = sp.intercept + sp.slope * u_[i];
    const double val = inst_.valuation(i).value(u_[i]);
    const double target = rep_.targets[i];
    if (rep_.mode == DualMode::kAdditive) return d - val > target + slack * (1.0 + std::abs(d));
    if (val <= 0.0) {
      if (d <= 0.0) return false;
      return !(count_[i] == 0 && sp.slope == s0_[i]);
    }
    return d > target * val + slack * (1.0 + std::abs(d));
  }

  std::optional<std::size_t> worst_improper_item(std::size_t i) const {
    std::optional<std::size_t> pick;
    double worst = 0.0;
    const double s = rep_.dual.agents[i].slope;
    for (std::size_t j = 0; j < inst_.items(); ++j) {
      if (rep_.allocation.owner[j] != i) continue;
      const std::size_t b = *best_agent(rep_.dual, inst_, j, i);
      if (b == i) continue;
      const double regret = rep_.dual.agents[b].slope * inst_.utility(b, j) - s * inst_.utility(i, j);
      if (regret > worst) {
        worst = regret;
        pick = j;
      }
    }
    return pick;
  }

  // True when no under-allocated agent violates its condition (within tol).
  bool check_under_allocation() {
    for (std::size_t a = 0; a < inst_.agents(); ++a) {
      if (rep_.skipped[a]) continue;
      const double t = rep_.dual.agents[a].anchor;
      if (!(u_[a] < t - 1e-12 * (1.0 + t))) continue;
      if (!violated(a, opts_.tol)) continue;
      ++rep_.under_allocation_violations;
      if (guess_mode_) return false;
      if (opts_.abort_on_violation) {
        std::ostringstream os;
        os << "agent " << a << " is under-allocated and violates its loop condition";
        throw InvariantViolation(os.str(), trace_lines());
      }
    }
    return true;
  }

  void emit(TraceEvent::Kind kind, std::size_t agent, std::optional<std::size_t> item,
            std::optional<std::size_t> to, double value) {
    if (!opts_.record_trace) return;
    rep_.trace.push_back(TraceEvent{rep_.trace.size(), kind, agent, item, to, value});
  }

  std::vector<std::string> trace_lines() const {
    std::vector<std::string> out;
    out.reserve(rep_.trace.size());
    for (const auto& ev : rep_.trace) out.push_back(to_json_line(ev));
    return out;
  }

  const Instance& inst_;
  const SolveOptions& opts_;
  bool guess_mode_;
  SolveReport rep_;
  std::vector<double> s0_;
  std::vector<double> floor_;
  std::vector<double> u_;
  std::vector<std::size_t> count_;
};

void check_mult_inputs(const Instance& inst) {
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (!inst.valuation(i).is_nonnegative()) {
      throw ValidationError("agents[" + std::to_string(i) + "].valuation",
                            "multiplicative mode requires a non-negative valuation");
    }
  }
}

RunSetup mult_setup(const Instance& inst, double epsilon, std::vector<double> mu) {
  if (mu.size() != inst.agents()) {
    throw ValidationError("mu", "expected " + std::to_string(inst.agents()) + " values");
  }
  RunSetup s;
  s.mode = DualMode::kMultiplicative;
  s.epsilon = epsilon;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 1.0)) {
      throw ValidationError("mu[" + std::to_string(i) + "]", "curvature must be >= 1");
    }
    const bool skip = mu[i] == 1.0 || std::isinf(mu[i]);
    const double floor = 1.0 + epsilon;
    s.skipped.push_back(skip);
    s.clamped.push_back(!skip && mu[i] < floor);
    s.targets.push_back(skip ? mu[i] : std::max(mu[i], floor));
  }
  s.curvature = std::move(mu);
  return s;
}

}  // namespace

std::string to_json_line(const TraceEvent& ev) {
  Json j;
  j["t"] = ev.step;
  j["event"] = kind_name(ev.kind);
  j["agent"] = ev.agent;
  if (ev.kind == TraceEvent::Kind::kBidUpdate) {
    j["bid"] = ev.value;
    return j.dump();
  }
  j["item"] = ev.item ? Json(*ev.item) : Json(nullptr);
  if (ev.to) j["to"] = *ev.to;
  j["slope"] = ev.value;
  return j.dump();
}

double solver_initial_slope(const Instance& inst, std::size_t i) {
  return initial_slope(inst.valuation(i), min_positive_utility(inst, i));
}

std::vector<double> auto_mult_curvature(const Instance& inst) {
  std::vector<double> mu(inst.agents(), 1.0);
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double w = inst.max_utility(i);
    if (w > 0.0) mu[i] = mult_curvature(inst.valuation(i), w).value;
  }
  return mu;
}

std::vector<double> auto_add_curvature(const Instance& inst) {
  std::vector<double> alpha(inst.agents(), 0.0);
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double w = inst.max_utility(i);
    if (w > 0.0) alpha[i] = add_curvature(inst.valuation(i), w).value;
  }
  return alpha;
}

double rho_max(const Instance& inst) {
  double rho = 0.0;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double umax = total_utility(inst, i);
    const double v = umax > 0.0 ? inst.valuation(i).value(umax) : 0.0;
    if (v > 0.0) rho = std::max(rho, solver_initial_slope(inst, i) * umax / v);
  }
  return rho;
}

std::size_t mult_update_ceiling(double rho, double epsilon) {
  const double h = std::ceil(std::log(rho / epsilon) / std::log1p(epsilon));
  return static_cast<std::size_t>(std::max(0.0, h)) + 1;
}

SolveReport solve_multiplicative(const Instance& inst, double epsilon,
                                 std::optional<std::vector<double>> mu, const SolveOptions& opts) {
  require_epsilon(epsilon);
  check_mult_inputs(inst);
  RunSetup setup = mult_setup(inst, epsilon, mu ? std::move(*mu) : auto_mult_curvature(inst));
  Engine engine(inst, std::move(setup), opts);
  engine.run();
  return std::move(engine).finish();
}

SolveReport solve_multiplicative_guessing(const Instance& inst, double epsilon,
                                          const SolveOptions& opts, double max_guess) {
  require_epsilon(epsilon);
  check_mult_inputs(inst);
  for (std::size_t k = 0;; ++k) {
    const double guess = 1.0 + epsilon * static_cast<double>(k + 1);
    if (guess > max_guess) {
      throw DomainError("mu guess exceeded the cap of " + std::to_string(max_guess));
    }
    RunSetup setup;
    setup.mode = DualMode::kMultiplicative;
    setup.epsilon = epsilon;
    setup.curvature.assign(inst.agents(), guess);
    setup.targets.assign(inst.agents(), guess);
    setup.clamped.assign(inst.agents(), false);
    setup.skipped.assign(inst.agents(), false);
    setup.guess_mode = true;
    SolveOptions run_opts = opts;
    run_opts.instrument = true;
    Engine engine(inst, std::move(setup), run_opts);
    if (!engine.run()) continue;
    SolveReport rep = std::move(engine).finish();
    rep.accepted_guess = guess;
    rep.guess_restarts = k;
    return rep;
  }
}

SolveReport solve_additive(const Instance& inst, double epsilon,
                           std::optional<std::vector<double>> alpha, const SolveOptions& opts) {
  require_epsilon(epsilon);
  std::vector<double> a = alpha ? std::move(*alpha) : auto_add_curvature(inst);
  if (a.size() != inst.agents()) {
    throw ValidationError("alpha", "expected " + std::to_string(inst.agents()) + " values");
  }
  RunSetup setup;
  setup.mode = DualMode::kAdditive;
  setup.epsilon = epsilon;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0)) {
      throw ValidationError("alpha[" + std::to_string(i) + "]", "curvature must be >= 0");
    }
    setup.skipped.push_back(a[i] == 0.0 || std::isinf(a[i]));
  }
  setup.targets = a;
  setup.curvature = std::move(a);
  setup.clamped.assign(inst.agents(), false);
  Engine engine(inst, std::move(setup), opts);
  engine.run();
  return std::move(engine).finish();
}

Json to_json(const SolveReport& rep) {
  Json slopes = Json::array();
  Json anchors = Json::array();
  for (const auto& sp : rep.dual.agents) {
    slopes.push_back(sp.slope);
    anchors.push_back(sp.anchor);
  }
  Json curvature = Json::array();
  Json targets = Json::array();
  for (double x : rep.curvature) curvature.push_back(json_real(x));
  for (double x : rep.targets) targets.push_back(json_real(x));
  Json j{{"mode", rep.mode == DualMode::kMultiplicative ? "mult" : "add"},
         {"epsilon", rep.epsilon},
         {"allocation", to_json(rep.allocation)},
         {"utilities", rep.utilities},
         {"primal", rep.primal},
         {"dual", json_real(rep.dual_objective)},
         {"dual_feasible", rep.dual_feasible},
         {"certificate", json_real(rep.certificate)},
         {"slopes", slopes},
         {"anchors", anchors},
         {"curvature", curvature},
         {"targets", targets},
         {"clamped", rep.clamped},
         {"skipped", rep.skipped},
         {"saturated", rep.saturated},
         {"unvalued_items", rep.unvalued_items},
         {"slope_updates", rep.slope_updates},
         {"update_bound", rep.update_bound},
         {"reassignments", rep.reassignments},
         {"iterations", rep.iterations},
         {"iteration_budget", rep.iteration_budget},
         {"under_allocation_violations", rep.under_allocation_violations},
         {"termination", rep.termination}};
  if (rep.accepted_guess) {
    j["accepted_guess"] = *rep.accepted_guess;
    j["guess_restarts"] = rep.guess_restarts;
  }
  return j;
}

}  // namespace ica
