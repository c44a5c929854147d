#include "ica/wbb.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "ica/curvature.hpp"
#include "ica/dual.hpp"
#include "ica/errors.hpp"

namespace ica {
namespace {

constexpr double kConditionSlack = 1e-12;

class BidRun {
 public:
  BidRun(const Instance& norm, double omega, double epsilon, const SolveOptions& opts)
      : inst_(norm), opts_(opts), omega_(omega), epsilon_(epsilon) {
    const std::size_t n = norm.agents();
    rep_.omega = omega;
    rep_.epsilon = epsilon;
    rep_.bids.assign(n, omega);
    rep_.bid_updates.assign(n, 0);
    rep_.saturated.assign(n, false);
    u_.assign(n, 0.0);
    const double m = static_cast<double>(norm.items());
    std::size_t units = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = norm.weight(i);
      rep_.weights.push_back(eta);
      // alpha_i carries a factor eta_i; the bid-space condition has it
      // cancelled, so it compares against alpha_i / eta_i.
      rep_.alpha_bar.push_back(add_curvature(Valuation::smooth_log(eta, omega), norm.max_utility(i))
                                   .value /
                               eta);
      units += static_cast<std::size_t>(std::ceil(m * (eta / omega) / epsilon)) + 2;
    }
    rep_.iteration_budget =
        static_cast<std::size_t>(opts.budget_factor * static_cast<double>(norm.items() + 1) * units);
    rep_.allocation.owner.assign(norm.items(), std::nullopt);
    for (std::size_t j = 0; j < norm.items(); ++j) rep_.allocation.owner[j] = best(j, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) recompute(i);
  }

  void run() {
    const std::size_t n = inst_.agents();
    std::size_t i = 0;
    while (i < n) {
      if (rep_.saturated[i]) {
        ++i;
        continue;
      }
      bool changed = false;
      while (violated(i, kConditionSlack)) {
        if (++rep_.iterations > rep_.iteration_budget) {
          throw InvariantViolation("iteration budget exceeded", lines());
        }
        changed = true;
        if (const auto j = worst_item(i)) {
          const std::size_t to = *best(*j, i);
          rep_.allocation.owner[*j] = to;
          recompute(i);
          recompute(to);
          ++rep_.reassignments;
          emit(TraceEvent::Kind::kDefect, i, *j, to, price_rate(i));
          if (opts_.instrument) check_under_allocation();
          continue;
        }
        if (!raise_bid(i)) {
          rep_.saturated[i] = true;
          break;
        }
        ++rep_.bid_updates[i];
        emit(TraceEvent::Kind::kBidUpdate, i, std::nullopt, std::nullopt, rep_.bids[i]);
      }
      if (changed) {
        emit(TraceEvent::Kind::kAgentDone, i, std::nullopt, std::nullopt, price_rate(i));
        i = 0;
      } else {
        ++i;
      }
    }
  }

  WbbReport finish() && {
    rep_.utilities = u_;
    double log_obj = 0.0;
    for (std::size_t i = 0; i < inst_.agents(); ++i) {
      log_obj += inst_.weight(i) * std::log(u_[i] + omega_);
    }
    rep_.log_objective = log_obj;
    rep_.product_objective = std::exp(log_obj);

    // Dual of the smooth Nash program: the tangent of eta ln(u + omega) at
    // t = b - omega, with item prices eta u / b plus the epsilon / m slack.
    DualState dual;
    dual.mode = DualMode::kAdditive;
    dual.epsilon = epsilon_;
    for (std::size_t i = 0; i < inst_.agents(); ++i) {
      const double eta = inst_.weight(i);
      const double b = rep_.bids[i];
      dual.agents.push_back(
          SlopePoint{eta / b, b - omega_, eta * std::log(b) - (b - omega_) * eta / b});
    }
    const Instance logs = smooth_log_instance(inst_, omega_);
    const DualCheck dc = check_dual_feasible(
        dual, logs, epsilon_ / static_cast<double>(inst_.items()), &rep_.allocation, opts_.tol);
    rep_.dual_objective = dc.objective;
    rep_.dual_feasible = dc.feasible;
    rep_.certificate = dc.objective - log_obj;
    rep_.termination = "converged";
    return std::move(rep_);
  }

 private:
  double price_rate(std::size_t i) const { return inst_.weight(i) / rep_.bids[i]; }

  std::optional<std::size_t> best(std::size_t j, std::optional<std::size_t> current) const {
    std::size_t arg = 0;
    double top = -1.0;
    for (std::size_t k = 0; k < inst_.agents(); ++k) {
      const double bang = price_rate(k) * inst_.utility(k, j);
      if (bang > top) {
        top = bang;
        arg = k;
      }
    }
    if (top <= 0.0) return current;
    return arg;
  }

  void recompute(std::size_t i) {
    double total = 0.0;
    for (std::size_t j = 0; j < inst_.items(); ++j) {
      if (rep_.allocation.owner[j] == i) total += inst_.utility(i, j);
    }
    u_[i] = total;
  }

  // ln r < r - 1 - alpha_bar with r = (u + omega) / b, compared in log space.
  bool violated(std::size_t i, double slack) const {
    const double eta = inst_.weight(i);
    const double b = rep_.bids[i];
    const double r = (u_[i] + omega_) / b;
    const double d = eta * (r + std::log(b) - 1.0);
    return eta * (r - 1.0 - std::log(r)) > eta * rep_.alpha_bar[i] + slack * (1.0 + std::abs(d));
  }

  std::optional<std::size_t> worst_item(std::size_t i) const {
    std::optional<std::size_t> pick;
    double worst = 0.0;
    for (std::size_t j = 0; j < inst_.items(); ++j) {
      if (rep_.allocation.owner[j] != i) continue;
      const std::size_t k = *best(j, i);
      if (k == i) continue;
      const double regret = price_rate(k) * inst_.utility(k, j) - price_rate(i) * inst_.utility(i, j);
      if (regret > worst) {
        worst = regret;
        pick = j;
      }
    }
    return pick;
  }

  // b <- eta m b / (eta m - epsilon b), i.e. eta / b drops by epsilon / m.
  bool raise_bid(std::size_t i) {
    const double eta = inst_.weight(i);
    const double m = static_cast<double>(inst_.items());
    const double b = rep_.bids[i];
    const double denom = eta * m - epsilon_ * b;
    if (denom > 0.0) {
      const double next = eta * m * b / denom;
      if (eta / next >= opts_.s_min) {
        rep_.bids[i] = next;
        return true;
      }
    }
    if (eta / b <= opts_.s_min) return false;
    rep_.bids[i] = eta / opts_.s_min;
    return true;
  }

  void check_under_allocation() {
    for (std::size_t a = 0; a < inst_.agents(); ++a) {
      const double t = rep_.bids[a] - omega_;
      if (!(u_[a] < t - 1e-12 * (1.0 + t))) continue;
      if (!violated(a, opts_.tol)) continue;
      ++rep_.under_allocation_violations;
      if (opts_.abort_on_violation) {
        std::ostringstream os;
        os << "agent " << a << " is under-allocated and violates its bid condition";
        throw InvariantViolation(os.str(), lines());
      }
    }
  }

  void emit(TraceEvent::Kind kind, std::size_t agent, std::optional<std::size_t> item,
            std::optional<std::size_t> to, double value) {
    if (!opts_.record_trace) return;
    rep_.trace.push_back(TraceEvent{rep_.trace.size(), kind, agent, item, to, value});
  }

  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    for (const auto& ev : rep_.trace) out.push_back(to_json_line(ev));
    return out;
  }

  const Instance& inst_;
  const SolveOptions& opts_;
  double omega_;
  double epsilon_;
  WbbReport rep_;
  std::vector<double> u_;
};

}  // namespace

NormalizedInstance normalize_instance(const Instance& inst) {
  const double total = inst.total_weight();
  std::vector<double> scale(inst.agents());
  Matrix util = inst.utilities();
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    scale[i] = inst.max_utility(i);
    if (!(scale[i] > 0.0)) {
      throw ValidationError("utilities[" + std::to_string(i) + "]",
                            "agent values no item; cannot normalize");
    }
    for (double& x : util[i]) x /= scale[i];
    agents.push_back({inst.valuation(i), inst.weight(i) / total});
  }
  return NormalizedInstance{Instance(std::move(agents), inst.items(), std::move(util)),
                            std::move(scale), total};
}

Instance smooth_log_instance(const Instance& inst, double omega) {
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    agents.push_back({Valuation::smooth_log(inst.weight(i), omega), inst.weight(i)});
  }
  return Instance(std::move(agents), inst.items(), inst.utilities());
}

double nash_product(const Instance& inst, const Allocation& alloc) {
  const std::vector<double> u = agent_utilities(inst, alloc);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] <= 0.0) return 0.0;
    log_sum += inst.weight(i) * std::log(u[i]);
  }
  return std::exp(log_sum);
}

double denormalize_nash_product(double normalized, const NormalizedInstance& norm,
                                const Instance& original) {
  double log_scale = 0.0;
  for (std::size_t i = 0; i < original.agents(); ++i) {
    log_scale += original.weight(i) * std::log(norm.row_scale[i]);
  }
  return std::pow(normalized, norm.weight_total) * std::exp(log_scale);
}

WbbReport solve_wbb(const Instance& inst, double omega, double epsilon, const SolveOptions& opts) {
  if (!(omega > 0.0) || omega > 1.0) throw ValidationError("omega", "omega must lie in (0, 1]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("epsilon", "epsilon must be finite and > 0");
  }
  NormalizedInstance norm = normalize_instance(inst);
  BidRun run(norm.instance, omega, epsilon, opts);
  run.run();
  WbbReport rep = std::move(run).finish();
  rep.row_scale = norm.row_scale;
  rep.weight_total = norm.weight_total;
  std::vector<double> orig_u = agent_utilities(inst, rep.allocation);
  double log_prod = 0.0;
  bool positive = true;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (orig_u[i] <= 0.0) positive = false;
    else log_prod += inst.weight(i) * std::log(orig_u[i]);
  }
  rep.original_nash_product = positive ? std::exp(log_prod) : 0.0;
  return rep;
}

Json to_json(const WbbReport& rep) {
  return Json{{"mode", "wbb"},
              {"omega", rep.omega},
              {"epsilon", rep.epsilon},
              {"allocation", to_json(rep.allocation)},
              {"bids", rep.bids},
              {"utilities", rep.utilities},
              {"weights", rep.weights},
              {"alpha_bar", rep.alpha_bar},
              {"log_objective", rep.log_objective},
              {"product_objective", rep.product_objective},
              {"dual", rep.dual_objective},
              {"dual_feasible", rep.dual_feasible},
              {"certificate", rep.certificate},
              {"original_nash_product", rep.original_nash_product},
              {"row_scale", rep.row_scale},
              {"weight_total", rep.weight_total},
              {"bid_updates", rep.bid_updates},
              {"saturated", rep.saturated},
              {"reassignments", rep.reassignments},
              {"iterations", rep.iterations},
              {"iteration_budget", rep.iteration_budget},
              {"under_allocation_violations", rep.under_allocation_violations},
              {"termination", rep.termination}};
}

}  // namespace ica
