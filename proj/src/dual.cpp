#include "ica/dual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ica/errors.hpp"

namespace ica {
namespace {

bool close_or_less(double a, double b, double tol) {
  return a <= b + tol * (1.0 + std::abs(b));
}

}  // namespace

double agent_dual_value(const DualState& state, std::size_t i, double u_i) {
  return tangent_line_value(state.agents.at(i), u_i);
}

std::optional<std::size_t> best_agent(const DualState& state, const Instance& inst, std::size_t j,
                                      std::optional<std::size_t> current_owner) {
  std::size_t best = 0;
  double best_bid = -1.0;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double bid = state.agents[i].slope * inst.utility(i, j);
    if (bid > best_bid) {
      best_bid = bid;
      best = i;
    }
  }
  if (best_bid <= 0.0) return current_owner;
  return best;
}

std::vector<double> max_bid_prices(const DualState& state, const Instance& inst) {
  std::vector<double> p(inst.items(), 0.0);
  for (std::size_t j = 0; j < inst.items(); ++j) {
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      p[j] = std::max(p[j], state.agents[i].slope * inst.utility(i, j));
    }
  }
  return p;
}

DualCheck check_dual(const DualState& state, const Instance& inst,
                     const std::vector<double>& prices, double tol) {
  DualCheck out;
  out.prices = prices;
  if (state.agents.size() != inst.agents() || prices.size() != inst.items()) {
    throw DomainError("dual state does not match instance dimensions");
  }
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const SlopePoint& sp = state.agents[i];
    const Valuation& v = inst.valuation(i);
    std::ostringstream who;
    who << "agent " << i;
    if (!(sp.anchor >= 0.0) || !std::isfinite(sp.slope) || sp.slope < 0.0) {
      out.violations.push_back(who.str() + ": malformed slope point");
      continue;
    }
    if (!close_or_less(v.slope(sp.anchor), sp.slope, tol) ||
        !close_or_less(sp.slope, v.left_slope(sp.anchor), tol)) {
      out.violations.push_back(who.str() + ": slope is not a supergradient at its anchor");
    }
    const double y = v.value(sp.anchor) - sp.anchor * sp.slope;
    if (std::abs(y - sp.intercept) > tol * (1.0 + std::abs(y))) {
      out.violations.push_back(who.str() + ": intercept does not match v(t) - t s");
    }
    out.objective += sp.intercept;
  }
  for (std::size_t j = 0; j < inst.items(); ++j) {
    if (prices[j] < 0.0) {
      out.violations.push_back("item " + std::to_string(j) + ": negative price");
    }
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      const double bid = state.agents[i].slope * inst.utility(i, j);
      if (!close_or_less(bid, prices[j], tol)) {
        out.violations.push_back("item " + std::to_string(j) + ": price below agent " +
                                 std::to_string(i) + "'s bid");
      }
    }
    out.objective += prices[j];
  }
  out.feasible = out.violations.empty();
  return out;
}

DualCheck check_dual_feasible(const DualState& state, const Instance& inst, double adjustment,
                              const Allocation* alloc, double tol) {
  std::vector<double> p = max_bid_prices(state, inst);
  const bool mult = state.mode == DualMode::kMultiplicative;
  for (std::size_t j = 0; j < inst.items(); ++j) {
    if (alloc == nullptr) {
      p[j] = mult ? p[j] * adjustment : p[j] + adjustment;
      continue;
    }
    const auto& o = alloc->owner.at(j);
    if (!o) continue;
    const double own = state.agents[*o].slope * inst.utility(*o, j);
    p[j] = std::max(p[j], mult ? adjustment * own : own + adjustment);
  }
  return check_dual(state, inst, p, tol);
}

}  // namespace ica
