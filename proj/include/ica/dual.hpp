#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ica/instance.hpp"
#include "ica/valuation.hpp"

namespace ica {

enum class DualMode { kMultiplicative, kAdditive };

/// One supporting line per agent. Item prices are derived from the slopes on
/// demand and never stored.
struct DualState {
  std::vector<SlopePoint> agents;
  DualMode mode = DualMode::kMultiplicative;
  double epsilon = 0.01;
};

/// D(u_i) = y_i + s_i * u_i.
double agent_dual_value(const DualState& state, std::size_t i, double u_i);

/// argmax_i u[i][j] * s_i, lowest index on ties. When every product is 0 the
/// current owner is returned (nullopt if there is none).
std::optional<std::size_t> best_agent(const DualState& state, const Instance& inst, std::size_t j,
                                      std::optional<std::size_t> current_owner = std::nullopt);

/// max_i s_i * u[i][j] for every item.
std::vector<double> max_bid_prices(const DualState& state, const Instance& inst);

struct DualCheck {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> prices;
  std::vector<std::string> violations;
};

/// Verifies a dual solution: every line supports its valuation (s_i is a
/// supergradient at t_i and y_i = v(t_i) - t_i s_i), and p_j >= s_i u[i][j],
/// p_j >= 0 for all i, j. The objective sum_i y_i + sum_j p_j is reported
/// even when infeasible.
DualCheck check_dual(const DualState& state, const Instance& inst,
                     const std::vector<double>& prices, double tol = 1e-9);

/// Prices each item from the slopes and checks the result. Without an
/// allocation p_j = max_i s_i u[i][j] (times `adjustment` in multiplicative
/// mode, plus `adjustment` in additive mode). With an allocation the
/// adjustment is applied to the owner's bid only:
///   multiplicative  p_j = max(max_i s_i u[i][j], adjustment * s_o u[o][j])
///   additive        p_j = max(max_i s_i u[i][j], s_o u[o][j] + adjustment)
/// which stays feasible and bounds improperly assigned items by their owner.
DualCheck check_dual_feasible(const DualState& state, const Instance& inst, double adjustment,
                              const Allocation* alloc = nullptr, double tol = 1e-9);

}  // namespace ica
