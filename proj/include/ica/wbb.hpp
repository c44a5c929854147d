#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ica/instance.hpp"
#include "ica/json_io.hpp"
#include "ica/solvers.hpp"

namespace ica {

/// Instance with every utility row divided by its max and weights divided by
/// their sum. Valuations are carried over unchanged.
struct NormalizedInstance {
  Instance instance;
  std::vector<double> row_scale;  // max_j u[i][j] of the original
  double weight_total = 1.0;      // sum of original weights
};

/// Throws ValidationError if an agent values no item.
NormalizedInstance normalize_instance(const Instance& inst);

/// Same utilities and weights with valuations eta_i * ln(u + omega).
Instance smooth_log_instance(const Instance& inst, double omega);

/// prod_i u_i^{w_i} under the instance weights (unsmoothed Nash product).
double nash_product(const Instance& inst, const Allocation& alloc);

/// Converts a normalized Nash product back to original units:
/// normalized^eta * prod_i scale_i^{eta_i}.
double denormalize_nash_product(double normalized, const NormalizedInstance& norm,
                                const Instance& original);

struct WbbReport {
  double omega = 1.0;
  double epsilon = 0.0;
  Allocation allocation;
  std::vector<double> bids;
  std::vector<double> utilities;     // normalized
  std::vector<double> weights;       // normalized
  std::vector<double> alpha_bar;     // alpha_i / eta_i
  double log_objective = 0.0;        // sum_i eta_i ln(u_i + omega), normalized
  double product_objective = 0.0;    // exp(log_objective)
  double dual_objective = 0.0;       // dual bound on the log objective
  bool dual_feasible = false;
  double certificate = 0.0;          // dual - log objective
  double original_nash_product = 0.0;  // prod (u_i)^{eta_i} in original units

  std::vector<std::size_t> bid_updates;
  std::vector<bool> saturated;
  std::size_t reassignments = 0;
  std::size_t iterations = 0;
  std::size_t iteration_budget = 0;
  std::size_t under_allocation_violations = 0;
  std::vector<double> row_scale;
  double weight_total = 1.0;
  std::vector<TraceEvent> trace;
  std::string termination;
};

/// Weighted bang-per-buck tatonnement for smooth asymmetric Nash welfare on
/// the normalized instance. Valuations in `inst` are ignored; only weights and
/// utilities are used.
WbbReport solve_wbb(const Instance& inst, double omega, double epsilon,
                    const SolveOptions& opts = {});

Json to_json(const WbbReport& rep);

}  // namespace ica
