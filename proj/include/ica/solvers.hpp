#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ica/dual.hpp"
#include "ica/instance.hpp"
#include "ica/json_io.hpp"

namespace ica {

struct TraceEvent {
  enum class Kind { kDefect, kSlopeUpdate, kAgentDone, kBidUpdate };

  std::size_t step = 0;
  Kind kind = Kind::kDefect;
  std::size_t agent = 0;
  std::optional<std::size_t> item;
  std::optional<std::size_t> to;  // receiving agent of a defect
  double value = 0.0;             // slope, or bid for kBidUpdate
};

/// One JSON object per event, no trailing newline.
std::string to_json_line(const TraceEvent& ev);

struct SolveOptions {
  double tol = 1e-9;    // certificate / instrumentation tolerance
  double s_min = 1e-12; // slope floor
  bool record_trace = true;
  // Check after every reassignment that no under-allocated agent violates
  // its loop condition.
  bool instrument = true;
  // Throw InvariantViolation on the first such violation; otherwise count it.
  bool abort_on_violation = true;
  double budget_factor = 4.0;
};

struct SolveReport {
  DualMode mode = DualMode::kMultiplicative;
  double epsilon = 0.0;
  Allocation allocation;
  DualState dual;
  std::vector<double> utilities;
  double primal = 0.0;
  double dual_objective = 0.0;  // adjusted dual, an upper bound on OPT
  bool dual_feasible = false;
  // dual / primal (multiplicative) or dual - primal (additive).
  double certificate = 0.0;

  std::vector<double> curvature;  // mu_i or alpha_i the run was given
  std::vector<double> targets;    // loop thresholds after clamping
  std::vector<bool> clamped;      // mu_i raised to 1 + epsilon
  std::vector<bool> skipped;      // curvature 1 / 0: never enters the loop
  std::vector<bool> saturated;    // reached the slope floor still violating
  std::vector<std::size_t> unvalued_items;

  std::vector<std::size_t> slope_updates;
  std::vector<std::size_t> update_bound;  // per-agent ceiling on slope updates
  std::size_t reassignments = 0;
  std::size_t iterations = 0;
  std::size_t iteration_budget = 0;
  std::size_t under_allocation_violations = 0;

  std::optional<double> accepted_guess;
  std::size_t guess_restarts = 0;

  std::vector<TraceEvent> trace;
  std::string termination;
};

/// Multiplicative primal-dual algorithm. `mu` holds per-agent curvature
/// targets; nullopt computes them with mult_curvature at each agent's max
/// utility. Targets are clamped to >= 1 + epsilon; agents with mu = 1 are
/// skipped. Throws ValidationError on bad input and InvariantViolation when
/// an instrumented invariant fails or the iteration budget runs out.
SolveReport solve_multiplicative(const Instance& inst, double epsilon,
                                 std::optional<std::vector<double>> mu = std::nullopt,
                                 const SolveOptions& opts = {});

/// Runs the multiplicative algorithm against a uniform guess for mu, starting
/// at 1 + epsilon and raising it by epsilon whenever an under-allocated agent
/// violates the guess. Throws DomainError once the guess passes `max_guess`.
SolveReport solve_multiplicative_guessing(const Instance& inst, double epsilon,
                                          const SolveOptions& opts = {}, double max_guess = 10.0);

/// Additive variant: loop condition D - v > alpha_i and slopes decrease by
/// epsilon / m. `alpha` nullopt computes add_curvature at each agent's max
/// utility.
SolveReport solve_additive(const Instance& inst, double epsilon,
                           std::optional<std::vector<double>> alpha = std::nullopt,
                           const SolveOptions& opts = {});

std::vector<double> auto_mult_curvature(const Instance& inst);
std::vector<double> auto_add_curvature(const Instance& inst);

/// Slope the solvers start agent i at.
double solver_initial_slope(const Instance& inst, std::size_t i);

/// max_i s0_i U_i / v_i(U_i) with U_i = sum_j u[i][j], over agents that value
/// something.
double rho_max(const Instance& inst);

/// ceil(ln(rho / epsilon) / ln(1 + epsilon)) + 1.
std::size_t mult_update_ceiling(double rho, double epsilon);

Json to_json(const SolveReport& rep);

}  // namespace ica
