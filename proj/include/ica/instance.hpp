#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ica/valuation.hpp"

namespace ica {

struct Agent {
  Valuation valuation;
  double weight = 1.0;
};

using Matrix = std::vector<std::vector<double>>;

/// n agents by m items with an additive utility matrix. Validated on
/// construction; soft problems (items nobody values, the piecewise segment
/// length precondition) are collected in `warnings()` instead of throwing.
class Instance {
 public:
  Instance(std::vector<Agent> agents, std::size_t items, Matrix utilities);

  std::size_t agents() const noexcept { return agents_.size(); }
  std::size_t items() const noexcept { return items_; }
  const Agent& agent(std::size_t i) const { return agents_.at(i); }
  const std::vector<Agent>& agent_list() const noexcept { return agents_; }
  const Valuation& valuation(std::size_t i) const { return agents_.at(i).valuation; }
  double weight(std::size_t i) const { return agents_.at(i).weight; }
  double utility(std::size_t i, std::size_t j) const { return utilities_[i][j]; }
  const Matrix& utilities() const noexcept { return utilities_; }

  // max_j u[i][j]; 0 for an agent that values nothing.
  double max_utility(std::size_t i) const;
  double total_weight() const;

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  friend bool operator==(const Instance& a, const Instance& b);

 private:
  std::vector<Agent> agents_;
  std::size_t items_ = 0;
  Matrix utilities_;
  std::vector<std::string> warnings_;
};

/// Item -> owner map. std::nullopt marks an unassigned item.
struct Allocation {
  std::vector<std::optional<std::size_t>> owner;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// u_i = sum of u[i][j] over the items agent i owns.
std::vector<double> agent_utilities(const Instance& inst, const Allocation& alloc);

/// sum_i v_i(u_i).
double utilitarian_welfare(const Instance& inst, const Allocation& alloc);

/// Throws ValidationError if the allocation does not fit the instance.
void validate_allocation(const Instance& inst, const Allocation& alloc);

/// Valuation families accepted by gen_random.
inline constexpr std::string_view kRandomFamilies[] = {"linear", "budget", "piecewise", "power",
                                                       "smooth_log"};

/// Random instance with utilities drawn uniformly from (0, 1]. Family
/// parameters are drawn so each agent satisfies its curvature precondition
/// (budget cap and piecewise segment lengths at least the agent's max
/// utility). For "smooth_log" the weight doubles as eta and `omega` is used
/// for every agent. Output is a pure function of the arguments.
Instance gen_random(std::size_t n, std::size_t m, std::string_view family, std::uint64_t seed,
                    double omega = 1.0);

/// Best rational approximation p/q of x >= 0 with 1 <= q <= max_denominator.
std::pair<long, long> best_rational(double x, long max_denominator);

struct GapInstanceSpec {
  Valuation valuation;
  double width = 0.0;            // max item utility u
  long beta = 0;                 // public items
  long gamma = 0;                // agents
  double z = 0.0;                // private utility per agent
  double zstar = 0.0;            // curvature witness z*
  double zstar_rational = 0.0;   // u * beta / gamma
  double mu = 1.0;               // mult_curvature(v, u)
  std::size_t private_full = 0;  // floor(z / u) private items of utility u per agent
  double remainder = 0.0;        // extra private item, omitted when 0
  double t_star = 0.0;           // z + z*
  double t_rational = 0.0;       // z + u * beta / gamma
  double dual_slope = 0.0;       // supergradient at t_rational used for the dual
  double opt_fractional = 0.0;   // gamma * v(t_rational)
  double opt_integral = 0.0;     // beta v(z+u) + (gamma-beta) v(z)
};

struct GapInstance {
  Instance instance;
  GapInstanceSpec spec;
};

/// Integrality-gap instance for v at item width u: gamma copies of v, beta
/// public items of utility u valued by everyone, and per agent private items
/// summing to z. beta/gamma approximates z*/u. Throws DomainError when the
/// curvature is 1 or its witness cannot be realised (z* at an endpoint).
GapInstance gen_gap_instance(const Valuation& v, double u, long max_denominator = 64);

}  // namespace ica
