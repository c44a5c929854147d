#include "ica/instance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ica/curvature.hpp"
#include "ica/errors.hpp"

namespace ica {
namespace {

std::string index_path(std::string_view base, std::size_t i) {
  std::ostringstream os;
  os << base << '[' << i << ']';
  return os.str();
}

// Portable uniform doubles from mt19937_64: the standard distributions are
// implementation-defined, the raw engine output is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1]
  double unit_open_left() { return 1.0 - unit(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(unit() * n); }

 private:
  std::mt19937_64 engine_;
};

Valuation random_piecewise(Rng& rng, double max_u) {
  const std::size_t segments = 2 + rng.below(3);
  std::vector<double> points{0.0};
  std::vector<double> slopes{rng.uniform(1.0, 2.0)};
  for (std::size_t k = 1; k < segments; ++k) {
    points.push_back(points.back() + max_u * rng.uniform(1.0, 2.0));
    slopes.push_back(slopes.back() * rng.uniform(0.2, 0.8));
  }
  if (rng.unit() < 0.5) slopes.back() = 0.0;
  return Valuation::piecewise(std::move(points), std::move(slopes));
}

}  // namespace

Instance::Instance(std::vector<Agent> agents, std::size_t items, Matrix utilities)
    : agents_(std::move(agents)), items_(items), utilities_(std::move(utilities)) {
  if (agents_.empty()) throw ValidationError("agents", "instance needs at least one agent");
  if (utilities_.size() != agents_.size()) {
    throw ValidationError("utilities", "expected " + std::to_string(agents_.size()) +
                                           " rows, got " + std::to_string(utilities_.size()));
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const double w = agents_[i].weight;
    if (!std::isfinite(w) || w <= 0.0) {
      throw ValidationError(index_path("agents", i) + ".weight", "weight must be finite and > 0");
    }
    const auto& row = utilities_[i];
    if (row.size() != items_) {
      throw ValidationError(index_path("utilities", i),
                            "row has " + std::to_string(row.size()) + " entries, expected " +
                                std::to_string(items_));
    }
    for (std::size_t j = 0; j < items_; ++j) {
      if (!std::isfinite(row[j]) || row[j] < 0.0) {
        throw ValidationError(index_path(index_path("utilities", i), j),
                              "utility must be finite and >= 0");
      }
    }
  }

  for (std::size_t j = 0; j < items_; ++j) {
    bool valued = false;
    for (const auto& row : utilities_) valued = valued || row[j] > 0.0;
    if (!valued) warnings_.push_back(index_path("item", j) + " is valued by no agent");
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const double umax = max_utility(i);
    const Valuation::Family& fam = agents_[i].valuation.family();
    if (const auto* pl = std::get_if<PiecewiseLinear>(&fam)) {
      for (std::size_t k = 1; k < pl->points.size(); ++k) {
        if (pl->points[k] - pl->points[k - 1] < umax) {
          warnings_.push_back(index_path("agents", i) +
                              " max utility exceeds a piecewise segment length");
          break;
        }
      }
    } else if (const auto* ba = std::get_if<BudgetAdditive>(&fam); ba && umax > ba->cap) {
      warnings_.push_back(index_path("agents", i) + " max utility exceeds the budget cap");
    }
  }
}

double Instance::max_utility(std::size_t i) const {
  const auto& row = utilities_.at(i);
  return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

double Instance::total_weight() const {
  double total = 0.0;
  for (const Agent& a : agents_) total += a.weight;
  return total;
}

bool operator==(const Instance& a, const Instance& b) {
  if (a.items_ != b.items_ || a.utilities_ != b.utilities_) return false;
  if (a.agents_.size() != b.agents_.size()) return false;
  for (std::size_t i = 0; i < a.agents_.size(); ++i) {
    if (a.agents_[i].weight != b.agents_[i].weight) return false;
    if (!(a.agents_[i].valuation == b.agents_[i].valuation)) return false;
  }
  return true;
}

std::vector<double> agent_utilities(const Instance& inst, const Allocation& alloc) {
  std::vector<double> u(inst.agents(), 0.0);
  for (std::size_t j = 0; j < alloc.owner.size(); ++j) {
    if (alloc.owner[j]) u[*alloc.owner[j]] += inst.utility(*alloc.owner[j], j);
  }
  return u;
}

double utilitarian_welfare(const Instance& inst, const Allocation& alloc) {
  const std::vector<double> u = agent_utilities(inst, alloc);
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) total += inst.valuation(i).value(u[i]);
  return total;
}

void validate_allocation(const Instance& inst, const Allocation& alloc) {
  if (alloc.owner.size() != inst.items()) {
    throw ValidationError("owner", "expected " + std::to_string(inst.items()) + " entries, got " +
                                       std::to_string(alloc.owner.size()));
  }
  for (std::size_t j = 0; j < alloc.owner.size(); ++j) {
    if (alloc.owner[j] && *alloc.owner[j] >= inst.agents()) {
      throw ValidationError(index_path("owner", j), "agent index out of range");
    }
  }
}

Instance gen_random(std::size_t n, std::size_t m, std::string_view family, std::uint64_t seed,
                    double omega) {
  if (n == 0 || m == 0) throw DomainError("gen_random needs n >= 1 and m >= 1");
  if (std::find(std::begin(kRandomFamilies), std::end(kRandomFamilies), family) ==
      std::end(kRandomFamilies)) {
    throw ValidationError("family", "unknown family '" + std::string(family) + "'");
  }
  Rng rng(seed);
  Matrix u(n, std::vector<double>(m));
  for (auto& row : u) {
    for (double& x : row) x = rng.unit_open_left();
  }

  std::vector<Agent> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double max_u = *std::max_element(u[i].begin(), u[i].end());
    if (family == "linear") {
      agents.push_back({Valuation::linear(rng.uniform(0.5, 2.0)), 1.0});
    } else if (family == "budget") {
      agents.push_back({Valuation::budget(max_u * rng.uniform(1.0, 2.0)), 1.0});
    } else if (family == "piecewise") {
      agents.push_back({random_piecewise(rng, max_u), 1.0});
    } else if (family == "power") {
      agents.push_back({Valuation::power(rng.uniform(0.2, 0.9)), 1.0});
    } else {
      const double eta = rng.uniform(0.5, 2.0);
      agents.push_back({Valuation::smooth_log(eta, omega), eta});
    }
  }
  return Instance(std::move(agents), m, std::move(u));
}

std::pair<long, long> best_rational(double x, long max_denominator) {
  if (max_denominator < 1) throw DomainError("max_denominator must be >= 1");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("best_rational needs finite x >= 0");
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rest = x;
  while (true) {
    const double a_real = std::floor(rest);
    if (a_real > static_cast<double>(max_denominator) * 4.0 + 1e15) break;
    const long a = static_cast<long>(a_real);
    const long q2 = q0 + a * q1;
    if (q2 > max_denominator) break;
    const long p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = rest - a_real;
    if (frac <= 0.0) return {p1, q1};
    rest = 1.0 / frac;
  }
  // Semiconvergent candidate versus the last convergent.
  const long k = (max_denominator - q0) / q1;
  const long pb = p0 + k * p1;
  const long qb = q0 + k * q1;
  const double err_b = std::abs(x - static_cast<double>(pb) / qb);
  const double err_c = std::abs(x - static_cast<double>(p1) / q1);
  return err_c <= err_b ? std::pair<long, long>{p1, q1} : std::pair<long, long>{pb, qb};
}

GapInstance gen_gap_instance(const Valuation& v, double u, long max_denominator) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("gap width must be positive");
  const CurvatureReport rep = mult_curvature(v, u);
  if (rep.value <= 1.0) throw DomainError("mu=1: valuation has no integrality gap at this width");
  if (!std::isfinite(rep.value)) throw DomainError("mu is unbounded; no finite gap instance");
  if (!(rep.witness_zstar > 0.0) || rep.witness_zstar >= u) {
    throw DomainError("curvature witness z* lies at an endpoint of (0, u); gap not realisable");
  }

  GapInstanceSpec spec{v};
  spec.width = u;
  spec.z = rep.witness_z;
  spec.zstar = rep.witness_zstar;
  spec.mu = rep.value;
  auto [beta, gamma] = best_rational(spec.zstar / u, max_denominator);
  if (beta <= 0) {
    beta = 1;
    gamma = max_denominator;
  }
  if (beta >= gamma) {
    // z* < u, so this only happens when max_denominator is too small to
    // express a fraction below 1.
    if (max_denominator < 2) throw DomainError("max_denominator too small for z*/u");
    beta = max_denominator - 1;
    gamma = max_denominator;
  }
  spec.beta = beta;
  spec.gamma = gamma;
  spec.zstar_rational = u * static_cast<double>(beta) / static_cast<double>(gamma);

  spec.private_full = static_cast<std::size_t>(std::floor(spec.z / u));
  spec.remainder = spec.z - static_cast<double>(spec.private_full) * u;
  if (spec.remainder <= 1e-15 * u) spec.remainder = 0.0;

  spec.t_star = spec.z + spec.zstar;
  spec.t_rational = spec.z + spec.zstar_rational;
  const double sigma = secant_slope(v, spec.z, u);
  spec.dual_slope =
      std::clamp(spec.mu * sigma, v.slope(spec.t_rational), v.left_slope(spec.t_rational));
  spec.opt_fractional = static_cast<double>(gamma) * v.value(spec.t_rational);
  spec.opt_integral = static_cast<double>(beta) * v.value(spec.z + u) +
                      static_cast<double>(gamma - beta) * v.value(spec.z);

  const std::size_t n = static_cast<std::size_t>(gamma);
  const std::size_t per_agent = spec.private_full + (spec.remainder > 0.0 ? 1 : 0);
  const std::size_t m = static_cast<std::size_t>(beta) + n * per_agent;
  Matrix util(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(beta); ++j) util[i][j] = u;
    const std::size_t base = static_cast<std::size_t>(beta) + i * per_agent;
    for (std::size_t k = 0; k < spec.private_full; ++k) util[i][base + k] = u;
    if (spec.remainder > 0.0) util[i][base + spec.private_full] = spec.remainder;
  }
  std::vector<Agent> agents(n, Agent{v, 1.0});
  return GapInstance{Instance(std::move(agents), m, std::move(util)), std::move(spec)};
}

}  // namespace ica
