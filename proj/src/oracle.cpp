#include "ica/oracle.hpp"

#include <cmath>
#include <limits>

#include "ica/dual.hpp"
#include "ica/errors.hpp"

namespace ica {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPassed:
      return "passed";
    case CheckStatus::kFailed:
      return "failed";
    case CheckStatus::kSkipped:
      return "skipped";
  }
  return "unknown";
}

double objective_value(const Instance& inst, const std::vector<double>& u, Objective objective,
                       double omega) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (objective == Objective::kUtilitarian) {
      total += inst.valuation(i).value(u[i]);
    } else {
      const double x = u[i] + omega;
      if (x <= 0.0) return -kInf;
      total += inst.weight(i) * std::log(x);
    }
  }
  return total;
}

GapCheck named(const char* id, const char* what) {
  GapCheck c;
  c.id = id;
  c.description = what;
  return c;
}

GapCheck make_check(const char* id, const char* what, double observed, double expected,
                    double tol) {
  GapCheck c = named(id, what);
  c.observed = observed;
  c.expected = expected;
  c.tolerance = tol;
  c.status = std::abs(observed - expected) <= tol ? CheckStatus::kPassed : CheckStatus::kFailed;
  return c;
}

}  // namespace

OracleResult brute_force_opt(const Instance& inst, Objective objective, double omega) {
  const std::size_t n = inst.agents();
  const std::size_t m = inst.items();
  const double count = std::pow(static_cast<double>(n), static_cast<double>(m));
  if (count > kBruteForceLimit) {
    throw RangeError("brute force refused: n^m = " + std::to_string(count) + " exceeds " +
                     std::to_string(kBruteForceLimit));
  }
  if (objective == Objective::kNashLog && !(omega >= 0.0)) {
    throw DomainError("nash objective needs omega >= 0");
  }

  std::vector<std::size_t> owner(m, 0);
  std::vector<double> u(n, 0.0);
  OracleResult best;
  best.value = -kInf;
  bool have = false;
  while (true) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) u[owner[j]] += inst.utility(owner[j], j);
    const double val = objective_value(inst, u, objective, omega);
    ++best.evaluated;
    if (!have || val > best.value) {
      best.value = val;
      best.allocation.owner.assign(owner.begin(), owner.end());
      have = true;
    }
    // Odometer with the last item varying fastest: lexicographic order.
    bool done = true;
    for (std::size_t pos = m; pos-- > 0;) {
      if (++owner[pos] < n) {
        done = false;
        break;
      }
      owner[pos] = 0;
    }
    if (done) break;
  }
  return best;
}

GapVerification verify_gap_certificate(const GapInstance& gap) {
  const GapInstanceSpec& s = gap.spec;
  const Instance& inst = gap.instance;
  const Valuation& v = s.valuation;
  GapVerification out;

  DualState dual;
  dual.mode = DualMode::kMultiplicative;
  const double t = s.t_rational;
  const SlopePoint sp{s.dual_slope, t, v.value(t) - t * s.dual_slope};
  dual.agents.assign(inst.agents(), sp);
  const DualCheck dc = check_dual(dual, inst, max_bid_prices(dual, inst));

  GapCheck a = named("a", "dual at t = z + u beta/gamma is feasible");
  a.status = dc.feasible ? CheckStatus::kPassed : CheckStatus::kFailed;
  for (const auto& msg : dc.violations) a.detail += msg + "; ";
  out.checks.push_back(a);

  const double gamma = static_cast<double>(s.gamma);
  const double beta = static_cast<double>(s.beta);
  const double expected_f = gamma * v.value(t);
  out.checks.push_back(make_check("b", "dual objective equals gamma v(t)", dc.objective,
                                  expected_f, 1e-9 * std::max(1.0, std::abs(expected_f))));
  out.opt_fractional = dc.objective;

  const double formula_i = beta * v.value(s.z + s.width) + (gamma - beta) * v.value(s.z);
  out.opt_integral = formula_i;
  try {
    const OracleResult bf = brute_force_opt(inst, Objective::kUtilitarian);
    out.checks.push_back(make_check("c", "brute-force OPT_I equals beta v(z+u) + (gamma-beta) v(z)",
                                    bf.value, formula_i,
                                    1e-9 * std::max(1.0, std::abs(formula_i))));
    out.opt_integral = bf.value;
  } catch (const RangeError& e) {
    GapCheck c = named("c", "brute-force OPT_I equals beta v(z+u) + (gamma-beta) v(z)");
    c.expected = formula_i;
    c.detail = e.what();
    out.checks.push_back(c);
  }

  // v is concave, so moving z* by delta changes v(z + z*) by at most
  // delta v'(z+) and the secant line by delta sigma.
  out.ratio = out.opt_fractional / out.opt_integral;
  const double sigma = (v.value(s.z + s.width) - v.value(s.z)) / s.width;
  const double delta = std::abs(s.zstar_rational - s.zstar);
  const double lower = (v.value(s.t_star) - delta * v.slope(s.z)) /
                       (v.value(s.z) + s.zstar * sigma + delta * sigma);
  const double tol = std::max(0.0, s.mu - lower) + 1e-9;
  out.checks.push_back(make_check("d", "OPT_F / OPT_I equals mu up to rational approximation",
                                  out.ratio, s.mu, tol));

  out.passed = true;
  for (const auto& c : out.checks) out.passed = out.passed && c.status != CheckStatus::kFailed;
  return out;
}

double numeric_curvature_oracle(const Valuation& v, double w, CurvatureKind kind, double z_max,
                                int grid) {
  if (!(w > 0.0)) throw DomainError("width must be positive");
  if (grid < 2) throw DomainError("grid must be >= 2");
  const double zmax = z_max > 0.0 ? z_max : 2.0 * w;
  const bool mult = kind == CurvatureKind::kMultiplicative;
  double best = mult ? 1.0 : 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double z = zmax * k / grid;
    const double vz = v.value(z);
    const double sigma = (v.value(z + w) - vz) / w;
    for (int l = 1; l < grid; ++l) {
      const double zs = w * l / grid;
      const double line = vz + zs * sigma;
      const double top = v.value(z + zs);
      if (mult) {
        if (line > 0.0) best = std::max(best, top / line);
      } else {
        best = std::max(best, top - line);
      }
    }
  }
  return best;
}

Json to_json(const OracleResult& r, Objective objective) {
  return Json{{"objective", objective == Objective::kUtilitarian ? "util" : "nash"},
              {"value", json_real(r.value)},
              {"allocation", to_json(r.allocation)},
              {"evaluated", r.evaluated}};
}

Json to_json(const GapVerification& g) {
  Json checks = Json::array();
  for (const auto& c : g.checks) {
    checks.push_back(Json{{"id", c.id},
                          {"description", c.description},
                          {"status", status_name(c.status)},
                          {"observed", json_real(c.observed)},
                          {"expected", json_real(c.expected)},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
  }
  return Json{{"checks", checks},
              {"opt_fractional", g.opt_fractional},
              {"opt_integral", g.opt_integral},
              {"ratio", g.ratio},
              {"passed", g.passed}};
}

}  // namespace ica
