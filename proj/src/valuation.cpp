#include "ica/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ica/errors.hpp"

namespace ica {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ValidationError(path, what);
}

void validate_piecewise(const PiecewiseLinear& p, const std::string& path) {
  require(!p.points.empty(), path + ".points", "must be non-empty");
  require(p.points.size() == p.slopes.size(), path,
          "points and slopes must have equal length");
  require(p.points.front() == 0.0, path + ".points[0]", "first transition point must be 0");
  for (std::size_t k = 0; k < p.points.size(); ++k) {
    require(std::isfinite(p.points[k]), path + ".points[" + std::to_string(k) + "]",
            "must be finite");
    require(std::isfinite(p.slopes[k]), path + ".slopes[" + std::to_string(k) + "]",
            "must be finite");
    if (k > 0) {
      require(p.points[k] > p.points[k - 1], path + ".points[" + std::to_string(k) + "]",
              "transition points must be strictly increasing");
      require(p.slopes[k] < p.slopes[k - 1], path + ".slopes[" + std::to_string(k) + "]",
              "segment slopes must be strictly decreasing");
    }
  }
  require(p.slopes.back() >= 0.0, path + ".slopes", "last slope must be non-negative");
}

// Segment index containing x from the right: last k with points[k] <= x.
std::size_t right_segment(const PiecewiseLinear& p, double x) {
  auto it = std::upper_bound(p.points.begin(), p.points.end(), x);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - p.points.begin() - 1));
}

// Segment index containing x from the left: last k with points[k] < x.
std::size_t left_segment(const PiecewiseLinear& p, double x) {
  auto it = std::lower_bound(p.points.begin(), p.points.end(), x);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - p.points.begin() - 1));
}

double pl_value(const PiecewiseLinear& p, double x) {
  const std::size_t k = right_segment(p, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += p.slopes[i] * (p.points[i + 1] - p.points[i]);
  return acc + p.slopes[k] * (x - p.points[k]);
}

double pl_right_slope(const PiecewiseLinear& p, double x) { return p.slopes[right_segment(p, x)]; }

double pl_left_slope(const PiecewiseLinear& p, double x) { return p.slopes[left_segment(p, x)]; }

void check_utility(double u) {
  if (!(u >= 0.0)) throw DomainError("valuation evaluated at negative or NaN utility");
}

// Anchor for eta * ln(f(u + omega)) with piecewise-linear f; returns u.
double nested_log_anchor(const SmoothLog& sl, double s) {
  const PiecewiseLinear& f = *sl.inner;
  const std::size_t n = f.points.size();
  std::size_t k = right_segment(f, sl.omega);
  double lo = sl.omega;
  while (true) {
    const double hi = k + 1 < n ? f.points[k + 1] : kInf;
    const double a = f.slopes[k];
    const double g_lo = sl.eta * a / pl_value(f, lo);
    const double g_hi = std::isfinite(hi) ? sl.eta * a / pl_value(f, hi) : 0.0;
    if (s >= g_hi && s <= g_lo) {
      if (s == g_lo) return lo - sl.omega;
      // Solve f(x) = eta * a / s on this segment.
      const double x = f.points[k] + (sl.eta * a / s - pl_value(f, f.points[k])) / a;
      return std::clamp(x, lo, hi) - sl.omega;
    }
    if (!std::isfinite(hi)) break;
    const double right = sl.eta * f.slopes[k + 1] / pl_value(f, hi);
    if (s >= right) return hi - sl.omega;
    lo = hi;
    ++k;
  }
  throw RangeError("slope has no finite anchor on smooth_log valuation");
}

}  // namespace

Valuation::Valuation(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const Linear& f) {
                   require(std::isfinite(f.slope) && f.slope >= 0.0, "slope",
                           "linear slope must be finite and >= 0");
                 },
                 [](const BudgetAdditive& f) {
                   require(std::isfinite(f.cap) && f.cap > 0.0, "cap",
                           "budget cap must be finite and > 0");
                 },
                 [](const PiecewiseLinear& f) { validate_piecewise(f, ""); },
                 [](const Power& f) {
                   require(f.exponent > 0.0 && f.exponent <= 1.0, "exponent",
                           "power exponent must lie in (0, 1]");
                 },
                 [](const SmoothLog& f) {
                   require(std::isfinite(f.eta) && f.eta > 0.0, "eta", "eta must be > 0");
                   require(f.omega > 0.0 && f.omega <= 1.0, "omega", "omega must lie in (0, 1]");
                   if (f.inner) {
                     validate_piecewise(*f.inner, "inner");
                     require(f.inner->slopes.front() > 0.0, "inner.slopes[0]",
                             "inner function must be strictly increasing at 0");
                   }
                 },
             },
             family_);
}

Valuation Valuation::linear(double slope) { return Valuation(Linear{slope}); }
Valuation Valuation::budget(double cap) { return Valuation(BudgetAdditive{cap}); }
Valuation Valuation::piecewise(std::vector<double> points, std::vector<double> slopes) {
  return Valuation(PiecewiseLinear{std::move(points), std::move(slopes)});
}
Valuation Valuation::power(double exponent) { return Valuation(Power{exponent}); }
Valuation Valuation::smooth_log(double eta, double omega, std::optional<PiecewiseLinear> inner) {
  return Valuation(SmoothLog{eta, omega, std::move(inner)});
}

std::string_view Valuation::family_name() const noexcept {
  return std::visit(Overloaded{
                        [](const Linear&) { return std::string_view("linear"); },
                        [](const BudgetAdditive&) { return std::string_view("budget"); },
                        [](const PiecewiseLinear&) { return std::string_view("piecewise"); },
                        [](const Power&) { return std::string_view("power"); },
                        [](const SmoothLog&) { return std::string_view("smooth_log"); },
                    },
                    family_);
}

double Valuation::value(double u) const {
  check_utility(u);
  return std::visit(Overloaded{
                        [u](const Linear& f) { return f.slope * u; },
                        [u](const BudgetAdditive& f) { return std::min(u, f.cap); },
                        [u](const PiecewiseLinear& f) { return pl_value(f, u); },
                        [u](const Power& f) { return std::pow(u, f.exponent); },
                        [u](const SmoothLog& f) {
                          if (f.inner) return f.eta * std::log(pl_value(*f.inner, u + f.omega));
                          return f.eta * (std::log(f.omega) + std::log1p(u / f.omega));
                        },
                    },
                    family_);
}

double Valuation::slope(double u) const {
  check_utility(u);
  return std::visit(Overloaded{
                        [](const Linear& f) { return f.slope; },
                        [u](const BudgetAdditive& f) { return u < f.cap ? 1.0 : 0.0; },
                        [u](const PiecewiseLinear& f) { return pl_right_slope(f, u); },
                        [u](const Power& f) {
                          if (f.exponent == 1.0) return 1.0;
                          if (u == 0.0) return kInf;
                          return f.exponent * std::pow(u, f.exponent - 1.0);
                        },
                        [u](const SmoothLog& f) {
                          const double x = u + f.omega;
                          if (!f.inner) return f.eta / x;
                          return f.eta * pl_right_slope(*f.inner, x) / pl_value(*f.inner, x);
                        },
                    },
                    family_);
}

double Valuation::left_slope(double u) const {
  check_utility(u);
  if (u == 0.0) return slope(0.0);
  return std::visit(Overloaded{
                        [](const Linear& f) { return f.slope; },
                        [u](const BudgetAdditive& f) { return u <= f.cap ? 1.0 : 0.0; },
                        [u](const PiecewiseLinear& f) { return pl_left_slope(f, u); },
                        [this, u](const Power&) { return slope(u); },
                        [this, u](const SmoothLog& f) {
                          if (!f.inner) return slope(u);
                          const double x = u + f.omega;
                          return f.eta * pl_left_slope(*f.inner, x) / pl_value(*f.inner, x);
                        },
                    },
                    family_);
}

double Valuation::asymptotic_slope() const noexcept {
  return std::visit(Overloaded{
                        [](const Linear& f) { return f.slope; },
                        [](const BudgetAdditive&) { return 0.0; },
                        [](const PiecewiseLinear& f) { return f.slopes.back(); },
                        [](const Power& f) { return f.exponent == 1.0 ? 1.0 : 0.0; },
                        [](const SmoothLog&) { return 0.0; },
                    },
                    family_);
}

std::vector<double> Valuation::kinks() const {
  return std::visit(Overloaded{
                        [](const Linear&) { return std::vector<double>{}; },
                        [](const BudgetAdditive& f) { return std::vector<double>{f.cap}; },
                        [](const PiecewiseLinear& f) {
                          return std::vector<double>(f.points.begin() + 1, f.points.end());
                        },
                        [](const Power&) { return std::vector<double>{}; },
                        [](const SmoothLog& f) {
                          std::vector<double> out;
                          if (f.inner) {
                            for (double x : f.inner->points)
                              if (x > f.omega) out.push_back(x - f.omega);
                          }
                          return out;
                        },
                    },
                    family_);
}

bool Valuation::is_linear() const noexcept {
  return std::visit(Overloaded{
                        [](const Linear&) { return true; },
                        [](const BudgetAdditive&) { return false; },
                        [](const PiecewiseLinear& f) { return f.slopes.size() == 1; },
                        [](const Power& f) { return f.exponent == 1.0; },
                        [](const SmoothLog&) { return false; },
                    },
                    family_);
}

bool operator==(const Valuation& a, const Valuation& b) {
  return std::visit(Overloaded{
                        [](const Linear& x, const Linear& y) { return x.slope == y.slope; },
                        [](const BudgetAdditive& x, const BudgetAdditive& y) {
                          return x.cap == y.cap;
                        },
                        [](const PiecewiseLinear& x, const PiecewiseLinear& y) {
                          return x.points == y.points && x.slopes == y.slopes;
                        },
                        [](const Power& x, const Power& y) { return x.exponent == y.exponent; },
                        [](const SmoothLog& x, const SmoothLog& y) {
                          if (x.eta != y.eta || x.omega != y.omega) return false;
                          if (x.inner.has_value() != y.inner.has_value()) return false;
                          return !x.inner || (x.inner->points == y.inner->points &&
                                              x.inner->slopes == y.inner->slopes);
                        },
                        [](const auto&, const auto&) { return false; },
                    },
                    a.family_, b.family_);
}

SlopePoint slope_point_from_slope(const Valuation& v, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw RangeError("slope must be positive and finite");
  if (s > v.slope(0.0)) throw RangeError("slope exceeds the valuation's slope at 0");
  if (s < v.asymptotic_slope()) throw RangeError("slope is below the asymptotic slope");

  const double anchor = std::visit(
      Overloaded{
          [](const Linear&) { return 0.0; },
          [s](const BudgetAdditive& f) { return s == 1.0 ? 0.0 : f.cap; },
          [s](const PiecewiseLinear& f) {
            for (std::size_t k = 0; k < f.slopes.size(); ++k) {
              if (s == f.slopes[k]) return f.points[k];
              if (k + 1 < f.slopes.size() && s > f.slopes[k + 1]) return f.points[k + 1];
            }
            return f.points.back();
          },
          [s](const Power& f) {
            if (f.exponent == 1.0) return 0.0;
            return std::pow(s / f.exponent, 1.0 / (f.exponent - 1.0));
          },
          [s](const SmoothLog& f) {
            if (!f.inner) return std::max(0.0, f.eta / s - f.omega);
            return std::max(0.0, nested_log_anchor(f, s));
          },
      },
      v.family());
  return SlopePoint{s, anchor, v.value(anchor) - anchor * s};
}

double tangent_line_value(const SlopePoint& sp, double x) { return sp.intercept + sp.slope * x; }

double initial_slope(const Valuation& v, double utility_scale) {
  const double s0 = v.slope(0.0);
  if (std::isfinite(s0)) return s0;
  const double scale = utility_scale > 0.0 && std::isfinite(utility_scale) ? utility_scale : 1.0;
  return v.slope(kUnboundedSlopeAnchor * scale);
}

}  // namespace ica
