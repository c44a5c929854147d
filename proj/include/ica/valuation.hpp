#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace ica {

/// v(u) = slope * u.
struct Linear {
  double slope = 1.0;
};

/// v(u) = min(u, cap).
struct BudgetAdditive {
  double cap = 1.0;
};

/// Concave piecewise-linear function through the origin. `points[k]` is the
/// left end of segment k (points[0] == 0) and `slopes[k]` its slope; the last
/// segment extends to infinity.
struct PiecewiseLinear {
  std::vector<double> points;
  std::vector<double> slopes;
};

/// v(u) = u^exponent, exponent in (0, 1].
struct Power {
  double exponent = 0.5;
};

/// v(u) = eta * ln(f(u + omega)); f is the identity unless `inner` is set.
struct SmoothLog {
  double eta = 1.0;
  double omega = 1.0;
  std::optional<PiecewiseLinear> inner;
};

/// A monotone concave valuation of an agent's total additive utility.
///
/// Immutable after construction; all queries are pure. `slope(u)` is the right
/// derivative and `left_slope(u)` the left derivative, so the superdifferential
/// at u is the interval [slope(u), left_slope(u)]. Both may be +inf at u = 0
/// for Power with exponent < 1.
class Valuation {
 public:
  using Family = std::variant<Linear, BudgetAdditive, PiecewiseLinear, Power, SmoothLog>;

  // Validates parameters; throws ValidationError on a malformed family.
  explicit Valuation(Family family);

  static Valuation linear(double slope);
  static Valuation budget(double cap);
  static Valuation piecewise(std::vector<double> points, std::vector<double> slopes);
  static Valuation power(double exponent);
  static Valuation smooth_log(double eta, double omega,
                              std::optional<PiecewiseLinear> inner = std::nullopt);

  const Family& family() const noexcept { return family_; }
  std::string_view family_name() const noexcept;

  double value(double u) const;
  double slope(double u) const;
  double left_slope(double u) const;

  // lim_{u->inf} v'(u). Slopes below this have no finite anchor.
  double asymptotic_slope() const noexcept;

  // Points (in utility space) where v is not differentiable, ascending.
  std::vector<double> kinks() const;

  // True when v is affine on all of R+ (curvature is trivially 1 / 0).
  bool is_linear() const noexcept;

  // v(u) >= 0 for all u >= 0. Required by the multiplicative guarantees.
  bool is_nonnegative() const noexcept { return value(0.0) >= 0.0; }

  friend bool operator==(const Valuation& a, const Valuation& b);

 private:
  Family family_;
};

/// A supporting line of v: v(x) <= intercept + slope * x for all x >= 0, with
/// equality at x = anchor.
struct SlopePoint {
  double slope = 0.0;
  double anchor = 0.0;
  double intercept = 0.0;
};

/// Inverts the superdifferential: finds the anchor t where `s` is a
/// supergradient. For piecewise-linear families, a slope strictly between two
/// segment slopes anchors at their transition point, and a slope equal to a
/// segment slope anchors at the segment's left end. Throws RangeError when
/// s <= 0, s > slope(0), or s < asymptotic_slope().
SlopePoint slope_point_from_slope(const Valuation& v, double s);

/// y + s * x.
double tangent_line_value(const SlopePoint& sp, double x);

/// Starting slope for the primal-dual solvers. Equals v'(0) when finite;
/// otherwise v'(t0) with t0 = kUnboundedSlopeAnchor * utility_scale.
double initial_slope(const Valuation& v, double utility_scale);

inline constexpr double kUnboundedSlopeAnchor = 1e-12;

}  // namespace ica
