#pragma once

#include <string>

#include "ica/valuation.hpp"

namespace ica {

enum class CurvatureKind { kMultiplicative, kAdditive };

/// Local curvature of a valuation at item width w, with the (z, z*) pair that
/// attains it. When the maximum is only a supremum approached at an open end
/// of (0, w), `supremum` is set and the witness holds the endpoint; the gap
/// expressions below evaluate the corresponding limit there.
struct CurvatureReport {
  CurvatureKind kind = CurvatureKind::kMultiplicative;
  double value = 1.0;
  double witness_z = 0.0;
  double witness_zstar = 0.0;
  double width = 0.0;
  bool supremum = false;
  std::string method;
};

struct CurvatureOptions {
  // Upper end of the z search range. Non-positive means
  // max(10 * w, largest kink + w).
  double z_max_bound = 0.0;
  // Skip closed forms and run the grid + refinement search.
  bool force_numeric = false;
  int z_grid = 512;
  int zstar_grid = 512;
};

/// (v(z + w) - v(z)) / w. Throws DomainError if w <= 0 or z < 0.
double secant_slope(const Valuation& v, double z, double w);

/// v(z + z*) / (v(z) + z* sigma(z, w)). At z* = 0 returns the z* -> 0+ limit,
/// which is 1 when v(z) > 0 and v'(z+) / sigma otherwise.
double mult_gap(const Valuation& v, double z, double zstar, double w);

/// v(z + z*) - (v(z) + z* sigma(z, w)).
double add_gap(const Valuation& v, double z, double zstar, double w);

/// Local multiplicative curvature mu = sup_{z >= 0, z* in (0, w)} mult_gap.
/// Requires a non-negative valuation (DomainError otherwise). Budget-additive
/// and piecewise-linear valuations take exact paths; Power with exponent < 1
/// is unbounded (value = +inf) because v(0) = 0 and v'(0) = inf.
CurvatureReport mult_curvature(const Valuation& v, double w, const CurvatureOptions& opts = {});

/// Local additive curvature alpha = sup add_gap. Piecewise-linear families
/// are exact; SmoothLog over the identity uses the closed form.
CurvatureReport add_curvature(const Valuation& v, double w, const CurvatureOptions& opts = {});

/// eta * [ln(1 / (omega ln(1 + 1/omega))) + omega ln(1 + 1/omega) - 1], the
/// additive curvature of eta * ln(u + omega) at unit width. Throws
/// DomainError for omega <= 0 or eta <= 0.
double smooth_log_alpha_closed_form(double eta, double omega);

}  // namespace ica
