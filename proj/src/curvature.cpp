#include "ica/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ica/errors.hpp"

namespace ica {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEndpointShrink = 1e-9;
constexpr int kRefineIterations = 100;

struct Peak {
  double x = 0.0;
  double fx = -kInf;
};

// Golden-section search for a maximum of f on [a, b]. f need only be
// unimodal on the bracket.
Peak golden_max(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < kRefineIterations && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? Peak{c, fc} : Peak{d, fd};
}

// Ternary search on a concave function over [a, b].
Peak ternary_max(const std::function<double(double)>& f, double a, double b) {
  for (int it = 0; it < 2 * kRefineIterations; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (f(m1) < f(m2)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  const double x = 0.5 * (a + b);
  return Peak{x, f(x)};
}

void check_width(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("curvature width must be positive");
}

struct InnerResult {
  double value = -kInf;
  double zstar = 0.0;
  bool supremum = false;
};

InnerResult inner_mult(const Valuation& v, double z, double w, int grid) {
  InnerResult best;
  best.value = mult_gap(v, z, 0.0, w);
  best.zstar = 0.0;
  best.supremum = true;

  const auto ratio = [&](double x) { return mult_gap(v, z, x, w); };
  const double step = w / (grid + 1);
  int best_k = -1;
  double best_grid = -kInf;
  for (int k = 1; k <= grid; ++k) {
    const double r = ratio(k * step);
    if (r > best_grid) {
      best_grid = r;
      best_k = k;
    }
  }
  Peak refined = golden_max(ratio, (best_k - 1) * step, std::min(w, (best_k + 1) * step));
  if (best_grid > refined.fx) refined = Peak{best_k * step, best_grid};
  if (refined.x > 0.0 && refined.x < w && refined.fx > best.value) {
    best = InnerResult{refined.fx, refined.x, false};
  }
  const double near_end = ratio(w * (1.0 - kEndpointShrink));
  if (near_end > best.value) best = InnerResult{near_end, w, true};
  return best;
}

InnerResult inner_add(const Valuation& v, double z, double w) {
  const auto diff = [&](double x) { return add_gap(v, z, x, w); };
  const Peak p = ternary_max(diff, 0.0, w);
  if (p.x <= 0.0 || p.x >= w) return InnerResult{0.0, p.x <= 0.0 ? 0.0 : w, true};
  return InnerResult{p.fx, p.x, false};
}

double default_z_max(const Valuation& v, double w, const CurvatureOptions& opts) {
  if (opts.z_max_bound > 0.0) return opts.z_max_bound;
  double zmax = 10.0 * w;
  for (double k : v.kinks()) zmax = std::max(zmax, k + w);
  return zmax;
}

CurvatureReport numeric_search(const Valuation& v, double w, CurvatureKind kind,
                               const CurvatureOptions& opts) {
  const double zmax = default_z_max(v, w, opts);
  std::vector<double> zs;
  zs.reserve(static_cast<std::size_t>(opts.z_grid) + 16);
  for (int k = 0; k <= opts.z_grid; ++k) zs.push_back(zmax * k / opts.z_grid);
  for (double kink : v.kinks()) {
    for (double z : {kink, kink - w, kink - 0.5 * w}) {
      if (z >= 0.0 && z <= zmax) zs.push_back(z);
    }
  }
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());

  const auto inner = [&](double z) {
    return kind == CurvatureKind::kMultiplicative ? inner_mult(v, z, w, opts.zstar_grid)
                                                  : inner_add(v, z, w);
  };

  std::size_t best_i = 0;
  InnerResult best{-kInf, 0.0, false};
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const InnerResult r = inner(zs[i]);
    if (r.value > best.value) {
      best = r;
      best_i = i;
    }
  }
  double best_z = zs[best_i];

  // Local refinement of the outer variable around the best grid point.
  const double lo = best_i > 0 ? zs[best_i - 1] : zs[best_i];
  const double hi = best_i + 1 < zs.size() ? zs[best_i + 1] : zs[best_i];
  if (hi > lo && std::isfinite(best.value)) {
    const Peak pz = golden_max([&](double z) { return inner(z).value; }, lo, hi);
    if (pz.fx > best.value + 1e-12 * std::abs(best.value)) {
      best_z = pz.x;
      best = inner(pz.x);
    }
  }

  CurvatureReport rep;
  rep.kind = kind;
  rep.width = w;
  rep.value = best.value;
  rep.witness_z = best_z;
  rep.witness_zstar = best.zstar;
  rep.supremum = best.supremum;
  rep.method = "numeric";
  if (kind == CurvatureKind::kMultiplicative && rep.value < 1.0) rep.value = 1.0;
  if (kind == CurvatureKind::kAdditive && rep.value < 0.0) rep.value = 0.0;
  return rep;
}

CurvatureReport trivial_report(CurvatureKind kind, double w) {
  CurvatureReport rep;
  rep.kind = kind;
  rep.width = w;
  rep.value = kind == CurvatureKind::kMultiplicative ? 1.0 : 0.0;
  rep.witness_z = 0.0;
  rep.witness_zstar = 0.5 * w;
  rep.method = "linear";
  return rep;
}

// Exact curvature of a piecewise-linear v. For fixed z the gap is maximised
// where z + z* hits a kink x (the ratio/difference is monotone on each linear
// piece). For each kink we minimise h(z) = v(z) + (x - z) sigma(z, w) over
// z in [x - w, x]; h is a convex quadratic between consecutive breakpoints.
CurvatureReport piecewise_exact(const Valuation& v, double w, CurvatureKind kind) {
  CurvatureReport rep = trivial_report(kind, w);
  rep.method = "piecewise_exact";

  const auto h = [&](double x, double z) { return v.value(z) + (x - z) * secant_slope(v, z, w); };
  const auto score = [&](double x, double hz) {
    return kind == CurvatureKind::kMultiplicative ? v.value(x) / hz : v.value(x) - hz;
  };

  const std::vector<double> kinks = v.kinks();
  for (double x : kinks) {
    const double lo = std::max(0.0, x - w);
    const double hi = x;
    std::vector<double> breaks = {lo, hi};
    for (double k : kinks) {
      if (k > lo && k < hi) breaks.push_back(k);
      if (k - w > lo && k - w < hi) breaks.push_back(k - w);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<double> candidates = breaks;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double b0 = breaks[b];
      const double b1 = breaks[b + 1];
      const double mid = 0.5 * (b0 + b1);
      const double s1 = v.slope(mid);
      const double s2 = v.slope(mid + w);
      const double c1 = v.value(mid) - s1 * mid;
      const double c2 = v.value(mid + w) - s2 * (mid + w);
      const double q = s2 - s1;
      if (q == 0.0) continue;
      const double p = c2 + s2 * w - c1;
      const double vertex = (s1 * w + x * q - p) / (2.0 * q);
      if (vertex > b0 && vertex < b1) candidates.push_back(vertex);
    }
    for (double z : candidates) {
      const double zstar = x - z;
      if (!(zstar > 0.0 && zstar < w)) continue;
      const double hz = h(x, z);
      if (kind == CurvatureKind::kMultiplicative && !(hz > 0.0)) continue;
      const double s = score(x, hz);
      if (s > rep.value) {
        rep.value = s;
        rep.witness_z = z;
        rep.witness_zstar = zstar;
      }
    }
  }
  return rep;
}

CurvatureReport budget_mult_closed_form(const BudgetAdditive& f, double w) {
  const double c = f.cap;
  CurvatureReport rep;
  rep.kind = CurvatureKind::kMultiplicative;
  rep.width = w;
  rep.method = "budget_closed_form";
  if (w <= 2.0 * c) {
    rep.witness_z = c - 0.5 * w;
    rep.witness_zstar = 0.5 * w;
    rep.value = c / (c - 0.25 * w);
  } else {
    rep.witness_z = 0.0;
    rep.witness_zstar = c;
    rep.value = w / c;
  }
  return rep;
}

}  // namespace

double secant_slope(const Valuation& v, double z, double w) {
  check_width(w);
  if (!(z >= 0.0)) throw DomainError("secant start must be >= 0");
  return (v.value(z + w) - v.value(z)) / w;
}

double mult_gap(const Valuation& v, double z, double zstar, double w) {
  const double sigma = secant_slope(v, z, w);
  const double vz = v.value(z);
  if (zstar <= 0.0) {
    if (vz > 0.0) return 1.0;
    if (sigma <= 0.0) return 1.0;
    return v.slope(z) / sigma;
  }
  const double num = v.value(z + zstar);
  const double den = vz + zstar * sigma;
  if (den <= 0.0) return num > 0.0 ? kInf : 1.0;
  return num / den;
}

double add_gap(const Valuation& v, double z, double zstar, double w) {
  const double sigma = secant_slope(v, z, w);
  return v.value(z + zstar) - (v.value(z) + zstar * sigma);
}

CurvatureReport mult_curvature(const Valuation& v, double w, const CurvatureOptions& opts) {
  check_width(w);
  if (!v.is_nonnegative()) {
    throw DomainError("multiplicative curvature requires a non-negative valuation");
  }
  if (v.is_linear()) return trivial_report(CurvatureKind::kMultiplicative, w);
  if (opts.force_numeric) return numeric_search(v, w, CurvatureKind::kMultiplicative, opts);

  if (const auto* p = std::get_if<Power>(&v.family())) {
    (void)p;
    CurvatureReport rep;
    rep.kind = CurvatureKind::kMultiplicative;
    rep.width = w;
    rep.value = kInf;
    rep.witness_z = 0.0;
    rep.witness_zstar = 0.0;
    rep.supremum = true;
    rep.method = "power_unbounded";
    return rep;
  }
  if (const auto* b = std::get_if<BudgetAdditive>(&v.family())) return budget_mult_closed_form(*b, w);
  if (std::holds_alternative<PiecewiseLinear>(v.family())) {
    return piecewise_exact(v, w, CurvatureKind::kMultiplicative);
  }
  return numeric_search(v, w, CurvatureKind::kMultiplicative, opts);
}

CurvatureReport add_curvature(const Valuation& v, double w, const CurvatureOptions& opts) {
  check_width(w);
  if (v.is_linear()) return trivial_report(CurvatureKind::kAdditive, w);
  if (opts.force_numeric) return numeric_search(v, w, CurvatureKind::kAdditive, opts);

  if (std::holds_alternative<BudgetAdditive>(v.family()) ||
      std::holds_alternative<PiecewiseLinear>(v.family())) {
    return piecewise_exact(v, w, CurvatureKind::kAdditive);
  }
  if (const auto* sl = std::get_if<SmoothLog>(&v.family()); sl && !sl->inner) {
    // eta ln(w x + omega) = eta ln w + eta ln(x + omega / w): rescale to unit width.
    const double gamma = sl->omega / w;
    CurvatureReport rep;
    rep.kind = CurvatureKind::kAdditive;
    rep.width = w;
    rep.value = smooth_log_alpha_closed_form(sl->eta, gamma);
    rep.witness_z = 0.0;
    rep.witness_zstar = w * (1.0 / std::log1p(1.0 / gamma) - gamma);
    rep.method = "smooth_log_closed_form";
    return rep;
  }
  return numeric_search(v, w, CurvatureKind::kAdditive, opts);
}

double smooth_log_alpha_closed_form(double eta, double omega) {
  if (!(omega > 0.0)) throw DomainError("omega must be > 0");
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");
  const double l = omega * std::log1p(1.0 / omega);
  return eta * (std::log(1.0 / l) + l - 1.0);
}

}  // namespace ica
