#pragma once

#include <string>
#include <vector>

#include "ica/curvature.hpp"
#include "ica/instance.hpp"
#include "ica/json_io.hpp"

namespace ica {

enum class Objective { kUtilitarian, kNashLog };

struct OracleResult {
  double value = 0.0;
  Allocation allocation;
  std::size_t evaluated = 0;
};

inline constexpr double kBruteForceLimit = 1e7;

/// Exhaustive optimum over all n^m ownership vectors (every item assigned).
/// Utilitarian: sum_i v_i(u_i). Nash log: sum_i w_i ln(u_i + omega); with
/// omega = 0 an agent left empty makes the vector infeasible (-inf) and it is
/// skipped. Ties keep the lexicographically first vector (item 0 most
/// significant). Throws RangeError when n^m exceeds kBruteForceLimit.
OracleResult brute_force_opt(const Instance& inst, Objective objective, double omega = 1.0);

enum class CheckStatus { kPassed, kFailed, kSkipped };

struct GapCheck {
  std::string id;  // "a".."d"
  std::string description;
  CheckStatus status = CheckStatus::kSkipped;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct GapVerification {
  std::vector<GapCheck> checks;
  double opt_fractional = 0.0;  // dual objective
  double opt_integral = 0.0;    // brute force when run, otherwise the formula
  double ratio = 0.0;
  bool passed = false;  // no check failed
};

/// Re-checks a generated gap instance: (a) the dual at t = z + u beta/gamma
/// is feasible, (b) its objective equals gamma v(t), (c) brute-force OPT_I
/// equals beta v(z+u) + (gamma-beta) v(z), (d) OPT_F / OPT_I matches mu up to
/// the rational-approximation error. (c) is skipped when the instance is too
/// large to enumerate.
GapVerification verify_gap_certificate(const GapInstance& gap);

/// Curvature by plain evaluation on a 2048 x 2048 grid: z = k z_max / 2048
/// for k = 0..2048 (z_max <= 0 means 2w) and z* = l w / 2048 for l = 1..2047.
double numeric_curvature_oracle(const Valuation& v, double w, CurvatureKind kind,
                                double z_max = 0.0, int grid = 2048);

Json to_json(const OracleResult& r, Objective objective);
Json to_json(const GapVerification& g);

}  // namespace ica
