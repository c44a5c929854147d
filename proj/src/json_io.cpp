#include "ica/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ica/errors.hpp"

namespace ica {
namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string at_index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw ValidationError(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(join(path, key), "missing field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

std::vector<double> number_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], at_index(path, k)));
  return out;
}

PiecewiseLinear piecewise_fields(const Json& j, const std::string& path) {
  return PiecewiseLinear{number_array(field(j, path, "points"), join(path, "points")),
                         number_array(field(j, path, "slopes"), join(path, "slopes"))};
}

Json piecewise_json(const PiecewiseLinear& p) {
  return Json{{"points", p.points}, {"slopes", p.slopes}};
}

// Re-root the path of a validation error raised inside Valuation's ctor.
template <class F>
Valuation build(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const ValidationError& e) {
    const std::string inner = e.path();
    std::string msg = e.what();
    if (!inner.empty() && msg.rfind(inner + ": ", 0) == 0) msg = msg.substr(inner.size() + 2);
    throw ValidationError(inner.empty() ? path : join(path, inner), msg);
  }
}

}  // namespace

Json json_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Valuation valuation_from_json(const Json& j, const std::string& path) {
  const Json& fam = field(j, path, "family");
  if (!fam.is_string()) throw ValidationError(join(path, "family"), "expected a string");
  const std::string name = fam.get<std::string>();
  if (name == "linear") {
    const double a = number(field(j, path, "slope"), join(path, "slope"));
    return build(path, [&] { return Valuation::linear(a); });
  }
  if (name == "budget") {
    const double c = number(field(j, path, "cap"), join(path, "cap"));
    return build(path, [&] { return Valuation::budget(c); });
  }
  if (name == "piecewise") {
    PiecewiseLinear p = piecewise_fields(j, path);
    return build(path, [&] { return Valuation(std::move(p)); });
  }
  if (name == "power") {
    const double a = number(field(j, path, "exponent"), join(path, "exponent"));
    return build(path, [&] { return Valuation::power(a); });
  }
  if (name == "smooth_log") {
    const double eta = number(field(j, path, "eta"), join(path, "eta"));
    const double omega = number(field(j, path, "omega"), join(path, "omega"));
    std::optional<PiecewiseLinear> inner;
    if (j.contains("inner") && !j["inner"].is_null()) {
      inner = piecewise_fields(j["inner"], join(path, "inner"));
    }
    return build(path, [&] { return Valuation::smooth_log(eta, omega, std::move(inner)); });
  }
  throw ValidationError(join(path, "family"), "unknown family '" + name + "'");
}

Json to_json(const Valuation& v) {
  Json j;
  j["family"] = std::string(v.family_name());
  std::visit(
      [&j](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Linear>) {
          j["slope"] = f.slope;
        } else if constexpr (std::is_same_v<T, BudgetAdditive>) {
          j["cap"] = f.cap;
        } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
          j.update(piecewise_json(f));
        } else if constexpr (std::is_same_v<T, Power>) {
          j["exponent"] = f.exponent;
        } else {
          j["eta"] = f.eta;
          j["omega"] = f.omega;
          if (f.inner) j["inner"] = piecewise_json(*f.inner);
        }
      },
      v.family());
  return j;
}

Instance instance_from_json(const Json& j) {
  const Json& agents_j = field(j, "", "agents");
  if (!agents_j.is_array()) throw ValidationError("agents", "expected an array");
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < agents_j.size(); ++i) {
    const std::string p = at_index("agents", i);
    Valuation v = valuation_from_json(field(agents_j[i], p, "valuation"), join(p, "valuation"));
    double w = 1.0;
    if (agents_j[i].contains("weight")) w = number(agents_j[i]["weight"], join(p, "weight"));
    agents.push_back({std::move(v), w});
  }
  const Json& m_j = field(j, "", "m");
  if (!m_j.is_number_integer() || m_j.get<long long>() < 0) {
    throw ValidationError("m", "expected a non-negative integer");
  }
  const Json& u_j = field(j, "", "utilities");
  if (!u_j.is_array()) throw ValidationError("utilities", "expected an array");
  Matrix util;
  for (std::size_t i = 0; i < u_j.size(); ++i) {
    util.push_back(number_array(u_j[i], at_index("utilities", i)));
  }
  return Instance(std::move(agents), m_j.get<std::size_t>(), std::move(util));
}

Json to_json(const Instance& inst) {
  Json agents = Json::array();
  for (const Agent& a : inst.agent_list()) {
    agents.push_back(Json{{"valuation", to_json(a.valuation)}, {"weight", a.weight}});
  }
  return Json{{"agents", agents}, {"m", inst.items()}, {"utilities", inst.utilities()}};
}

Allocation allocation_from_json(const Json& j) {
  const Json& o = field(j, "", "owner");
  if (!o.is_array()) throw ValidationError("owner", "expected an array");
  Allocation a;
  for (std::size_t k = 0; k < o.size(); ++k) {
    if (o[k].is_null()) {
      a.owner.emplace_back();
    } else if (o[k].is_number_integer() && o[k].get<long long>() >= 0) {
      a.owner.emplace_back(o[k].get<std::size_t>());
    } else {
      throw ValidationError(at_index("owner", k), "expected an agent index or null");
    }
  }
  return a;
}

Json to_json(const Allocation& alloc) {
  Json o = Json::array();
  for (const auto& x : alloc.owner) o.push_back(x ? Json(*x) : Json(nullptr));
  return Json{{"owner", o}};
}

Json to_json(const CurvatureReport& rep) {
  return Json{{"kind", rep.kind == CurvatureKind::kMultiplicative ? "mult" : "add"},
              {"value", json_real(rep.value)},
              {"witness_z", json_real(rep.witness_z)},
              {"witness_zstar", json_real(rep.witness_zstar)},
              {"width", rep.width},
              {"supremum", rep.supremum},
              {"method", rep.method}};
}

Json to_json(const GapInstanceSpec& s) {
  return Json{{"valuation", to_json(s.valuation)},
              {"width", s.width},
              {"beta", s.beta},
              {"gamma", s.gamma},
              {"z", s.z},
              {"zstar", s.zstar},
              {"zstar_rational", s.zstar_rational},
              {"mu", json_real(s.mu)},
              {"private_full", s.private_full},
              {"remainder", s.remainder},
              {"t_star", s.t_star},
              {"t_rational", s.t_rational},
              {"dual_slope", s.dual_slope},
              {"opt_fractional", s.opt_fractional},
              {"opt_integral", s.opt_integral}};
}

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(file.string(), std::string("invalid JSON: ") + e.what());
  }
}

void write_json_file(const std::filesystem::path& file, const Json& j) {
  std::ofstream out(file);
  if (!out) throw ValidationError(file.string(), "cannot open file for writing");
  out << j.dump(2) << '\n';
}

Instance load_instance(const std::filesystem::path& file) {
  return instance_from_json(read_json_file(file));
}

void save_instance(const Instance& inst, const std::filesystem::path& file) {
  write_json_file(file, to_json(inst));
}

}  // namespace ica
