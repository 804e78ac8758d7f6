#include "sdg/examples.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sdg/error.hpp"

namespace sdg {

namespace {

using nlohmann::json;

const std::set<std::string> kParamKeys{"gamma", "kappa", "p", "bound", "sigma",
                                       "rate", "terminal", "terminal_value", "n_levels"};

double num(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const json& v = params.at(key);
  if (!v.is_number()) throw Error(Errc::ConfigInvalid, std::string("model.params.") + key + " must be a number");
  return v.get<double>();
}

TerminalFn terminal_from(const json& params, const char* fallback) {
  const std::string kind = params.value("terminal", std::string(fallback));
  if (kind == "x") return [](ConstVec x) { return x[0]; };
  if (kind == "x2") return [](ConstVec x) { return x[0] * x[0]; };
  if (kind == "const") {
    const double c = num(params, "terminal_value", 1.0);
    return [c](ConstVec) { return c; };
  }
  throw Error(Errc::ConfigInvalid, "model.params.terminal must be x, x2 or const, got " + kind);
}

void apply_bound(CoefficientSet& cs, const json& params) {
  if (!params.contains("bound")) return;
  const double b = num(params, "bound", 0.0);
  if (!(b > 0.0)) throw Error(Errc::ConfigInvalid, "model.params.bound must be > 0");
  cs.u_space.bound = b;
  cs.v_space.bound = b;
}

CoefficientSet scalar_base(const std::string& name, const json& params) {
  CoefficientSet cs;
  cs.name = name;
  cs.k = cs.d = 1;
  cs.gamma = num(params, "gamma", 2.0);
  cs.kappa = num(params, "kappa", 1.0);
  cs.p = num(params, "p", 2.0);
  cs.u_space = ControlSpace::euclidean(1);
  cs.v_space = ControlSpace::euclidean(1);
  return cs;
}

CoefficientSet additive_game(const std::string& name, const json& params, double sigma_default,
                             double rate_default) {
  const double sigma = num(params, "sigma", sigma_default);
  const double rate = num(params, "rate", rate_default);
  MergedControlFuncs f;
  f.drift = [](double, ConstVec, ConstVec w, OutVec out) { out[0] = w[0]; };
  f.diffusion = [sigma](double, ConstVec, ConstVec, OutVec out) { out[0] = sigma; };
  f.generator = [rate](double, ConstVec, double y, ConstVec, ConstVec) { return -rate * y; };
  f.terminal = terminal_from(params, "x");
  CoefficientSet cs = build_additive(1, 1, std::move(f), num(params, "gamma", 2.0),
                                     num(params, "kappa", 1.0), num(params, "p", 2.0), name);
  apply_bound(cs, params);
  return cs;
}

CoefficientSet scalar_phi_game(const std::string& name, const json& params, PhiFn phi) {
  ScalarPhiFuncs f;
  f.b0 = [](double, double) { return 0.0; };
  f.sigma0 = [](double, double) { return 0.0; };
  f.f0 = [](double, double, double, double) { return 0.0; };
  const TerminalFn g = terminal_from(params, "x");
  f.g = [g](double x) { return g(ConstVec(&x, 1)); };
  const double kappa = num(params, "kappa", 1.0);
  CoefficientSet cs = build_scalar_phi(std::move(f), phi, kappa, num(params, "gamma", 2.0), {}, name);
  const auto levels = static_cast<std::size_t>(num(params, "n_levels", 12.0));
  return attach_constructed_neutralizers(cs, phi, 1.0, levels);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string label_of(ConstVec v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::vector<std::vector<double>> value_list(const json& decl, std::size_t dim, const std::string& where) {
  if (!decl.contains("values") || !decl.at("values").is_array() || decl.at("values").empty())
    throw Error(Errc::ConfigInvalid, where + ".values must be a nonempty array");
  std::vector<std::vector<double>> out;
  for (const json& v : decl.at("values")) {
    if (v.is_number()) {
      out.emplace_back(dim, v.get<double>());
    } else if (v.is_array() && v.size() == dim) {
      out.push_back(v.get<std::vector<double>>());
    } else {
      throw Error(Errc::ConfigInvalid, where + ".values entries must be numbers or " +
                                           std::to_string(dim) + "-vectors");
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> game_keys() {
  return {"zero",  "frozen",         "mirror",         "additive",    "additive_diffusion",
          "cancellation", "heat", "scalar_phi_sum", "scalar_phi_sin", "compact_demo"};
}

CoefficientSet make_game(const std::string& key, const json& params) {
  if (!params.is_object()) throw Error(Errc::ConfigInvalid, "model.params must be an object");
  for (const auto& [name, _] : params.items())
    if (!kParamKeys.count(name)) throw Error(Errc::UnknownKey, "model.params." + name);

  CoefficientSet cs;
  if (key == "zero" || key == "frozen") {
    cs = scalar_base(key, params);
    cs.drift = [](double, ConstVec, ConstVec, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.diffusion = [](double, ConstVec, ConstVec, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.generator = [](double, ConstVec, double, ConstVec, ConstVec, ConstVec) { return 0.0; };
    cs.terminal = key == "zero" ? TerminalFn([](ConstVec) { return 0.0; }) : terminal_from(params, "x");
    cs.psi = [](double, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.psi_tilde = cs.psi;
    apply_bound(cs, params);
  } else if (key == "mirror") {
    cs = scalar_base(key, params);
    cs.drift = [](double, ConstVec, ConstVec u, ConstVec v, OutVec out) { out[0] = u[0] - v[0]; };
    cs.diffusion = [](double, ConstVec, ConstVec, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.generator = [](double, ConstVec, double, ConstVec, ConstVec, ConstVec) { return 0.0; };
    cs.terminal = terminal_from(params, "x");
    cs.psi = [](double, ConstVec u, OutVec out) { out[0] = u[0]; };
    cs.psi_tilde = [](double, ConstVec v, OutVec out) { out[0] = v[0]; };
    apply_bound(cs, params);
  } else if (key == "additive") {
    cs = additive_game(key, params, 1.0, 0.0);
  } else if (key == "additive_diffusion") {
    cs = additive_game(key, params, 1.0, 0.5);
  } else if (key == "cancellation") {
    cs = additive_game(key, params, 0.0, 0.0);
  } else if (key == "heat") {
    cs = scalar_base(key, params);
    const double sigma = num(params, "sigma", 1.0);
    const double rate = num(params, "rate", 0.0);
    cs.drift = [](double, ConstVec, ConstVec, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.diffusion = [sigma](double, ConstVec, ConstVec, ConstVec, OutVec out) { out[0] = sigma; };
    cs.generator = [rate](double, ConstVec, double y, ConstVec, ConstVec, ConstVec) { return -rate * y; };
    cs.terminal = terminal_from(params, "x2");
    cs.psi = [](double, ConstVec, OutVec out) { out[0] = 0.0; };
    cs.psi_tilde = cs.psi;
    apply_bound(cs, params);
  } else if (key == "scalar_phi_sum") {
    cs = scalar_phi_game(key, params, [](double, double u, double v) { return u + v; });
  } else if (key == "scalar_phi_sin") {
    cs = scalar_phi_game(key, params, [](double, double u, double v) { return v - std::sin(u); });
  } else if (key == "compact_demo") {
    cs = scalar_base(key, params);
    cs.drift = [](double, ConstVec x, ConstVec u, ConstVec v, OutVec out) {
      out[0] = std::sin(u[0]) - 0.5 * v[0] + 0.1 * std::cos(x[0]);
    };
    cs.diffusion = [](double, ConstVec, ConstVec u, ConstVec v, OutVec out) {
      out[0] = 0.5 + 0.25 * u[0] * v[0];
    };
    cs.generator = [](double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v) {
      return -0.1 * y + 0.3 * u[0] * v[0] + 0.2 * z[0] * std::cos(v[0]) + 0.1 * std::sin(x[0] + t);
    };
    cs.terminal = [](ConstVec x) { return std::sin(x[0]); };
    const double b = num(params, "bound", 1.0);
    cs.u_space.bound = b;
    cs.v_space.bound = b;
    cs.kappa = num(params, "kappa", b);
  } else {
    throw Error(Errc::UnknownKey, "model.key '" + key + "'");
  }
  cs.check_structure();
  return cs;
}

FeedbackControl constant_control(const ControlSpace& space, ConstVec value) {
  if (!space.admissible(value))
    throw Error(Errc::SpaceMismatch, "constant control " + label_of(value) + " outside its space");
  std::vector<double> v(value.begin(), value.end());
  return {"u=" + label_of(value), space, [v](double, ConstVec, OutVec out) {
            std::copy(v.begin(), v.end(), out.begin());
          }};
}

FeedbackStrategy constant_strategy(const ControlSpace& space, ConstVec value) {
  if (!space.admissible(value))
    throw Error(Errc::SpaceMismatch, "constant strategy " + label_of(value) + " outside its space");
  std::vector<double> v(value.begin(), value.end());
  return {"const(" + label_of(value) + ")", space, 0.0,
          [v](double, ConstVec, ConstVec, OutVec out) { std::copy(v.begin(), v.end(), out.begin()); }};
}

FeedbackStrategy mirror_strategy(const ControlSpace& space, double sign) {
  return {sign > 0 ? "mirror" : "anti_mirror", space, 1.0,
          [sign, space](double, ConstVec, ConstVec opp, OutVec out) {
            for (std::size_t c = 0; c < out.size(); ++c) out[c] = sign * opp[c];
            if (space.bound) {
              // Keep the reply inside a bounded space.
              const double g = space.gauge(out);
              if (g > *space.bound)
                for (std::size_t c = 0; c < out.size(); ++c)
                  out[c] = space.base_point[c] + (out[c] - space.base_point[c]) * (*space.bound / g);
            }
          }};
}

ControlClass make_controls(const ControlSpace& space, const json& decls) {
  if (!decls.is_array() || decls.empty())
    throw Error(Errc::ConfigInvalid, "classes.controls must be a nonempty array");
  ControlClass out;
  for (std::size_t n = 0; n < decls.size(); ++n) {
    const json& d = decls[n];
    const std::string where = "classes.controls[" + std::to_string(n) + "]";
    const std::string kind = d.value("kind", std::string());
    if (kind == "constant") {
      for (const auto& v : value_list(d, space.dim, where)) out.push_back(constant_control(space, v));
    } else if (kind == "linear") {
      const double gain = d.value("gain", 1.0);
      out.push_back({"linear(" + fmt(gain) + ")", space, [gain, space](double, ConstVec x, OutVec u) {
                       for (std::size_t c = 0; c < u.size(); ++c)
                         u[c] = space.base_point[c] + gain * x[std::min(c, x.size() - 1)];
                       if (space.bound) {
                         const double g = space.gauge(u);
                         if (g > *space.bound)
                           for (std::size_t c = 0; c < u.size(); ++c)
                             u[c] = space.base_point[c] + (u[c] - space.base_point[c]) * (*space.bound / g);
                       }
                     }});
    } else {
      throw Error(Errc::UnknownKey, where + ".kind '" + kind + "'");
    }
  }
  check_class(out);
  return out;
}

StrategyClass make_strategies(const CoefficientSet& cs, bool leader_is_two, const json& decls) {
  if (!decls.is_array() || decls.empty())
    throw Error(Errc::ConfigInvalid, "classes.strategies must be a nonempty array");
  const ControlSpace& own = leader_is_two ? cs.v_space : cs.u_space;
  StrategyClass out;
  for (std::size_t n = 0; n < decls.size(); ++n) {
    const json& d = decls[n];
    const std::string where = "classes.strategies[" + std::to_string(n) + "]";
    const std::string kind = d.value("kind", std::string());
    if (kind == "neutralizer") {
      out.push_back(leader_is_two ? neutralizer_strategy(cs) : neutralizer_strategy_tilde(cs));
    } else if (kind == "mirror" || kind == "anti_mirror") {
      out.push_back(mirror_strategy(own, kind == "mirror" ? 1.0 : -1.0));
    } else if (kind == "constant") {
      for (const auto& v : value_list(d, own.dim, where)) out.push_back(constant_strategy(own, v));
    } else {
      throw Error(Errc::UnknownKey, where + ".kind '" + kind + "'");
    }
  }
  check_class(out);
  return out;
}

}  // namespace sdg
