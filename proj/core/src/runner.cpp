#include "sdg/runner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "sdg/bsde_engine.hpp"
#include "sdg/dpp_harness.hpp"
#include "sdg/error.hpp"
#include "sdg/examples.hpp"
#include "sdg/game_values.hpp"
#include "sdg/hamiltonians.hpp"
#include "sdg/isaacs_pde.hpp"
#include "sdg/parallel.hpp"

namespace sdg {

using json = nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(Errc::ConfigInvalid, path + ": " + why);
}

const json* field(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double num(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const json* f = field(obj, key);
  if (!f) return fallback;
  if (!f->is_number()) invalid(path, "expected a number");
  const double v = f->get<double>();
  if (!std::isfinite(v)) invalid(path, "must be finite");
  return v;
}

std::size_t count(const json& obj, const std::string& key, const std::string& path,
                  std::size_t fallback, std::size_t min_value) {
  const json* f = field(obj, key);
  if (!f) return fallback;
  if (!f->is_number_integer() && !f->is_number_unsigned()) invalid(path, "expected an integer");
  const auto v = f->get<std::int64_t>();
  if (v < static_cast<std::int64_t>(min_value)) invalid(path, "must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

std::string str(const json& obj, const std::string& key, const std::string& path,
                const std::string& fallback, const std::set<std::string>& allowed = {}) {
  const json* f = field(obj, key);
  if (!f) return fallback;
  if (!f->is_string()) invalid(path, "expected a string");
  auto v = f->get<std::string>();
  if (!allowed.empty() && !allowed.count(v)) invalid(path, "unsupported value '" + v + "'");
  return v;
}

std::vector<double> vec(const json& obj, const std::string& key, const std::string& path,
                        std::vector<double> fallback) {
  const json* f = field(obj, key);
  if (!f) return fallback;
  if (f->is_number()) return {f->get<double>()};
  if (!f->is_array() || f->empty()) invalid(path, "expected a number or a nonempty array");
  std::vector<double> out;
  for (const auto& e : *f) {
    if (!e.is_number()) invalid(path, "array entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

json object_or_empty(const json& root, const std::string& key, bool required) {
  const json* f = field(root, key);
  if (!f) {
    if (required) invalid(key, "missing block");
    return json::object();
  }
  if (!f->is_object()) invalid(key, "expected an object");
  return *f;
}

void only_keys(const json& obj, const std::string& path, const std::set<std::string>& keys) {
  for (const auto& [k, _] : obj.items())
    if (!keys.count(k)) invalid(path.empty() ? k : path + "." + k, "unknown field");
}

const std::set<std::string> kTasks{"validate", "bsde", "value", "dpp", "hamiltonian", "pde", "crossval"};
const std::set<std::string> kEnvelopes{"H1_lower", "H1_upper", "H2_lower", "H2_upper"};

Priority priority(const json& task) {
  return str(task, "which", "task.which", "w1", {"w1", "w2"}) == "w1" ? Priority::W1 : Priority::W2;
}

void check_task(const ExperimentConfig& c) {
  const json& t = c.task;
  const double span = c.T - c.t0;
  if (c.task_kind == "dpp") {
    priority(t);
    if (!field(t, "delta")) invalid("task.delta", "required");
    const double delta = num(t, "delta", "task.delta", 0.0);
    if (!(delta > 0.0 && delta < span)) invalid("task.delta", "must lie in (0, T - t0)");
    if (!field(t, "epsilon")) invalid("task.epsilon", "required");
    if (!(num(t, "epsilon", "task.epsilon", 0.0) > 0.0)) invalid("task.epsilon", "must be > 0");
    vec(t, "x", "task.x", {0.0});
    if (const json* vg = field(t, "value_grid")) {
      if (!vg->is_object()) invalid("task.value_grid", "expected an object");
      if (field(*vg, "half_width") && !(num(*vg, "half_width", "task.value_grid.half_width", 1.0) > 0.0))
        invalid("task.value_grid.half_width", "must be > 0");
      count(*vg, "x_points", "task.value_grid.x_points", 21, 2);
      count(*vg, "t_stride", "task.value_grid.t_stride", 8, 1);
      count(*vg, "m_paths", "task.value_grid.m_paths", c.m_paths, 2);
      num(*vg, "margin", "task.value_grid.margin", 3.0);
    }
  } else if (c.task_kind == "value") {
    priority(t);
    const json* xs = field(t, "xs");
    if (!xs || !xs->is_array() || xs->empty()) invalid("task.xs", "expected a nonempty array");
  } else if (c.task_kind == "hamiltonian") {
    str(t, "envelope", "task.envelope", "H1_upper", kEnvelopes);
    count(t, "n_max", "task.n_max", 8, 1);
    count(t, "samples", "task.samples", 128, 1);
    if (!(num(t, "xi_radius", "task.xi_radius", 1.0) > 0.0)) invalid("task.xi_radius", "must be > 0");
    if (!(num(t, "control_radius", "task.control_radius", 1.0) > 0.0))
      invalid("task.control_radius", "must be > 0");
  } else if (c.task_kind == "pde" || c.task_kind == "crossval") {
    const std::string base = c.task_kind == "pde" ? "task" : "task.pde";
    const json p = c.task_kind == "pde" ? t : object_or_empty(t, "pde", false);
    count(p, "n_x", base + ".n_x", 201, 3);
    count(p, "n_t", base + ".n_t", 0, 0);
    if (num(p, "x_min", base + ".x_min", -2.0) >= num(p, "x_max", base + ".x_max", 2.0))
      invalid(base + ".x_max", "must exceed x_min");
    str(p, "hamiltonian", base + ".hamiltonian", "supinf", {"supinf", "infsup"});
  }
}

// ---------------------------------------------------------------------------

struct Context {
  const ExperimentConfig& cfg;
  CoefficientSet cs;
  TimeGrid grid;

  PathBundle bundle(std::uint64_t seed_offset = 0, std::size_t m = 0) const {
    return generate(grid, cs.d, m ? m : cfg.m_paths, cfg.seed + seed_offset);
  }
  ControlClass controls(Priority which) const {
    return make_controls(which == Priority::W1 ? cs.u_space : cs.v_space,
                         classes_field("controls"));
  }
  StrategyClass strategies(Priority which) const {
    return make_strategies(cs, which == Priority::W1, classes_field("strategies"));
  }
  json classes_field(const std::string& key) const {
    const json* f = field(cfg.classes, key);
    if (!f) invalid("classes." + key, "required by task " + cfg.task_kind);
    return *f;
  }
};

std::vector<double> state_of(const json& v, std::size_t k, const std::string& path) {
  std::vector<double> x;
  if (v.is_number()) x.assign(k, v.get<double>());
  else if (v.is_array())
    for (const auto& e : v) {
      if (!e.is_number()) invalid(path, "entries must be numbers");
      x.push_back(e.get<double>());
    }
  else invalid(path, "expected a number or an array");
  if (x.size() != k) invalid(path, "state dimension must be " + std::to_string(k));
  return x;
}

std::vector<double> task_x(const Context& c) {
  const json* f = field(c.cfg.task, "x");
  return f ? state_of(*f, c.cs.k, "task.x") : std::vector<double>(c.cs.k, 0.0);
}

void add_x_columns(std::vector<std::string>& header, std::size_t k) {
  if (k == 1) header.push_back("x");
  else
    for (std::size_t c = 0; c < k; ++c) header.push_back("x" + std::to_string(c));
}

std::string fmt(double v) { return format_double(v); }

RunResult task_validate(const Context& c) {
  const json& t = c.cfg.task;
  ValidationGrid g = ValidationGrid::box(c.cs, c.cfg.T, num(t, "x_radius", "task.x_radius", 2.0),
                                         num(t, "control_radius", "task.control_radius", 2.0),
                                         count(t, "per_axis", "task.per_axis", 5, 2));
  g.seed = c.cfg.seed;
  const ValidationReport rep = validate_coefficients(c.cs, g);
  RunResult r;
  json entries = json::array();
  std::size_t failed = 0;
  for (const auto& e : rep.entries) {
    entries.push_back({{"assumption", e.assumption}, {"pass", e.pass}, {"worst_ratio", e.worst_ratio},
                       {"witness", e.witness}});
    failed += !e.pass;
  }
  r.pass = rep.all_pass();
  r.report = {{"entries", entries}, {"note", rep.note}};
  r.summary = std::to_string(rep.entries.size() - failed) + "/" + std::to_string(rep.entries.size()) +
              " assumptions hold on the sample";
  return r;
}

RunResult task_bsde(const Context& c) {
  const Priority which = priority(c.cfg.task);
  const auto x = task_x(c);
  const ControlClass controls = c.controls(which);
  const StrategyClass strategies = c.strategies(which);
  const PathBundle b = c.bundle();
  const Leader leader = which == Priority::W1 ? Leader::PlayerTwo : Leader::PlayerOne;
  const ClosedLoopRun run = simulate_closed_loop(c.cs, x, controls[0], strategies[0], b, leader);
  const std::size_t m = b.m_paths(), n = b.grid().n_steps();
  std::vector<double> eta(m);
  for (std::size_t i = 0; i < m; ++i) eta[i] = c.cs.terminal(run.state.at(i, n));
  const BsdeSolution sol = solve_bsde(c.cs, run.state, run.mu, run.nu, eta, GeneratorCutoff::full(m, n), b);
  RunResult r;
  r.pass = std::isfinite(sol.y0_mean()) && std::isfinite(sol.y0_std_err());
  r.report = {{"control", controls[0].label},     {"strategy", strategies[0].label},
              {"x", x},                           {"y0", sol.y0_mean()},
              {"std_err", sol.y0_std_err()},      {"ridge_steps", sol.ridge_steps},
              {"max_lambda", sol.max_lambda},     {"basis_degree", sol.basis.degree},
              {"max_growth_ratio", run.max_growth_ratio}};
  r.summary = "Y0 = " + fmt(sol.y0_mean()) + " +/- " + fmt(sol.y0_std_err());
  return r;
}

RunResult task_value(const Context& c) {
  const Priority which = priority(c.cfg.task);
  const ControlClass controls = c.controls(which);
  const StrategyClass strategies = c.strategies(which);
  const PathBundle b = c.bundle();
  std::vector<std::string> header;
  add_x_columns(header, c.cs.k);
  for (const char* h : {"value", "std_err", "strategy", "control"}) header.emplace_back(h);
  CsvTable table(header);
  json rows = json::array();
  RunResult r;
  r.pass = true;
  std::size_t i = 0;
  for (const auto& xj : c.cfg.task.at("xs")) {
    const auto x = state_of(xj, c.cs.k, "task.xs[" + std::to_string(i++) + "]");
    const ValueEstimate v = estimate(which, c.cs, x, strategies, controls, b);
    std::vector<CsvTable::Cell> row(x.begin(), x.end());
    row.insert(row.end(), {v.value, v.std_err, v.argmin_strategy, v.argmax_control});
    table.add_row(std::move(row));
    rows.push_back({{"x", x}, {"value", v.value}, {"std_err", v.std_err},
                    {"strategy", v.argmin_strategy}, {"control", v.argmax_control},
                    {"pair_values", v.pair_values}, {"pair_std_errs", v.pair_std_errs}});
    r.pass = r.pass && std::isfinite(v.value);
  }
  r.report = {{"value", which == Priority::W1 ? "w1" : "w2"}, {"points", rows}};
  r.summary = std::to_string(rows.size()) + " value estimates";
  r.plots.emplace(PlotKind::ValueVsX, std::move(table));
  return r;
}

RunResult task_dpp(const Context& c) {
  const json& t = c.cfg.task;
  const Priority which = priority(t);
  const auto x = task_x(c);
  const double delta = num(t, "delta", "task.delta", 0.0);
  const double eps = num(t, "epsilon", "task.epsilon", 0.0);
  const json vg = object_or_empty(t, "value_grid", false);
  const double half = num(vg, "half_width", "task.value_grid.half_width", delta + 1.0);
  const ValueGridSpec spec = sandwich_grid_spec(c.grid, x, delta, half,
                                                count(vg, "x_points", "task.value_grid.x_points", 21, 2),
                                                count(vg, "t_stride", "task.value_grid.t_stride", 8, 1));
  const ControlClass controls = c.controls(which);
  const StrategyClass strategies = c.strategies(which);
  const PathBundle grid_bundle = c.bundle(1, count(vg, "m_paths", "task.value_grid.m_paths", c.cfg.m_paths, 2));
  ValueGrid values = estimate_value_grid(which, c.cs, spec, strategies, controls, grid_bundle);
  const Sandwich sw = build_sandwich(std::move(values), eps, num(vg, "margin", "task.value_grid.margin", 3.0));
  const DppReport rep = check_dpp(which, c.cs, x, delta, strategies, controls, sw, c.bundle());

  CsvTable table({"strategy", "control", "lower", "lower_se", "upper", "upper_se", "lower_half_eps",
                  "upper_half_eps", "payoff", "payoff_se", "mean_tau_time"});
  for (const auto& p : rep.per_pair)
    table.add_row({p.strategy, p.control, p.lower, p.lower_se, p.upper, p.upper_se, p.lower_half,
                   p.upper_half, p.payoff, p.payoff_se, p.mean_tau_time});
  table.add_row({std::string("*"), std::string("*"), rep.lower, rep.lower_se, rep.upper, rep.upper_se,
                 rep.lower_half, rep.upper_half, rep.w_hat, rep.w_hat_se, 0.0});
  RunResult r;
  r.pass = rep.pass;
  r.report = to_json(rep);
  r.report["sandwich_max_std_err"] = sw.grid.max_std_err();
  r.summary = "lower " + fmt(rep.lower) + " <= w_hat " + fmt(rep.w_hat) + " <= upper " + fmt(rep.upper) +
              " (tol " + fmt(rep.tol_mc) + ")";
  r.plots.emplace(PlotKind::DppBracket, std::move(table));
  return r;
}

HamPoint ham_point(const json& t, std::size_t k) {
  const json p = object_or_empty(t, "point", false);
  HamPoint xi;
  xi.t = num(p, "t", "task.point.t", 0.0);
  xi.y = num(p, "y", "task.point.y", 0.0);
  xi.x = field(p, "x") ? state_of(p.at("x"), k, "task.point.x") : std::vector<double>(k, 0.0);
  xi.z = field(p, "z") ? state_of(p.at("z"), k, "task.point.z") : std::vector<double>(k, 0.0);
  xi.Gamma = vec(p, "Gamma", "task.point.Gamma", std::vector<double>(k * k, 0.0));
  if (xi.Gamma.size() != k * k) invalid("task.point.Gamma", "expected k*k entries");
  return xi;
}

std::vector<std::vector<double>> lattice_from(const json& t, const std::string& key,
                                              const ControlSpace& space) {
  const json l = object_or_empty(t, key, false);
  const double radius = num(l, "radius", "task." + key + ".radius", space.bound.value_or(1.0));
  return ball_lattice(space.base_point, radius, count(l, "per_axis", "task." + key + ".per_axis", 11, 1));
}

RunResult task_hamiltonian(const Context& c) {
  const json& t = c.cfg.task;
  const std::string name = str(t, "envelope", "task.envelope", "H1_upper", kEnvelopes);
  const Envelope which = name == "H1_lower"   ? Envelope::H1Lower
                         : name == "H1_upper" ? Envelope::H1Upper
                         : name == "H2_lower" ? Envelope::H2Lower
                                              : Envelope::H2Upper;
  const HamPoint xi = ham_point(t, c.cs.k);
  EnvelopeGrids g;
  g.anchors_u = lattice_from(t, "anchors_u", c.cs.u_space);
  g.anchors_v = lattice_from(t, "anchors_v", c.cs.v_space);
  g.lattice_u = lattice_from(t, "lattice_u", c.cs.u_space);
  g.lattice_v = lattice_from(t, "lattice_v", c.cs.v_space);
  g.n_max = count(t, "n_max", "task.n_max", 8, 1);
  g.samples = count(t, "samples", "task.samples", 128, 1);
  g.xi_radius = num(t, "xi_radius", "task.xi_radius", 1.0);
  g.control_radius = num(t, "control_radius", "task.control_radius", 1.0);
  const EnvelopeResult res = envelope_h(c.cs, xi, which, g);

  bool monotone = true;
  for (std::size_t n = 1; n < res.per_level.size(); ++n) {
    if (which == Envelope::H1Upper && res.per_level[n] > res.per_level[n - 1]) monotone = false;
    if (which == Envelope::H2Lower && res.per_level[n] < res.per_level[n - 1]) monotone = false;
  }
  CsvTable table({"n", "value"});
  for (std::size_t n = 0; n < res.per_level.size(); ++n)
    table.add_row({static_cast<std::int64_t>(n + 1), res.per_level[n]});
  RunResult r;
  r.pass = monotone;
  r.report = {{"envelope", name},
              {"per_level", res.per_level},
              {"limit", res.limit},
              {"level_monotone", monotone},
              {"supinf_grid", supinf_bruteforce(c.cs, xi, g.anchors_u, g.lattice_v)},
              {"infsup_grid", infsup_bruteforce(c.cs, xi, g.lattice_u, g.anchors_v)},
              {"grid_modulus", grid_modulus(c.cs, xi, g)}};
  r.summary = name + " level-" + std::to_string(g.n_max) + " estimate " + fmt(res.limit) +
              (monotone ? "" : " (level sequence not monotone)");
  r.plots.emplace(PlotKind::EnvelopeVsN, std::move(table));
  return r;
}

struct PdeSetup {
  PdeSpec spec;
  PdeHamiltonian which = PdeHamiltonian::SupInf;
  ControlGrids grids;
};

PdeSetup pde_setup(const Context& c, const json& p, const std::string& base) {
  PdeSetup s;
  s.spec.t0 = c.cfg.t0;
  s.spec.T = c.cfg.T;
  s.spec.x_min = num(p, "x_min", base + ".x_min", -2.0);
  s.spec.x_max = num(p, "x_max", base + ".x_max", 2.0);
  s.spec.n_x = count(p, "n_x", base + ".n_x", 201, 3);
  s.spec.n_t = count(p, "n_t", base + ".n_t", 0, 0);
  s.spec.pad = num(p, "pad", base + ".pad", -1.0);
  s.which = str(p, "hamiltonian", base + ".hamiltonian", "supinf", {"supinf", "infsup"}) == "supinf"
                ? PdeHamiltonian::SupInf
                : PdeHamiltonian::InfSup;
  s.grids.u.clear();
  s.grids.v.clear();
  for (double u : vec(p, "u_grid", base + ".u_grid", {0.0})) s.grids.u.push_back({u});
  for (double v : vec(p, "v_grid", base + ".v_grid", {0.0})) s.grids.v.push_back({v});
  return s;
}

RunResult task_pde(const Context& c) {
  const PdeSetup s = pde_setup(c, c.cfg.task, "task");
  const PdeGrid g = solve_pde(c.cs, s.spec, s.which, s.grids);
  const double margin = monotonicity_margin(c.cs, s.spec, s.grids);

  const std::size_t n_res = count(c.cfg.task, "residual_nodes", "task.residual_nodes", 10, 0);
  const double tol = 5.0 * (g.dx + g.dt);
  std::mt19937_64 rng(c.cfg.seed);
  json residuals = json::array();
  if (g.n_t() >= 2)
    for (std::size_t q = 0; q < n_res; ++q) {
      const std::size_t k = 1 + static_cast<std::size_t>(rng() % (g.n_t() - 1));
      const std::size_t j = 1 + static_cast<std::size_t>(rng() % (g.n_x() - 2));
      const ViscosityReport sub = viscosity_residual(c.cs, g, k, j, s.which, s.grids, ViscositySide::Sub, tol);
      const ViscosityReport sup = viscosity_residual(c.cs, g, k, j, s.which, s.grids, ViscositySide::Super, tol);
      residuals.push_back({{"t", sub.t}, {"x", sub.x}, {"residual", sub.residual}, {"tol", tol},
                           {"sub_pass", sub.pass}, {"super_pass", sup.pass}});
    }

  CsvTable table({"t", "x", "w"});
  for (std::size_t k = 0; k <= g.n_t(); ++k)
    for (std::size_t j = 0; j < g.n_x(); ++j) table.add_row({g.times[k], g.x[j], g.at(k, j)});
  RunResult r;
  r.pass = margin >= 0.0;
  r.report = {{"dx", g.dx},
              {"dt", g.dt},
              {"n_t", g.n_t()},
              {"n_x", g.n_x()},
              {"cfl_bound", g.cfl_bound},
              {"dissipation", g.dissipation},
              {"padded_nodes", g.padded_nodes},
              {"monotonicity_margin", margin},
              {"residuals", residuals},
              {"w_t0", g.interpolate(s.spec.t0, 0.5 * (s.spec.x_min + s.spec.x_max))}};
  r.summary = std::to_string(g.n_x()) + " x " + std::to_string(g.n_t() + 1) +
              " grid, monotonicity margin " + fmt(margin);
  r.plots.emplace(PlotKind::PdeSurface, std::move(table));
  return r;
}

RunResult task_crossval(const Context& c) {
  const json p = object_or_empty(c.cfg.task, "pde", false);
  const auto x = task_x(c);
  if (c.cs.k != 1) invalid("model.game", "crossval needs a scalar game");
  const PdeSetup s = pde_setup(c, p, "task.pde");
  const CrossValidation cv = cross_validate(c.cs, x[0], c.strategies(Priority::W1),
                                            c.controls(Priority::W1), c.bundle(), s.spec, s.grids);
  RunResult r;
  r.pass = cv.pass;
  r.report = {{"x", x[0]},       {"mc_value", cv.mc_value}, {"mc_std_err", cv.mc_std_err},
              {"pde_value", cv.pde_value}, {"gap", cv.gap},  {"tol", cv.tol}};
  r.summary = "gap " + fmt(cv.gap) + " vs tol " + fmt(cv.tol);
  return r;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid("<root>", std::string("JSON parse error: ") + e.what());
  }
  if (!root.is_object()) invalid("<root>", "expected an object");
  only_keys(root, "", {"model", "grid", "classes", "task", "output"});

  ExperimentConfig c;
  c.text = text;
  c.model = object_or_empty(root, "model", true);
  c.grid = object_or_empty(root, "grid", true);
  c.classes = object_or_empty(root, "classes", false);
  c.task = object_or_empty(root, "task", true);
  c.output = object_or_empty(root, "output", false);

  only_keys(c.model, "model", {"game", "params", "gamma", "kappa", "p", "k", "d"});
  const auto keys = game_keys();
  c.game = str(c.model, "game", "model.game", "");
  if (c.game.empty()) invalid("model.game", "required");
  if (std::find(keys.begin(), keys.end(), c.game) == keys.end())
    invalid("model.game", "unknown game '" + c.game + "'");
  c.game_params = object_or_empty(c.model, "params", false);
  for (const char* k : {"gamma", "kappa", "p"})
    if (const json* f = field(c.model, k)) c.game_params[k] = *f;
  const double p = num(c.game_params, "p", "model.p", 2.0);
  if (!(p > 1.0 && p <= 2.0)) invalid("model.p", "must lie in (1, 2]");
  if (!(num(c.game_params, "gamma", "model.gamma", 1.0) > 0.0)) invalid("model.gamma", "must be > 0");
  if (!(num(c.game_params, "kappa", "model.kappa", 1.0) > 0.0)) invalid("model.kappa", "must be > 0");

  only_keys(c.grid, "grid", {"t0", "T", "n_steps", "m_paths", "seed"});
  c.t0 = num(c.grid, "t0", "grid.t0", 0.0);
  c.T = num(c.grid, "T", "grid.T", 1.0);
  if (c.t0 < 0.0) invalid("grid.t0", "must be >= 0");
  if (!(c.T > c.t0)) invalid("grid.T", "must exceed t0");
  c.n_steps = count(c.grid, "n_steps", "grid.n_steps", 50, 1);
  c.m_paths = count(c.grid, "m_paths", "grid.m_paths", 10000, 2);
  if (const json* s = field(c.grid, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
      invalid("grid.seed", "expected a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }

  only_keys(c.classes, "classes", {"controls", "strategies"});
  c.task_kind = str(c.task, "kind", "task.kind", "", kTasks);
  if (c.task_kind.empty()) invalid("task.kind", "required");

  only_keys(c.output, "output", {"dir", "formats"});
  c.out_dir = str(c.output, "dir", "output.dir", c.out_dir);
  if (const json* f = field(c.output, "formats")) {
    if (!f->is_array()) invalid("output.formats", "expected an array");
    c.formats.clear();
    for (const auto& e : *f) {
      if (!e.is_string() || (e != "json" && e != "csv")) invalid("output.formats", "entries must be \"json\" or \"csv\"");
      c.formats.push_back(e.get<std::string>());
    }
  }
  check_task(c);

  // Build once so that parameter and class errors surface here.
  const CoefficientSet cs = make_game(c.game, c.game_params);
  if (field(c.model, "k") && count(c.model, "k", "model.k", 1, 1) != cs.k) invalid("model.k", "does not match the game");
  if (field(c.model, "d") && count(c.model, "d", "model.d", 1, 1) != cs.d) invalid("model.d", "does not match the game");
  if (c.task_kind == "value" || c.task_kind == "dpp" || c.task_kind == "bsde" || c.task_kind == "crossval") {
    const Priority which = c.task_kind == "crossval" ? Priority::W1 : priority(c.task);
    if (!field(c.classes, "controls")) invalid("classes.controls", "required by task " + c.task_kind);
    if (!field(c.classes, "strategies")) invalid("classes.strategies", "required by task " + c.task_kind);
    make_controls(which == Priority::W1 ? cs.u_space : cs.v_space, c.classes.at("controls"));
    make_strategies(cs, which == Priority::W1, c.classes.at("strategies"));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "value_vs_x") return PlotKind::ValueVsX;
  if (name == "envelope_vs_n") return PlotKind::EnvelopeVsN;
  if (name == "pde_surface") return PlotKind::PdeSurface;
  if (name == "dpp_bracket") return PlotKind::DppBracket;
  throw Error(Errc::UnknownKey, "plot kind '" + name + "'");
}

const char* to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::ValueVsX: return "value_vs_x";
    case PlotKind::EnvelopeVsN: return "envelope_vs_n";
    case PlotKind::PdeSurface: return "pde_surface";
    case PlotKind::DppBracket: return "dpp_bracket";
  }
  return "?";
}

RunResult execute(const ExperimentConfig& cfg) {
  Context c{cfg, make_game(cfg.game, cfg.game_params), TimeGrid::make(cfg.t0, cfg.T, cfg.n_steps)};
  RunResult r;
  if (cfg.task_kind == "validate") r = task_validate(c);
  else if (cfg.task_kind == "bsde") r = task_bsde(c);
  else if (cfg.task_kind == "value") r = task_value(c);
  else if (cfg.task_kind == "dpp") r = task_dpp(c);
  else if (cfg.task_kind == "hamiltonian") r = task_hamiltonian(c);
  else if (cfg.task_kind == "pde") r = task_pde(c);
  else r = task_crossval(c);
  r.task = cfg.task_kind;
  return r;
}

std::string emit_plotdata(const RunResult& result, PlotKind kind, const Provenance& prov) {
  auto it = result.plots.find(kind);
  if (it == result.plots.end())
    throw Error(Errc::KindMismatch, std::string("task '") + result.task + "' does not produce " + to_string(kind));
  return it->second.render(prov);
}

int run(const std::filesystem::path& config, const RunOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.threads) set_max_threads(*opts.threads);
    const std::filesystem::path out = opts.out_dir ? *opts.out_dir : std::filesystem::path(cfg.out_dir);
    const Provenance prov{cfg.seed, git_blob_sha1(cfg.text), kToolVersion};

    const RunResult r = execute(cfg);
    const bool want_json = std::find(cfg.formats.begin(), cfg.formats.end(), "json") != cfg.formats.end();
    const bool want_csv = std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end();
    if (want_json) {
      json meta = metadata_json(prov);
      meta["task"] = r.task;
      meta["game"] = cfg.game;
      json doc = {{"meta", meta}, {"pass", r.pass}, {"summary", r.summary}, {"report", r.report}};
      write_atomic(out / (r.task + "_report.json"), render_json(doc));
    }
    if (want_csv)
      for (const auto& [kind, table] : r.plots)
        write_atomic(out / (std::string("plot_") + to_string(kind) + ".csv"), table.render(prov));
    log << r.task << (r.pass ? " PASS: " : " FAIL: ") << r.summary << "\n";
    return r.pass ? kExitPass : kExitAssertion;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

int validate_config(const std::filesystem::path& config, std::ostream& log, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config);
    log << "config ok: task " << cfg.task_kind << " on game " << cfg.game << "\n";
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace sdg
