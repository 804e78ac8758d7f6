// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass. `--only N[,M...]` restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sdg/bsde_engine.hpp"
#include "sdg/controls.hpp"
#include "sdg/dpp_harness.hpp"
#include "sdg/examples.hpp"
#include "sdg/game_values.hpp"
#include "sdg/hamiltonians.hpp"
#include "sdg/isaacs_pde.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/parallel.hpp"
#include "sdg/rng.hpp"
#include "sdg/sde_engine.hpp"

using namespace sdg;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Deterministic uniforms for instance generation.
struct Draw {
  std::uint64_t seed;
  std::uint64_t n = 0;
  double operator()(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * uniform01(seed, n++); }
  std::size_t index(std::size_t below) {
    return std::min(below - 1, static_cast<std::size_t>((*this)() * static_cast<double>(below)));
  }
};

ControlPath random_path(Draw& r, const TimeGrid& grid, std::size_t m, const ControlSpace& space,
                        double radius) {
  std::vector<double> v(m * grid.n_steps() * space.dim);
  for (double& e : v) e = r(-radius, radius);
  return ControlPath(grid, m, space, std::move(v));
}

ControlPath constant_path(const TimeGrid& grid, std::size_t m, const ControlSpace& space, double c) {
  return ControlPath::constant(grid, m, space, ConstVec(&c, 1));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  set_max_threads(1);
  const auto t0 = Clock::now();
  CoefficientSet cs = make_game("heat", {{"rate", 1.0}, {"terminal", "const"}, {"terminal_value", 1.0}});
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const std::size_t m = 100000;
  const PathBundle b = generate(grid, 1, m, 20240101);
  const double x = 0.0;
  const PayoffEstimate y = payoff_J(cs, ConstVec(&x, 1), constant_path(grid, m, cs.u_space, 0.0),
                                    constant_path(grid, m, cs.v_space, 0.0), b);
  const double secs = seconds_since(t0);
  set_max_threads(0);
  const double rel = std::abs(y.value - std::exp(-1.0)) / std::exp(-1.0);
  Outcome o;
  o.pass = rel < 0.02 && secs < 30.0;
  o.detail = "Y0 = " + fmt("%.6f", y.value) + ", rel err " + fmt("%.4f", rel) + " (< 0.02), " +
             fmt("%.1f", secs) + " s single-threaded (< 30 s)";
  return o;
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  const char* games[] = {"additive_diffusion", "compact_demo", "heat"};
  std::size_t bad_restart = 0, bad_paste = 0, bad_partition = 0, bad_semigroup = 0;
  for (std::size_t inst = 0; inst < 100; ++inst) {
    Draw r{9000 + inst};
    const CoefficientSet cs = make_game(games[inst % 3]);
    const std::size_t n = 10 + r.index(21), m = 64 + r.index(257);
    const double t_start = r(0.0, 0.5);
    const TimeGrid grid = TimeGrid::make(t_start, t_start + r(0.5, 1.5), n);
    const PathBundle b = generate(grid, cs.d, m, 500 + inst);
    const double rad = cs.u_space.bound ? *cs.u_space.bound : 2.0;
    const ControlPath mu = random_path(r, grid, m, cs.u_space, rad * 0.7);
    const ControlPath nu = random_path(r, grid, m, cs.v_space, rad * 0.7);
    const double x = r(-1.0, 1.0);

    if (restart_flow_check(cs, ConstVec(&x, 1), mu, nu, b, 1 + r.index(n - 1)) != 0.0) ++bad_restart;

    // Lemma: controls agreeing before tau (and after tau on masked paths)
    // give identical states there.
    std::vector<std::size_t> tau(m);
    std::vector<std::uint8_t> mask(m), unmask(m);
    for (std::size_t i = 0; i < m; ++i) {
      tau[i] = r.index(n + 1);
      mask[i] = r() < 0.5;
      unmask[i] = !mask[i];
    }
    const ControlPath other_mu = random_path(r, grid, m, cs.u_space, rad * 0.7);
    const ControlPath other_nu = random_path(r, grid, m, cs.v_space, rad * 0.7);
    const ControlPath mu_after = paste_controls(mu, other_mu, tau);
    const ControlPath nu_after = paste_controls(nu, other_nu, tau);
    const std::vector<PartitionItem> mu_parts{{mask, &mu}, {unmask, &mu_after}};
    const std::vector<PartitionItem> nu_parts{{mask, &nu}, {unmask, &nu_after}};
    const ControlPath mu_t = paste_by_partition(mu_parts), nu_t = paste_by_partition(nu_parts);
    const PastedDiscrepancy pd = pasted_state_check(cs, ConstVec(&x, 1), mu, mu_t, nu, nu_t, tau, mask, b);
    if (pd.before_tau != 0.0 || pd.after_tau_masked != 0.0) ++bad_paste;

    // Partition round trip: three random blocks, re-pasting any block of the
    // result from its source leaves it unchanged.
    std::vector<std::uint8_t> a(m), c(m), d(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t k = r.index(3);
      a[i] = k == 0;
      c[i] = k == 1;
      d[i] = k == 2;
    }
    const std::vector<PartitionItem> three{{a, &mu}, {c, &other_mu}, {d, &mu_after}};
    const ControlPath pasted = paste_by_partition(three);
    const std::vector<PartitionItem> again{{a, &pasted}, {c, &other_mu}, {d, &pasted}};
    std::vector<std::uint8_t> all(m, 1);
    const std::vector<PartitionItem> whole{{all, &pasted}};
    bool ok = paste_by_partition(again) == pasted && paste_by_partition(whole) == pasted;
    for (std::size_t i = 0; i < m && ok; ++i) {
      const ControlPath& src = a[i] ? mu : c[i] ? other_mu : mu_after;
      for (std::size_t k = 0; k < n && ok; ++k) ok = pasted.at(i, k)[0] == src.at(i, k)[0];
    }
    if (!ok) ++bad_partition;

    if (semigroup_check(cs, ConstVec(&x, 1), mu, nu, b, 1 + r.index(n - 1)) != 0.0) ++bad_semigroup;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = bad_restart + bad_paste + bad_partition + bad_semigroup == 0 && secs < 60.0;
  o.detail = "nonzero: restart " + std::to_string(bad_restart) + ", pasted " + std::to_string(bad_paste) +
             ", partition " + std::to_string(bad_partition) + ", semigroup " + std::to_string(bad_semigroup) +
             " of 100 each, " + fmt("%.1f", secs) + " s (< 60 s)";
  return o;
}

Outcome criterion3() {
  const CoefficientSet cs = make_game("additive_diffusion");
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const std::size_t m = 100000;
  const PathBundle b = generate(grid, 1, m, 31337);
  Draw r{77};
  const ControlPath mu = random_path(r, grid, m, cs.u_space, 0.5);
  const ControlPath nu = random_path(r, grid, m, cs.v_space, 0.5);
  const double x = 0.2;
  const StatePaths X = simulate_forward(cs, ConstVec(&x, 1), mu, nu, b);
  std::vector<double> eta1(m), eta2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double xt = X.at(i, grid.n_steps())[0];
    eta1[i] = std::sin(xt) + 0.5 * xt;
    eta2[i] = eta1[i] + 0.05 + 0.05 * xt * xt / (1.0 + xt * xt);
  }
  const GeneratorFn f1 = [](double, ConstVec xs, double y, ConstVec z, ConstVec u, ConstVec v) {
    return -0.5 * y + 0.2 * z[0] + 0.1 * std::cos(xs[0]) + 0.05 * (u[0] - v[0]);
  };
  const GeneratorFn f2 = [f1](double t, ConstVec xs, double y, ConstVec z, ConstVec u, ConstVec v) {
    return f1(t, xs, y, z, u, v) + 0.02;
  };
  const ComparisonResult cr = comparison_check(cs, X, mu, nu, eta1, f1, eta2, f2, b);

  // Discrete PDE comparison on random ordered terminal pairs.
  const CoefficientSet demo = make_game("compact_demo");
  ControlGrids grids;
  grids.u.clear();
  grids.v.clear();
  for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    grids.u.push_back({c});
    grids.v.push_back({c});
  }
  PdeSpec spec;
  spec.n_x = 101;
  std::size_t nodes = 0, unordered = 0;
  for (int pair = 0; pair < 5; ++pair) {
    const double a = r(0.5, 2.0), ph = r(0.0, 3.0), lift = r(0.0, 0.2), amp = r(0.01, 0.3);
    CoefficientSet c1 = demo, c2 = demo;
    c1.terminal = [a, ph](ConstVec xv) { return std::sin(a * xv[0] + ph); };
    c2.terminal = [a, ph, lift, amp](ConstVec xv) {
      return std::sin(a * xv[0] + ph) + lift + amp * std::exp(-xv[0] * xv[0]);
    };
    for (PdeHamiltonian h : {PdeHamiltonian::SupInf, PdeHamiltonian::InfSup}) {
      const PdeGrid w1 = solve_pde(c1, spec, h, grids), w2 = solve_pde(c2, spec, h, grids);
      for (std::size_t e = 0; e < w1.values.size(); ++e) {
        ++nodes;
        if (w1.values[e] > w2.values[e]) ++unordered;
      }
    }
  }
  const double ordered = 1.0 - cr.fraction();
  Outcome o;
  o.pass = ordered >= 0.999 && unordered == 0;
  o.detail = "BSDE ordered " + fmt("%.5f", ordered) + " of " + std::to_string(cr.entries) +
             " entries (>= 0.999); PDE unordered nodes " + std::to_string(unordered) + "/" +
             std::to_string(nodes);
  return o;
}

Outcome criterion4() {
  const CoefficientSet cs = make_game("additive");
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const std::size_t m = 20000;
  const PathBundle b = generate(grid, 1, m, 4242);
  Draw r{4};
  const ControlPath mu = random_path(r, grid, m, cs.u_space, 0.5);
  const ControlPath nu = random_path(r, grid, m, cs.v_space, 0.5);
  const double x = 0.3;
  const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
  const StabilityReport rep = stability_checks(cs, ConstVec(&x, 1), mu, nu, b, ladder);
  std::ostringstream os;
  os << "eta ratios";
  for (const auto& g : rep.rungs) os << " " << fmt("%.4g", g.eta_ratio);
  os << "; xi ratios";
  for (const auto& g : rep.rungs) os << " " << fmt("%.4g", g.xi_ratio);
  return {rep.pass(), os.str()};
}

struct Suite {
  std::string game;
  json controls, strategies;
};

std::vector<Suite> three_games() {
  const json c3 = json::array({{{"kind", "constant"}, {"values", {-1, 0, 1}}}});
  const json c2 = json::array({{{"kind", "constant"}, {"values", {-1, 1}}}});
  return {
      {"frozen", c3, json::array({{{"kind", "constant"}, {"values", {-1, 0, 1}}}})},
      {"mirror", c2, json::array({{{"kind", "mirror"}}, {{"kind", "constant"}, {"values", {-1, 1}}}})},
      {"additive_diffusion", c3,
       json::array({{{"kind", "neutralizer"}}, {{"kind", "constant"}, {"values", {0}}}, {{"kind", "anti_mirror"}}})},
  };
}

struct Classes {
  StrategyClass strategies;
  ControlClass controls;
};

Classes classes_for(const CoefficientSet& cs, const Suite& s, Priority which) {
  const bool w1 = which == Priority::W1;
  return {make_strategies(cs, w1, s.strategies), make_controls(w1 ? cs.u_space : cs.v_space, s.controls)};
}

Outcome criterion5() {
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const std::size_t m = 20000;
  const PathBundle b = generate(grid, 1, m, 5150);
  bool all = true;
  std::ostringstream os;
  for (const Suite& s : three_games()) {
    const CoefficientSet cs = make_game(s.game);
    const Classes k1 = classes_for(cs, s, Priority::W1), k2 = classes_for(cs, s, Priority::W2);
    std::vector<BoundsPoint> pts;
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      const ValueEstimate w1 = estimate_w1(cs, ConstVec(&x, 1), k1.strategies, k1.controls, b);
      const ValueEstimate w2 = estimate_w2(cs, ConstVec(&x, 1), k2.strategies, k2.controls, b);
      pts.push_back({std::abs(x), w1.value, w2.value, w1.std_err, w2.std_err});
    }
    const BoundsReport br = bounds_check(pts, cs);
    std::vector<HolderPair> pairs;
    for (double h : {0.1, 0.2, 0.4, 0.8}) pairs.push_back({{0.5}, {0.5 + h}});
    const HolderReport h1 = holder_check(cs, pairs, k1.strategies, k1.controls, b, Priority::W1);
    const HolderReport h2 = holder_check(cs, pairs, k2.strategies, k2.controls, b, Priority::W2);
    const TimeGrid late = TimeGrid::make(0.2, 1.0, 40);
    const std::vector<std::uint64_t> seeds{11, 12, 13};
    const double x = 0.5;
    const DeterminismReport dr =
        determinism_check(cs, ConstVec(&x, 1), k1.strategies, k1.controls, late, m, seeds, Priority::W1);
    const bool ok = br.pass && h1.pass && h2.pass && dr.pass;
    all = all && ok;
    os << s.game << ": bounds " << (br.pass ? "ok" : "FAIL") << " (rel excess " << fmt("%.3g", br.max_excess)
       << "), holder " << (h1.pass && h2.pass ? "ok" : "FAIL") << " (C " << fmt("%.3g", std::max(h1.constant, h2.constant))
       << "), spread " << fmt("%.3g", dr.spread) << " <= 4*" << fmt("%.3g", dr.pooled_std_err)
       << (dr.shift_exact ? "" : " shift not exact") << (dr.pass ? "" : " FAIL") << "; ";
  }
  return {all, os.str()};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const std::size_t m = 100000;
  const double delta = 0.3, eps = 0.05, x = 0.0;
  const PathBundle b = generate(grid, 1, m, 6060);
  bool all = true;
  std::ostringstream os;
  for (const Suite& s : three_games()) {
    const CoefficientSet cs = make_game(s.game);
    // sigma = 0 games need fewer paths on the value grid and less margin.
    const bool diffusive = s.game == "additive_diffusion";
    const PathBundle grid_bundle = generate(grid, 1, diffusive ? 10000 : 1000, 6061);
    const ValueGridSpec spec = sandwich_grid_spec(grid, ConstVec(&x, 1), delta, delta + (diffusive ? 1.0 : 0.1),
                                                  diffusive ? 21 : 9, 8);
    for (Priority which : {Priority::W1, Priority::W2}) {
      const Classes k = classes_for(cs, s, which);
      const Sandwich sw = build_sandwich(
          estimate_value_grid(which, cs, spec, k.strategies, k.controls, grid_bundle), eps);
      const DppReport rep = check_dpp(which, cs, ConstVec(&x, 1), delta, k.strategies, k.controls, sw, b);
      all = all && rep.pass;
      os << s.game << (which == Priority::W1 ? " w1" : " w2") << (rep.pass ? " ok " : " FAIL ") << "["
         << fmt("%.4f", rep.lower) << ", " << fmt("%.4f", rep.w_hat) << ", " << fmt("%.4f", rep.upper)
         << " tol " << fmt("%.4f", rep.tol_mc) << "]; ";
    }
  }
  const double secs = seconds_since(t0);
  all = all && secs < 600.0;
  os << fmt("%.0f", secs) << " s (< 600 s)";
  return {all, os.str()};
}

Outcome criterion7() {
  bool monotone = true;
  std::ostringstream os;
  // Level monotonicity on a bounded and an unbounded game.
  const CoefficientSet demo = make_game("compact_demo");
  const CoefficientSet mirror = make_game("mirror");
  Draw r{707};
  for (const CoefficientSet* cs : {&demo, &mirror}) {
    EnvelopeGrids g;
    const double c = 0.0;
    const bool bounded = cs->u_space.bound.has_value();
    g.anchors_u = ball_lattice(ConstVec(&c, 1), bounded ? 1.0 : 2.0, 9);
    g.anchors_v = g.anchors_u;
    g.lattice_u = ball_lattice(ConstVec(&c, 1), bounded ? 1.0 : 20.0, bounded ? 9 : 81);
    g.lattice_v = g.lattice_u;
    for (int p = 0; p < 3; ++p) {
      const HamPoint xi{r(0.0, 1.0), {r(-1.0, 1.0)}, r(-1.0, 1.0), {r(-1.0, 1.0)}, {r(-1.0, 1.0)}};
      const auto up = envelope_h(*cs, xi, Envelope::H1Upper, g).per_level;
      const auto lo = envelope_h(*cs, xi, Envelope::H2Lower, g).per_level;
      for (std::size_t n = 1; n < up.size(); ++n) {
        monotone = monotone && up[n] <= up[n - 1];
        monotone = monotone && lo[n] >= lo[n - 1];
      }
    }
  }
  os << "level sequences " << (monotone ? "monotone" : "NOT monotone") << "; collapse gaps";

  // Compact collapse on three refinements.
  bool collapse = true;
  std::vector<HamPoint> points;
  for (int p = 0; p < 2; ++p)
    points.push_back({r(0.0, 1.0), {r(-1.0, 1.0)}, r(-1.0, 1.0), {r(-1.0, 1.0)}, {r(-1.0, 1.0)}});
  double prev_gap = INFINITY;
  for (std::size_t per_axis : {9, 17, 33}) {
    const double c = 0.0, h = 2.0 / static_cast<double>(per_axis - 1);
    EnvelopeGrids g;
    g.anchors_u = ball_lattice(ConstVec(&c, 1), 1.0, per_axis);
    g.anchors_v = g.lattice_u = g.lattice_v = g.anchors_u;
    g.xi_radius = g.control_radius = h;
    double gap = 0.0, modulus = 0.0;
    for (const HamPoint& xi : points) {
      const double si = supinf_bruteforce(demo, xi, g.anchors_u, g.lattice_v);
      const double is = infsup_bruteforce(demo, xi, g.lattice_u, g.anchors_v);
      const double mod = grid_modulus(demo, xi, g);
      double local = 0.0;
      local = std::max(local, std::abs(envelope_h(demo, xi, Envelope::H1Lower, g).limit - si));
      local = std::max(local, std::abs(envelope_h(demo, xi, Envelope::H1Upper, g).limit - si));
      local = std::max(local, std::abs(envelope_h(demo, xi, Envelope::H2Lower, g).limit - is));
      local = std::max(local, std::abs(envelope_h(demo, xi, Envelope::H2Upper, g).limit - is));
      collapse = collapse && local <= mod;
      gap = std::max(gap, local);
      modulus = std::max(modulus, mod);
    }
    collapse = collapse && gap <= prev_gap;
    prev_gap = gap;
    os << " " << fmt("%.3g", gap) << " (mod " << fmt("%.3g", modulus) << ")";
  }
  return {monotone && collapse, os.str()};
}

double heat_error(std::size_t n_x, double* secs = nullptr) {
  const CoefficientSet cs = make_game("heat");
  PdeSpec spec;
  spec.n_x = n_x;
  const auto t0 = Clock::now();
  const PdeGrid g = solve_pde(cs, spec, PdeHamiltonian::SupInf, ControlGrids{});
  if (secs) *secs = seconds_since(t0);
  double err = 0.0;
  for (std::size_t k = 0; k <= g.n_t(); ++k)
    for (std::size_t j = 0; j < g.n_x(); ++j)
      err = std::max(err, std::abs(g.at(k, j) - (g.x[j] * g.x[j] + 1.0 - g.times[k])));
  return err;
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  std::ostringstream os;
  const double e201 = heat_error(201), e401 = heat_error(401);
  const double factor = e201 / e401;
  const bool accuracy = e201 < 0.01;
  const bool refine = factor >= 1.5;
  os << "heat max err " << fmt("%.3g", e201) << " at n_x=201 (< 0.01), " << fmt("%.3g", e401)
     << " at 401, factor " << fmt("%.3g", factor) << " (>= 1.5)";

  const CoefficientSet heat = make_game("heat");
  const auto exact = [](double t, double x) { return x * x + (1.0 - t); };
  const ViscosityReport vr =
      viscosity_residual(heat, exact, 0.4, 0.3, PdeHamiltonian::SupInf, ControlGrids{}, ViscositySide::Sub, 1e-6);
  const bool residual = std::abs(vr.residual) < 1e-6;
  os << "; exact residual " << fmt("%.2g", vr.residual);

  bool cross = true;
  const TimeGrid grid = TimeGrid::make(0.0, 1.0, 50);
  const PathBundle b = generate(grid, 1, 20000, 8080);
  struct Case {
    std::string game;
    json controls, strategies;
    std::vector<double> grid;
  };
  const json zero = json::array({{{"kind", "constant"}, {"values", {0}}}});
  const std::vector<Case> cases{
      {"heat", zero, zero, {0.0}},
      {"cancellation", json::array({{{"kind", "constant"}, {"values", {-1, 0, 1}}}}),
       json::array({{{"kind", "neutralizer"}}, {{"kind", "constant"}, {"values", {-1, 0, 1}}}}), {-1.0, 0.0, 1.0}},
      {"mirror", json::array({{{"kind", "constant"}, {"values", {-1, 1}}}}),
       json::array({{{"kind", "mirror"}}, {{"kind", "constant"}, {"values", {-1, 1}}}}), {-1.0, 1.0}},
  };
  for (const Case& c : cases) {
    const CoefficientSet cs = make_game(c.game);
    ControlGrids grids;
    grids.u.clear();
    grids.v.clear();
    for (double v : c.grid) {
      grids.u.push_back({v});
      grids.v.push_back({v});
    }
    PdeSpec spec;
    spec.n_x = 201;
    const CrossValidation cv = cross_validate(cs, 0.5, make_strategies(cs, true, c.strategies),
                                              make_controls(cs.u_space, c.controls), b, spec, grids);
    cross = cross && cv.pass;
    os << "; " << c.game << " gap " << fmt("%.3g", cv.gap) << " < " << fmt("%.3g", cv.tol);
  }
  const double secs = seconds_since(t0);
  os << "; " << fmt("%.0f", secs) << " s (< 300 s)";
  return {accuracy && refine && residual && cross && secs < 300.0, os.str()};
}

// Non-polynomial heat data, where the scheme is not exact: w = e^{-(T-t)/2} cos x.
std::string refinement_supplement() {
  CoefficientSet cs = make_game("heat");
  cs.terminal = [](ConstVec x) { return std::cos(x[0]); };
  double errs[2];
  std::size_t i = 0;
  for (std::size_t n_x : {201, 401}) {
    PdeSpec spec;
    spec.n_x = n_x;
    const PdeGrid g = solve_pde(cs, spec, PdeHamiltonian::SupInf, ControlGrids{});
    double err = 0.0;
    for (std::size_t k = 0; k <= g.n_t(); ++k)
      for (std::size_t j = 0; j < g.n_x(); ++j)
        err = std::max(err, std::abs(g.at(k, j) - std::exp(-0.5 * (1.0 - g.times[k])) * std::cos(g.x[j])));
    errs[i++] = err;
  }
  return "cos-x heat data: max err " + fmt("%.3g", errs[0]) + " -> " + fmt("%.3g", errs[1]) +
         ", factor " + fmt("%.3g", errs[0] / errs[1]);
}

Outcome criterion9() {
  bool ok = true;
  std::ostringstream os;
  struct Inst {
    const char* name;
    PhiFn phi;
  };
  const std::vector<Inst> insts{{"u+v", [](double, double u, double v) { return u + v; }},
                                {"v-sin(u)", [](double, double u, double v) { return v - std::sin(u); }}};
  for (const Inst& in : insts) {
    const DyadicNeutralizer psi(in.phi, 1.0, 1.0, 12);
    Draw r{9090};
    double worst = 0.0;
    bool monotone = true;
    for (int s = 0; s < 1000; ++s) {
      const double t = r(0.0, 1.0), u = r(-3.0, 3.0);
      const auto lv = psi.levels(t, u);
      for (std::size_t n = 1; n < lv.size(); ++n) monotone = monotone && lv[n - 1] <= lv[n];
      worst = std::max(worst, std::abs(in.phi(t, u, lv.back())));
    }
    ok = ok && worst < std::ldexp(1.0, -10) && monotone;
    os << in.name << ": max |phi| " << fmt("%.3g", worst) << " (< 2^-10), levels "
       << (monotone ? "monotone" : "NOT monotone") << "; ";
  }
  return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  // --only N,M runs a subset. --expect-fail N,M marks known failures: they
  // still print FAIL, but only a mismatch with the expectation fails the run.
  std::set<int> only, expected;
  auto ids = [](const char* list, std::set<int>& out) {
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
  };
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) ids(argv[++a], only);
    else if (arg == "--expect-fail" && a + 1 < argc) ids(argv[++a], expected);
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"BSDE linear oracle", criterion1},
      {"exact identities", criterion2},
      {"comparison", criterion3},
      {"stability ladders", criterion4},
      {"value regularity", criterion5},
      {"weak DPP", criterion6},
      {"Hamiltonian envelopes", criterion7},
      {"PDE solver", criterion8},
      {"neutralizer construction", criterion9},
  };
  int failed = 0, unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    if (id == 8) std::printf("       info: %s\n", refinement_supplement().c_str());
    std::fflush(stdout);
    failed += !o.pass;
    if (o.pass == static_cast<bool>(expected.count(id))) {
      ++unexpected;
      if (o.pass) std::printf("       unexpected pass: criterion %d is listed in --expect-fail\n", id);
    }
  }
  std::printf("%d criterion(s) failed", failed);
  if (!expected.empty()) std::printf(", %d differ from the expected outcome", unexpected);
  std::printf("\n");
  return (expected.empty() ? failed : unexpected) == 0 ? 0 : 1;
}
