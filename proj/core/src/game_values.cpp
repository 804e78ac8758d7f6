#include "sdg/game_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sdg/error.hpp"

namespace sdg {

PayoffEstimate pair_payoff(const CoefficientSet& cs, ConstVec x, const FeedbackControl& control,
                           const FeedbackStrategy& strategy, Leader leader,
                           const PathBundle& bundle, const BsdeOptions& opts) {
  if (x.size() != cs.k) throw Error(Errc::DimensionMismatch, "start state dim != k");
  const ClosedLoopRun run = simulate_closed_loop(cs, x, control, strategy, bundle, leader);
  const std::size_t m = bundle.m_paths(), n = bundle.grid().n_steps();
  std::vector<double> eta(m);
  for (std::size_t i = 0; i < m; ++i) eta[i] = cs.terminal(run.state.at(i, n));
  const BsdeSolution sol =
      solve_bsde(cs, run.state, run.mu, run.nu, eta, GeneratorCutoff::full(m, n), bundle, opts);
  return {sol.y0_mean(), sol.y0_std_err()};
}

namespace {

// outer_min: min over strategies of max over controls (w1); otherwise the
// mirror image (w2).
ValueEstimate minmax(const CoefficientSet& cs, ConstVec x, const StrategyClass& strategies,
                     const ControlClass& controls, const PathBundle& bundle,
                     const BsdeOptions& opts, Leader leader, bool outer_min) {
  check_class(strategies);
  check_class(controls);
  ValueEstimate est;
  est.t0 = bundle.grid().t0();
  est.x.assign(x.begin(), x.end());
  est.n_strategies = strategies.size();
  est.n_controls = controls.size();
  est.pair_values.resize(strategies.size() * controls.size());
  est.pair_std_errs.resize(est.pair_values.size());

  std::size_t best_a = 0, best_b = 0;
  double best = 0.0;
  for (std::size_t a = 0; a < strategies.size(); ++a) {
    std::size_t inner_b = 0;
    double inner = 0.0;
    for (std::size_t b = 0; b < controls.size(); ++b) {
      const PayoffEstimate pe = pair_payoff(cs, x, controls[b], strategies[a], leader, bundle, opts);
      est.pair_values[a * controls.size() + b] = pe.value;
      est.pair_std_errs[a * controls.size() + b] = pe.std_err;
      const bool better = outer_min ? pe.value > inner : pe.value < inner;
      if (b == 0 || better) {
        inner = pe.value;
        inner_b = b;
      }
    }
    const bool better = outer_min ? inner < best : inner > best;
    if (a == 0 || better) {
      best = inner;
      best_a = a;
      best_b = inner_b;
    }
  }
  est.value = best;
  est.std_err = est.pair_std_errs[best_a * controls.size() + best_b];
  est.argmin_strategy = strategies[best_a].label;
  est.argmax_control = controls[best_b].label;
  return est;
}

}  // namespace

ValueEstimate estimate_w1(const CoefficientSet& cs, ConstVec x, const StrategyClass& strategies,
                          const ControlClass& controls, const PathBundle& bundle,
                          const BsdeOptions& opts) {
  return minmax(cs, x, strategies, controls, bundle, opts, Leader::PlayerTwo, true);
}

ValueEstimate estimate_w2(const CoefficientSet& cs, ConstVec x, const StrategyClass& strategies,
                          const ControlClass& controls, const PathBundle& bundle,
                          const BsdeOptions& opts) {
  return minmax(cs, x, strategies, controls, bundle, opts, Leader::PlayerOne, false);
}

ValueEstimate estimate(Priority which, const CoefficientSet& cs, ConstVec x,
                       const StrategyClass& strategies, const ControlClass& controls,
                       const PathBundle& bundle, const BsdeOptions& opts) {
  return which == Priority::W1 ? estimate_w1(cs, x, strategies, controls, bundle, opts)
                               : estimate_w2(cs, x, strategies, controls, bundle, opts);
}

CoefficientSet negate_game(const CoefficientSet& cs) {
  CoefficientSet out = cs;
  out.name = "negated_" + cs.name;
  out.u_space = cs.v_space;
  out.v_space = cs.u_space;
  out.psi = cs.psi_tilde;
  out.psi_tilde = cs.psi;
  const DriftFn b = cs.drift;
  const DiffusionFn s = cs.diffusion;
  const GeneratorFn f = cs.generator;
  const TerminalFn g = cs.terminal;
  out.drift = [b](double t, ConstVec x, ConstVec u, ConstVec v, OutVec o) { b(t, x, v, u, o); };
  out.diffusion = [s](double t, ConstVec x, ConstVec u, ConstVec v, OutVec o) { s(t, x, v, u, o); };
  out.generator = [f](double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v) {
    double nz[kMaxControlDim];
    for (std::size_t j = 0; j < z.size(); ++j) nz[j] = -z[j];
    return -f(t, x, -y, ConstVec(nz, z.size()), v, u);
  };
  out.terminal = [g](ConstVec x) { return -g(x); };
  return out;
}

BoundsReport bounds_check(std::span<const BoundsPoint> points, const CoefficientSet& cs) {
  std::vector<double> norms;
  for (const auto& pt : points) norms.push_back(pt.x_norm);
  std::sort(norms.begin(), norms.end());
  if (std::unique(norms.begin(), norms.end()) - norms.begin() < 3)
    throw Error(Errc::InvalidArgument, "bounds_check needs at least three distinct |x|");

  const double e = cs.holder_exponent();
  const auto n = static_cast<double>(points.size());
  double mr = 0.0, ms = 0.0;
  for (const auto& pt : points) {
    mr += std::pow(pt.x_norm, e);
    ms += std::abs(pt.w1) + std::abs(pt.w2);
  }
  mr /= n;
  ms /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& pt : points) {
    const double r = std::pow(pt.x_norm, e) - mr;
    sxy += r * (std::abs(pt.w1) + std::abs(pt.w2) - ms);
    sxx += r * r;
  }
  BoundsReport rep;
  rep.c0 = sxy / sxx;
  rep.fitted_intercept = ms - rep.c0 * mr;
  rep.pass = true;
  double lift = 0.0;
  for (const auto& pt : points) {
    const double s = std::abs(pt.w1) + std::abs(pt.w2);
    const double env = rep.fitted_intercept + rep.c0 * std::pow(pt.x_norm, e);
    if (!std::isfinite(s)) rep.pass = false;
    const double excess = s - env;
    lift = std::max(lift, excess);
    const double scale = std::abs(env);
    if (excess > 0.1 * scale + 4.0 * std::hypot(pt.w1_se, pt.w2_se) + 1e-12) rep.pass = false;
    if (scale > 0.0) rep.max_excess = std::max(rep.max_excess, excess / scale);
    else if (excess > 0.0) rep.max_excess = std::numeric_limits<double>::infinity();
  }
  rep.c_kappa = rep.fitted_intercept + lift;
  return rep;
}

HolderReport holder_check(const CoefficientSet& cs, std::span<const HolderPair> pairs,
                          const StrategyClass& strategies, const ControlClass& controls,
                          const PathBundle& bundle, Priority which) {
  if (pairs.size() < 4) throw Error(Errc::InvalidArgument, "holder_check needs at least four pairs");
  const double e = cs.holder_exponent();
  std::vector<std::pair<double, double>> rows;
  for (const auto& pr : pairs) {
    if (pr.x1.size() != cs.k || pr.x2.size() != cs.k)
      throw Error(Errc::DimensionMismatch, "holder pair dim != k");
    double dist = 0.0;
    for (std::size_t c = 0; c < cs.k; ++c) dist += (pr.x1[c] - pr.x2[c]) * (pr.x1[c] - pr.x2[c]);
    dist = std::sqrt(dist);
    const double w1 = estimate(which, cs, pr.x1, strategies, controls, bundle).value;
    const double w2 = estimate(which, cs, pr.x2, strategies, controls, bundle).value;
    const double dw = std::abs(w1 - w2);
    rows.emplace_back(dist, dist > 0.0 ? dw / std::pow(dist, e) : dw);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  HolderReport rep;
  rep.pass = true;
  double prev = -1.0;
  for (const auto& [dist, ratio] : rows) {
    rep.distances.push_back(dist);
    rep.ratios.push_back(ratio);
    if (!std::isfinite(ratio)) rep.pass = false;
    if (dist == 0.0) {
      if (ratio != 0.0) rep.pass = false;
      continue;
    }
    rep.constant = std::max(rep.constant, ratio);
    if (prev >= 0.0 && ratio > 2.0 * prev + 1e-12) rep.pass = false;
    prev = ratio;
  }
  return rep;
}

DeterminismReport determinism_check(const CoefficientSet& cs, ConstVec x,
                                    const StrategyClass& strategies, const ControlClass& controls,
                                    const TimeGrid& grid, std::size_t m_paths,
                                    std::span<const std::uint64_t> seeds, Priority which) {
  if (seeds.size() < 3) throw Error(Errc::InvalidArgument, "determinism_check needs at least three seeds");
  DeterminismReport rep;
  double ss = 0.0;
  for (std::uint64_t seed : seeds) {
    const PathBundle b = generate(grid, cs.d, m_paths, seed);
    const ValueEstimate v = estimate(which, cs, x, strategies, controls, b);
    rep.values.push_back(v.value);
    rep.std_errs.push_back(v.std_err);
    ss += v.std_err * v.std_err;
  }
  const auto [lo, hi] = std::minmax_element(rep.values.begin(), rep.values.end());
  rep.spread = *hi - *lo;
  rep.pooled_std_err = std::sqrt(ss / static_cast<double>(seeds.size()));

  // Cameron-Martin shift supported on [0, t0]: invisible from t0 on.
  const double dt = grid.dt();
  const std::size_t n = grid.n_steps();
  const auto n_pre = grid.t0() >= dt ? static_cast<std::size_t>(std::floor(grid.t0() / dt + 1e-9)) : 0;
  const TimeGrid parent =
      TimeGrid::make(std::max(0.0, grid.t0() - static_cast<double>(n_pre) * dt), grid.T(), n_pre + n);
  const PathBundle base = generate(parent, cs.d, m_paths, seeds[0]);
  std::vector<double> h((n_pre + n + 1) * cs.d, 0.0);
  for (std::size_t j = 1; j <= n_pre + n; ++j)
    for (std::size_t c = 0; c < cs.d; ++c)
      h[j * cs.d + c] = 0.7 * static_cast<double>(std::min(j, n_pre)) / static_cast<double>(std::max<std::size_t>(n_pre, 1));
  const PathBundle shifted = shift_by(base, h);
  const ValueEstimate a = estimate(which, cs, x, strategies, controls, base.tail(n_pre));
  const ValueEstimate b = estimate(which, cs, x, strategies, controls, shifted.tail(n_pre));
  rep.shift_exact = a.value == b.value && a.std_err == b.std_err;
  rep.pass = rep.spread <= 4.0 * rep.pooled_std_err && rep.shift_exact;
  return rep;
}

}  // namespace sdg
