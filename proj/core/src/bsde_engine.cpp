#include "sdg/bsde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdg/error.hpp"

namespace sdg {

double BsdeSolution::y0_mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < m_paths; ++i) s += y(i, 0);
  return s / static_cast<double>(m_paths);
}

double BsdeSolution::y0_std_err() const {
  const std::size_t m = realized.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double r : realized) mean += r;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double r : realized) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
}

BsdeSolution solve_bsde(const CoefficientSet& cs, const StatePaths& state, const ControlPath& mu,
                        const ControlPath& nu, ConstVec terminal, const GeneratorCutoff& cutoff,
                        const PathBundle& bundle, const BsdeOptions& opts) {
  const TimeGrid& grid = state.grid();
  const std::size_t m = state.m_paths(), n = grid.n_steps(), d = cs.d;
  if (!bundle.grid().same_nodes(grid) || bundle.m_paths() != m || !mu.grid().same_nodes(grid) ||
      !nu.grid().same_nodes(grid) || mu.m_paths() != m || nu.m_paths() != m)
    throw Error(Errc::GridMismatch, "state, controls and bundle differ in grid or path count");
  if (terminal.size() != m || cutoff.tau_idx.size() != m)
    throw Error(Errc::GridMismatch, "terminal and cutoff need one entry per path");
  for (std::size_t i = 0; i < m; ++i) {
    if (cutoff.tau_idx[i] > n) throw Error(Errc::GridMismatch, "cutoff beyond the grid");
    if (!std::isfinite(terminal[i]))
      throw Error(Errc::NonFiniteValue, "terminal value on path " + std::to_string(i));
  }
  const GeneratorFn& f = opts.generator ? opts.generator : cs.generator;

  BsdeSolution sol;
  sol.grid = grid;
  sol.m_paths = m;
  sol.d = d;
  sol.basis = opts.basis;
  sol.Y.assign(m * (n + 1), 0.0);
  sol.Z.assign(m * n * d, 0.0);
  sol.realized.assign(terminal.begin(), terminal.end());
  for (std::size_t i = 0; i < m; ++i) sol.Y[i * (n + 1) + n] = terminal[i];

  const double dt = grid.dt();
  const TerminalFn* g = cs.terminal ? &cs.terminal : nullptr;
  std::vector<double> next(m), yhat(m), target(m), zfit(m), fsum(m, 0.0);
  std::vector<std::uint8_t> active;

  for (std::size_t kk = n; kk-- > 0;) {
    std::span<const std::uint8_t> mask;
    if (opts.stopped) {
      active.assign(m, 0);
      for (std::size_t i = 0; i < m; ++i) active[i] = kk < cutoff.tau_idx[i] ? 1 : 0;
      mask = active;
    }
    const Projection proj(state, kk, g, opts.basis, mask);
    if (proj.used_ridge()) {
      ++sol.ridge_steps;
      sol.max_lambda = std::max(sol.max_lambda, proj.lambda());
    }
    for (std::size_t i = 0; i < m; ++i) next[i] = sol.Y[i * (n + 1) + kk + 1];
    proj.project(next, yhat);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t r : proj.rows())
        target[r] = (next[r] - yhat[r]) * bundle.increment(r, kk, j) / dt;
      proj.project(target, zfit);
      for (std::size_t r : proj.rows()) sol.Z[(r * n + kk) * d + j] = zfit[r];
    }
    const double t = grid.time(kk);
    for (std::size_t i = 0; i < m; ++i) {
      double& y = sol.Y[i * (n + 1) + kk];
      if (opts.stopped && !active[i]) {
        y = next[i];
        continue;
      }
      y = yhat[i];
      if (kk < cutoff.tau_idx[i]) {
        const double fv = f(t, state.at(i, kk), yhat[i], sol.z(i, kk), mu.at(i, kk), nu.at(i, kk));
        y += fv * dt;
        fsum[i] += fv * dt;
      }
      if (!std::isfinite(y))
        throw Error(Errc::NonFiniteValue, "path " + std::to_string(i) + " step " + std::to_string(kk));
    }
  }
  for (std::size_t i = 0; i < m; ++i) sol.realized[i] += fsum[i];
  return sol;
}

namespace {

std::vector<double> terminal_values(const CoefficientSet& cs, const StatePaths& state) {
  const std::size_t m = state.m_paths(), n = state.grid().n_steps();
  std::vector<double> eta(m);
  for (std::size_t i = 0; i < m; ++i) eta[i] = cs.terminal(state.at(i, n));
  return eta;
}

}  // namespace

PayoffEstimate payoff_J(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                        const ControlPath& nu, const PathBundle& bundle, const BsdeOptions& opts) {
  if (x.size() != cs.k) throw Error(Errc::DimensionMismatch, "payoff_J needs a single start state");
  const StatePaths state = simulate_forward(cs, x, mu, nu, bundle);
  const std::vector<double> eta = terminal_values(cs, state);
  const BsdeSolution sol = solve_bsde(cs, state, mu, nu, eta,
                                      GeneratorCutoff::full(state.m_paths(), state.grid().n_steps()),
                                      bundle, opts);
  return {sol.y0_mean(), sol.y0_std_err()};
}

double semigroup_check(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                       const ControlPath& nu, const PathBundle& bundle, std::size_t zeta_idx,
                       const BsdeOptions& opts) {
  const std::size_t n = bundle.grid().n_steps(), m = bundle.m_paths();
  if (zeta_idx > n) throw Error(Errc::InvalidArgument, "zeta beyond the grid");
  const StatePaths state = simulate_forward(cs, x, mu, nu, bundle);
  const std::vector<double> eta = terminal_values(cs, state);
  const BsdeSolution full =
      solve_bsde(cs, state, mu, nu, eta, GeneratorCutoff::full(m, n), bundle, opts);

  std::vector<double> mid(m);
  for (std::size_t i = 0; i < m; ++i) mid[i] = full.y(i, zeta_idx);
  const BsdeSolution outer =
      solve_bsde(cs, state.window(0, zeta_idx), mu.window(0, zeta_idx), nu.window(0, zeta_idx), mid,
                 GeneratorCutoff::full(m, zeta_idx), bundle.window(0, zeta_idx), opts);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(full.y(i, 0) - outer.y(i, 0)));
  return worst;
}

ComparisonResult comparison_check(const CoefficientSet& cs, const StatePaths& state,
                                  const ControlPath& mu, const ControlPath& nu, ConstVec eta1,
                                  const GeneratorFn& f1, ConstVec eta2, const GeneratorFn& f2,
                                  const PathBundle& bundle, double tol, const BasisSpec& basis) {
  const std::size_t m = state.m_paths(), n = state.grid().n_steps();
  const GeneratorCutoff cut = GeneratorCutoff::full(m, n);
  BsdeOptions o1{basis, f1, false}, o2{basis, f2, false};
  const BsdeSolution s1 = solve_bsde(cs, state, mu, nu, eta1, cut, bundle, o1);
  const BsdeSolution s2 = solve_bsde(cs, state, mu, nu, eta2, cut, bundle, o2);
  ComparisonResult out;
  out.entries = s1.Y.size();
  for (std::size_t e = 0; e < s1.Y.size(); ++e)
    if (s1.Y[e] > s2.Y[e] + tol) ++out.violations;
  return out;
}

bool ladder_bounded(std::span<const double> ratios, double factor) {
  for (std::size_t r = 1; r < ratios.size(); ++r) {
    const double a = ratios[r - 1], b = ratios[r];
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (hi == 0.0) continue;
    if (lo == 0.0 || hi / lo >= factor) return false;
  }
  return true;
}

StabilityReport stability_checks(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                                 const ControlPath& nu, const PathBundle& bundle,
                                 std::span<const double> ladder, double q,
                                 const BsdeOptions& opts) {
  if (x.size() != cs.k) throw Error(Errc::DimensionMismatch, "stability needs a single start state");
  const std::size_t m = bundle.m_paths(), n = bundle.grid().n_steps();
  const GeneratorCutoff cut = GeneratorCutoff::full(m, n);
  const StatePaths state = simulate_forward(cs, x, mu, nu, bundle);
  const std::vector<double> eta = terminal_values(cs, state);
  const BsdeSolution base = solve_bsde(cs, state, mu, nu, eta, cut, bundle, opts);

  auto sup_gap = [&](const BsdeSolution& other) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double sup = 0.0;
      for (std::size_t k = 0; k <= n; ++k) sup = std::max(sup, std::abs(base.y(i, k) - other.y(i, k)));
      acc += std::pow(sup, q);
    }
    return acc / static_cast<double>(m);
  };

  StabilityReport rep;
  rep.q = q;
  std::vector<double> eta_ratios, xi_ratios;
  for (double r : ladder) {
    StabilityRung rung;
    rung.size = r;

    std::vector<double> eta2(m);
    double den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      eta2[i] = eta[i] + r * (1.0 + 0.5 * std::sin(state.at(i, n)[0]));
      den += std::pow(std::abs(eta2[i] - eta[i]), q);
    }
    den /= static_cast<double>(m);
    const BsdeSolution pert = solve_bsde(cs, state, mu, nu, eta2, cut, bundle, opts);
    rung.eta_ratio = den > 0.0 ? sup_gap(pert) / den : 0.0;

    std::vector<double> x2(x.begin(), x.end());
    x2[0] += r;
    const StatePaths state2 = simulate_forward(cs, x2, mu, nu, bundle);
    const BsdeSolution moved =
        solve_bsde(cs, state2, mu, nu, terminal_values(cs, state2), cut, bundle, opts);
    const double xi_den = std::pow(std::abs(r), 2.0 * q / cs.p);
    rung.xi_ratio = xi_den > 0.0 ? sup_gap(moved) / xi_den : 0.0;

    eta_ratios.push_back(rung.eta_ratio);
    xi_ratios.push_back(rung.xi_ratio);
    rep.rungs.push_back(rung);
  }
  rep.eta_pass = ladder_bounded(eta_ratios);
  rep.xi_pass = ladder_bounded(xi_ratios);
  return rep;
}

}  // namespace sdg
