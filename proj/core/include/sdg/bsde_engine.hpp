#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdg/controls.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/model.hpp"
#include "sdg/regression.hpp"
#include "sdg/sde_engine.hpp"

namespace sdg {

/// Per-path index after which the generator is switched off (1_{k < tau}).
struct GeneratorCutoff {
  std::vector<std::size_t> tau_idx;

  /// tau = n_steps on every path: the generator is never cut.
  static GeneratorCutoff full(std::size_t m_paths, std::size_t n_steps) {
    return {std::vector<std::size_t>(m_paths, n_steps)};
  }
};

struct BsdeOptions {
  BasisSpec basis;
  /// Replaces cs.generator when set.
  GeneratorFn generator;
  /// Stopped mode: the terminal value is already known at tau, so paths with
  /// k >= tau keep Y = terminal and Z = 0, and regressions use only the
  /// paths still running. Without it, k >= tau is a plain projection.
  bool stopped = false;
};

/// (Y, Z) on the state grid. Y is m x (n+1), Z is m x n x d.
struct BsdeSolution {
  TimeGrid grid;
  std::size_t m_paths = 0;
  std::size_t d = 0;
  std::vector<double> Y;
  std::vector<double> Z;
  BasisSpec basis;
  std::size_t ridge_steps = 0;  // steps where the ridge fallback fired
  double max_lambda = 0.0;
  /// Realized pathwise payoff eta + sum_{k<tau} f_k dt; its sample spread
  /// is the Monte-Carlo error of the cross-path mean of Y_0.
  std::vector<double> realized;

  double y(std::size_t path, std::size_t step) const noexcept {
    return Y[path * (grid.n_steps() + 1) + step];
  }
  ConstVec z(std::size_t path, std::size_t step) const noexcept {
    return {Z.data() + (path * grid.n_steps() + step) * d, d};
  }
  double y0_mean() const;
  double y0_std_err() const;
};

/// Explicit regression Monte-Carlo backward scheme:
///   Y_N = terminal,
///   Yhat_k = E[Y_{k+1} | X_k],  Z_k = E[(Y_{k+1} - Yhat_k) dB_k | X_k] / dt,
///   Y_k = Yhat_k + 1_{k < tau} f(t_k, X_k, Yhat_k, Z_k, mu_k, nu_k) dt.
/// NonFiniteValue names the first offending (path, step).
BsdeSolution solve_bsde(const CoefficientSet& cs, const StatePaths& state, const ControlPath& mu,
                        const ControlPath& nu, ConstVec terminal, const GeneratorCutoff& cutoff,
                        const PathBundle& bundle, const BsdeOptions& opts = {});

struct PayoffEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

/// J = Y_t(T, g(X_T)) from a deterministic start x: forward simulation,
/// then solve_bsde with terminal g(X_T) and no cutoff.
PayoffEstimate payoff_J(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                        const ControlPath& nu, const PathBundle& bundle,
                        const BsdeOptions& opts = {});

/// |Y_t(T, g(X_T)) - Y_t(zeta, Y_zeta(T, g(X_T)))| where the outer solve
/// restarts on [t, zeta] from the zeta-layer of the full solution, reusing
/// the same projections. Exactly zero for the explicit scheme.
double semigroup_check(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                       const ControlPath& nu, const PathBundle& bundle, std::size_t zeta_idx,
                       const BsdeOptions& opts = {});

struct ComparisonResult {
  std::size_t violations = 0;
  std::size_t entries = 0;
  double fraction() const { return entries ? static_cast<double>(violations) / entries : 0.0; }
};

/// Solves with (eta1, f1) and (eta2, f2) on the same state and counts
/// (path, step) entries with Y1 > Y2 + tol.
ComparisonResult comparison_check(const CoefficientSet& cs, const StatePaths& state,
                                  const ControlPath& mu, const ControlPath& nu, ConstVec eta1,
                                  const GeneratorFn& f1, ConstVec eta2, const GeneratorFn& f2,
                                  const PathBundle& bundle, double tol = 0.0,
                                  const BasisSpec& basis = {});

struct StabilityRung {
  double size = 0.0;
  double eta_ratio = 0.0;  // E sup|dY|^q / E|d eta|^q
  double xi_ratio = 0.0;   // E sup|dY|^q / |d xi|^(2q/p)
};

struct StabilityReport {
  double q = 2.0;
  std::vector<StabilityRung> rungs;
  bool eta_pass = false;
  bool xi_pass = false;
  bool pass() const { return eta_pass && xi_pass; }
};

/// Ratio ladders for the terminal-data and initial-state stability
/// estimates. Terminal perturbation: eta2 = eta1 + r (1 + sin(X_T) / 2).
/// Initial perturbation: xi2 = xi1 + r along the first coordinate. A ladder
/// passes when adjacent ratios differ by less than a factor 2.
StabilityReport stability_checks(const CoefficientSet& cs, ConstVec x, const ControlPath& mu,
                                 const ControlPath& nu, const PathBundle& bundle,
                                 std::span<const double> ladder, double q = 2.0,
                                 const BsdeOptions& opts = {});

/// True when every adjacent pair of the (nonnegative) ratios differs by less
/// than `factor`; pairs of zeros count as equal.
bool ladder_bounded(std::span<const double> ratios, double factor = 2.0);

}  // namespace sdg
