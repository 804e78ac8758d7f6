#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdg/bsde_engine.hpp"
#include "sdg/game_values.hpp"

namespace sdg {

/// Value estimates on a tensor grid in (t, x). Values are stored time-major,
/// then state axes with the last axis fastest.
struct ValueGrid {
  std::vector<double> times;
  std::vector<std::vector<double>> axes;
  std::vector<double> values;
  std::vector<double> std_errs;  // same layout; may be empty

  std::size_t n_space() const;
  double at(std::size_t t_idx, std::size_t space_idx) const { return values[t_idx * n_space() + space_idx]; }
  double max_std_err() const;
  /// Multilinear interpolation. GridTooCoarse outside the grid's hull.
  double interpolate(double t, ConstVec x) const;

  static ValueGrid tabulate(std::vector<double> times, std::vector<std::vector<double>> axes,
                            const std::function<double(double, ConstVec)>& fn);
};

/// phi = interpolant - epsilon, phi_tilde = interpolant + epsilon.
struct Sandwich {
  ValueGrid grid;
  double epsilon = 0.0;
  double phi(double t, ConstVec x) const { return grid.interpolate(t, x) - epsilon; }
  double phi_tilde(double t, ConstVec x) const { return grid.interpolate(t, x) + epsilon; }
};

/// InvalidArgument unless epsilon > 0 and epsilon >= margin * max std_err.
Sandwich build_sandwich(ValueGrid grid, double epsilon, double margin = 3.0);

struct ValueGridSpec {
  std::vector<std::size_t> time_steps;  // node indices of the bundle grid
  std::vector<std::vector<double>> axes;
};

/// Grid covering the stopped region of check_dpp: time nodes every
/// `t_stride` steps up to the first node past t0 + delta, and `x_points`
/// nodes per axis on [x - half_width, x + half_width].
ValueGridSpec sandwich_grid_spec(const TimeGrid& grid, ConstVec x, double delta, double half_width,
                                 std::size_t x_points, std::size_t t_stride);

/// Value estimates at every node; node (t_s, x) uses the bundle's tail from
/// step s, so grid times are bundle grid nodes.
ValueGrid estimate_value_grid(Priority which, const CoefficientSet& cs, const ValueGridSpec& spec,
                              const StrategyClass& strategies, const ControlClass& controls,
                              const PathBundle& bundle, const BsdeOptions& opts = {});

struct DppPair {
  std::string strategy;
  std::string control;
  double lower = 0.0, lower_se = 0.0;
  double upper = 0.0, upper_se = 0.0;
  double lower_half = 0.0, upper_half = 0.0;  // same with epsilon / 2
  double payoff = 0.0, payoff_se = 0.0;       // unstopped J of the pair
  double mean_tau_time = 0.0;                 // mean of t_tau - t0
  double space_exit_fraction = 0.0;
  std::size_t min_tau = 0, max_tau = 0;
  double mean_abs_z_after_tau = 0.0;
};

struct DppReport {
  Priority which = Priority::W1;
  double lower = 0.0, lower_se = 0.0;
  double upper = 0.0, upper_se = 0.0;
  double lower_half = 0.0, upper_half = 0.0;
  double w_hat = 0.0, w_hat_se = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double tol_mc = 0.0;
  bool eps_monotone = false;  // the epsilon/2 bracket sits inside the epsilon bracket
  bool pass = false;
  std::vector<DppPair> per_pair;
};

/// Weak DPP bracket: for every pair simulate, stop at the exit time of the
/// (t, x)-ball of radius delta, solve the stopped BSDE with terminal
/// phi(tau, X_tau) (resp. phi_tilde) and generator cut at tau, then take the
/// same min-max as the value. Passes iff
///   lower - tol <= w_hat <= upper + tol,  tol = 4 * pooled std_err,
/// and the bracket widens with epsilon.
DppReport check_dpp(Priority which, const CoefficientSet& cs, ConstVec x, double delta,
                    const StrategyClass& strategies, const ControlClass& controls,
                    const Sandwich& sandwich, const PathBundle& bundle,
                    const BsdeOptions& opts = {});

inline DppReport check_dpp_w1(const CoefficientSet& cs, ConstVec x, double delta,
                              const StrategyClass& strategies, const ControlClass& controls,
                              const Sandwich& sandwich, const PathBundle& bundle,
                              const BsdeOptions& opts = {}) {
  return check_dpp(Priority::W1, cs, x, delta, strategies, controls, sandwich, bundle, opts);
}
inline DppReport check_dpp_w2(const CoefficientSet& cs, ConstVec x, double delta,
                              const StrategyClass& strategies, const ControlClass& controls,
                              const Sandwich& sandwich, const PathBundle& bundle,
                              const BsdeOptions& opts = {}) {
  return check_dpp(Priority::W2, cs, x, delta, strategies, controls, sandwich, bundle, opts);
}

nlohmann::json to_json(const DppReport& report);

}  // namespace sdg
