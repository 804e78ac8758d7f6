#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdg/bsde_engine.hpp"
#include "sdg/controls.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/model.hpp"

namespace sdg {

struct ValueEstimate {
  double t0 = 0.0;
  std::vector<double> x;
  double value = 0.0;
  double std_err = 0.0;
  std::string argmin_strategy;  // w1: the minimizing strategy; w2: the maximizing strategy
  std::string argmax_control;   // w1: the maximizing control;  w2: the minimizing control
  std::size_t n_strategies = 0;
  std::size_t n_controls = 0;
  /// Payoff per (strategy, control) pair, strategy-major.
  std::vector<double> pair_values;
  std::vector<double> pair_std_errs;
};

/// Payoff of one closed-loop pair: the strategy answers the control at
/// every step (PlayerTwo: nu = beta(mu); PlayerOne: mu = alpha(nu)).
PayoffEstimate pair_payoff(const CoefficientSet& cs, ConstVec x, const FeedbackControl& control,
                           const FeedbackStrategy& strategy, Leader leader,
                           const PathBundle& bundle, const BsdeOptions& opts = {});

/// w1 = min over strategies beta of max over controls mu of J(mu, beta(mu)),
/// common random numbers for all pairs, ties to the lowest index.
ValueEstimate estimate_w1(const CoefficientSet& cs, ConstVec x, const StrategyClass& strategies,
                          const ControlClass& controls, const PathBundle& bundle,
                          const BsdeOptions& opts = {});

/// w2 = max over strategies alpha (player I) of min over controls nu in V
/// of J(alpha(nu), nu).
ValueEstimate estimate_w2(const CoefficientSet& cs, ConstVec x, const StrategyClass& strategies,
                          const ControlClass& controls, const PathBundle& bundle,
                          const BsdeOptions& opts = {});

/// Game with g -> -g, f(t,x,y,z,u,v) -> -f(t,x,-y,-z,v',u') and the players
/// swapped; w2 of the result is -w1 of the original.
CoefficientSet negate_game(const CoefficientSet& cs);

// ---------------------------------------------------------------------------

struct BoundsPoint {
  double x_norm = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double w1_se = 0.0;  // Monte-Carlo standard errors, 0 for exact values
  double w2_se = 0.0;
};

struct BoundsReport {
  double c_kappa = 0.0;  // least-squares intercept, raised so the envelope dominates
  double c0 = 0.0;
  double fitted_intercept = 0.0;
  double max_excess = 0.0;  // max of (|w1|+|w2|) - fitted envelope, relative to the envelope
  bool pass = false;
};

/// Fits |w1| + |w2| ~ c_kappa + c0 |x|^(2/p) over at least three distinct
/// |x|. Passes when every point lies below 110% of the least-squares
/// envelope, up to 4 standard errors of the point, and all values are finite.
BoundsReport bounds_check(std::span<const BoundsPoint> points, const CoefficientSet& cs);

enum class Priority { W1, W2 };

struct HolderPair {
  std::vector<double> x1;
  std::vector<double> x2;
};

struct HolderReport {
  std::vector<double> distances;
  std::vector<double> ratios;  // |dw| / |dx|^(2/p), sorted by distance
  double constant = 0.0;       // max ratio
  bool pass = false;
};

/// At least four pairs. Passes when the ratio never more than doubles from
/// one rung to the next.
HolderReport holder_check(const CoefficientSet& cs, std::span<const HolderPair> pairs,
                          const StrategyClass& strategies, const ControlClass& controls,
                          const PathBundle& bundle, Priority which = Priority::W1);

struct DeterminismReport {
  std::vector<double> values;
  std::vector<double> std_errs;
  double spread = 0.0;
  double pooled_std_err = 0.0;
  bool shift_exact = false;  // estimate unchanged by a shift supported before t0
  bool pass = false;
};

/// Recomputes the estimate for each seed (at least three) on the grid and
/// requires spread <= 4 * pooled std_err. Also generates the bundle on a
/// parent grid extended backwards from t0, shifts it on the segment before
/// t0 and checks the estimate on the [t0, T] window is unchanged bit-exact.
DeterminismReport determinism_check(const CoefficientSet& cs, ConstVec x,
                                    const StrategyClass& strategies, const ControlClass& controls,
                                    const TimeGrid& grid, std::size_t m_paths,
                                    std::span<const std::uint64_t> seeds,
                                    Priority which = Priority::W1);

ValueEstimate estimate(Priority which, const CoefficientSet& cs, ConstVec x,
                       const StrategyClass& strategies, const ControlClass& controls,
                       const PathBundle& bundle, const BsdeOptions& opts = {});

}  // namespace sdg
