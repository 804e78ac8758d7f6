#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sdg/controls.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/model.hpp"

namespace sdg {

/// Simulated state: values[i][k] for k = 0..n_steps, k doubles each.
class StatePaths {
 public:
  StatePaths() = default;
  StatePaths(TimeGrid grid, std::size_t m_paths, std::size_t k, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t m_paths() const noexcept { return m_; }
  std::size_t k() const noexcept { return k_; }

  ConstVec at(std::size_t path, std::size_t step) const noexcept {
    return {values_.data() + (path * (grid_.n_steps() + 1) + step) * k_, k_};
  }
  ConstVec initial(std::size_t path) const noexcept { return at(path, 0); }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Nodes [first, first + n_steps] on the window grid.
  StatePaths window(std::size_t first, std::size_t n_steps) const;

 private:
  TimeGrid grid_;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::vector<double> values_;
};

/// Euler-Maruyama with open-loop controls. `initial` holds either one state
/// (k values, shared) or one state per path (m * k values).
/// NonFiniteState names the first (path, step) that blows up.
StatePaths simulate_forward(const CoefficientSet& cs, ConstVec initial, const ControlPath& mu,
                            const ControlPath& nu, const PathBundle& bundle);

/// Which player commits to the strategy.
enum class Leader {
  PlayerTwo,  // mu from a control, nu = beta(mu): the w1 game
  PlayerOne,  // nu from a control, mu = alpha(nu): the w2 game
};

struct ClosedLoopRun {
  StatePaths state;
  ControlPath mu;
  ControlPath nu;
  double max_growth_ratio = 0.0;
};

/// Joint simulation of a feedback control and a feedback strategy: at step k
/// the control sees (t_k, X_k), the strategy sees (t_k, X_k, control value).
/// GrowthViolated if the strategy breaks its growth bound.
ClosedLoopRun simulate_closed_loop(const CoefficientSet& cs, ConstVec initial,
                                   const FeedbackControl& control,
                                   const FeedbackStrategy& strategy, const PathBundle& bundle,
                                   Leader leader);

/// Simulates on the full grid, restarts from (t_s, X_s) with the restricted
/// controls and increments, and returns max |X - X_restart|.
double restart_flow_check(const CoefficientSet& cs, ConstVec initial, const ControlPath& mu,
                          const ControlPath& nu, const PathBundle& bundle, std::size_t s_idx);

struct PastedDiscrepancy {
  double before_tau = 0.0;         // all paths, nodes k <= tau[i]
  double after_tau_masked = 0.0;   // masked paths, nodes k > tau[i]
};

/// Compares X(mu, nu) with X(mu~, nu~) where the controls agree before tau
/// on every path and after tau on masked paths. PreconditionViolated if the
/// controls do not agree where required.
PastedDiscrepancy pasted_state_check(const CoefficientSet& cs, ConstVec initial,
                                     const ControlPath& mu, const ControlPath& mu_tilde,
                                     const ControlPath& nu, const ControlPath& nu_tilde,
                                     std::span<const std::size_t> tau,
                                     std::span<const std::uint8_t> mask, const PathBundle& bundle);

struct ExitRecord {
  std::vector<std::size_t> tau_idx;
  std::vector<std::uint8_t> exited_space;
};

/// First node k >= 1 with |(t_k - t0, X_k - x)| >= delta in (t, x)-space.
/// DeltaOutOfRange unless 0 < delta < T - t0.
ExitRecord exit_time(const StatePaths& paths, ConstVec center_x, double delta);

}  // namespace sdg
