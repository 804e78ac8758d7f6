#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdg/mc_paths.hpp"
#include "sdg/model.hpp"

namespace sdg {

class StatePaths;

/// Open-loop control realisation: one value per (path, step), dim doubles each.
class ControlPath {
 public:
  ControlPath() = default;
  /// Every value is checked against the space (admissibility).
  ControlPath(TimeGrid grid, std::size_t m_paths, ControlSpace space, std::vector<double> values);
  /// Same value on every path and step.
  static ControlPath constant(const TimeGrid& grid, std::size_t m_paths, const ControlSpace& space,
                              ConstVec value);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t m_paths() const noexcept { return m_; }
  const ControlSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return space_.dim; }

  ConstVec at(std::size_t path, std::size_t step) const noexcept {
    return {values_.data() + (path * grid_.n_steps() + step) * space_.dim, space_.dim};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Steps [first, first + n_steps) on the matching window grid.
  ControlPath window(std::size_t first, std::size_t n_steps) const;

  bool operator==(const ControlPath& other) const;

 private:
  TimeGrid grid_;
  std::size_t m_ = 0;
  ControlSpace space_;
  std::vector<double> values_;
};

/// Feedback control (t, x) -> u.
struct FeedbackControl {
  std::string label;
  ControlSpace space;
  std::function<void(double t, ConstVec x, OutVec out)> map;
};

/// Instantaneous feedback strategy (t, x, opponent value) -> own value. Such
/// maps only see the current opponent value, so they are non-anticipative.
/// growth_c is the linear growth constant in gauge(out) <= kappa + c gauge(in).
struct FeedbackStrategy {
  std::string label;
  ControlSpace space;
  double growth_c = 0.0;
  std::function<void(double t, ConstVec x, ConstVec opponent, OutVec out)> map;
};

using ControlClass = std::vector<FeedbackControl>;
using StrategyClass = std::vector<FeedbackStrategy>;

/// InvalidArgument if empty or labels repeat.
void check_class(const ControlClass& controls);
void check_class(const StrategyClass& strategies);

/// out[i][k] = mu1[i][k] for k < tau[i], mu2[i][k] otherwise.
ControlPath paste_controls(const ControlPath& mu1, const ControlPath& mu2,
                           std::span<const std::size_t> tau);

struct PartitionItem {
  std::vector<std::uint8_t> mask;  // one flag per path
  const ControlPath* path = nullptr;
};

/// Recombines controls along a partition of the path set. NotAPartition names
/// the first path covered zero or several times.
ControlPath paste_by_partition(std::span<const PartitionItem> items);

/// v = v0 inside the open kappa-ball around u0, psi(t, u) outside it.
/// MissingNeutralizer when cs.psi is empty.
FeedbackStrategy neutralizer_strategy(const CoefficientSet& cs);
/// Player-one counterpart built from psi_tilde.
FeedbackStrategy neutralizer_strategy_tilde(const CoefficientSet& cs);

// ---------------------------------------------------------------------------
// Measurable selection of a zero of phi (scalar games)

struct NeutralizerConstruction {
  std::size_t bracket_points = 256;  // v-grid scanned for the first sign change
  double bisection_tol = 1e-10;
  std::size_t cell_samples_t = 8;  // 8 x 8 = 64 samples per dyadic cell
  std::size_t cell_samples_u = 8;
};

/// Smallest zero of v -> phi(t, u, v) on [-kappa|u|, kappa|u|].
/// NoZeroFound if there is no sign change there.
double smallest_zero(const PhiFn& phi, double kappa, double t, double u,
                     const NeutralizerConstruction& opts = {});

/// Dyadic piecewise-constant selections psi_1 <= ... <= psi_n.
class DyadicNeutralizer {
 public:
  DyadicNeutralizer(PhiFn phi, double kappa, double horizon, std::size_t n_levels,
                    NeutralizerConstruction opts = {});

  /// psi_n(t, u) for n = n_levels.
  double operator()(double t, double u) const;
  /// psi_1(t,u), ..., psi_{n_levels}(t,u).
  std::vector<double> levels(double t, double u) const;
  std::size_t n_levels() const noexcept { return n_levels_; }

 private:
  double cell_infimum(std::size_t level, double t, double u) const;

  PhiFn phi_;
  double kappa_;
  double horizon_;
  std::size_t n_levels_;
  NeutralizerConstruction opts_;
};

/// Returns psi_n as a plain function (t, u) -> v.
std::function<double(double, double)> construct_neutralizer(PhiFn phi, double kappa,
                                                             double horizon, std::size_t n_levels,
                                                             NeutralizerConstruction opts = {});

/// Copy of a scalar_phi coefficient set with psi (and psi_tilde when the
/// opponent-side sign condition holds) filled by the dyadic construction.
CoefficientSet attach_constructed_neutralizers(const CoefficientSet& cs, const PhiFn& phi,
                                               double horizon, std::size_t n_levels);

// ---------------------------------------------------------------------------

struct StrategyOutput {
  ControlPath path;
  double max_growth_ratio = 0.0;  // max of gauge(out) / (kappa + c gauge(in))
};

/// Opponent path out[i][k] = map(t_k, X[i][k], mu[i][k]). GrowthViolated with
/// the witness path/step if the growth bound fails.
StrategyOutput evaluate_strategy(const FeedbackStrategy& strategy, const ControlPath& control,
                                 const StatePaths& state, double kappa);

}  // namespace sdg
