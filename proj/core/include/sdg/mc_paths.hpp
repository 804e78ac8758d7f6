#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace sdg {

/// Uniform time grid. A grid may be a window [first, first + n_steps] of a
/// parent grid over [origin, horizon]; node times are always computed from
/// the parent so restricted grids reproduce the parent's nodes bit-exactly.
class TimeGrid {
 public:
  TimeGrid() = default;

  /// Grid over [t0, T] with n_steps uniform steps.
  static TimeGrid make(double t0, double T, std::size_t n_steps);

  /// Window of n_steps steps starting at this grid's step `first`.
  TimeGrid window(std::size_t first, std::size_t n_steps) const;
  TimeGrid tail(std::size_t first) const { return window(first, n_steps_ - first); }
  TimeGrid head(std::size_t n_steps) const { return window(0, n_steps); }

  std::size_t n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t k) const noexcept;
  double t0() const noexcept { return time(0); }
  double T() const noexcept { return time(n_steps_); }

  /// Offset into the parent grid; equal offsets plus equal parents imply
  /// identical nodes.
  std::size_t first() const noexcept { return first_; }
  double origin() const noexcept { return origin_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t total_steps() const noexcept { return total_; }

  bool same_nodes(const TimeGrid& other) const noexcept;

 private:
  double origin_ = 0.0;
  double horizon_ = 1.0;
  std::size_t total_ = 1;
  std::size_t first_ = 0;
  std::size_t n_steps_ = 1;
  double dt_ = 1.0;
};

/// M Brownian paths on a grid: increments[i][k][c] ~ N(0, dt), stored
/// path-major. A deterministic shift overlay (common to all paths) supports
/// Cameron-Martin perturbations without touching the raw draws.
class PathBundle {
 public:
  PathBundle() = default;
  PathBundle(TimeGrid grid, std::size_t d, std::size_t m_paths, std::uint64_t seed,
             std::vector<double> raw);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t d() const noexcept { return d_; }
  std::size_t m_paths() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double increment(std::size_t path, std::size_t step, std::size_t coord) const noexcept {
    const double raw = raw_[(path * grid_.n_steps() + step) * d_ + coord];
    return shift_.empty() ? raw : raw + shift_[step * d_ + coord];
  }
  /// Copies the d increments of (path, step) into out.
  void increments(std::size_t path, std::size_t step, std::span<double> out) const noexcept;

  /// Bundle restricted to grid steps [first, first + n_steps), same paths.
  PathBundle window(std::size_t first, std::size_t n_steps) const;
  PathBundle tail(std::size_t first) const { return window(first, grid_.n_steps() - first); }

  /// First m paths.
  PathBundle slice_paths(std::size_t m) const;

  bool has_shift() const noexcept { return !shift_.empty(); }
  const std::vector<double>& shift() const noexcept { return shift_; }

  /// Effective increments (raw + shift), path-major.
  std::vector<double> materialize() const;

 private:
  friend PathBundle shift_by(const PathBundle&, std::span<const double>);

  TimeGrid grid_;
  std::size_t d_ = 0;
  std::size_t m_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> raw_;
  std::vector<double> shift_;  // n_steps * d, empty when never shifted
};

inline constexpr std::size_t kDefaultIncrementCap = 250'000'000;

/// Counter-based generation keyed by (seed, path, step, coord); identical
/// results for any worker count and for any prefix of the path range.
PathBundle generate(const TimeGrid& grid, std::size_t d, std::size_t m_paths, std::uint64_t seed,
                    std::size_t max_entries = kDefaultIncrementCap);

/// Adds h(t_{k+1}) - h(t_k) to every path's increment k. `h_nodes` holds
/// h at the n_steps+1 grid nodes, d values per node, with h(t0) = 0.
PathBundle shift_by(const PathBundle& bundle, std::span<const double> h_nodes);

/// Binary form: "SDGB1", u64 seed, u32 m_paths, u32 n_steps, u32 d,
/// f64 t0, f64 T, then effective f64 increments path-major. Little-endian.
void dump(const PathBundle& bundle, std::ostream& out);
PathBundle load(std::istream& in);

}  // namespace sdg
