#include "sdg/controls.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "sdg/error.hpp"
#include "sdg/sde_engine.hpp"

namespace sdg {

ControlPath::ControlPath(TimeGrid grid, std::size_t m_paths, ControlSpace space,
                         std::vector<double> values)
    : grid_(grid), m_(m_paths), space_(std::move(space)), values_(std::move(values)) {
  const std::size_t n = grid_.n_steps();
  if (values_.size() != m_ * n * space_.dim)
    throw Error(Errc::GridMismatch, "control buffer size does not match m*n*dim");
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (!space_.admissible(at(i, k)))
        throw Error(Errc::SpaceMismatch, "control value outside its space at path " +
                                             std::to_string(i) + " step " + std::to_string(k));
}

ControlPath ControlPath::constant(const TimeGrid& grid, std::size_t m_paths,
                                  const ControlSpace& space, ConstVec value) {
  if (value.size() != space.dim) throw Error(Errc::DimensionMismatch, "constant control dim");
  std::vector<double> values(m_paths * grid.n_steps() * space.dim);
  for (std::size_t at = 0; at < values.size(); at += space.dim)
    std::copy(value.begin(), value.end(), values.begin() + static_cast<std::ptrdiff_t>(at));
  return ControlPath(grid, m_paths, space, std::move(values));
}

ControlPath ControlPath::window(std::size_t first, std::size_t n_steps) const {
  const TimeGrid g = grid_.window(first, n_steps);
  const std::size_t n = grid_.n_steps(), dim = space_.dim;
  std::vector<double> values(m_ * n_steps * dim);
  for (std::size_t i = 0; i < m_; ++i)
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>((i * n + first) * dim),
                n_steps * dim, values.begin() + static_cast<std::ptrdiff_t>(i * n_steps * dim));
  return ControlPath(g, m_, space_, std::move(values));
}

bool ControlPath::operator==(const ControlPath& other) const {
  return grid_.same_nodes(other.grid_) && m_ == other.m_ && space_ == other.space_ &&
         values_ == other.values_;
}

namespace {
template <class Items>
void check_labels(const Items& items, const char* what) {
  if (items.empty()) throw Error(Errc::InvalidArgument, std::string(what) + " class is empty");
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!item.map) throw Error(Errc::InvalidArgument, std::string(what) + " '" + item.label + "' has no map");
    if (!seen.insert(item.label).second)
      throw Error(Errc::InvalidArgument, std::string(what) + " label repeated: " + item.label);
  }
}
}  // namespace

void check_class(const ControlClass& controls) { check_labels(controls, "control"); }
void check_class(const StrategyClass& strategies) { check_labels(strategies, "strategy"); }

ControlPath paste_controls(const ControlPath& mu1, const ControlPath& mu2,
                           std::span<const std::size_t> tau) {
  if (!mu1.grid().same_nodes(mu2.grid()) || mu1.m_paths() != mu2.m_paths())
    throw Error(Errc::GridMismatch, "pasted controls live on different grids");
  if (!(mu1.space() == mu2.space())) throw Error(Errc::SpaceMismatch, "pasted controls differ in space");
  const std::size_t m = mu1.m_paths(), n = mu1.grid().n_steps(), dim = mu1.dim();
  if (tau.size() != m) throw Error(Errc::GridMismatch, "tau needs one index per path");
  std::vector<double> values(m * n * dim);
  for (std::size_t i = 0; i < m; ++i) {
    if (tau[i] > n) throw Error(Errc::GridMismatch, "tau beyond the last step on path " + std::to_string(i));
    for (std::size_t k = 0; k < n; ++k) {
      const ConstVec src = k < tau[i] ? mu1.at(i, k) : mu2.at(i, k);
      std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>((i * n + k) * dim));
    }
  }
  return ControlPath(mu1.grid(), m, mu1.space(), std::move(values));
}

ControlPath paste_by_partition(std::span<const PartitionItem> items) {
  if (items.empty() || !items.front().path) throw Error(Errc::InvalidArgument, "empty partition");
  const ControlPath& ref = *items.front().path;
  const std::size_t m = ref.m_paths(), n = ref.grid().n_steps(), dim = ref.dim();
  for (const auto& item : items) {
    if (!item.path || !item.path->grid().same_nodes(ref.grid()) || item.path->m_paths() != m ||
        item.mask.size() != m)
      throw Error(Errc::GridMismatch, "partition items must share grid and path count");
    if (!(item.path->space() == ref.space())) throw Error(Errc::SpaceMismatch, "partition items differ in space");
  }
  std::vector<double> values(m * n * dim);
  for (std::size_t i = 0; i < m; ++i) {
    const PartitionItem* owner = nullptr;
    for (const auto& item : items) {
      if (!item.mask[i]) continue;
      if (owner) throw Error(Errc::NotAPartition, "path " + std::to_string(i) + " covered twice");
      owner = &item;
    }
    if (!owner) throw Error(Errc::NotAPartition, "path " + std::to_string(i) + " not covered");
    const auto& src = owner->path->values();
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(i * n * dim), n * dim,
                values.begin() + static_cast<std::ptrdiff_t>(i * n * dim));
  }
  return ControlPath(ref.grid(), m, ref.space(), std::move(values));
}

namespace {
FeedbackStrategy make_neutralizer(const NeutralizerFn& fn, const ControlSpace& own,
                                  const ControlSpace& response, double kappa, std::string label) {
  FeedbackStrategy s;
  s.label = std::move(label);
  s.space = response;
  s.growth_c = kappa;
  s.map = [fn, own, response, kappa](double t, ConstVec, ConstVec opponent, OutVec out) {
    if (own.gauge(opponent) < kappa) {
      std::copy(response.base_point.begin(), response.base_point.end(), out.begin());
    } else {
      fn(t, opponent, out);
    }
  };
  return s;
}
}  // namespace

FeedbackStrategy neutralizer_strategy(const CoefficientSet& cs) {
  if (!cs.psi) throw Error(Errc::MissingNeutralizer, cs.name + " has no psi");
  return make_neutralizer(cs.psi, cs.u_space, cs.v_space, cs.kappa, "neutralizer");
}

FeedbackStrategy neutralizer_strategy_tilde(const CoefficientSet& cs) {
  if (!cs.psi_tilde) throw Error(Errc::MissingNeutralizer, cs.name + " has no psi_tilde");
  return make_neutralizer(cs.psi_tilde, cs.v_space, cs.u_space, cs.kappa, "neutralizer");
}

// ---------------------------------------------------------------------------

double smallest_zero(const PhiFn& phi, double kappa, double t, double u,
                     const NeutralizerConstruction& opts) {
  const double radius = kappa * std::abs(u);
  if (radius == 0.0) {
    if (phi(t, u, 0.0) == 0.0) return 0.0;
    throw Error(Errc::NoZeroFound, "phi(t,u,0) != 0 at t=" + std::to_string(t) + " u=0");
  }
  const std::size_t n = std::max<std::size_t>(opts.bracket_points, 2);
  double lo = -radius;
  double f_lo = phi(t, u, lo);
  if (f_lo == 0.0) return lo;
  for (std::size_t i = 1; i <= n; ++i) {
    const double hi = i == n ? radius : -radius + 2.0 * radius * double(i) / double(n);
    const double f_hi = phi(t, u, hi);
    if (f_hi == 0.0) return hi;
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      // Bisection keeps the left-most root of the bracket.
      double a = lo, b = hi, fa = f_lo;
      while (b - a > opts.bisection_tol) {
        const double mid = 0.5 * (a + b);
        const double fm = phi(t, u, mid);
        if (fm == 0.0 || (fa < 0.0) != (fm < 0.0)) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    f_lo = f_hi;
  }
  std::ostringstream os;
  os << "no sign change of phi on [" << -radius << ", " << radius << "] at t=" << t << " u=" << u;
  throw Error(Errc::NoZeroFound, os.str());
}

DyadicNeutralizer::DyadicNeutralizer(PhiFn phi, double kappa, double horizon,
                                     std::size_t n_levels, NeutralizerConstruction opts)
    : phi_(std::move(phi)), kappa_(kappa), horizon_(horizon), n_levels_(n_levels), opts_(opts) {
  if (n_levels_ < 1) throw Error(Errc::InvalidArgument, "n_levels must be >= 1");
  if (!(horizon_ > 0.0)) throw Error(Errc::InvalidArgument, "horizon must be > 0");
  if (!phi_) throw Error(Errc::InvalidArgument, "phi is required");
}

double DyadicNeutralizer::cell_infimum(std::size_t level, double t, double u) const {
  const double cells = std::ldexp(1.0, static_cast<int>(level));
  const double t_width = horizon_ / cells;
  const double u_width = 1.0 / cells;
  // Time cells are [t_i, t_{i+1}) except the last one, which is closed at T.
  const double i = std::min(std::floor(std::clamp(t, 0.0, horizon_) / t_width), cells - 1.0);
  const double j = std::floor(u * cells);
  const double t_lo = i * t_width, u_lo = j * u_width;
  double best = INFINITY;
  // Samples include both cell edges, so for zeros monotone in (t, u) the
  // sampled infimum is the exact one on the closed cell.
  auto frac = [](std::size_t a, std::size_t n) { return n > 1 ? double(a) / double(n - 1) : 0.5; };
  for (std::size_t a = 0; a < opts_.cell_samples_t; ++a) {
    const double ts = t_lo + t_width * frac(a, opts_.cell_samples_t);
    for (std::size_t b = 0; b < opts_.cell_samples_u; ++b) {
      const double us = u_lo + u_width * frac(b, opts_.cell_samples_u);
      best = std::min(best, smallest_zero(phi_, kappa_, ts, us, opts_));
    }
  }
  return best;
}

std::vector<double> DyadicNeutralizer::levels(double t, double u) const {
  // Running maximum of the sampled cell infima: a sampled infimum can
  // overshoot the exact one, the running max restores psi_n <= psi_{n+1}.
  std::vector<double> out(n_levels_);
  double running = -INFINITY;
  for (std::size_t n = 1; n <= n_levels_; ++n) {
    running = std::max(running, cell_infimum(n, t, u));
    out[n - 1] = running;
  }
  return out;
}

double DyadicNeutralizer::operator()(double t, double u) const { return levels(t, u).back(); }

std::function<double(double, double)> construct_neutralizer(PhiFn phi, double kappa,
                                                             double horizon, std::size_t n_levels,
                                                             NeutralizerConstruction opts) {
  auto selection = std::make_shared<DyadicNeutralizer>(std::move(phi), kappa, horizon, n_levels, opts);
  return [selection](double t, double u) { return (*selection)(t, u); };
}

CoefficientSet attach_constructed_neutralizers(const CoefficientSet& cs, const PhiFn& phi,
                                               double horizon, std::size_t n_levels) {
  if (cs.u_space.dim != 1 || cs.v_space.dim != 1)
    throw Error(Errc::DimensionMismatch, "dyadic neutralizers need scalar controls");
  CoefficientSet out = cs;
  auto psi = construct_neutralizer(phi, cs.kappa, horizon, n_levels);
  out.psi = [psi](double t, ConstVec u, OutVec v) { v[0] = psi(t, u[0]); };
  if (!find_sign_violation(phi, cs.kappa, {}, SignSide::PlayerTwo)) {
    PhiFn swapped = [phi](double t, double v, double u) { return phi(t, u, v); };
    auto psi_tilde = construct_neutralizer(swapped, cs.kappa, horizon, n_levels);
    out.psi_tilde = [psi_tilde](double t, ConstVec v, OutVec u) { u[0] = psi_tilde(t, v[0]); };
  }
  return out;
}

// ---------------------------------------------------------------------------

StrategyOutput evaluate_strategy(const FeedbackStrategy& strategy, const ControlPath& control,
                                 const StatePaths& state, double kappa) {
  const std::size_t m = control.m_paths(), n = control.grid().n_steps();
  if (state.m_paths() != m || !state.grid().same_nodes(control.grid()))
    throw Error(Errc::GridMismatch, "strategy input shapes differ");
  const std::size_t dim = strategy.space.dim;
  std::vector<double> values(m * n * dim);
  StrategyOutput out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const OutVec dst(values.data() + (i * n + k) * dim, dim);
      const ConstVec u = control.at(i, k);
      strategy.map(control.grid().time(k), state.at(i, k), u, dst);
      const double limit = kappa + strategy.growth_c * control.space().gauge(u);
      const double g = strategy.space.gauge(dst);
      if (g > limit * (1.0 + 1e-12) + 1e-12)
        throw Error(Errc::GrowthViolated, "strategy '" + strategy.label + "' at path " +
                                              std::to_string(i) + " step " + std::to_string(k) +
                                              ": gauge " + std::to_string(g) + " > " +
                                              std::to_string(limit));
      out.max_growth_ratio = std::max(out.max_growth_ratio, limit > 0 ? g / limit : 0.0);
    }
  out.path = ControlPath(control.grid(), m, strategy.space, std::move(values));
  return out;
}

}  // namespace sdg
