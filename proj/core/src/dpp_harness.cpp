#include "sdg/dpp_harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdg/error.hpp"

namespace sdg {

std::size_t ValueGrid::n_space() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

double ValueGrid::max_std_err() const {
  double m = 0.0;
  for (double s : std_errs) m = std::max(m, s);
  return m;
}

namespace {

// Cell of `v` on an increasing axis: index of the left node and the weight
// of the right one. Single-node axes only admit their node.
bool locate(const std::vector<double>& axis, double v, std::size_t& left, double& w) {
  const double lo = axis.front(), hi = axis.back();
  const double slack = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  if (!(v >= lo - slack && v <= hi + slack)) return false;
  if (axis.size() == 1) {
    left = 0;
    w = 0.0;
    return true;
  }
  const auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t j = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
  j = std::min(j, axis.size() - 2);
  left = j;
  w = std::clamp((v - axis[j]) / (axis[j + 1] - axis[j]), 0.0, 1.0);
  return true;
}

}  // namespace

double ValueGrid::interpolate(double t, ConstVec x) const {
  if (x.size() != axes.size()) throw Error(Errc::DimensionMismatch, "interpolation point dim");
  const std::size_t dims = axes.size() + 1;
  std::vector<std::size_t> left(dims);
  std::vector<double> w(dims);
  auto fail = [&] {
    std::ostringstream os;
    os << "point (t=" << t;
    for (double c : x) os << ", " << c;
    os << ") outside the value grid";
    throw Error(Errc::GridTooCoarse, os.str());
  };
  if (!locate(times, t, left[0], w[0])) fail();
  for (std::size_t c = 0; c < axes.size(); ++c)
    if (!locate(axes[c], x[c], left[c + 1], w[c + 1])) fail();

  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
    double weight = 1.0;
    std::size_t t_idx = 0, s_idx = 0;
    bool skip = false;
    for (std::size_t dim = 0; dim < dims; ++dim) {
      const bool up = (corner >> dim) & 1U;
      const double wd = up ? w[dim] : 1.0 - w[dim];
      if (wd == 0.0) {
        skip = true;
        break;
      }
      weight *= wd;
      const std::size_t idx = left[dim] + (up ? 1 : 0);
      if (dim == 0) t_idx = idx;
      else s_idx = s_idx * axes[dim - 1].size() + idx;
    }
    if (!skip) acc += weight * at(t_idx, s_idx);
  }
  return acc;
}

ValueGrid ValueGrid::tabulate(std::vector<double> times, std::vector<std::vector<double>> axes,
                              const std::function<double(double, ConstVec)>& fn) {
  ValueGrid g;
  g.times = std::move(times);
  g.axes = std::move(axes);
  const std::size_t ns = g.n_space();
  std::vector<double> x(g.axes.size());
  for (double t : g.times)
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t rem = s;
      for (std::size_t c = g.axes.size(); c-- > 0;) {
        x[c] = g.axes[c][rem % g.axes[c].size()];
        rem /= g.axes[c].size();
      }
      g.values.push_back(fn(t, x));
    }
  return g;
}

Sandwich build_sandwich(ValueGrid grid, double epsilon, double margin) {
  if (grid.times.empty() || grid.values.size() != grid.times.size() * grid.n_space())
    throw Error(Errc::EmptyGrid, "value grid is empty or inconsistent");
  for (const auto& axis : grid.axes)
    if (axis.empty() || !std::is_sorted(axis.begin(), axis.end()))
      throw Error(Errc::InvalidArgument, "value grid axes must be nonempty and increasing");
  if (!(epsilon > 0.0))
    throw Error(Errc::InvalidArgument, "epsilon must be > 0");
  if (epsilon < margin * grid.max_std_err())
    throw Error(Errc::InvalidArgument, "epsilon " + std::to_string(epsilon) + " below " +
                                           std::to_string(margin) + " x grid std_err " +
                                           std::to_string(grid.max_std_err()));
  return {std::move(grid), epsilon};
}

ValueGrid estimate_value_grid(Priority which, const CoefficientSet& cs, const ValueGridSpec& spec,
                              const StrategyClass& strategies, const ControlClass& controls,
                              const PathBundle& bundle, const BsdeOptions& opts) {
  if (spec.time_steps.empty() || spec.axes.size() != cs.k)
    throw Error(Errc::EmptyGrid, "value grid needs time steps and one axis per state coordinate");
  ValueGrid g;
  g.axes = spec.axes;
  const std::size_t ns = g.n_space();
  if (ns == 0) throw Error(Errc::EmptyGrid, "value grid axis is empty");
  std::vector<double> x(cs.k);
  for (std::size_t s : spec.time_steps) {
    if (s > bundle.grid().n_steps()) throw Error(Errc::GridMismatch, "value grid step beyond the bundle");
    const PathBundle sub = bundle.tail(s);
    g.times.push_back(sub.grid().t0());
    for (std::size_t j = 0; j < ns; ++j) {
      std::size_t rem = j;
      for (std::size_t c = cs.k; c-- > 0;) {
        x[c] = g.axes[c][rem % g.axes[c].size()];
        rem /= g.axes[c].size();
      }
      const ValueEstimate v = estimate(which, cs, x, strategies, controls, sub, opts);
      g.values.push_back(v.value);
      g.std_errs.push_back(v.std_err);
    }
  }
  return g;
}

ValueGridSpec sandwich_grid_spec(const TimeGrid& grid, ConstVec x, double delta, double half_width,
                                 std::size_t x_points, std::size_t t_stride) {
  if (x_points < 2 || t_stride < 1 || !(half_width > 0.0))
    throw Error(Errc::InvalidArgument, "sandwich grid needs x_points >= 2, t_stride >= 1, half_width > 0");
  const auto last = std::min(grid.n_steps(),
                             static_cast<std::size_t>(std::ceil(delta / grid.dt() - 1e-9)) + 1);
  ValueGridSpec spec;
  for (std::size_t s = 0;; s += t_stride) {
    spec.time_steps.push_back(std::min(s, grid.n_steps()));
    if (s >= last) break;
  }
  for (double c : x) {
    std::vector<double> axis(x_points);
    for (std::size_t j = 0; j < x_points; ++j)
      axis[j] = c - half_width + 2.0 * half_width * static_cast<double>(j) / static_cast<double>(x_points - 1);
    spec.axes.push_back(std::move(axis));
  }
  return spec;
}

namespace {

struct StoppedRun {
  PayoffEstimate lower, upper, lower_half, upper_half, payoff;
  double mean_tau_time = 0.0, space_fraction = 0.0, mean_abs_z = 0.0;
  std::size_t min_tau = 0, max_tau = 0;
};

StoppedRun stopped_pair(const CoefficientSet& cs, ConstVec x, double delta,
                        const FeedbackControl& control, const FeedbackStrategy& strategy,
                        Leader leader, const Sandwich& sw, const PathBundle& bundle,
                        const BsdeOptions& opts) {
  const ClosedLoopRun run = simulate_closed_loop(cs, x, control, strategy, bundle, leader);
  const TimeGrid& grid = bundle.grid();
  const std::size_t m = bundle.m_paths(), n = grid.n_steps();
  const ExitRecord ex = exit_time(run.state, x, delta);

  StoppedRun out;
  std::vector<double> base(m), eta(m);
  out.min_tau = n;
  double tau_sum = 0.0;
  std::size_t space = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t tau = ex.tau_idx[i];
    base[i] = sw.grid.interpolate(grid.time(tau), run.state.at(i, tau));
    tau_sum += grid.time(tau) - grid.t0();
    space += ex.exited_space[i];
    out.min_tau = std::min(out.min_tau, tau);
    out.max_tau = std::max(out.max_tau, tau);
    eta[i] = cs.terminal(run.state.at(i, n));
  }
  out.mean_tau_time = tau_sum / static_cast<double>(m);
  out.space_fraction = static_cast<double>(space) / static_cast<double>(m);

  BsdeOptions stopped = opts;
  stopped.stopped = true;
  const GeneratorCutoff cut{ex.tau_idx};
  auto solve_shifted = [&](double shift, bool record_z) {
    std::vector<double> term(m);
    for (std::size_t i = 0; i < m; ++i) term[i] = base[i] + shift;
    const BsdeSolution sol = solve_bsde(cs, run.state, run.mu, run.nu, term, cut, bundle, stopped);
    if (record_z) {
      double zsum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = ex.tau_idx[i]; k < n; ++k)
          for (double z : sol.z(i, k)) {
            zsum += std::abs(z);
            ++count;
          }
      out.mean_abs_z = count ? zsum / static_cast<double>(count) : 0.0;
    }
    return PayoffEstimate{sol.y0_mean(), sol.y0_std_err()};
  };
  out.lower = solve_shifted(-sw.epsilon, true);
  out.upper = solve_shifted(sw.epsilon, false);
  out.lower_half = solve_shifted(-0.5 * sw.epsilon, false);
  out.upper_half = solve_shifted(0.5 * sw.epsilon, false);
  const BsdeSolution full =
      solve_bsde(cs, run.state, run.mu, run.nu, eta, GeneratorCutoff::full(m, n), bundle, opts);
  out.payoff = {full.y0_mean(), full.y0_std_err()};
  return out;
}

// Min-max selection over a strategy-major table, ties to the lowest index.
std::pair<std::size_t, std::size_t> select(const std::vector<double>& table, std::size_t ns,
                                           std::size_t nc, bool outer_min) {
  std::size_t best_a = 0, best_b = 0;
  double best = 0.0;
  for (std::size_t a = 0; a < ns; ++a) {
    std::size_t ib = 0;
    double inner = table[a * nc];
    for (std::size_t b = 1; b < nc; ++b) {
      const double v = table[a * nc + b];
      if (outer_min ? v > inner : v < inner) {
        inner = v;
        ib = b;
      }
    }
    if (a == 0 || (outer_min ? inner < best : inner > best)) {
      best = inner;
      best_a = a;
      best_b = ib;
    }
  }
  return {best_a, best_b};
}

}  // namespace

DppReport check_dpp(Priority which, const CoefficientSet& cs, ConstVec x, double delta,
                    const StrategyClass& strategies, const ControlClass& controls,
                    const Sandwich& sandwich, const PathBundle& bundle, const BsdeOptions& opts) {
  check_class(strategies);
  check_class(controls);
  if (x.size() != cs.k) throw Error(Errc::DimensionMismatch, "start state dim != k");
  const double span = bundle.grid().T() - bundle.grid().t0();
  if (!(delta > 0.0 && delta < span)) throw Error(Errc::DeltaOutOfRange, "delta outside (0, T - t0)");
  const Leader leader = which == Priority::W1 ? Leader::PlayerTwo : Leader::PlayerOne;
  const bool outer_min = which == Priority::W1;
  const std::size_t ns = strategies.size(), nc = controls.size();

  DppReport rep;
  rep.which = which;
  rep.epsilon = sandwich.epsilon;
  rep.delta = delta;
  std::vector<double> lo(ns * nc), hi(ns * nc), lo_h(ns * nc), hi_h(ns * nc), pay(ns * nc);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < nc; ++b) {
      const StoppedRun r =
          stopped_pair(cs, x, delta, controls[b], strategies[a], leader, sandwich, bundle, opts);
      DppPair p;
      p.strategy = strategies[a].label;
      p.control = controls[b].label;
      p.lower = r.lower.value;
      p.lower_se = r.lower.std_err;
      p.upper = r.upper.value;
      p.upper_se = r.upper.std_err;
      p.lower_half = r.lower_half.value;
      p.upper_half = r.upper_half.value;
      p.payoff = r.payoff.value;
      p.payoff_se = r.payoff.std_err;
      p.mean_tau_time = r.mean_tau_time;
      p.space_exit_fraction = r.space_fraction;
      p.min_tau = r.min_tau;
      p.max_tau = r.max_tau;
      p.mean_abs_z_after_tau = r.mean_abs_z;
      const std::size_t e = a * nc + b;
      lo[e] = p.lower;
      hi[e] = p.upper;
      lo_h[e] = p.lower_half;
      hi_h[e] = p.upper_half;
      pay[e] = p.payoff;
      rep.per_pair.push_back(std::move(p));
    }

  auto pick = [&](const std::vector<double>& t) {
    const auto [a, b] = select(t, ns, nc, outer_min);
    return a * nc + b;
  };
  const std::size_t il = pick(lo), iu = pick(hi), iw = pick(pay);
  rep.lower = lo[il];
  rep.lower_se = rep.per_pair[il].lower_se;
  rep.upper = hi[iu];
  rep.upper_se = rep.per_pair[iu].upper_se;
  rep.lower_half = lo_h[pick(lo_h)];
  rep.upper_half = hi_h[pick(hi_h)];
  rep.w_hat = pay[iw];
  rep.w_hat_se = rep.per_pair[iw].payoff_se;
  const double pooled = std::max(std::hypot(rep.lower_se, rep.w_hat_se), std::hypot(rep.upper_se, rep.w_hat_se));
  rep.tol_mc = 4.0 * pooled;
  rep.eps_monotone = rep.lower <= rep.lower_half && rep.upper_half <= rep.upper;
  rep.pass = rep.lower - rep.tol_mc <= rep.w_hat && rep.w_hat <= rep.upper + rep.tol_mc &&
             rep.eps_monotone;
  return rep;
}

nlohmann::json to_json(const DppReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.per_pair)
    pairs.push_back({{"strategy", p.strategy},
                     {"control", p.control},
                     {"lower", p.lower},
                     {"lower_se", p.lower_se},
                     {"upper", p.upper},
                     {"upper_se", p.upper_se},
                     {"lower_half_eps", p.lower_half},
                     {"upper_half_eps", p.upper_half},
                     {"payoff", p.payoff},
                     {"payoff_se", p.payoff_se},
                     {"mean_tau_time", p.mean_tau_time},
                     {"space_exit_fraction", p.space_exit_fraction},
                     {"min_tau", p.min_tau},
                     {"max_tau", p.max_tau},
                     {"mean_abs_z_after_tau", p.mean_abs_z_after_tau}});
  return {{"value", r.which == Priority::W1 ? "w1" : "w2"},
          {"lower", r.lower},
          {"upper", r.upper},
          {"lower_half_eps", r.lower_half},
          {"upper_half_eps", r.upper_half},
          {"w_hat", r.w_hat},
          {"w_hat_se", r.w_hat_se},
          {"epsilon", r.epsilon},
          {"delta", r.delta},
          {"tol_mc", r.tol_mc},
          {"eps_monotone", r.eps_monotone},
          {"pass", r.pass},
          {"per_pair", pairs}};
}

}  // namespace sdg
