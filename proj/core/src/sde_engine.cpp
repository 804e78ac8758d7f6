#include "sdg/sde_engine.hpp"

#include <algorithm>
#include <cmath>

#include "sdg/error.hpp"
#include "sdg/parallel.hpp"

namespace sdg {

StatePaths::StatePaths(TimeGrid grid, std::size_t m_paths, std::size_t k, std::vector<double> values)
    : grid_(grid), m_(m_paths), k_(k), values_(std::move(values)) {
  if (values_.size() != m_ * (grid_.n_steps() + 1) * k_)
    throw Error(Errc::GridMismatch, "state buffer size does not match m*(n+1)*k");
}

StatePaths StatePaths::window(std::size_t first, std::size_t n_steps) const {
  const TimeGrid g = grid_.window(first, n_steps);
  const std::size_t n = grid_.n_steps();
  std::vector<double> values(m_ * (n_steps + 1) * k_);
  for (std::size_t i = 0; i < m_; ++i)
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>((i * (n + 1) + first) * k_),
                (n_steps + 1) * k_,
                values.begin() + static_cast<std::ptrdiff_t>(i * (n_steps + 1) * k_));
  return StatePaths(g, m_, k_, std::move(values));
}

namespace {

void check_initial(const CoefficientSet& cs, ConstVec initial, std::size_t m) {
  if (initial.size() != cs.k && initial.size() != m * cs.k)
    throw Error(Errc::DimensionMismatch, "initial state needs k or m*k values");
}

ConstVec initial_of(ConstVec initial, std::size_t k, std::size_t path) {
  return initial.size() == k ? initial : initial.subspan(path * k, k);
}

// One Euler-Maruyama step. Kept in one place so replays are bit-identical.
struct EulerStep {
  const CoefficientSet& cs;
  std::vector<double> b, sigma, dB;

  explicit EulerStep(const CoefficientSet& c) : cs(c), b(c.k), sigma(c.k * c.d), dB(c.d) {}

  void operator()(double t, double dt, ConstVec x, ConstVec u, ConstVec v, const PathBundle& bundle,
                  std::size_t path, std::size_t step, OutVec next) {
    cs.drift(t, x, u, v, b);
    cs.diffusion(t, x, u, v, sigma);
    bundle.increments(path, step, dB);
    const std::size_t k = cs.k, d = cs.d;
    for (std::size_t c = 0; c < k; ++c) {
      double acc = b[c] * dt;
      for (std::size_t j = 0; j < d; ++j) acc += sigma[c * d + j] * dB[j];
      next[c] = x[c] + acc;
    }
  }
};

void check_finite(ConstVec x, std::size_t path, std::size_t step) {
  for (double c : x)
    if (!std::isfinite(c))
      throw Error(Errc::NonFiniteState,
                  "path " + std::to_string(path) + " step " + std::to_string(step));
}

}  // namespace

StatePaths simulate_forward(const CoefficientSet& cs, ConstVec initial, const ControlPath& mu,
                            const ControlPath& nu, const PathBundle& bundle) {
  const TimeGrid& grid = bundle.grid();
  const std::size_t m = bundle.m_paths(), n = grid.n_steps(), k = cs.k;
  if (bundle.d() != cs.d) throw Error(Errc::DimensionMismatch, "bundle noise dim != d");
  if (!mu.grid().same_nodes(grid) || !nu.grid().same_nodes(grid) || mu.m_paths() != m ||
      nu.m_paths() != m)
    throw Error(Errc::GridMismatch, "controls and bundle differ in grid or path count");
  if (mu.dim() != cs.u_space.dim || nu.dim() != cs.v_space.dim)
    throw Error(Errc::DimensionMismatch, "control dims differ from the coefficient set");
  check_initial(cs, initial, m);

  std::vector<double> values(m * (n + 1) * k);
  const double dt = grid.dt();
  parallel_chunks(m, [&](std::size_t, std::size_t begin, std::size_t end) {
    EulerStep step(cs);
    for (std::size_t i = begin; i < end; ++i) {
      double* row = values.data() + i * (n + 1) * k;
      const ConstVec x0 = initial_of(initial, k, i);
      std::copy(x0.begin(), x0.end(), row);
      for (std::size_t s = 0; s < n; ++s) {
        const ConstVec x(row + s * k, k);
        const OutVec next(row + (s + 1) * k, k);
        step(grid.time(s), dt, x, mu.at(i, s), nu.at(i, s), bundle, i, s, next);
        check_finite(next, i, s + 1);
      }
    }
  });
  return StatePaths(grid, m, k, std::move(values));
}

ClosedLoopRun simulate_closed_loop(const CoefficientSet& cs, ConstVec initial,
                                   const FeedbackControl& control,
                                   const FeedbackStrategy& strategy, const PathBundle& bundle,
                                   Leader leader) {
  const TimeGrid& grid = bundle.grid();
  const std::size_t m = bundle.m_paths(), n = grid.n_steps(), k = cs.k;
  if (bundle.d() != cs.d) throw Error(Errc::DimensionMismatch, "bundle noise dim != d");
  check_initial(cs, initial, m);
  const ControlSpace& u_space = leader == Leader::PlayerTwo ? control.space : strategy.space;
  const ControlSpace& v_space = leader == Leader::PlayerTwo ? strategy.space : control.space;
  if (u_space.dim != cs.u_space.dim || v_space.dim != cs.v_space.dim)
    throw Error(Errc::DimensionMismatch, "control/strategy dims differ from the coefficient set");
  const std::size_t du = u_space.dim, dv = v_space.dim;

  std::vector<double> xs(m * (n + 1) * k), us(m * n * du), vs(m * n * dv);
  const double dt = grid.dt();
  std::vector<double> chunk_ratio(chunk_count(m), 0.0);
  parallel_chunks(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    EulerStep step(cs);
    double worst = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      double* row = xs.data() + i * (n + 1) * k;
      const ConstVec x0 = initial_of(initial, k, i);
      std::copy(x0.begin(), x0.end(), row);
      for (std::size_t s = 0; s < n; ++s) {
        const double t = grid.time(s);
        const ConstVec x(row + s * k, k);
        const OutVec u(us.data() + (i * n + s) * du, du);
        const OutVec v(vs.data() + (i * n + s) * dv, dv);
        const OutVec lead = leader == Leader::PlayerTwo ? u : v;
        const OutVec reply = leader == Leader::PlayerTwo ? v : u;
        control.map(t, x, lead);
        strategy.map(t, x, lead, reply);
        const double limit = cs.kappa + strategy.growth_c * control.space.gauge(lead);
        const double g = strategy.space.gauge(reply);
        if (g > limit * (1.0 + 1e-12) + 1e-12)
          throw Error(Errc::GrowthViolated, "strategy '" + strategy.label + "' at path " +
                                                std::to_string(i) + " step " + std::to_string(s));
        if (limit > 0.0) worst = std::max(worst, g / limit);
        step(t, dt, x, u, v, bundle, i, s, OutVec(row + (s + 1) * k, k));
        check_finite(ConstVec(row + (s + 1) * k, k), i, s + 1);
      }
    }
    chunk_ratio[chunk] = worst;
  });

  ClosedLoopRun run;
  run.state = StatePaths(grid, m, k, std::move(xs));
  run.mu = ControlPath(grid, m, u_space, std::move(us));
  run.nu = ControlPath(grid, m, v_space, std::move(vs));
  for (double r : chunk_ratio) run.max_growth_ratio = std::max(run.max_growth_ratio, r);
  return run;
}

double restart_flow_check(const CoefficientSet& cs, ConstVec initial, const ControlPath& mu,
                          const ControlPath& nu, const PathBundle& bundle, std::size_t s_idx) {
  const std::size_t n = bundle.grid().n_steps(), m = bundle.m_paths(), k = cs.k;
  if (s_idx > n) throw Error(Errc::InvalidArgument, "restart index beyond the grid");
  const StatePaths full = simulate_forward(cs, initial, mu, nu, bundle);

  std::vector<double> restart_init(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    const ConstVec xs = full.at(i, s_idx);
    std::copy(xs.begin(), xs.end(), restart_init.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  const std::size_t tail = n - s_idx;
  const StatePaths restarted = simulate_forward(cs, restart_init, mu.window(s_idx, tail),
                                                nu.window(s_idx, tail), bundle.tail(s_idx));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= tail; ++j) {
      const ConstVec a = full.at(i, s_idx + j), b = restarted.at(i, j);
      for (std::size_t c = 0; c < k; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
    }
  return worst;
}

PastedDiscrepancy pasted_state_check(const CoefficientSet& cs, ConstVec initial,
                                     const ControlPath& mu, const ControlPath& mu_tilde,
                                     const ControlPath& nu, const ControlPath& nu_tilde,
                                     std::span<const std::size_t> tau,
                                     std::span<const std::uint8_t> mask, const PathBundle& bundle) {
  const std::size_t n = bundle.grid().n_steps(), m = bundle.m_paths(), k = cs.k;
  if (tau.size() != m || mask.size() != m)
    throw Error(Errc::GridMismatch, "tau and mask need one entry per path");
  auto same = [](ConstVec a, ConstVec b) { return std::equal(a.begin(), a.end(), b.begin()); };
  for (std::size_t i = 0; i < m; ++i) {
    if (tau[i] > n) throw Error(Errc::GridMismatch, "tau beyond the grid on path " + std::to_string(i));
    const std::size_t limit = mask[i] ? n : tau[i];
    for (std::size_t s = 0; s < limit; ++s)
      if (!same(mu.at(i, s), mu_tilde.at(i, s)) || !same(nu.at(i, s), nu_tilde.at(i, s)))
        throw Error(Errc::PreconditionViolated, "controls differ at path " + std::to_string(i) +
                                                    " step " + std::to_string(s));
  }
  const StatePaths a = simulate_forward(cs, initial, mu, nu, bundle);
  const StatePaths b = simulate_forward(cs, initial, mu_tilde, nu_tilde, bundle);
  PastedDiscrepancy out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t s = 0; s <= n; ++s) {
      const ConstVec xa = a.at(i, s), xb = b.at(i, s);
      double diff = 0.0;
      for (std::size_t c = 0; c < k; ++c) diff = std::max(diff, std::abs(xa[c] - xb[c]));
      if (s <= tau[i]) {
        out.before_tau = std::max(out.before_tau, diff);
      } else if (mask[i]) {
        out.after_tau_masked = std::max(out.after_tau_masked, diff);
      }
    }
  return out;
}

ExitRecord exit_time(const StatePaths& paths, ConstVec center_x, double delta) {
  const TimeGrid& grid = paths.grid();
  const double span = grid.T() - grid.t0();
  if (!(delta > 0.0 && delta < span))
    throw Error(Errc::DeltaOutOfRange, "delta=" + std::to_string(delta) + " outside (0, " +
                                           std::to_string(span) + ")");
  if (center_x.size() != paths.k()) throw Error(Errc::DimensionMismatch, "exit center dim");
  const std::size_t m = paths.m_paths(), n = grid.n_steps(), k = paths.k();
  ExitRecord rec;
  rec.tau_idx.assign(m, n);
  rec.exited_space.assign(m, 0);
  const double t0 = grid.t0();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t s = 1; s <= n; ++s) {
      const double dt = grid.time(s) - t0;
      const ConstVec x = paths.at(i, s);
      double sq = dt * dt;
      for (std::size_t c = 0; c < k; ++c) sq += (x[c] - center_x[c]) * (x[c] - center_x[c]);
      if (std::sqrt(sq) >= delta) {
        rec.tau_idx[i] = s;
        rec.exited_space[i] = dt < delta ? 1 : 0;
        break;
      }
    }
  return rec;
}

}  // namespace sdg
