#include "sdg/isaacs_pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdg/error.hpp"
#include "sdg/parallel.hpp"

namespace sdg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-4;

void require_scalar(const CoefficientSet& cs) {
  if (cs.k != 1 || cs.d != 1) throw Error(Errc::DimensionMismatch, "the PDE solver needs k = d = 1");
}

void require_grids(const ControlGrids& g) {
  if (g.u.empty() || g.v.empty()) throw Error(Errc::EmptyGrid, "control grids are empty");
}

struct Coeffs {
  double b, s;
};

Coeffs coeffs(const CoefficientSet& cs, double t, double x, const std::vector<double>& u,
              const std::vector<double>& v) {
  double b = 0.0, s = 0.0;
  cs.drift(t, ConstVec(&x, 1), u, v, OutVec(&b, 1));
  cs.diffusion(t, ConstVec(&x, 1), u, v, OutVec(&s, 1));
  return {b, s};
}

double h_pair(const CoefficientSet& cs, double t, double x, double y, double p, double gamma,
              const std::vector<double>& u, const std::vector<double>& v) {
  const Coeffs c = coeffs(cs, t, x, u, v);
  const double z = p * c.s;
  return 0.5 * c.s * c.s * gamma + p * c.b + cs.generator(t, ConstVec(&x, 1), y, ConstVec(&z, 1), u, v);
}

// Partial derivatives of f in y and z at (y, z) = (0, 0).
std::pair<double, double> f_slopes(const CoefficientSet& cs, double t, double x,
                                   const std::vector<double>& u, const std::vector<double>& v) {
  const ConstVec xs(&x, 1);
  const double zp = kFdStep, zm = -kFdStep, z0 = 0.0;
  const double fy = (cs.generator(t, xs, kFdStep, ConstVec(&z0, 1), u, v) -
                     cs.generator(t, xs, -kFdStep, ConstVec(&z0, 1), u, v)) / (2.0 * kFdStep);
  const double fz = (cs.generator(t, xs, 0.0, ConstVec(&zp, 1), u, v) -
                     cs.generator(t, xs, 0.0, ConstVec(&zm, 1), u, v)) / (2.0 * kFdStep);
  return {fy, fz};
}

struct Bounds {
  double sigma2 = 0.0;
  double alpha = 0.0;  // max |dH/dp|
  double bmax = 0.0;
  double smax = 0.0;
};

Bounds sample_bounds(const CoefficientSet& cs, const ControlGrids& g, double t0, double T,
                     const std::vector<double>& xs) {
  Bounds bd;
  for (double t : {t0, 0.5 * (t0 + T), T})
    for (double x : xs)
      for (const auto& u : g.u)
        for (const auto& v : g.v) {
          const Coeffs c = coeffs(cs, t, x, u, v);
          const double fz = f_slopes(cs, t, x, u, v).second;
          bd.sigma2 = std::max(bd.sigma2, c.s * c.s);
          bd.smax = std::max(bd.smax, std::abs(c.s));
          bd.bmax = std::max(bd.bmax, std::abs(c.b));
          bd.alpha = std::max(bd.alpha, std::abs(c.b + fz * c.s));
        }
  return bd;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) out[j] = a + h * static_cast<double>(j);
  return out;
}

struct Layout {
  double dx = 0.0;
  std::size_t pad_nodes = 0;
  std::vector<double> nodes;  // padded
  Bounds bounds;
  double theta = 0.0;
  double dt_cfl = 0.0;
  std::size_t n_t = 0;
};

Layout make_layout(const CoefficientSet& cs, const PdeSpec& spec, const ControlGrids& g) {
  if (!(spec.T > spec.t0) || !(spec.x_max > spec.x_min) || spec.n_x < 3)
    throw Error(Errc::InvalidArgument, "PDE spec needs t0 < T, x_min < x_max and n_x >= 3");
  Layout L;
  L.dx = (spec.x_max - spec.x_min) / static_cast<double>(spec.n_x - 1);
  const double horizon = spec.T - spec.t0;
  double pad = spec.pad;
  if (pad < 0.0) {
    const Bounds w = sample_bounds(cs, g, spec.t0, spec.T, linspace(spec.x_min, spec.x_max, spec.n_x));
    pad = 6.0 * w.smax * std::sqrt(horizon) + w.bmax * horizon + 3.0 * L.dx;
  }
  L.pad_nodes = static_cast<std::size_t>(std::ceil(pad / L.dx - 1e-9));
  const std::size_t n = spec.n_x + 2 * L.pad_nodes;
  L.nodes.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    L.nodes[j] = spec.x_min + L.dx * (static_cast<double>(j) - static_cast<double>(L.pad_nodes));
  L.bounds = sample_bounds(cs, g, spec.t0, spec.T, L.nodes);
  L.theta = 0.5 * L.bounds.alpha;
  L.dt_cfl = L.dx * L.dx / (L.bounds.sigma2 + 2.0 * L.theta * L.dx + cs.gamma * L.dx * L.dx);
  if (spec.n_t == 0) {
    L.n_t = static_cast<std::size_t>(std::ceil(horizon / L.dt_cfl - 1e-12));
  } else {
    L.n_t = spec.n_t;
    const double dt = horizon / static_cast<double>(spec.n_t);
    if (dt > L.dt_cfl * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "dt = " << dt << " exceeds the CFL bound " << L.dt_cfl;
      throw Error(Errc::CflViolated, msg.str());
    }
  }
  return L;
}

}  // namespace

double optimized_hamiltonian(const CoefficientSet& cs, PdeHamiltonian which,
                             const ControlGrids& g, double t, double x, double y, double p,
                             double gamma) {
  require_grids(g);
  if (which == PdeHamiltonian::SupInf) {
    double best = -kInf;
    for (const auto& u : g.u) {
      double inner = kInf;
      for (const auto& v : g.v) inner = std::min(inner, h_pair(cs, t, x, y, p, gamma, u, v));
      best = std::max(best, inner);
    }
    return best;
  }
  double best = kInf;
  for (const auto& v : g.v) {
    double inner = -kInf;
    for (const auto& u : g.u) inner = std::max(inner, h_pair(cs, t, x, y, p, gamma, u, v));
    best = std::min(best, inner);
  }
  return best;
}

double PdeGrid::interpolate(double t, double xq) const {
  const double slack = 1e-12;
  if (t < times.front() - slack || t > times.back() + slack || xq < x.front() - slack ||
      xq > x.back() + slack)
    throw Error(Errc::GridTooCoarse, "point outside the PDE window");
  auto locate = [](const std::vector<double>& axis, double q, double h) {
    const double r = std::clamp((q - axis.front()) / h, 0.0, static_cast<double>(axis.size() - 1));
    std::size_t i = std::min(static_cast<std::size_t>(r), axis.size() - 2);
    return std::pair<std::size_t, double>{i, r - static_cast<double>(i)};
  };
  const auto [k, a] = locate(times, t, dt);
  const auto [j, b] = locate(x, xq, dx);
  return (1 - a) * ((1 - b) * at(k, j) + b * at(k, j + 1)) +
         a * ((1 - b) * at(k + 1, j) + b * at(k + 1, j + 1));
}

PdeGrid solve_pde(const CoefficientSet& cs, const PdeSpec& spec, PdeHamiltonian which,
                  const ControlGrids& controls) {
  require_scalar(cs);
  require_grids(controls);
  const Layout L = make_layout(cs, spec, controls);
  const std::size_t n = L.nodes.size();
  const double dt = (spec.T - spec.t0) / static_cast<double>(L.n_t);
  const double dx = L.dx, theta = L.theta;

  PdeGrid out;
  out.x.assign(L.nodes.begin() + static_cast<std::ptrdiff_t>(L.pad_nodes),
               L.nodes.begin() + static_cast<std::ptrdiff_t>(L.pad_nodes + spec.n_x));
  const TimeGrid tg = TimeGrid::make(spec.t0, spec.T, L.n_t);
  out.times.resize(L.n_t + 1);
  for (std::size_t k = 0; k <= L.n_t; ++k) out.times[k] = tg.time(k);
  out.dt = dt;
  out.dx = dx;
  out.cfl_bound = L.dt_cfl;
  out.dissipation = theta;
  out.padded_nodes = n;
  out.values.resize((L.n_t + 1) * spec.n_x);

  std::vector<double> w(n), next(n), boundary(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = cs.terminal(ConstVec(&L.nodes[j], 1));
  boundary = w;
  auto store = [&](std::size_t k) {
    std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(L.pad_nodes), spec.n_x,
                out.values.begin() + static_cast<std::ptrdiff_t>(k * spec.n_x));
  };
  store(L.n_t);

  for (std::size_t k = L.n_t; k-- > 0;) {
    const double t = out.times[k + 1];
    parallel_chunks(
        n - 2,
        [&](std::size_t, std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t j = i + 1;
            const double p = (w[j + 1] - w[j - 1]) / (2.0 * dx);
            const double lap = w[j + 1] - 2.0 * w[j] + w[j - 1];
            const double H = optimized_hamiltonian(cs, which, controls, t, L.nodes[j], w[j], p, lap / (dx * dx));
            next[j] = w[j] + dt * (H + theta * lap / dx);
          }
        },
        64);
    next[0] = boundary[0];
    next[n - 1] = boundary[n - 1];
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(next[j])) {
        std::ostringstream msg;
        msg << "non-finite value at t = " << out.times[k] << ", x = " << L.nodes[j];
        throw Error(Errc::NonFiniteSolution, msg.str());
      }
    std::swap(w, next);
    store(k);
  }
  return out;
}

double monotonicity_margin(const CoefficientSet& cs, const PdeSpec& spec, const ControlGrids& g) {
  require_scalar(cs);
  require_grids(g);
  const Layout L = make_layout(cs, spec, g);
  const double dt = (spec.T - spec.t0) / static_cast<double>(L.n_t);
  const double dx = L.dx;
  double margin = kInf;
  for (double t : {spec.t0, 0.5 * (spec.t0 + spec.T), spec.T})
    for (double x : L.nodes)
      for (const auto& u : g.u)
        for (const auto& v : g.v) {
          const Coeffs c = coeffs(cs, t, x, u, v);
          const auto [fy, fz] = f_slopes(cs, t, x, u, v);
          const double drift = c.b + fz * c.s;
          const double diff = 0.5 * c.s * c.s / (dx * dx);
          const double side = L.theta / dx;
          const double plus = dt * (diff + drift / (2.0 * dx) + side);
          const double minus = dt * (diff - drift / (2.0 * dx) + side);
          const double centre = 1.0 - dt * (2.0 * diff + 2.0 * side) + dt * std::min(fy, 0.0);
          margin = std::min({margin, plus, minus, centre});
        }
  return margin;
}

namespace {

// Tensor quadratic through w[a][b] = w(t + (a-1) ht, x + (b-1) hx).
ViscosityReport fit_stencil(const CoefficientSet& cs, const double (&w)[3][3], double t, double x,
                            double ht, double hx, PdeHamiltonian which, const ControlGrids& g,
                            ViscositySide side, double tol) {
  ViscosityReport r;
  r.t = t;
  r.x = x;
  double row[3][3];  // row[a][j]: coefficient of b^j at time offset a
  for (int a = 0; a < 3; ++a) {
    row[a][0] = w[a][1];
    row[a][1] = (w[a][2] - w[a][0]) / (2.0 * hx);
    row[a][2] = (w[a][2] - 2.0 * w[a][1] + w[a][0]) / (2.0 * hx * hx);
  }
  for (int j = 0; j < 3; ++j) {
    r.coeffs[0][j] = row[1][j];
    r.coeffs[1][j] = (row[2][j] - row[0][j]) / (2.0 * ht);
    r.coeffs[2][j] = (row[2][j] - 2.0 * row[1][j] + row[0][j]) / (2.0 * ht * ht);
  }
  r.phi_t = r.coeffs[1][0];
  r.phi_x = r.coeffs[0][1];
  r.phi_xx = 2.0 * r.coeffs[0][2];
  r.residual = -r.phi_t - optimized_hamiltonian(cs, which, g, t, x, r.coeffs[0][0], r.phi_x, r.phi_xx);
  r.side = side;
  r.tol = tol;
  r.pass = side == ViscositySide::Sub ? r.residual <= tol : r.residual >= -tol;
  return r;
}

}  // namespace

ViscosityReport viscosity_residual(const CoefficientSet& cs, const PdeGrid& grid, std::size_t k,
                                   std::size_t j, PdeHamiltonian which, const ControlGrids& controls,
                                   ViscositySide side, double tol) {
  require_scalar(cs);
  if (k == 0 || k >= grid.n_t() || j == 0 || j + 1 >= grid.n_x()) {
    std::ostringstream msg;
    msg << "node (" << k << ", " << j << ") is not interior";
    throw Error(Errc::BoundaryPoint, msg.str());
  }
  double w[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) w[a][b] = grid.at(k + a - 1, j + b - 1);
  return fit_stencil(cs, w, grid.times[k], grid.x[j], grid.dt, grid.dx, which, controls, side, tol);
}

ViscosityReport viscosity_residual(const CoefficientSet& cs,
                                   const std::function<double(double, double)>& fn, double t,
                                   double x, PdeHamiltonian which, const ControlGrids& controls,
                                   ViscositySide side, double tol, double h) {
  require_scalar(cs);
  if (!(h > 0.0)) throw Error(Errc::InvalidArgument, "stencil half-width must be positive");
  double w[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) w[a][b] = fn(t + (a - 1) * h, x + (b - 1) * h);
  return fit_stencil(cs, w, t, x, h, h, which, controls, side, tol);
}

CrossValidation cross_validate(const CoefficientSet& cs, double x, const StrategyClass& strategies,
                               const ControlClass& controls, const PathBundle& bundle,
                               const PdeSpec& spec, const ControlGrids& grids) {
  require_scalar(cs);
  PdeSpec s = spec;
  s.t0 = bundle.grid().t0();
  s.T = bundle.grid().T();
  const ValueEstimate mc = estimate_w1(cs, ConstVec(&x, 1), strategies, controls, bundle);
  const PdeGrid pde = solve_pde(cs, s, PdeHamiltonian::SupInf, grids);
  CrossValidation cv;
  cv.mc_value = mc.value;
  cv.mc_std_err = mc.std_err;
  cv.pde_value = pde.interpolate(s.t0, x);
  cv.gap = std::abs(cv.mc_value - cv.pde_value);
  cv.tol = 4.0 * cv.mc_std_err + 5.0 * (pde.dx + pde.dt);
  cv.pass = cv.gap < cv.tol;
  return cv;
}

}  // namespace sdg
