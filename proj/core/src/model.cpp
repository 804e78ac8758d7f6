#include "sdg/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "sdg/error.hpp"
#include "sdg/rng.hpp"

namespace sdg {

ControlSpace ControlSpace::euclidean(std::size_t dim, std::optional<double> bound) {
  if (dim == 0 || dim > kMaxControlDim)
    throw Error(Errc::InvalidArgument, "control dimension must be in [1, 16]");
  ControlSpace s;
  s.dim = dim;
  s.base_point.assign(dim, 0.0);
  s.bound = bound;
  return s;
}

double ControlSpace::gauge(ConstVec value) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double diff = value[i] - base_point[i];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

bool ControlSpace::admissible(ConstVec value, double slack) const {
  if (value.size() != dim) return false;
  for (double c : value)
    if (!std::isfinite(c)) return false;
  return !bound || gauge(value) <= *bound + slack;
}

void CoefficientSet::check_structure() const {
  if (k == 0 || d == 0) throw Error(Errc::InvalidArgument, name + ": k and d must be >= 1");
  if (!drift || !diffusion || !generator || !terminal)
    throw Error(Errc::InvalidArgument, name + ": b, sigma, f and g are all required");
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, name + ": gamma must be > 0");
  if (!(kappa > 0.0)) throw Error(Errc::InvalidArgument, name + ": kappa must be > 0");
  if (!(p > 1.0 && p <= 2.0)) throw Error(Errc::InvalidArgument, name + ": p must be in (1, 2]");
  if (u_space.base_point.size() != u_space.dim || v_space.base_point.size() != v_space.dim)
    throw Error(Errc::DimensionMismatch, name + ": base point dimension");
}

bool ValidationReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

const ValidationEntry* ValidationReport::find(const std::string& assumption) const {
  for (const auto& e : entries)
    if (e.assumption == assumption) return &e;
  return nullptr;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// Cartesian product of `axis` over dim coordinates, each shifted by center.
std::vector<std::vector<double>> product_points(const std::vector<double>& axis, std::size_t dim,
                                                const std::vector<double>& center) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    std::vector<double> p(dim);
    for (std::size_t c = 0; c < dim; ++c) p[c] = center[c] + axis[idx[c]];
    out.push_back(std::move(p));
    std::size_t c = 0;
    while (c < dim && ++idx[c] == axis.size()) idx[c++] = 0;
    if (c == dim) break;
  }
  return out;
}

double norm(ConstVec a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double dist(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string fmt_vec(ConstVec v) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

ValidationEntry make_entry(std::string name) {
  ValidationEntry e;
  e.assumption = std::move(name);
  return e;
}

struct Tracker {
  ValidationEntry entry;
  void observe(double lhs, double rhs, const std::function<std::string()>& witness) {
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
    const bool ok = lhs <= rhs;
    if (!ok && entry.pass) {
      entry.pass = false;
      entry.witness = witness();
    }
    if (ratio > entry.worst_ratio) {
      entry.worst_ratio = ratio;
      if (entry.pass) entry.witness = witness();
    }
  }
};

// Evaluates coefficients with finiteness checks.
class Probe {
 public:
  explicit Probe(const CoefficientSet& cs)
      : cs_(cs), b_(cs.k), sigma_(cs.k * cs.d) {}

  ConstVec drift(double t, ConstVec x, ConstVec u, ConstVec v) {
    cs_.drift(t, x, u, v, b_);
    check(b_, "b", t, x, u, v);
    return b_;
  }
  ConstVec diffusion(double t, ConstVec x, ConstVec u, ConstVec v) {
    cs_.diffusion(t, x, u, v, sigma_);
    check(sigma_, "sigma", t, x, u, v);
    return sigma_;
  }
  double generator(double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v) {
    const double f = cs_.generator(t, x, y, z, u, v);
    if (!std::isfinite(f))
      throw Error(Errc::NonFiniteCoefficient, "f at t=" + std::to_string(t) + " x=" + fmt_vec(x));
    return f;
  }
  double terminal(ConstVec x) {
    const double g = cs_.terminal(x);
    if (!std::isfinite(g)) throw Error(Errc::NonFiniteCoefficient, "g at x=" + fmt_vec(x));
    return g;
  }

 private:
  void check(ConstVec out, const char* what, double t, ConstVec x, ConstVec u, ConstVec v) const {
    for (double c : out)
      if (!std::isfinite(c))
        throw Error(Errc::NonFiniteCoefficient, std::string(what) + " at t=" + std::to_string(t) +
                                                    " x=" + fmt_vec(x) + " u=" + fmt_vec(u) +
                                                    " v=" + fmt_vec(v));
  }

  const CoefficientSet& cs_;
  std::vector<double> b_;
  std::vector<double> sigma_;
};

// Relative tolerance for sampled equalities.
constexpr double kEqualityTol = 1e-9;

}  // namespace

ValidationGrid ValidationGrid::box(const CoefficientSet& cs, double T, double x_radius,
                                   double control_radius, std::size_t per_axis) {
  ValidationGrid g;
  g.times = linspace(0.0, T, 3);
  const auto x_axis = linspace(-x_radius, x_radius, per_axis);
  g.states = product_points(x_axis, cs.k, std::vector<double>(cs.k, 0.0));
  auto clip = [](const ControlSpace& s, double r) { return s.bound ? std::min(r, *s.bound / std::sqrt(double(s.dim))) : r; };
  g.us = product_points(linspace(-clip(cs.u_space, control_radius), clip(cs.u_space, control_radius), per_axis),
                        cs.u_space.dim, cs.u_space.base_point);
  g.vs = product_points(linspace(-clip(cs.v_space, control_radius), clip(cs.v_space, control_radius), per_axis),
                        cs.v_space.dim, cs.v_space.base_point);
  g.zs = product_points(linspace(-1.0, 1.0, 3), cs.d, std::vector<double>(cs.d, 0.0));
  return g;
}

ValidationReport validate_coefficients(const CoefficientSet& cs, const ValidationGrid& grid_in) {
  cs.check_structure();
  if (grid_in.times.empty() || grid_in.states.empty() || grid_in.us.empty() || grid_in.vs.empty())
    throw Error(Errc::EmptyGrid, "validation grid needs times, states and controls");

  ValidationGrid grid = grid_in;
  if (grid.zs.empty()) grid.zs.push_back(std::vector<double>(cs.d, 0.0));
  if (grid.ys.empty()) grid.ys.push_back(0.0);

  // Random points inside the bounding box of the declared samples.
  auto box_sample = [&](const std::vector<std::vector<double>>& pts, std::size_t salt) {
    const std::size_t dim = pts.front().size();
    std::vector<double> lo(dim, INFINITY), hi(dim, -INFINITY);
    for (const auto& p : pts)
      for (std::size_t c = 0; c < dim; ++c) {
        lo[c] = std::min(lo[c], p[c]);
        hi[c] = std::max(hi[c], p[c]);
      }
    std::vector<double> out(dim);
    for (std::size_t c = 0; c < dim; ++c)
      out[c] = lo[c] + (hi[c] - lo[c]) * uniform01(grid.seed, salt * 131 + c);
    return out;
  };
  const double t_lo = *std::min_element(grid.times.begin(), grid.times.end());
  const double t_hi = *std::max_element(grid.times.begin(), grid.times.end());
  std::vector<std::vector<double>> extra_states;
  for (std::size_t r = 0; r < grid.random_points; ++r) {
    extra_states.push_back(box_sample(grid.states, 4 * r));
    grid.us.push_back(box_sample(grid_in.us, 4 * r + 1));
    grid.vs.push_back(box_sample(grid_in.vs, 4 * r + 2));
    grid.times.push_back(t_lo + (t_hi - t_lo) * uniform01(grid.seed, 4 * r + 3));
  }
  // State pairs: neighbours in declaration order plus random pairs.
  std::vector<std::pair<std::vector<double>, std::vector<double>>> state_pairs;
  for (std::size_t i = 0; i + 1 < grid.states.size(); ++i)
    state_pairs.emplace_back(grid.states[i], grid.states[i + 1]);
  for (std::size_t i = 0; i + 1 < extra_states.size(); i += 2)
    state_pairs.emplace_back(extra_states[i], extra_states[i + 1]);
  for (const auto& s : extra_states) grid.states.push_back(s);

  const double q = cs.holder_exponent();
  const std::vector<double> zero_x(cs.k, 0.0), zero_z(cs.d, 0.0);
  Probe probe(cs);
  ValidationReport report;

  // Linear growth of b and sigma at x = 0.
  Tracker growth{make_entry("growth_b_sigma")};
  Tracker lip{make_entry("lipschitz_b_sigma")};
  Tracker growth_f{make_entry("growth_f")};
  Tracker lip_f{make_entry("lipschitz_f")};
  std::vector<double> b1(cs.k), s1(cs.k * cs.d);
  for (double t : grid.times)
    for (const auto& u : grid.us)
      for (const auto& v : grid.vs) {
        const double gu = cs.u_space.gauge(u), gv = cs.v_space.gauge(v);
        const double lhs = norm(probe.drift(t, zero_x, u, v)) + norm(probe.diffusion(t, zero_x, u, v));
        growth.observe(lhs, cs.gamma * (1.0 + gu + gv), [&] {
          return "t=" + std::to_string(t) + " u=" + fmt_vec(u) + " v=" + fmt_vec(v);
        });

        const double f0 = std::abs(probe.generator(t, zero_x, 0.0, zero_z, u, v));
        growth_f.observe(f0, cs.gamma * (1.0 + std::pow(gu, q) + std::pow(gv, q)), [&] {
          return "t=" + std::to_string(t) + " u=" + fmt_vec(u) + " v=" + fmt_vec(v);
        });

        for (const auto& [xa, xb] : state_pairs) {
          const double dx = dist(xa, xb);
          if (dx == 0.0) continue;
          auto ba = probe.drift(t, xa, u, v);
          std::copy(ba.begin(), ba.end(), b1.begin());
          auto sa = probe.diffusion(t, xa, u, v);
          std::copy(sa.begin(), sa.end(), s1.begin());
          const double db = dist(b1, probe.drift(t, xb, u, v));
          const double ds = dist(s1, probe.diffusion(t, xb, u, v));
          lip.observe(db + ds, cs.gamma * dx, [&] {
            return "t=" + std::to_string(t) + " x=" + fmt_vec(xa) + " x'=" + fmt_vec(xb) +
                   " u=" + fmt_vec(u) + " v=" + fmt_vec(v);
          });
        }

        // f: (x, y, z) pairs built from neighbouring states and the y/z samples.
        for (std::size_t i = 0; i < state_pairs.size(); ++i) {
          const auto& [xa, xb] = state_pairs[i];
          const double ya = grid.ys[i % grid.ys.size()], yb = grid.ys[(i + 1) % grid.ys.size()];
          const auto& za = grid.zs[i % grid.zs.size()];
          const auto& zb = grid.zs[(i + 1) % grid.zs.size()];
          const double df = std::abs(probe.generator(t, xa, ya, za, u, v) -
                                     probe.generator(t, xb, yb, zb, u, v));
          const double rhs = cs.gamma * (std::pow(dist(xa, xb), q) + std::abs(ya - yb) + dist(za, zb));
          lip_f.observe(df, rhs, [&] {
            return "t=" + std::to_string(t) + " x=" + fmt_vec(xa) + " x'=" + fmt_vec(xb) +
                   " y=" + std::to_string(ya) + " y'=" + std::to_string(yb);
          });
        }
      }

  Tracker holder_g{make_entry("holder_g")};
  for (const auto& [xa, xb] : state_pairs) {
    const double dx = dist(xa, xb);
    if (dx == 0.0) continue;
    holder_g.observe(std::abs(probe.terminal(xa) - probe.terminal(xb)), cs.gamma * std::pow(dx, q),
                     [&] { return "x=" + fmt_vec(xa) + " x'=" + fmt_vec(xb); });
  }

  report.entries = {growth.entry, lip.entry, holder_g.entry, growth_f.entry, lip_f.entry};

  // Neutralizers: coefficients along (u, psi(t,u)) must not depend on u once
  // u leaves the kappa-ball, and the response obeys the growth bound.
  auto check_neutralizer = [&](const char* label, const NeutralizerFn& fn, bool own_is_u) {
    const ControlSpace& own_space = own_is_u ? cs.u_space : cs.v_space;
    const ControlSpace& other_space = own_is_u ? cs.v_space : cs.u_space;
    const auto& own_samples = own_is_u ? grid.us : grid.vs;
    std::vector<std::vector<double>> outside;
    for (const auto& w : own_samples)
      if (own_space.gauge(w) >= cs.kappa) outside.push_back(w);
    Tracker tr{make_entry(label)};
    std::vector<double> ra(other_space.dim), rb(other_space.dim);
    std::vector<double> ref_b(cs.k), ref_s(cs.k * cs.d);
    for (double t : grid.times) {
      for (const auto& w : outside) {
        fn(t, w, ra);
        for (double c : ra)
          if (!std::isfinite(c)) throw Error(Errc::NonFiniteCoefficient, std::string(label) + " response");
        tr.observe(other_space.gauge(ra), cs.kappa * (1.0 + own_space.gauge(w)),
                   [&] { return "t=" + std::to_string(t) + " own=" + fmt_vec(w) + " (growth)"; });
      }
      for (std::size_t i = 0; i + 1 < outside.size(); ++i) {
        const auto& wa = outside[i];
        const auto& wb = outside[i + 1];
        fn(t, wa, ra);
        fn(t, wb, rb);
        const ConstVec ua = own_is_u ? ConstVec(wa) : ConstVec(ra);
        const ConstVec va = own_is_u ? ConstVec(ra) : ConstVec(wa);
        const ConstVec ub = own_is_u ? ConstVec(wb) : ConstVec(rb);
        const ConstVec vb = own_is_u ? ConstVec(rb) : ConstVec(wb);
        for (std::size_t s = 0; s < grid.states.size(); s += std::max<std::size_t>(1, grid.states.size() / 8)) {
          const auto& x = grid.states[s];
          auto b = probe.drift(t, x, ua, va);
          std::copy(b.begin(), b.end(), ref_b.begin());
          auto sg = probe.diffusion(t, x, ua, va);
          std::copy(sg.begin(), sg.end(), ref_s.begin());
          const double fa = probe.generator(t, x, grid.ys.front(), grid.zs.front(), ua, va);
          const double db = dist(ref_b, probe.drift(t, x, ub, vb));
          const double ds = dist(ref_s, probe.diffusion(t, x, ub, vb));
          const double df = std::abs(fa - probe.generator(t, x, grid.ys.front(), grid.zs.front(), ub, vb));
          const double scale = kEqualityTol * (1.0 + norm(ref_b) + norm(ref_s) + std::abs(fa));
          tr.observe(db + ds + df, scale, [&] {
            return "t=" + std::to_string(t) + " x=" + fmt_vec(x) + " own=" + fmt_vec(wa) +
                   " own'=" + fmt_vec(wb) + " (invariance)";
          });
        }
      }
    }
    report.entries.push_back(tr.entry);
  };
  if (cs.psi) check_neutralizer("neutralizer_u", cs.psi, true);
  if (cs.psi_tilde) check_neutralizer("neutralizer_v", cs.psi_tilde, false);

  report.note = "sampled on the configured state range only; assumptions beyond it are unchecked";
  return report;
}

// ---------------------------------------------------------------------------

CoefficientSet build_additive(std::size_t u_dim, std::size_t v_dim, MergedControlFuncs funcs,
                              double gamma, double kappa, double p, std::string name) {
  if (u_dim != v_dim)
    throw Error(Errc::DimensionMismatch, "additive controls need equal dims, got " +
                                             std::to_string(u_dim) + " and " + std::to_string(v_dim));
  if (u_dim == 0 || u_dim > kMaxControlDim)
    throw Error(Errc::InvalidArgument, "control dimension out of range");
  if (!funcs.drift || !funcs.diffusion || !funcs.generator || !funcs.terminal)
    throw Error(Errc::InvalidArgument, "additive builder needs b, sigma, f and g");

  CoefficientSet cs;
  cs.name = std::move(name);
  cs.k = funcs.k;
  cs.d = funcs.d;
  cs.gamma = gamma;
  cs.kappa = kappa;
  cs.p = p;
  cs.u_space = ControlSpace::euclidean(u_dim);
  cs.v_space = ControlSpace::euclidean(v_dim);

  const std::size_t dim = u_dim;
  auto merged = std::make_shared<MergedControlFuncs>(std::move(funcs));
  cs.drift = [merged, dim](double t, ConstVec x, ConstVec u, ConstVec v, OutVec out) {
    double w[kMaxControlDim];
    for (std::size_t i = 0; i < dim; ++i) w[i] = u[i] + v[i];
    merged->drift(t, x, ConstVec(w, dim), out);
  };
  cs.diffusion = [merged, dim](double t, ConstVec x, ConstVec u, ConstVec v, OutVec out) {
    double w[kMaxControlDim];
    for (std::size_t i = 0; i < dim; ++i) w[i] = u[i] + v[i];
    merged->diffusion(t, x, ConstVec(w, dim), out);
  };
  cs.generator = [merged, dim](double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v) {
    double w[kMaxControlDim];
    for (std::size_t i = 0; i < dim; ++i) w[i] = u[i] + v[i];
    return merged->generator(t, x, y, z, ConstVec(w, dim));
  };
  cs.terminal = merged->terminal;
  auto negate = [dim](double, ConstVec own, OutVec response) {
    for (std::size_t i = 0; i < dim; ++i) response[i] = -own[i];
  };
  cs.psi = negate;
  cs.psi_tilde = negate;
  return cs;
}

std::optional<std::string> find_sign_violation(const PhiFn& phi, double kappa,
                                               const SignConditionSample& sample, SignSide side) {
  const std::size_t n = std::max<std::size_t>(sample.interior_points, 2);
  for (double t : sample.times)
    for (double w : sample.us) {
      const double radius = kappa * std::abs(w);
      double lo = INFINITY, hi = -INFINITY;
      const std::size_t count = radius == 0.0 ? 1 : n;
      for (std::size_t i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : -radius + 2.0 * radius * double(i) / double(count - 1);
        const double val = side == SignSide::PlayerOne ? phi(t, w, s) : phi(t, s, w);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      if (!(lo <= 0.0 && 0.0 <= hi)) {
        std::ostringstream os;
        os << "(t=" << t << ", " << (side == SignSide::PlayerOne ? "u=" : "v=") << w
           << "): range [" << lo << ", " << hi << "] excludes 0";
        return os.str();
      }
    }
  return std::nullopt;
}

CoefficientSet build_scalar_phi(ScalarPhiFuncs funcs, PhiFn phi, double kappa, double gamma,
                                const SignConditionSample& sample, std::string name) {
  if (!funcs.b0 || !funcs.sigma0 || !funcs.f0 || !funcs.g || !phi)
    throw Error(Errc::InvalidArgument, "scalar_phi builder needs b0, sigma0, f0, g and phi");
  if (auto witness = find_sign_violation(phi, kappa, sample, SignSide::PlayerOne))
    throw Error(Errc::SignConditionViolated, *witness);

  CoefficientSet cs;
  cs.name = std::move(name);
  cs.k = 1;
  cs.d = 1;
  cs.p = 2.0;
  cs.gamma = gamma;
  cs.kappa = kappa;
  cs.u_space = ControlSpace::euclidean(1);
  cs.v_space = ControlSpace::euclidean(1);
  auto f = std::make_shared<ScalarPhiFuncs>(std::move(funcs));
  auto ph = std::make_shared<PhiFn>(std::move(phi));
  cs.drift = [f, ph](double t, ConstVec x, ConstVec u, ConstVec v, OutVec out) {
    out[0] = f->b0(t, x[0]) + (*ph)(t, u[0], v[0]);
  };
  cs.diffusion = [f, ph](double t, ConstVec x, ConstVec u, ConstVec v, OutVec out) {
    out[0] = f->sigma0(t, x[0]) + (*ph)(t, u[0], v[0]);
  };
  cs.generator = [f, ph](double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v) {
    return f->f0(t, x[0], y, z[0]) + (*ph)(t, u[0], v[0]);
  };
  cs.terminal = [f](ConstVec x) { return f->g(x[0]); };
  return cs;
}

}  // namespace sdg
