#include "sdg/hamiltonians.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sdg/error.hpp"

namespace sdg {

namespace {

constexpr std::size_t kMaxBlock = 64;

// Radical inverse in base b (Halton coordinate).
double radical_inverse(std::size_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr std::array<unsigned, 24> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

struct ShellSample {
  std::vector<double> offset;
  std::size_t shell;  // present at levels n <= shell + 1
};

// `count` points spread over `shells` radial shells of the ball of radius r:
// shell s covers radii (r/(s+2), r/(s+1)].
std::vector<ShellSample> shell_samples(std::size_t dim, std::size_t count, std::size_t shells,
                                       double r) {
  if (dim + 1 > kPrimes.size()) throw Error(Errc::InvalidArgument, "neighbourhood dimension too large");
  std::vector<ShellSample> out;
  const std::size_t per_shell = std::max<std::size_t>(1, count / shells);
  std::size_t index = 1;
  for (std::size_t s = 0; s < shells; ++s) {
    const double r_in = r / static_cast<double>(s + 2), r_out = r / static_cast<double>(s + 1);
    for (std::size_t j = 0; j < per_shell; ++j) {
      std::vector<double> dir(dim);
      double norm = 0.0;
      do {
        norm = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          dir[c] = 2.0 * radical_inverse(index, kPrimes[c]) - 1.0;
          norm += dir[c] * dir[c];
        }
        norm = std::sqrt(norm);
        ++index;
      } while (norm < 1e-3);
      const double rho = r_in + radical_inverse(index, kPrimes[dim]) * (r_out - r_in);
      for (double& c : dir) c *= rho / norm;
      out.push_back({std::move(dir), s});
    }
  }
  return out;
}

std::size_t xi_dim(std::size_t k) { return 2 + 2 * k + k * (k + 1) / 2; }

HamPoint perturb(const HamPoint& xi, const std::vector<double>& off) {
  HamPoint p = xi;
  const std::size_t k = xi.x.size();
  std::size_t o = 0;
  p.t += off[o++];
  for (std::size_t c = 0; c < k; ++c) p.x[c] += off[o++];
  p.y += off[o++];
  for (std::size_t c = 0; c < k; ++c) p.z[c] += off[o++];
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      p.Gamma[i * k + j] += off[o];
      if (i != j) p.Gamma[j * k + i] += off[o];
      ++o;
    }
  return p;
}

// Centre (shell = n_max, present at every level) followed by the samples.
std::vector<HamPoint> xi_neighbourhood(const HamPoint& xi, const EnvelopeGrids& g,
                                       std::vector<std::size_t>& shell) {
  std::vector<HamPoint> pts{xi};
  shell.assign(1, g.n_max);
  for (const auto& s : shell_samples(xi_dim(xi.x.size()), g.samples, g.n_max, g.xi_radius)) {
    pts.push_back(perturb(xi, s.offset));
    shell.push_back(s.shell);
  }
  return pts;
}

std::vector<std::vector<double>> control_neighbourhood(const std::vector<double>& c,
                                                       const ControlSpace& space,
                                                       const EnvelopeGrids& g,
                                                       std::vector<std::size_t>& shell) {
  std::vector<std::vector<double>> pts{c};
  shell.assign(1, g.n_max);
  for (const auto& s : shell_samples(space.dim, g.samples, g.n_max, g.control_radius)) {
    std::vector<double> p = c;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += s.offset[j];
    if (!space.admissible(p)) continue;
    pts.push_back(std::move(p));
    shell.push_back(s.shell);
  }
  return pts;
}

void check_point(const CoefficientSet& cs, const HamPoint& xi) {
  const std::size_t k = cs.k;
  if (xi.x.size() != k || xi.z.size() != k || xi.Gamma.size() != k * k)
    throw Error(Errc::DimensionMismatch, "HamPoint dims do not match k");
  if (k * cs.d > kMaxBlock) throw Error(Errc::DimensionMismatch, "k*d too large for the Hamiltonian");
}

// Members of `lattice` inside the truncated set of level n around `anchor`.
std::vector<std::size_t> truncated(const std::vector<std::vector<double>>& lattice,
                                   const ControlSpace& own, const ControlSpace& opp,
                                   const std::vector<double>& anchor, double kappa, std::size_t n) {
  const double limit = kappa + static_cast<double>(n) * opp.gauge(anchor);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < lattice.size(); ++j)
    if (own.gauge(lattice[j]) <= limit) out.push_back(j);
  return out;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double hamiltonian(const CoefficientSet& cs, const HamPoint& xi, ConstVec u, ConstVec v) {
  check_point(cs, xi);
  const std::size_t k = cs.k, d = cs.d;
  std::array<double, kMaxBlock> b{}, s{};
  std::array<double, kMaxControlDim> zs{};
  cs.drift(xi.t, xi.x, u, v, OutVec(b.data(), k));
  cs.diffusion(xi.t, xi.x, u, v, OutVec(s.data(), k * d));
  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double a = 0.0;
      for (std::size_t l = 0; l < d; ++l) a += s[i * d + l] * s[j * d + l];
      trace += a * xi.Gamma[j * k + i];
    }
  double zb = 0.0;
  for (std::size_t i = 0; i < k; ++i) zb += xi.z[i] * b[i];
  for (std::size_t l = 0; l < d; ++l) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += xi.z[i] * s[i * d + l];
    zs[l] = acc;
  }
  return 0.5 * trace + zb + cs.generator(xi.t, xi.x, xi.y, ConstVec(zs.data(), d), u, v);
}

EnvelopeResult envelope_h(const CoefficientSet& cs, const HamPoint& xi, Envelope which,
                          const EnvelopeGrids& g) {
  check_point(cs, xi);
  if (g.n_max < 1) throw Error(Errc::EmptyGrid, "n_max must be >= 1");
  const bool player_one = which == Envelope::H1Lower || which == Envelope::H1Upper;
  const auto& anchors = player_one ? g.anchors_u : g.anchors_v;
  const auto& lattice = player_one ? g.lattice_v : g.lattice_u;
  const ControlSpace& anchor_space = player_one ? cs.u_space : cs.v_space;
  const ControlSpace& lattice_space = player_one ? cs.v_space : cs.u_space;
  if (anchors.empty() || lattice.empty()) throw Error(Errc::EmptyGrid, "envelope grids are empty");
  const std::size_t N = g.n_max;

  std::vector<std::size_t> xi_shell;
  const std::vector<HamPoint> xis = xi_neighbourhood(xi, g, xi_shell);
  // H with the player-one control first regardless of which player anchors.
  auto H = [&](const HamPoint& p, const std::vector<double>& anchor, const std::vector<double>& resp) {
    return player_one ? hamiltonian(cs, p, anchor, resp) : hamiltonian(cs, p, resp, anchor);
  };
  // Sign convention: player one takes sup over anchors and inf over
  // responses; player two the reverse. `s` flips values so both cases run as
  // sup-inf.
  const double s = player_one ? 1.0 : -1.0;

  EnvelopeResult res;
  res.per_level.assign(N, -kInf);
  const bool truncated_outer = which == Envelope::H1Upper || which == Envelope::H2Lower;

  for (const auto& a : anchors) {
    if (!truncated_outer) {
      // Lower H1 / upper H2: inner extremum over O^{n_max}, then the
      // liminf (limsup) over Xi' -> Xi, realized per level by the shells.
      const auto resp = truncated(lattice, lattice_space, anchor_space, a, cs.kappa, N);
      if (resp.empty()) throw Error(Errc::EmptyGrid, "truncated response set is empty");
      std::vector<double> by_shell(N + 1, kInf);
      for (std::size_t q = 0; q < xis.size(); ++q) {
        double inner = kInf;
        for (std::size_t j : resp) inner = std::min(inner, s * H(xis[q], a, lattice[j]));
        by_shell[xi_shell[q]] = std::min(by_shell[xi_shell[q]], inner);
      }
      for (std::size_t n = 1; n <= N; ++n) {
        double m = kInf;
        for (std::size_t sh = n - 1; sh <= N; ++sh) m = std::min(m, by_shell[sh]);
        res.per_level[n - 1] = std::max(res.per_level[n - 1], m);
      }
    } else {
      // Upper H1 / lower H2: inner extremum over O^n with the limsup (liminf)
      // over the anchor's neighbours and Xi' folded into the response value.
      std::vector<std::size_t> a_shell;
      const auto nbrs = control_neighbourhood(a, anchor_space, g, a_shell);
      // worst[j][sh_a][sh_xi]: extremum of s*H over the pair of shells.
      const std::size_t S = N + 1;
      std::vector<double> table(lattice.size() * S * S, -kInf);
      for (std::size_t j = 0; j < lattice.size(); ++j)
        for (std::size_t p = 0; p < nbrs.size(); ++p)
          for (std::size_t q = 0; q < xis.size(); ++q) {
            double& cell = table[(j * S + a_shell[p]) * S + xi_shell[q]];
            cell = std::max(cell, s * H(xis[q], nbrs[p], lattice[j]));
          }
      for (std::size_t n = 1; n <= N; ++n) {
        const auto resp = truncated(lattice, lattice_space, anchor_space, a, cs.kappa, n);
        if (resp.empty()) throw Error(Errc::EmptyGrid, "truncated response set is empty");
        double inner = kInf;
        for (std::size_t j : resp) {
          double sup = -kInf;
          for (std::size_t sa = n - 1; sa < S; ++sa)
            for (std::size_t sx = n - 1; sx < S; ++sx) sup = std::max(sup, table[(j * S + sa) * S + sx]);
          inner = std::min(inner, sup);
        }
        res.per_level[n - 1] = std::max(res.per_level[n - 1], inner);
      }
    }
  }
  for (double& v : res.per_level) v *= s;
  res.limit = res.per_level.back();
  return res;
}

double supinf_bruteforce(const CoefficientSet& cs, const HamPoint& xi,
                         const std::vector<std::vector<double>>& us,
                         const std::vector<std::vector<double>>& vs) {
  if (us.empty() || vs.empty()) throw Error(Errc::EmptyGrid, "control grids are empty");
  double best = -kInf;
  for (const auto& u : us) {
    double inner = kInf;
    for (const auto& v : vs) inner = std::min(inner, hamiltonian(cs, xi, u, v));
    best = std::max(best, inner);
  }
  return best;
}

double infsup_bruteforce(const CoefficientSet& cs, const HamPoint& xi,
                         const std::vector<std::vector<double>>& us,
                         const std::vector<std::vector<double>>& vs) {
  if (us.empty() || vs.empty()) throw Error(Errc::EmptyGrid, "control grids are empty");
  double best = kInf;
  for (const auto& v : vs) {
    double inner = -kInf;
    for (const auto& u : us) inner = std::max(inner, hamiltonian(cs, xi, u, v));
    best = std::min(best, inner);
  }
  return best;
}

double grid_modulus(const CoefficientSet& cs, const HamPoint& xi, const EnvelopeGrids& g) {
  check_point(cs, xi);
  std::vector<std::size_t> xi_shell;
  const std::vector<HamPoint> xis = xi_neighbourhood(xi, g, xi_shell);
  const std::size_t last = g.n_max - 1;
  double mod = 0.0;
  // Joint perturbation of Xi and the anchor's own control, as the envelopes
  // apply them.
  auto sweep = [&](const std::vector<std::vector<double>>& anchors,
                   const std::vector<std::vector<double>>& lattice, bool anchor_is_u) {
    const ControlSpace& space = anchor_is_u ? cs.u_space : cs.v_space;
    for (const auto& a : anchors) {
      std::vector<std::size_t> a_shell;
      const auto nbrs = control_neighbourhood(a, space, g, a_shell);
      for (const auto& r : lattice) {
        const double h0 = anchor_is_u ? hamiltonian(cs, xi, a, r) : hamiltonian(cs, xi, r, a);
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
          if (a_shell[p] < last) continue;
          for (std::size_t q = 0; q < xis.size(); ++q) {
            if (xi_shell[q] < last) continue;
            const double h = anchor_is_u ? hamiltonian(cs, xis[q], nbrs[p], r) : hamiltonian(cs, xis[q], r, nbrs[p]);
            mod = std::max(mod, std::abs(h - h0));
          }
        }
      }
    }
  };
  sweep(g.anchors_u, g.lattice_v, true);
  sweep(g.anchors_v, g.lattice_u, false);

  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(d);
  };
  // Neighbouring lattice points.
  auto lattice_mod = [&](const std::vector<std::vector<double>>& pts, bool is_v,
                         const std::vector<std::vector<double>>& others) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double h = kInf;
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != i) h = std::min(h, dist(pts[i], pts[j]));
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j == i || dist(pts[i], pts[j]) > 1.01 * h) continue;
        for (const auto& o : others) {
          const double a = is_v ? hamiltonian(cs, xi, o, pts[i]) : hamiltonian(cs, xi, pts[i], o);
          const double b = is_v ? hamiltonian(cs, xi, o, pts[j]) : hamiltonian(cs, xi, pts[j], o);
          mod = std::max(mod, std::abs(a - b));
        }
      }
    }
  };
  if (!g.anchors_u.empty()) lattice_mod(g.lattice_v, true, g.anchors_u);
  if (!g.anchors_v.empty()) lattice_mod(g.lattice_u, false, g.anchors_v);
  return mod;
}

std::vector<std::vector<double>> ball_lattice(ConstVec center, double radius, std::size_t per_axis) {
  if (per_axis < 1) throw Error(Errc::EmptyGrid, "lattice needs at least one point per axis");
  const std::size_t dim = center.size();
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(dim, 0);
  const double step = per_axis > 1 ? 2.0 * radius / static_cast<double>(per_axis - 1) : 0.0;
  while (true) {
    std::vector<double> p(dim);
    double r2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double off = per_axis > 1 ? -radius + step * static_cast<double>(idx[c]) : 0.0;
      p[c] = center[c] + off;
      r2 += off * off;
    }
    if (std::sqrt(r2) <= radius * (1.0 + 1e-12)) out.push_back(std::move(p));
    std::size_t c = 0;
    while (c < dim && ++idx[c] == per_axis) idx[c++] = 0;
    if (c == dim) break;
  }
  return out;
}

}  // namespace sdg
