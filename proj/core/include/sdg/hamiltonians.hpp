#pragma once

#include <cstdint>
#include <vector>

#include "sdg/model.hpp"

namespace sdg {

/// Xi = (t, x, y, z, Gamma); z has k entries, Gamma is k x k row-major.
struct HamPoint {
  double t = 0.0;
  std::vector<double> x;
  double y = 0.0;
  std::vector<double> z;
  std::vector<double> Gamma;
};

/// H = 1/2 tr(sigma sigma^T Gamma) + z . b + f(t, x, y, z^T sigma, u, v).
double hamiltonian(const CoefficientSet& cs, const HamPoint& xi, ConstVec u, ConstVec v);

enum class Envelope { H1Lower, H1Upper, H2Lower, H2Upper };

/// Finite realizations used by the envelopes.
///   anchors_u / anchors_v: the outer sup over U (H1) or inf over V (H2)
///   lattice_u / lattice_v: candidates for the truncated sets O^n, filtered
///     by gauge <= kappa + n * gauge(anchor), hence nested in n
/// Xi-neighbourhoods O_{r/n}(Xi) and the u'- (v'-) neighbourhoods of radius
/// r/n come from a fixed set of quasi-random points in `shells` radial
/// shells; level n keeps the centre plus the shells inside radius r/n, so
/// the sample sets shrink with n.
struct EnvelopeGrids {
  std::vector<std::vector<double>> anchors_u;
  std::vector<std::vector<double>> anchors_v;
  std::vector<std::vector<double>> lattice_u;
  std::vector<std::vector<double>> lattice_v;
  std::size_t n_max = 8;
  std::size_t samples = 128;
  double xi_radius = 1.0;
  double control_radius = 1.0;
};

struct EnvelopeResult {
  std::vector<double> per_level;  // n = 1..n_max
  double limit = 0.0;             // level-n_max estimate
};

/// Per-level envelope values. Lower envelopes of player one (and upper of
/// player two) use O^{n_max} for the untruncated response set. EmptyGrid if
/// a grid or a truncated set is empty.
EnvelopeResult envelope_h(const CoefficientSet& cs, const HamPoint& xi, Envelope which,
                          const EnvelopeGrids& grids);

/// max over u of min over v of H(Xi, u, v) on the grids, and its transpose.
double supinf_bruteforce(const CoefficientSet& cs, const HamPoint& xi,
                         const std::vector<std::vector<double>>& us,
                         const std::vector<std::vector<double>>& vs);
double infsup_bruteforce(const CoefficientSet& cs, const HamPoint& xi,
                         const std::vector<std::vector<double>>& us,
                         const std::vector<std::vector<double>>& vs);

/// Largest change of H under joint level-n_max perturbations of Xi and the
/// anchor control (both players), and between neighbouring lattice points.
/// Bounds how far a grid envelope may sit from the continuum value.
double grid_modulus(const CoefficientSet& cs, const HamPoint& xi, const EnvelopeGrids& grids);

/// Uniform lattice on the closed ball of radius `radius` around `center`
/// with `per_axis` points per axis (the box lattice filtered to the ball).
std::vector<std::vector<double>> ball_lattice(ConstVec center, double radius, std::size_t per_axis);

}  // namespace sdg
