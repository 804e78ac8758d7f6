#pragma once

#include <array>
#include <functional>
#include <vector>

#include "sdg/controls.hpp"
#include "sdg/game_values.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/model.hpp"

namespace sdg {

// Explicit monotone scheme for -w_t - H(t, x, w, w_x, w_xx) = 0, w(T) = g,
// with k = d = 1 and H optimized over finite control grids.

struct PdeSpec {
  double t0 = 0.0;
  double T = 1.0;
  double x_min = -2.0;
  double x_max = 2.0;
  std::size_t n_x = 201;
  std::size_t n_t = 0;  // 0: smallest count meeting the CFL bound
  /// Extra nodes beyond the window on each side, where Dirichlet data g is
  /// imposed. Negative: 6 max|sigma| sqrt(T - t0) + max|b| (T - t0) + 3 dx.
  double pad = -1.0;
};

enum class PdeHamiltonian {
  SupInf,  // max_u min_v H
  InfSup,  // min_v max_u H
};

struct ControlGrids {
  std::vector<std::vector<double>> u{{0.0}};
  std::vector<std::vector<double>> v{{0.0}};
};

/// Solution on the window [x_min, x_max]; values[k * n_x + j] at (times[k], x[j]).
struct PdeGrid {
  std::vector<double> x;
  std::vector<double> times;
  double dt = 0.0;
  double dx = 0.0;
  double cfl_bound = 0.0;    // largest admissible dt
  double dissipation = 0.0;  // theta
  std::size_t padded_nodes = 0;
  std::vector<double> values;

  std::size_t n_x() const { return x.size(); }
  std::size_t n_t() const { return times.size() - 1; }
  double at(std::size_t k, std::size_t j) const { return values[k * x.size() + j]; }
  /// Bilinear in (t, x). GridTooCoarse outside the window.
  double interpolate(double t, double x) const;
};

/// CflViolated if spec.n_t is set and too small; NonFiniteSolution with the
/// first bad node. DimensionMismatch unless k = d = 1.
PdeGrid solve_pde(const CoefficientSet& cs, const PdeSpec& spec, PdeHamiltonian which,
                  const ControlGrids& controls);

/// Smallest stencil coefficient of the update (as a function of the three
/// previous-layer values) over nodes and control pairs. The scheme is
/// monotone iff this is >= 0.
double monotonicity_margin(const CoefficientSet& cs, const PdeSpec& spec, const ControlGrids& controls);

/// Optimized Hamiltonian at one point.
double optimized_hamiltonian(const CoefficientSet& cs, PdeHamiltonian which,
                             const ControlGrids& controls, double t, double x, double y, double p,
                             double gamma);

enum class ViscositySide { Sub, Super };

struct ViscosityReport {
  double t = 0.0;
  double x = 0.0;
  /// phi(t + a, x + b) = sum c[i][j] a^i b^j, i, j = 0..2
  std::array<std::array<double, 3>, 3> coeffs{};
  double phi_t = 0.0, phi_x = 0.0, phi_xx = 0.0;
  double residual = 0.0;  // -phi_t - H(t, x, phi, phi_x, phi_xx)
  ViscositySide side = ViscositySide::Sub;
  double tol = 0.0;
  bool pass = false;
};

/// Residual of the quadratic through the 3 x 3 stencil at node (k, j).
/// BoundaryPoint unless the node is interior in t and x.
ViscosityReport viscosity_residual(const CoefficientSet& cs, const PdeGrid& grid, std::size_t k,
                                   std::size_t j, PdeHamiltonian which, const ControlGrids& controls,
                                   ViscositySide side, double tol);

/// Same for an analytic candidate sampled on a stencil of half-width h.
ViscosityReport viscosity_residual(const CoefficientSet& cs,
                                   const std::function<double(double, double)>& w, double t,
                                   double x, PdeHamiltonian which, const ControlGrids& controls,
                                   ViscositySide side, double tol, double h = 1e-3);

struct CrossValidation {
  double mc_value = 0.0;
  double mc_std_err = 0.0;
  double pde_value = 0.0;
  double gap = 0.0;
  double tol = 0.0;  // 4 std_err + 5 (dx + dt)
  bool pass = false;
};

/// w1 by Monte Carlo at (bundle t0, x) against the SupInf PDE solution.
CrossValidation cross_validate(const CoefficientSet& cs, double x, const StrategyClass& strategies,
                               const ControlClass& controls, const PathBundle& bundle,
                               const PdeSpec& spec, const ControlGrids& grids);

}  // namespace sdg
