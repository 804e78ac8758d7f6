#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdg {

using ConstVec = std::span<const double>;
using OutVec = std::span<double>;

/// Upper bound on control dimensions; lets coefficient adapters use stack
/// scratch buffers.
inline constexpr std::size_t kMaxControlDim = 16;

/// Euclidean control space with a base point. The gauge is the distance to
/// the base point. A bound makes the space the closed gauge ball.
struct ControlSpace {
  std::size_t dim = 1;
  std::vector<double> base_point{0.0};
  std::optional<double> bound;

  static ControlSpace euclidean(std::size_t dim, std::optional<double> bound = std::nullopt);

  double gauge(ConstVec value) const;
  bool admissible(ConstVec value, double slack = 1e-12) const;
  bool operator==(const ControlSpace&) const = default;
};

using DriftFn = std::function<void(double t, ConstVec x, ConstVec u, ConstVec v, OutVec out)>;
/// Writes the k x d diffusion matrix row-major.
using DiffusionFn = std::function<void(double t, ConstVec x, ConstVec u, ConstVec v, OutVec out)>;
using GeneratorFn =
    std::function<double(double t, ConstVec x, double y, ConstVec z, ConstVec u, ConstVec v)>;
using TerminalFn = std::function<double(ConstVec x)>;
/// Neutralizer: own control -> opponent response.
using NeutralizerFn = std::function<void(double t, ConstVec own, OutVec response)>;

/// Game data (b, sigma, f, g) and structural constants. Immutable once built;
/// share it by const reference across workers.
struct CoefficientSet {
  std::string name;
  std::size_t k = 1;
  std::size_t d = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  GeneratorFn generator;
  TerminalFn terminal;
  double gamma = 1.0;
  double kappa = 1.0;
  double p = 2.0;
  ControlSpace u_space;
  ControlSpace v_space;
  NeutralizerFn psi;        // (A-u), may be empty
  NeutralizerFn psi_tilde;  // (A-v), may be empty

  /// Throws InvalidArgument on bad dims, missing callables or constants out
  /// of range (gamma, kappa > 0, p in (1, 2]).
  void check_structure() const;

  double holder_exponent() const { return 2.0 / p; }
};

// ---------------------------------------------------------------------------
// Assumption sampling

struct ValidationGrid {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> us;
  std::vector<std::vector<double>> vs;
  std::vector<double> ys{-1.0, 0.0, 1.0};
  std::vector<std::vector<double>> zs;
  std::size_t random_points = 64;
  std::uint64_t seed = 20240917;

  /// Product grid on [0, T] x [-x_radius, x_radius]^k x control boxes of
  /// half-width control_radius around the base points.
  static ValidationGrid box(const CoefficientSet& cs, double T, double x_radius,
                            double control_radius, std::size_t per_axis = 5);
};

struct ValidationEntry {
  std::string assumption;
  bool pass = true;
  double worst_ratio = 0.0;  // max of lhs / rhs over the samples
  std::string witness;       // sample attaining the worst ratio (set on FAIL)
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  std::string note;
  bool all_pass() const;
  const ValidationEntry* find(const std::string& assumption) const;
};

/// Sampled check of the linear growth, Lipschitz and Holder conditions on
/// (b, sigma, f, g) and of the neutralizer identities when present.
/// Throws NonFiniteCoefficient on NaN/inf outputs.
ValidationReport validate_coefficients(const CoefficientSet& cs, const ValidationGrid& grid);

// ---------------------------------------------------------------------------
// Canonical constructions

/// Coefficients of a single merged control w = u + v.
struct MergedControlFuncs {
  std::size_t k = 1;
  std::size_t d = 1;
  std::function<void(double t, ConstVec x, ConstVec w, OutVec out)> drift;
  std::function<void(double t, ConstVec x, ConstVec w, OutVec out)> diffusion;
  std::function<double(double t, ConstVec x, double y, ConstVec z, ConstVec w)> generator;
  TerminalFn terminal;
};

/// Additive-control game: b(t,x,u,v) = b(t,x,u+v) etc., with neutralizers
/// psi(u) = -u and psi_tilde(v) = -v. DimensionMismatch unless u_dim == v_dim.
CoefficientSet build_additive(std::size_t u_dim, std::size_t v_dim, MergedControlFuncs funcs,
                              double gamma, double kappa, double p = 2.0,
                              std::string name = "additive");

using PhiFn = std::function<double(double t, double u, double v)>;

struct ScalarPhiFuncs {
  std::function<double(double t, double x)> b0;
  std::function<double(double t, double x)> sigma0;
  std::function<double(double t, double x, double y, double z)> f0;
  std::function<double(double x)> g;
};

/// Sample on which the sign condition on phi is tested.
struct SignConditionSample {
  std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> us{-3.0, -2.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 2.0, 3.0};
  std::size_t interior_points = 401;
};

enum class SignSide {
  PlayerOne,  // inf/sup over |v'| <= kappa |u| of phi(t, u, v')
  PlayerTwo,  // inf/sup over |u'| <= kappa |v| of phi(t, u', v)
};

/// Returns a witness "(t, u)" when the sign condition fails on `side`.
std::optional<std::string> find_sign_violation(const PhiFn& phi, double kappa,
                                               const SignConditionSample& sample, SignSide side);

/// Scalar game b = b0 + phi, sigma = sigma0 + phi, f = f0 + phi (k = d = 1,
/// p = 2). Neutralizers are left empty; see construct_neutralizer.
/// SignConditionViolated if the player-one sign condition fails.
CoefficientSet build_scalar_phi(ScalarPhiFuncs funcs, PhiFn phi, double kappa, double gamma,
                                const SignConditionSample& sample = {},
                                std::string name = "scalar_phi");

}  // namespace sdg
