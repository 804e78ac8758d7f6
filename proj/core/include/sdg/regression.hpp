#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sdg/model.hpp"

namespace sdg {

class StatePaths;

/// Regression basis: 1, tensor monomials of the standardized state up to
/// total degree `degree`, and optionally the terminal function g(X).
struct BasisSpec {
  std::size_t degree = 3;
  bool terminal_feature = true;
};

/// Least-squares projection onto the basis evaluated at X[.][step], fitted
/// on the active rows (all rows when `active` is empty). Constant columns
/// are dropped and targets are centered, so constants project exactly.
/// Near-singular normal equations fall back to ridge with
/// lambda = 1e-8 * trace / dim.
class Projection {
 public:
  Projection(const StatePaths& state, std::size_t step, const TerminalFn* g, const BasisSpec& spec,
             std::span<const std::uint8_t> active = {});

  /// Writes fitted values at the active rows of `fitted`; other rows are
  /// left untouched. `target` is indexed by path.
  void project(ConstVec target, OutVec fitted) const;

  std::size_t n_features() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  bool used_ridge() const noexcept { return lambda_ > 0.0; }
  double lambda() const noexcept { return lambda_; }

 private:
  std::vector<std::size_t> rows_;
  Eigen::MatrixXd features_;  // centered, rows_.size() x p
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  double lambda_ = 0.0;
};

}  // namespace sdg
