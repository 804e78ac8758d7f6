#include "sdg/regression.hpp"

#include <algorithm>
#include <cmath>

#include "sdg/sde_engine.hpp"

namespace sdg {

namespace {

// Exponent tuples over `vars` variables with total degree 1..degree.
void exponents(std::size_t vars, std::size_t degree, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> e(vars, 0);
  auto rec = [&](auto&& self, std::size_t var, std::size_t left) -> void {
    if (var == vars) {
      std::size_t total = 0;
      for (std::size_t v : e) total += v;
      if (total > 0) out.push_back(e);
      return;
    }
    for (std::size_t p = 0; p <= left; ++p) {
      e[var] = p;
      self(self, var + 1, left - p);
    }
    e[var] = 0;
  };
  rec(rec, 0, degree);
}

double column_mean(const Eigen::VectorXd& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += c[i];
  return s / static_cast<double>(c.size());
}

}  // namespace

Projection::Projection(const StatePaths& state, std::size_t step, const TerminalFn* g,
                       const BasisSpec& spec, std::span<const std::uint8_t> active) {
  const std::size_t m = state.m_paths(), k = state.k();
  rows_.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    if (active.empty() || active[i]) rows_.push_back(i);
  const auto na = static_cast<Eigen::Index>(rows_.size());
  if (na < 2) return;

  // Standardize each state coordinate; drop coordinates that do not vary.
  std::vector<Eigen::VectorXd> z;
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd col(na);
    for (Eigen::Index r = 0; r < na; ++r) col[r] = state.at(rows_[static_cast<std::size_t>(r)], step)[c];
    const double mean = column_mean(col);
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(na));
    if (sd <= 1e-12 * (1.0 + std::abs(mean))) continue;
    z.push_back(col / sd);
  }

  std::vector<Eigen::VectorXd> cols;
  if (!z.empty()) {
    std::vector<std::vector<std::size_t>> exps;
    exponents(z.size(), spec.degree, exps);
    for (const auto& e : exps) {
      Eigen::VectorXd col = Eigen::VectorXd::Ones(na);
      for (std::size_t v = 0; v < e.size(); ++v)
        for (std::size_t p = 0; p < e[v]; ++p) col.array() *= z[v].array();
      cols.push_back(std::move(col));
    }
  }
  const std::size_t n_poly = cols.size();
  bool has_g = false;
  if (spec.terminal_feature && g && *g) {
    Eigen::VectorXd col(na);
    for (Eigen::Index r = 0; r < na; ++r)
      col[r] = (*g)(state.at(rows_[static_cast<std::size_t>(r)], step));
    cols.push_back(std::move(col));
    has_g = true;
  }

  // Center and drop constant columns.
  std::vector<Eigen::VectorXd> kept;
  bool g_kept = false;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    Eigen::VectorXd& col = cols[j];
    const double mean = column_mean(col);
    col.array() -= mean;
    const double scale = 1.0 + std::abs(mean);
    if (col.squaredNorm() <= 1e-24 * scale * scale * static_cast<double>(na)) continue;
    if (has_g && j == n_poly) g_kept = true;
    kept.push_back(std::move(col));
  }
  if (kept.empty()) return;

  auto assemble = [&](std::size_t p) {
    features_.resize(na, static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) features_.col(static_cast<Eigen::Index>(j)) = kept[j];
  };
  assemble(kept.size());
  Eigen::MatrixXd gram = features_.transpose() * features_;

  // g(X) already in the polynomial span (g = x, g = x^2, ...) adds nothing.
  if (g_kept && kept.size() > 1) {
    const Eigen::Index p = gram.rows() - 1;
    const Eigen::MatrixXd poly = gram.topLeftCorner(p, p);
    const Eigen::VectorXd cross = gram.topRightCorner(p, 1);
    const Eigen::LDLT<Eigen::MatrixXd> sub(poly);
    const double residual = gram(p, p) - cross.dot(sub.solve(cross));
    if (residual <= 1e-10 * gram(p, p)) {
      kept.pop_back();
      assemble(kept.size());
      gram = poly;
    }
  }

  ldlt_.compute(gram);
  const Eigen::VectorXd diag = ldlt_.vectorD().cwiseAbs();
  const bool singular = ldlt_.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * diag.maxCoeff();
  if (singular) {
    lambda_ = 1e-8 * gram.trace() / static_cast<double>(gram.rows());
    gram.diagonal().array() += lambda_;
    ldlt_.compute(gram);
  }
}

void Projection::project(ConstVec target, OutVec fitted) const {
  if (rows_.empty()) return;
  const double first = target[rows_.front()];
  bool constant = true;
  for (std::size_t r : rows_)
    if (target[r] != first) {
      constant = false;
      break;
    }
  if (constant || features_.cols() == 0) {
    double mean = first;
    if (!constant) {
      double s = 0.0;
      for (std::size_t r : rows_) s += target[r];
      mean = s / static_cast<double>(rows_.size());
    }
    for (std::size_t r : rows_) fitted[r] = mean;
    return;
  }
  const auto na = static_cast<Eigen::Index>(rows_.size());
  Eigen::VectorXd y(na);
  for (Eigen::Index r = 0; r < na; ++r) y[r] = target[rows_[static_cast<std::size_t>(r)]];
  const double mean = column_mean(y);
  y.array() -= mean;
  const Eigen::VectorXd coef = ldlt_.solve(features_.transpose() * y);
  const Eigen::VectorXd fit = features_ * coef;
  for (Eigen::Index r = 0; r < na; ++r) fitted[rows_[static_cast<std::size_t>(r)]] = mean + fit[r];
}

}  // namespace sdg
