#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdg/bsde_engine.hpp"
#include "sdg/error.hpp"
#include "sdg/examples.hpp"

using namespace sdg;
using nlohmann::json;

namespace {

struct Setup {
  CoefficientSet cs;
  TimeGrid grid;
  PathBundle bundle;
  ControlPath mu, nu;
  StatePaths state;

  Setup(CoefficientSet c, std::size_t n, std::size_t m, std::uint64_t seed, double x = 0.0, double u = 0.0,
        double v = 0.0)
      : cs(std::move(c)), grid(TimeGrid::make(0.0, 1.0, n)), bundle(generate(grid, 1, m, seed)) {
    mu = ControlPath::constant(grid, m, cs.u_space, ConstVec(&u, 1));
    nu = ControlPath::constant(grid, m, cs.v_space, ConstVec(&v, 1));
    state = simulate_forward(cs, ConstVec(&x, 1), mu, nu, bundle);
  }
  std::size_t m() const { return bundle.m_paths(); }
  std::size_t n() const { return grid.n_steps(); }
  BsdeSolution solve(const std::vector<double>& eta, const BsdeOptions& opts = {}) const {
    return solve_bsde(cs, state, mu, nu, eta, GeneratorCutoff::full(m(), n()), bundle, opts);
  }
};

CoefficientSet brownian(double rate = 0.0) { return make_game("heat", {{"sigma", 1.0}, {"rate", rate}}); }

GeneratorFn constant_f(double c) {
  return [c](double, ConstVec, double, ConstVec, ConstVec, ConstVec) { return c; };
}

}  // namespace

TEST_CASE("constants are reproduced") {
  const Setup s(brownian(), 20, 2000, 3);
  BsdeOptions opts;
  opts.generator = constant_f(0.0);
  const BsdeSolution sol = s.solve(std::vector<double>(s.m(), 2.5), opts);
  for (std::size_t i = 0; i < s.m(); i += 97)
    for (std::size_t k = 0; k <= s.n(); ++k) CHECK(sol.y(i, k) == 2.5);
  double zmax = 0.0;
  for (double z : sol.Z) zmax = std::max(zmax, std::abs(z));
  CHECK(zmax < 1e-12);
  CHECK(sol.y0_std_err() == 0.0);
}

TEST_CASE("deterministic integral of f = 1") {
  const Setup s(brownian(), 25, 1000, 4);
  BsdeOptions opts;
  opts.generator = constant_f(1.0);
  const BsdeSolution sol = s.solve(std::vector<double>(s.m(), 0.0), opts);
  for (std::size_t i = 0; i < s.m(); i += 50) CHECK(sol.y(i, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear generator matches exp(-1)") {
  const Setup s(brownian(1.0), 50, 100000, 1);
  const BsdeSolution sol = s.solve(std::vector<double>(s.m(), 1.0));
  CHECK(std::abs(sol.y0_mean() - std::exp(-1.0)) / std::exp(-1.0) < 0.02);
}

TEST_CASE("linear generator error falls when N doubles") {
  int better = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Setup coarse(brownian(1.0), 50, 2000, seed), fine(brownian(1.0), 100, 2000, seed);
    const double e50 = std::abs(coarse.solve(std::vector<double>(coarse.m(), 1.0)).y0_mean() - std::exp(-1.0));
    const double e100 = std::abs(fine.solve(std::vector<double>(fine.m(), 1.0)).y0_mean() - std::exp(-1.0));
    better += e100 < e50;
  }
  CHECK(better >= 3);
}

TEST_CASE("martingale representation of B_T") {
  const Setup s(brownian(), 50, 100000, 8);
  std::vector<double> eta(s.m());
  for (std::size_t i = 0; i < s.m(); ++i) eta[i] = s.state.at(i, s.n())[0];
  BsdeOptions opts;
  opts.generator = constant_f(0.0);
  const BsdeSolution sol = s.solve(eta, opts);
  double err = 0.0;
  for (double z : sol.Z) err += std::abs(z - 1.0);
  CHECK(err / static_cast<double>(sol.Z.size()) < 0.05);
}

TEST_CASE("payoff_J") {
  SUBCASE("constant terminal") {
    const CoefficientSet cs = make_game("heat", {{"terminal", "const"}, {"terminal_value", 5.0}});
    const Setup s(cs, 10, 500, 2);
    const double x = 0.0;
    CHECK(payoff_J(cs, ConstVec(&x, 1), s.mu, s.nu, s.bundle).value == 5.0);
  }
  SUBCASE("neutralized additive game") {
    const CoefficientSet cs = make_game("cancellation");
    const Setup s(cs, 10, 200, 2, 0.0, 1.0, -1.0);
    const double x = 0.0;
    const PayoffEstimate j = payoff_J(cs, ConstVec(&x, 1), s.mu, s.nu, s.bundle);
    CHECK(j.value == 0.0);
    CHECK(j.std_err == 0.0);
  }
  SUBCASE("E[B_T^2] = T") {
    const Setup s(brownian(), 50, 50000, 12);
    const double x = 0.0;
    const PayoffEstimate j = payoff_J(s.cs, ConstVec(&x, 1), s.mu, s.nu, s.bundle);
    CHECK(std::abs(j.value - 1.0) < 3.0 * j.std_err);
  }
}

TEST_CASE("semigroup identity under projection reuse") {
  const Setup s(brownian(1.0), 20, 5000, 6);
  const double x = 0.2;
  for (std::size_t zeta : {0u, 10u, 20u}) CHECK(semigroup_check(s.cs, ConstVec(&x, 1), s.mu, s.nu, s.bundle, zeta) == 0.0);
}

TEST_CASE("comparison") {
  const Setup s(brownian(1.0), 20, 5000, 9);
  std::vector<double> eta2(s.m()), eta1(s.m());
  for (std::size_t i = 0; i < s.m(); ++i) {
    eta2[i] = s.state.at(i, s.n())[0] * s.state.at(i, s.n())[0];
    eta1[i] = eta2[i] - 1.0;
  }
  SUBCASE("identical inputs") {
    const ComparisonResult r = comparison_check(s.cs, s.state, s.mu, s.nu, eta2, s.cs.generator, eta2, s.cs.generator, s.bundle);
    CHECK(r.violations == 0);
    CHECK(r.entries > 0);
  }
  SUBCASE("shifted terminal") {
    const ComparisonResult r = comparison_check(s.cs, s.state, s.mu, s.nu, eta1, s.cs.generator, eta2, s.cs.generator, s.bundle);
    CHECK(r.violations == 0);
  }
  SUBCASE("shifted generator") {
    BsdeOptions o1, o2;
    o1.generator = constant_f(-1.0);
    o2.generator = constant_f(0.0);
    const BsdeSolution y1 = s.solve(eta2, o1), y2 = s.solve(eta2, o2);
    CHECK(y1.y0_mean() == doctest::Approx(y2.y0_mean() - 1.0).epsilon(1e-10));
  }
}

TEST_CASE("stability ladders") {
  const CoefficientSet cs = make_game("additive");
  const Setup s(cs, 20, 5000, 10, 0.0, 0.5, 0.5);
  const double x = 0.0;
  const std::vector<double> ladder{0.1, 0.2, 0.4, 0.8};
  const StabilityReport rep = stability_checks(cs, ConstVec(&x, 1), s.mu, s.nu, s.bundle, ladder);
  CHECK(rep.rungs.size() == 4);
  CHECK(rep.pass());
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(ladder_bounded(zeros));
  const std::vector<double> jump{1.0, 3.0};
  CHECK_FALSE(ladder_bounded(jump));
}

TEST_CASE("input checks") {
  const Setup s(brownian(), 10, 100, 1);
  CHECK_THROWS_AS(s.solve(std::vector<double>(s.m() - 1, 0.0)), Error);
  std::vector<double> eta(s.m(), 0.0);
  eta[3] = NAN;
  CHECK_THROWS_AS(s.solve(eta), Error);
}
