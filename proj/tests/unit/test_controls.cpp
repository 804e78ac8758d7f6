#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdg/controls.hpp"
#include "sdg/error.hpp"
#include "sdg/examples.hpp"
#include "sdg/sde_engine.hpp"

using namespace sdg;

namespace {

const TimeGrid kGrid = TimeGrid::make(0.0, 1.0, 4);
const ControlSpace kLine = ControlSpace::euclidean(1);

ControlPath constant(double a, std::size_t m = 3) {
  return ControlPath::constant(kGrid, m, kLine, ConstVec(&a, 1));
}

double respond(const FeedbackStrategy& s, double opp, double t = 0.0) {
  const double x = 0.0;
  double out = 0.0;
  s.map(t, ConstVec(&x, 1), ConstVec(&opp, 1), OutVec(&out, 1));
  return out;
}

}  // namespace

TEST_CASE("paste_controls") {
  const ControlPath a = constant(1.0), b = constant(2.0);
  SUBCASE("idempotent") {
    const std::vector<std::size_t> tau{1, 2, 3};
    CHECK(paste_controls(a, a, tau) == a);
  }
  SUBCASE("tau = 0 gives the second path") {
    const std::vector<std::size_t> tau(3, 0);
    CHECK(paste_controls(a, b, tau) == b);
  }
  SUBCASE("tau = 2 switches mid-path") {
    const std::vector<std::size_t> tau(3, 2);
    const ControlPath p = paste_controls(a, b, tau);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(p.at(i, 0)[0] == 1.0);
      CHECK(p.at(i, 1)[0] == 1.0);
      CHECK(p.at(i, 2)[0] == 2.0);
      CHECK(p.at(i, 3)[0] == 2.0);
    }
  }
}

TEST_CASE("paste_by_partition") {
  const ControlPath a = constant(1.0, 4), b = constant(-1.0, 4), c = constant(0.5, 4);
  SUBCASE("full mask is the identity") {
    const std::vector<PartitionItem> items{{{1, 1, 1, 1}, &a}};
    CHECK(paste_by_partition(items) == a);
  }
  SUBCASE("even split") {
    const std::vector<PartitionItem> items{{{1, 1, 0, 0}, &a}, {{0, 0, 1, 1}, &b}};
    const ControlPath p = paste_by_partition(items);
    CHECK(p.at(0, 3)[0] == 1.0);
    CHECK(p.at(1, 0)[0] == 1.0);
    CHECK(p.at(2, 0)[0] == -1.0);
    CHECK(p.at(3, 2)[0] == -1.0);
  }
  SUBCASE("three-way round trip") {
    const std::vector<PartitionItem> items{{{1, 0, 0, 1}, &a}, {{0, 1, 0, 0}, &b}, {{0, 0, 1, 0}, &c}};
    const ControlPath p = paste_by_partition(items);
    for (const auto& item : items)
      for (std::size_t i = 0; i < 4; ++i)
        if (item.mask[i])
          for (std::size_t k = 0; k < 4; ++k) CHECK(p.at(i, k)[0] == item.path->at(i, k)[0]);
  }
  SUBCASE("overlap is not a partition") {
    const std::vector<PartitionItem> items{{{1, 1, 0, 0}, &a}, {{0, 1, 1, 1}, &b}};
    try {
      paste_by_partition(items);
      FAIL("expected NotAPartition");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotAPartition);
    }
  }
}

TEST_CASE("inadmissible control values are rejected") {
  const ControlSpace ball = ControlSpace::euclidean(1, 1.0);
  const double two = 2.0;
  CHECK_THROWS_AS(ControlPath::constant(kGrid, 2, ball, ConstVec(&two, 1)), Error);
}

TEST_CASE("neutralizer strategy on the additive game") {
  const CoefficientSet cs = make_game("additive");
  const FeedbackStrategy s = neutralizer_strategy(cs);
  CHECK(respond(s, 3.0) == -3.0);
  CHECK(respond(s, 0.0) == 0.0);
  CHECK(respond(s, 0.5) == 0.0);  // inside the kappa-ball: base point
}

TEST_CASE("neutralizer strategy needs psi") {
  CoefficientSet cs = make_game("additive");
  cs.psi = nullptr;
  CHECK_THROWS_AS(neutralizer_strategy(cs), Error);
}

TEST_CASE("constructed neutralizer for phi = v - sin(u)") {
  const CoefficientSet cs = make_game("scalar_phi_sin");
  const PhiFn phi = [](double, double u, double v) { return v - std::sin(u); };
  const CoefficientSet with = attach_constructed_neutralizers(cs, phi, 1.0, 12);
  const FeedbackStrategy s = neutralizer_strategy(with);
  CHECK(respond(s, 2.0, 0.3) == doctest::Approx(std::sin(2.0)).epsilon(1e-3));
}

TEST_CASE("smallest zero") {
  const PhiFn phi = [](double, double u, double v) { return v - std::sin(u); };
  CHECK(smallest_zero(phi, 1.0, 0.0, 1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-8));
  const PhiFn none = [](double, double, double v) { return v * v + 1.0; };
  CHECK_THROWS_AS(smallest_zero(none, 1.0, 0.0, 1.0), Error);
}

TEST_CASE("dyadic construction") {
  SUBCASE("phi = u + v converges to -u") {
    const auto psi = construct_neutralizer([](double, double u, double v) { return u + v; }, 1.0, 1.0, 12);
    CHECK(std::abs(psi(0.0, 0.5) + 0.5) < std::ldexp(1.0, -10));
  }
  SUBCASE("phi = v gives zero at every level") {
    const DyadicNeutralizer psi([](double, double, double v) { return v; }, 1.0, 1.0, 6);
    for (double u : {-2.0, -0.3, 0.0, 0.7, 1.5})
      for (double lv : psi.levels(0.4, u)) CHECK(lv == 0.0);
  }
  SUBCASE("phi = v - sin(u) approaches sin(1) from below") {
    // Oracle: root on a fine v-grid.
    double root = 0.0, best = INFINITY;
    for (int i = 0; i <= 10000; ++i) {
      const double v = -1.0 + 2.0 * i / 10000.0;
      if (std::abs(v - std::sin(1.0)) < best) {
        best = std::abs(v - std::sin(1.0));
        root = v;
      }
    }
    const DyadicNeutralizer psi([](double, double u, double v) { return v - std::sin(u); }, 1.0, 1.0, 12);
    const auto lv = psi.levels(0.5, 1.0);
    for (std::size_t n = 1; n < lv.size(); ++n) CHECK(lv[n] >= lv[n - 1]);
    CHECK(std::abs(lv.back() - root) < 2e-3);
  }
}

TEST_CASE("evaluate_strategy") {
  const CoefficientSet cs = make_game("additive");
  const std::size_t m = 3;
  const StatePaths state(kGrid, m, 1, std::vector<double>(m * 5, 0.0));
  SUBCASE("constant strategy") {
    const double v = 0.25;
    const StrategyOutput out = evaluate_strategy(constant_strategy(cs.v_space, ConstVec(&v, 1)), constant(2.0), state, cs.kappa);
    CHECK(out.path == constant(0.25));
  }
  SUBCASE("anti-mirror answers 2 with -2") {
    const StrategyOutput out = evaluate_strategy(mirror_strategy(cs.v_space, -1.0), constant(2.0), state, cs.kappa);
    CHECK(out.path == constant(-2.0));
  }
  SUBCASE("non-anticipative replay") {
    std::vector<double> va(m * 4), vb(m * 4);
    for (std::size_t i = 0; i < m * 4; ++i) {
      va[i] = 0.1 * static_cast<double>(i);
      vb[i] = (i % 4 < 2) ? va[i] : -va[i];  // equal before step 2
    }
    const ControlPath a(kGrid, m, kLine, va), b(kGrid, m, kLine, vb);
    const FeedbackStrategy s = mirror_strategy(cs.v_space, 1.0);
    const ControlPath oa = evaluate_strategy(s, a, state, cs.kappa).path;
    const ControlPath ob = evaluate_strategy(s, b, state, cs.kappa).path;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < 2; ++k) CHECK(oa.at(i, k)[0] == ob.at(i, k)[0]);
  }
  SUBCASE("growth violations carry a witness") {
    FeedbackStrategy wild = mirror_strategy(cs.v_space, 1.0);
    wild.growth_c = 0.0;
    CHECK_THROWS_AS(evaluate_strategy(wild, constant(5.0), state, cs.kappa), Error);
  }
}

TEST_CASE("class checks") {
  CHECK_THROWS_AS(check_class(ControlClass{}), Error);
  const double a = 1.0;
  const ControlClass dup{constant_control(kLine, ConstVec(&a, 1)), constant_control(kLine, ConstVec(&a, 1))};
  CHECK_THROWS_AS(check_class(dup), Error);
}
