#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdg/error.hpp"
#include "sdg/examples.hpp"
#include "sdg/game_values.hpp"

using namespace sdg;
using nlohmann::json;

namespace {

const json kPm1 = json::array({{{"kind", "constant"}, {"values", {-1, 1}}}});
const json kMirrorFirst = json::array({{{"kind", "mirror"}}, {{"kind", "constant"}, {"values", {-1, 1}}}});

PathBundle bundle(std::size_t m, std::uint64_t seed = 1, std::size_t n = 20) {
  return generate(TimeGrid::make(0.0, 1.0, n), 1, m, seed);
}

}  // namespace

TEST_CASE("singleton classes reduce to the pair payoff") {
  const CoefficientSet cs = make_game("additive_diffusion");
  const PathBundle b = bundle(2000, 3);
  const double x = 0.4, u = 0.5, v = -1.0;
  const ControlClass controls{constant_control(cs.u_space, ConstVec(&u, 1))};
  const StrategyClass strategies{constant_strategy(cs.v_space, ConstVec(&v, 1))};
  const ValueEstimate w = estimate_w1(cs, ConstVec(&x, 1), strategies, controls, b);
  const PayoffEstimate j = pair_payoff(cs, ConstVec(&x, 1), controls[0], strategies[0], Leader::PlayerTwo, b);
  CHECK(w.value == j.value);
  CHECK(w.std_err == j.std_err);
  const ValueEstimate w2 = estimate_w2(cs, ConstVec(&x, 1), StrategyClass{constant_strategy(cs.u_space, ConstVec(&u, 1))},
                                       ControlClass{constant_control(cs.v_space, ConstVec(&v, 1))}, b);
  CHECK(w2.value == j.value);
}

TEST_CASE("mirror game values") {
  const CoefficientSet cs = make_game("mirror");
  const PathBundle b = bundle(100);
  const double x = 0.0;
  const ValueEstimate w1 = estimate_w1(cs, ConstVec(&x, 1), make_strategies(cs, true, kMirrorFirst),
                                       make_controls(cs.u_space, kPm1), b);
  CHECK(w1.value == 0.0);
  CHECK(w1.argmin_strategy == "mirror");
  CHECK(w1.n_strategies == 3);
  CHECK(w1.n_controls == 2);
  const ValueEstimate w2 = estimate_w2(cs, ConstVec(&x, 1), make_strategies(cs, false, kMirrorFirst),
                                       make_controls(cs.v_space, kPm1), b);
  CHECK(w2.value == 0.0);
}

TEST_CASE("duplicate controls do not change the value") {
  const CoefficientSet cs = make_game("additive_diffusion");
  const PathBundle b = bundle(1000, 5);
  const double x = 0.1, u = 1.0;
  const StrategyClass s = make_strategies(cs, true, kMirrorFirst);
  ControlClass one{constant_control(cs.u_space, ConstVec(&u, 1))};
  ControlClass three = one;
  for (int i = 0; i < 2; ++i) {
    three.push_back(one[0]);
    three.back().label += std::to_string(i);
  }
  CHECK(estimate_w1(cs, ConstVec(&x, 1), s, one, b).value == estimate_w1(cs, ConstVec(&x, 1), s, three, b).value);
}

TEST_CASE("negated game swaps the priority values") {
  const CoefficientSet cs = make_game("additive_diffusion");
  const CoefficientSet neg = negate_game(cs);
  const PathBundle b = bundle(4000, 7);
  const double x = 0.3;
  const json strategies = json::array({{{"kind", "anti_mirror"}}, {{"kind", "constant"}, {"values", {-1, 0, 1}}}});
  const json controls = json::array({{{"kind", "constant"}, {"values", {-1, 0, 1}}}});
  const ValueEstimate w1 = estimate_w1(cs, ConstVec(&x, 1), make_strategies(cs, true, strategies),
                                       make_controls(cs.u_space, controls), b);
  const ValueEstimate w2 = estimate_w2(neg, ConstVec(&x, 1), make_strategies(neg, false, strategies),
                                       make_controls(neg.v_space, controls), b);
  CHECK(w2.value == doctest::Approx(-w1.value).epsilon(1e-12));
}

TEST_CASE("bounds_check") {
  SUBCASE("zero game") {
    const std::vector<BoundsPoint> pts{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    const BoundsReport r = bounds_check(pts, make_game("zero"));
    CHECK(r.pass);
    CHECK(r.max_excess <= 0.0);
  }
  SUBCASE("frozen game w = x sits under the envelope") {
    const CoefficientSet cs = make_game("frozen");
    std::vector<BoundsPoint> pts;
    for (double x : {0.0, 0.5, 1.0, 2.0}) pts.push_back({x, x, x});
    const BoundsReport r = bounds_check(pts, cs);
    CHECK(r.pass);
    CHECK(std::abs(pts[0].w1) + std::abs(pts[0].w2) <= r.c_kappa + 1e-12);
  }
  SUBCASE("a spike fails") {
    const std::vector<BoundsPoint> pts{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, {3.0, 30.0, 30.0}};
    CHECK_FALSE(bounds_check(pts, make_game("frozen")).pass);
  }
  SUBCASE("too few points") {
    const std::vector<BoundsPoint> pts{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(bounds_check(pts, make_game("frozen")), Error);
  }
}

TEST_CASE("holder_check") {
  const CoefficientSet cs = make_game("frozen");
  const PathBundle b = bundle(50);
  const json c3 = json::array({{{"kind", "constant"}, {"values", {-1, 0, 1}}}});
  const StrategyClass s = make_strategies(cs, true, c3);
  const ControlClass c = make_controls(cs.u_space, c3);
  std::vector<HolderPair> pairs;
  for (double h : {0.1, 0.2, 0.4, 0.8}) pairs.push_back({{0.5}, {0.5 + h}});
  const HolderReport r = holder_check(cs, pairs, s, c, b);
  CHECK(r.pass);
  for (double ratio : r.ratios) CHECK(ratio == doctest::Approx(1.0));

  const double x = 0.7;
  CHECK(estimate_w1(cs, ConstVec(&x, 1), s, c, b).value == estimate_w1(cs, ConstVec(&x, 1), s, c, b).value);
}

TEST_CASE("determinism_check") {
  SUBCASE("deterministic game") {
    const CoefficientSet cs = make_game("mirror");
    const json c = json::array({{{"kind", "constant"}, {"values", {-1, 1}}}});
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const double x = 0.0;
    const DeterminismReport r = determinism_check(cs, ConstVec(&x, 1), make_strategies(cs, true, kMirrorFirst),
                                                  make_controls(cs.u_space, c), TimeGrid::make(0.2, 1.0, 20), 200,
                                                  seeds);
    CHECK(r.spread == 0.0);
    CHECK(r.shift_exact);
    CHECK(r.pass);
  }
  SUBCASE("Brownian square") {
    const CoefficientSet cs = make_game("heat");
    const json zero = json::array({{{"kind", "constant"}, {"values", {0}}}});
    const std::vector<std::uint64_t> seeds{4, 5, 6};
    const double x = 0.0;
    const DeterminismReport r = determinism_check(cs, ConstVec(&x, 1), make_strategies(cs, true, zero),
                                                  make_controls(cs.u_space, zero), TimeGrid::make(0.0, 1.0, 50),
                                                  100000, seeds);
    CHECK(r.spread <= 4.0 * r.pooled_std_err);
    CHECK(r.shift_exact);
  }
}
