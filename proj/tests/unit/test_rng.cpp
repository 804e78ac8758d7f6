#include <cmath>

#include "doctest.h"
#include "sdg/rng.hpp"

using sdg::Philox4x32;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normals are pure functions of the counter") {
  CHECK(sdg::standard_normal(7, 3, 11, 0) == sdg::standard_normal(7, 3, 11, 0));
  CHECK(sdg::standard_normal(7, 3, 11, 0) != sdg::standard_normal(7, 3, 11, 1));
  CHECK(sdg::standard_normal(7, 3, 11, 0) != sdg::standard_normal(8, 3, 11, 0));
  const auto pair = sdg::normal_pair(7, 3, 11, 1);
  CHECK(sdg::standard_normal(7, 3, 11, 2) == pair[0]);
  CHECK(sdg::standard_normal(7, 3, 11, 3) == pair[1]);
}

TEST_CASE("normal moments") {
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sdg::standard_normal(42, static_cast<std::uint64_t>(i), 0, 0);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("uniforms stay in the open unit interval") {
  double lo = 1.0, hi = 0.0, s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = sdg::uniform01(5, static_cast<std::uint64_t>(i));
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    s += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(s / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}
