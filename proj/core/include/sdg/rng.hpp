#pragma once

#include <array>
#include <cstdint>

namespace sdg {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output block is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Standard normal pair for the counter (seed, path, step, block). Each
/// block yields two normals, so coordinate c uses block c/2, slot c%2.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t block) noexcept;

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                       std::uint32_t coord) noexcept;

/// Uniform on (0,1) from a single counter; used for quasi-deterministic test
/// and validation sampling.
double uniform01(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace sdg
