#pragma once

#include <cstddef>
#include <functional>

namespace sdg {

// Worker cap shared by every parallel loop in the library. Results never
// depend on it: work is split into fixed-size chunks and reductions are
// combined in chunk order.
void set_max_threads(unsigned n);
unsigned max_threads();

inline constexpr std::size_t kChunkSize = 4096;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kChunkSize) {
  return (n + chunk - 1) / chunk;
}

/// Calls body(chunk_index, begin, end) once per chunk of [0, n).
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t chunk = kChunkSize);

}  // namespace sdg
