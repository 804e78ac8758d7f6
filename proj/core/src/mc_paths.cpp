#include "sdg/mc_paths.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sdg/error.hpp"
#include "sdg/parallel.hpp"
#include "sdg/rng.hpp"

namespace sdg {

TimeGrid TimeGrid::make(double t0, double T, std::size_t n_steps) {
  if (!(t0 >= 0.0) || !(T > t0) || !std::isfinite(T))
    throw Error(Errc::InvalidArgument, "time grid needs 0 <= t0 < T, got t0=" +
                                           std::to_string(t0) + " T=" + std::to_string(T));
  if (n_steps == 0) throw Error(Errc::InvalidArgument, "time grid needs n_steps >= 1");
  TimeGrid g;
  g.origin_ = t0;
  g.horizon_ = T;
  g.total_ = n_steps;
  g.first_ = 0;
  g.n_steps_ = n_steps;
  g.dt_ = (T - t0) / static_cast<double>(n_steps);
  return g;
}

TimeGrid TimeGrid::window(std::size_t first, std::size_t n_steps) const {
  if (first + n_steps > n_steps_)
    throw Error(Errc::GridMismatch, "window [" + std::to_string(first) + ", " +
                                        std::to_string(first + n_steps) + ") exceeds " +
                                        std::to_string(n_steps_) + " steps");
  TimeGrid g = *this;
  g.first_ = first_ + first;
  g.n_steps_ = n_steps;
  return g;
}

double TimeGrid::time(std::size_t k) const noexcept {
  const std::size_t node = first_ + k;
  if (node == total_) return horizon_;
  return origin_ + static_cast<double>(node) * dt_;
}

bool TimeGrid::same_nodes(const TimeGrid& other) const noexcept {
  return origin_ == other.origin_ && horizon_ == other.horizon_ && total_ == other.total_ &&
         first_ == other.first_ && n_steps_ == other.n_steps_;
}

PathBundle::PathBundle(TimeGrid grid, std::size_t d, std::size_t m_paths, std::uint64_t seed,
                       std::vector<double> raw)
    : grid_(grid), d_(d), m_(m_paths), seed_(seed), raw_(std::move(raw)) {
  if (raw_.size() != m_ * grid_.n_steps() * d_)
    throw Error(Errc::GridMismatch, "increment buffer size does not match m*n*d");
}

void PathBundle::increments(std::size_t path, std::size_t step,
                            std::span<double> out) const noexcept {
  const double* src = raw_.data() + (path * grid_.n_steps() + step) * d_;
  if (shift_.empty()) {
    for (std::size_t c = 0; c < d_; ++c) out[c] = src[c];
  } else {
    const double* sh = shift_.data() + step * d_;
    for (std::size_t c = 0; c < d_; ++c) out[c] = src[c] + sh[c];
  }
}

PathBundle PathBundle::window(std::size_t first, std::size_t n_steps) const {
  PathBundle out;
  out.grid_ = grid_.window(first, n_steps);
  out.d_ = d_;
  out.m_ = m_;
  out.seed_ = seed_;
  out.raw_.resize(m_ * n_steps * d_);
  const std::size_t n = grid_.n_steps();
  for (std::size_t i = 0; i < m_; ++i) {
    const double* src = raw_.data() + (i * n + first) * d_;
    std::memcpy(out.raw_.data() + i * n_steps * d_, src, n_steps * d_ * sizeof(double));
  }
  if (!shift_.empty())
    out.shift_.assign(shift_.begin() + static_cast<std::ptrdiff_t>(first * d_),
                      shift_.begin() + static_cast<std::ptrdiff_t>((first + n_steps) * d_));
  return out;
}

PathBundle PathBundle::slice_paths(std::size_t m) const {
  if (m > m_) throw Error(Errc::InvalidArgument, "slice larger than bundle");
  PathBundle out = *this;
  out.m_ = m;
  out.raw_.resize(m * grid_.n_steps() * d_);
  return out;
}

std::vector<double> PathBundle::materialize() const {
  if (shift_.empty()) return raw_;
  std::vector<double> out(raw_.size());
  const std::size_t n = grid_.n_steps();
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < d_; ++c) {
        const std::size_t at = (i * n + k) * d_ + c;
        out[at] = raw_[at] + shift_[k * d_ + c];
      }
  return out;
}

PathBundle generate(const TimeGrid& grid, std::size_t d, std::size_t m_paths, std::uint64_t seed,
                    std::size_t max_entries) {
  if (m_paths == 0 || d == 0) throw Error(Errc::InvalidArgument, "generate needs m_paths, d >= 1");
  const std::size_t n = grid.n_steps();
  if (m_paths > max_entries / n / d)
    throw Error(Errc::AllocationTooLarge, std::to_string(m_paths) + "x" + std::to_string(n) +
                                              "x" + std::to_string(d) + " exceeds cap " +
                                              std::to_string(max_entries));
  std::vector<double> raw(m_paths * n * d);
  const double scale = std::sqrt(grid.dt());
  // The step counter is the absolute node index so windows of a parent grid
  // draw the same numbers as the parent.
  const std::size_t first = grid.first();
  parallel_chunks(m_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        double* dst = raw.data() + (i * n + k) * d;
        const auto step = static_cast<std::uint32_t>(first + k);
        for (std::size_t c = 0; c < d; c += 2) {
          const auto pair = normal_pair(seed, i, step, static_cast<std::uint32_t>(c / 2));
          dst[c] = scale * pair[0];
          if (c + 1 < d) dst[c + 1] = scale * pair[1];
        }
      }
  });
  return PathBundle(grid, d, m_paths, seed, std::move(raw));
}

PathBundle shift_by(const PathBundle& bundle, std::span<const double> h_nodes) {
  const std::size_t n = bundle.grid().n_steps();
  const std::size_t d = bundle.d();
  if (h_nodes.size() != (n + 1) * d)
    throw Error(Errc::GridMismatch, "shift path has " + std::to_string(h_nodes.size()) +
                                        " values, grid needs " + std::to_string((n + 1) * d));
  for (std::size_t c = 0; c < d; ++c)
    if (h_nodes[c] != 0.0) throw Error(Errc::InvalidArgument, "shift path must start at 0");

  PathBundle out = bundle;
  if (out.shift_.empty()) out.shift_.assign(n * d, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < d; ++c)
      out.shift_[k * d + c] += h_nodes[(k + 1) * d + c] - h_nodes[k * d + c];
  return out;
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(U)> bytes;
  for (std::size_t b = 0; b < sizeof(U); ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(Errc::IoError, "truncated bundle file");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(bytes[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

constexpr char kMagic[5] = {'S', 'D', 'G', 'B', '1'};

}  // namespace

void dump(const PathBundle& bundle, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint64_t>(out, bundle.seed());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.m_paths()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.grid().n_steps()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.d()));
  put_le<double>(out, bundle.grid().t0());
  put_le<double>(out, bundle.grid().T());
  for (double v : bundle.materialize()) put_le<double>(out, v);
  if (!out) throw Error(Errc::IoError, "failed writing bundle");
}

PathBundle load(std::istream& in) {
  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(Errc::IoError, "bad bundle magic");
  const auto seed = get_le<std::uint64_t>(in);
  const auto m = get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint32_t>(in);
  const auto d = get_le<std::uint32_t>(in);
  const auto t0 = get_le<double>(in);
  const auto T = get_le<double>(in);
  std::vector<double> raw(static_cast<std::size_t>(m) * n * d);
  for (auto& v : raw) v = get_le<double>(in);
  return PathBundle(TimeGrid::make(t0, T, n), d, m, seed, std::move(raw));
}

}  // namespace sdg
