#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace optnet {

/// Counter-based random stream.
///
/// Draw k of a stream with seed s is splitmix64(s + (k + 1) * 0x9E3779B97F4A7C15),
/// so sequences depend only on the seed and are identical on every platform.
/// Uniforms use the top 53 bits; normals use the Box-Muller transform and consume
/// two uniforms per pair (the second value is cached).
///
/// A stream has a single owner. Parallel work takes child streams via child().
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on (0, 1); never returns 0.
  double uniform_open() noexcept;
  double normal() noexcept;
  /// Uniform integer on [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Independent stream keyed by `stream_id`; does not advance this stream.
  RngStream child(std::uint64_t stream_id) const noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for a named sub-stream (for example "test" or "resample") of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;

}  // namespace optnet
