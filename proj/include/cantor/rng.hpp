#pragma once

// Counter-based random streams keyed by (seed, level, cube key).
//
// Every cube of the construction owns its own stream, so the output of a
// generator does not depend on traversal order or on the number of worker
// threads.

#include <cstdint>

namespace cantor {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class KeyedStream {
 public:
  constexpr KeyedStream(std::uint64_t seed, std::uint64_t level, std::uint64_t key) noexcept
      : base_(splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) ^
                         splitmix64((level << 1) ^ 0xbb67ae8584caa73bULL) ^
                         splitmix64(key + 0x3c6ef372fe94f82bULL))) {}

  /// The i-th 64-bit word of the stream (random access).
  [[nodiscard]] constexpr std::uint64_t word(std::uint64_t i) const noexcept {
    return splitmix64(base_ + 0x9e3779b97f4a7c15ULL * (i + 1));
  }

  std::uint64_t next() noexcept { return word(counter_++); }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  [[nodiscard]] double uniform_at(std::uint64_t i) const noexcept {
    return static_cast<double>(word(i) >> 11) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, bound), bound >= 1 (Lemire's method with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept {
    auto x = next();
    auto m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<unsigned __int128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Seed for trial `index` of an experiment with master seed `seed`.
inline constexpr std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index ^ 0xa54ff53a5f1d36f1ULL));
}

}  // namespace cantor
