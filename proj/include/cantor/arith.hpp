#pragma once

// Three-term progressions in Z_M.
//
// A progression is a triple of pairwise distinct residues (x, y, z) with
// x + z = 2y (mod M). Degenerate wraparound triples such as (x, x + M/2, x)
// repeat an element and are not progressions.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cantor {

using Triple = std::array<std::uint64_t, 3>;

/// First progression (x, y, z) inside `set` (residues mod M, any order), or nullopt.
inline std::optional<Triple> find_progression_mod(std::span<const std::uint64_t> set, std::uint64_t M) {
  std::vector<char> member(M, 0);
  for (auto v : set) member[v % M] = 1;
  for (std::size_t a = 0; a < set.size(); ++a) {
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      const auto x = set[a] % M;
      const auto z = set[b] % M;
      if (x == z) continue;
      const auto sum = (x + z) % M;
      // solutions y of 2y = sum (mod M)
      std::array<std::uint64_t, 2> cand{};
      std::size_t nc = 0;
      if (M % 2 == 1) {
        cand[nc++] = (sum % 2 == 0 ? sum / 2 : (sum + M) / 2) % M;
      } else if (sum % 2 == 0) {
        cand[nc++] = sum / 2;
        cand[nc++] = sum / 2 + M / 2;
      }
      for (std::size_t i = 0; i < nc; ++i) {
        const auto y = cand[i];
        if (y != x && y != z && member[y]) return Triple{x, y, z};
      }
    }
  }
  return std::nullopt;
}

inline bool progression_free_mod(std::span<const std::uint64_t> set, std::uint64_t M) {
  return !find_progression_mod(set, M).has_value();
}

}  // namespace cantor
