#pragma once

// Three-term progressions and homothetic patterns at M-adic resolution (d = 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/arith.hpp"
#include "cantor/errors.hpp"
#include "cantor/generators.hpp"
#include "cantor/madic.hpp"

namespace cantor {

enum class ScanMode { endpoints, digit_sets };

/// Digit parity of three level-n cells at the first level where they differ.
enum class ParityClass { all_even, all_odd, mixed };

inline const char* to_string(ParityClass p) {
  switch (p) {
    case ParityClass::all_even: return "even";
    case ParityClass::all_odd: return "odd";
    case ParityClass::mixed: return "mixed";
  }
  return "?";
}

struct ApWitness {
  std::uint64_t k1 = 0, k2 = 0, k3 = 0;  // numerators of the left endpoints, level n
  unsigned branch_level = 0;             // first level whose digits are not all equal
  ParityClass parity = ParityClass::mixed;
};

struct HomothetyHit {
  std::vector<std::uint64_t> points;  // numerators of the matched left endpoints
  double translation = 0.0;           // y_1
  double scale = 0.0;                 // y_2 - y_1
};

struct PatternReport {
  unsigned level = 0;
  std::uint64_t witness_count = 0;  // all witnesses, including ones not stored
  std::vector<ApWitness> ap_witnesses;
  std::uint64_t digitset_violations = 0;
  std::uint64_t nodes_checked = 0;
  std::vector<HomothetyHit> homothety_hits;
  std::uint64_t hit_count = 0;
};

inline constexpr std::size_t kDefaultWitnessLimit = 10000;

namespace detail {

inline ApWitness classify(std::uint64_t a, std::uint64_t b, std::uint64_t c, unsigned n, unsigned M) {
  ApWitness w{a, b, c, 0, ParityClass::mixed};
  std::uint64_t scale = ipow(M, n);
  for (unsigned k = 1; k <= n; ++k) {
    scale /= M;
    const auto da = (a / scale) % M, db = (b / scale) % M, dc = (c / scale) % M;
    if (da != db || db != dc) {
      w.branch_level = k;
      if (da % 2 == 0 && db % 2 == 0 && dc % 2 == 0) w.parity = ParityClass::all_even;
      else if (da % 2 == 1 && db % 2 == 1 && dc % 2 == 1) w.parity = ParityClass::all_odd;
      return w;
    }
  }
  return w;
}

}  // namespace detail

/// Endpoint mode: every exact progression k1 < k2 < k3 of surviving level-n
/// cells. Digit-set mode: per-node progression check of the child digit sets
/// at every level below n.
inline PatternReport ap_scan(const Realization& r, unsigned n, ScanMode mode,
                             std::size_t witness_limit = kDefaultWitnessLimit) {
  if (r.params().d != 1) throw Unsupported("ap_scan is implemented for d = 1");
  const unsigned M = r.params().M;
  PatternReport rep;
  rep.level = n;
  if (mode == ScanMode::endpoints) {
    auto A = r.level(n);
    for (std::size_t i = 0; i < A.size(); ++i)
      for (std::size_t k = i + 2; k < A.size(); ++k) {
        if ((A[i] + A[k]) % 2 != 0) continue;
        const auto mid = (A[i] + A[k]) / 2;
        if (!std::binary_search(A.begin() + static_cast<std::ptrdiff_t>(i) + 1, A.begin() + static_cast<std::ptrdiff_t>(k), mid))
          continue;
        ++rep.witness_count;
        if (rep.ap_witnesses.size() < witness_limit) rep.ap_witnesses.push_back(detail::classify(A[i], mid, A[k], n, M));
      }
    return rep;
  }
  std::vector<std::uint64_t> digits;
  for (unsigned k = 0; k < n; ++k) {
    auto parents = r.level(k);
    auto kids = r.level(k + 1);
    std::size_t j = 0;
    for (auto q : parents) {
      digits.clear();
      while (j < kids.size() && kids[j] / M < q) ++j;
      while (j < kids.size() && kids[j] / M == q) digits.push_back(kids[j++] % M);
      ++rep.nodes_checked;
      if (find_progression_mod(digits, M)) ++rep.digitset_violations;
    }
  }
  return rep;
}

/// All tuples y_1 < ... < y_m of surviving left endpoints with
/// |(y_j - y_1)/(y_2 - y_1) - t_j| <= tol; pattern = (0, 1, t_3, ..., t_m).
inline PatternReport homothety_search(const Realization& r, unsigned n, std::span<const double> pattern, double tol,
                                      std::size_t hit_limit = kDefaultWitnessLimit) {
  if (r.params().d != 1) throw Unsupported("homothety_search is implemented for d = 1");
  if (pattern.size() < 3 || pattern[0] != 0.0 || pattern[1] != 1.0) throw InvalidParameter("pattern must start 0, 1");
  for (std::size_t j = 2; j < pattern.size(); ++j)
    if (!(pattern[j] > pattern[j - 1])) throw InvalidParameter("pattern must be strictly increasing");
  if (tol < 0.0) throw InvalidParameter("tolerance must be nonnegative");
  auto A = r.level(n);
  const double h = std::pow(static_cast<double>(r.params().M), -static_cast<double>(n));
  PatternReport rep;
  rep.level = n;
  std::vector<std::pair<std::size_t, std::size_t>> ranges(pattern.size());
  std::vector<std::size_t> pick(pattern.size());
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t b = a + 1; b < A.size(); ++b) {
      const double y1 = static_cast<double>(A[a]);
      const double D = static_cast<double>(A[b] - A[a]);
      bool empty = false;
      for (std::size_t j = 2; j < pattern.size() && !empty; ++j) {
        const double lo = std::ceil(y1 + (pattern[j] - tol) * D - 1e-9);
        const double hi = std::floor(y1 + (pattern[j] + tol) * D + 1e-9);
        auto f = std::lower_bound(A.begin() + static_cast<std::ptrdiff_t>(b) + 1, A.end(), static_cast<Key>(std::max(lo, 0.0)));
        auto l = hi < 0 ? f : std::upper_bound(f, A.end(), static_cast<Key>(hi));
        ranges[j] = {static_cast<std::size_t>(f - A.begin()), static_cast<std::size_t>(l - A.begin())};
        empty = ranges[j].first >= ranges[j].second;
      }
      if (empty) continue;
      // enumerate strictly increasing choices across the candidate ranges
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j, std::size_t minIdx) {
        if (j == pattern.size()) {
          ++rep.hit_count;
          if (rep.homothety_hits.size() < hit_limit) {
            HomothetyHit hit;
            hit.points = {A[a], A[b]};
            for (std::size_t q = 2; q < pattern.size(); ++q) hit.points.push_back(A[pick[q]]);
            hit.translation = y1 * h;
            hit.scale = D * h;
            rep.homothety_hits.push_back(std::move(hit));
          }
          return;
        }
        for (std::size_t i = std::max(ranges[j].first, minIdx); i < ranges[j].second; ++i) {
          pick[j] = i;
          rec(j + 1, i + 1);
        }
      };
      rec(2, b + 1);
    }
  return rep;
}

struct ParityCertificate {
  bool valid = false;
  std::string reason;
  std::optional<Triple> progression;
};

/// True iff M is even, every element of E is even and in range, and E has no progression mod M.
inline ParityCertificate parity_certificate(const BehrendConfig& config) {
  ParityCertificate c;
  if (config.M < 2 || config.M % 2 != 0) {
    c.reason = "M is odd";
    return c;
  }
  for (auto e : config.E) {
    if (e >= config.M) {
      c.reason = "element " + std::to_string(e) + " out of range";
      return c;
    }
    if (e % 2 != 0) {
      c.reason = "odd element " + std::to_string(e);
      return c;
    }
  }
  if (auto t = find_progression_mod(config.E, config.M)) {
    c.progression = t;
    c.reason = "progression (" + std::to_string((*t)[0]) + ", " + std::to_string((*t)[1]) + ", " +
               std::to_string((*t)[2]) + ") mod " + std::to_string(config.M);
    return c;
  }
  c.valid = true;
  c.reason = "ok";
  return c;
}

}  // namespace cantor
