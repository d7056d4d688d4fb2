#pragma once

// Self-convolution slice densities of mu_n on the line (d = 1).
//
// For the double convolution, Y_n^u = beta_n^2 * sum over I x J in A_n^2 of
// the chord length of {x + y = u} inside I x J. A square with corner
// (ih, jh) contributes a tent centred at (i + j + 1)h, so the profile only
// depends on the sum counts c2(s) = #{(i, j) in A_n^2 : i + j = s}:
//
//   Y_n^{kh} = sqrt(2) beta_n^2 h c2(k - 1), linear in between.
//
// The triple convolution likewise depends on c3(s) = #{i + j + l = s} and a
// piecewise quadratic plane-section kernel.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "cantor/errors.hpp"
#include "cantor/madic.hpp"
#include "cantor/parallel.hpp"
#include "cantor/stats.hpp"

namespace cantor {

/// Length of {x + y = u} inside the closed square [a, a+h] x [b, b+h].
inline double chord_length(double a, double b, double h, double u) {
  return std::numbers::sqrt2 * std::max(0.0, h - std::abs(u - (a + b + h)));
}

/// Area of {x + y + z = u} inside the closed cube with corner (a, b, c) and side h.
inline double plane_section_area(double a, double b, double c, double h, double u) {
  const double t = (u - (a + b + c)) / h;
  if (t <= 0.0 || t >= 3.0) return 0.0;
  auto sq = [](double x) { return x > 0.0 ? x * x : 0.0; };
  const double g = sq(t) - 3.0 * sq(t - 1.0) + 3.0 * sq(t - 2.0);
  return 0.5 * std::numbers::sqrt3 * h * h * g;
}

namespace detail {

inline void require_line(const Realization& r) {
  if (r.params().d != 1) throw DomainError("convolution profiles need d = 1");
}

inline void require_order(unsigned m) {
  if (m != 2 && m != 3) throw Unsupported("convolution order must be 2 or 3");
}

// 2 p_3(t) with p_3 the density of a sum of three uniforms.
inline double irwin_hall2(double t) {
  if (t <= 0.0 || t >= 3.0) return 0.0;
  if (t < 1.0) return t * t;
  if (t < 2.0) return -2.0 * t * t + 6.0 * t - 3.0;
  return (3.0 - t) * (3.0 - t);
}

/// Counts c_m(s) of m-fold sums i_1 + ... + i_m = s over a sorted index set.
class SumCounts {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 25;
  static constexpr std::uint64_t kPairBudget = std::uint64_t{1} << 24;

  SumCounts(std::span<const Key> set, std::uint64_t side) : set_(set.begin(), set.end()), side_(side) {
    const std::uint64_t n = set_.size();
    if (n * n > kPairBudget) return;  // fall back to per-sum evaluation
    tabulated_ = true;
    const std::uint64_t range = 2 * side_ - 1;
    if (range <= kDenseLimit) {
      dense_.assign(range, 0);
      for (auto i : set_)
        for (auto j : set_) ++dense_[i + j];
    } else {
      std::vector<std::uint64_t> sums;
      sums.reserve(n * n);
      for (auto i : set_)
        for (auto j : set_) sums.push_back(i + j);
      std::sort(sums.begin(), sums.end());
      for (std::size_t a = 0; a < sums.size();) {
        std::size_t b = a;
        while (b < sums.size() && sums[b] == sums[a]) ++b;
        sparse_.emplace_back(sums[a], b - a);
        a = b;
      }
    }
  }

  [[nodiscard]] std::uint64_t pair(std::int64_t s) const {
    if (s < 0 || static_cast<std::uint64_t>(s) >= 2 * side_ - 1 || set_.empty()) return 0;
    const auto us = static_cast<std::uint64_t>(s);
    if (tabulated_) {
      if (!dense_.empty()) return dense_[us];
      auto it = std::lower_bound(sparse_.begin(), sparse_.end(), std::pair<std::uint64_t, std::uint64_t>{us, 0});
      return it != sparse_.end() && it->first == us ? it->second : 0;
    }
    std::uint64_t c = 0;
    for (auto i : set_) {
      if (i > us) break;
      if (std::binary_search(set_.begin(), set_.end(), us - i)) ++c;
    }
    return c;
  }

  [[nodiscard]] std::uint64_t triple(std::int64_t s) const {
    std::uint64_t c = 0;
    for (auto l : set_) {
      if (static_cast<std::int64_t>(l) > s) break;
      c += pair(s - static_cast<std::int64_t>(l));
    }
    return c;
  }

  [[nodiscard]] std::uint64_t at(unsigned m, std::int64_t s) const { return m == 2 ? pair(s) : triple(s); }

  /// Every nonzero (s, c2(s)); requires the tabulated form.
  template <class F>
  void for_each_pair(F&& f) const {
    if (!tabulated_) throw Unsupported("pair-sum table too large for a full sweep");
    if (!dense_.empty()) {
      for (std::uint64_t s = 0; s < dense_.size(); ++s)
        if (dense_[s]) f(s, std::uint64_t{dense_[s]});
    } else {
      for (auto [s, c] : sparse_) f(s, c);
    }
  }

  [[nodiscard]] std::size_t size() const { return set_.size(); }

 private:
  std::vector<Key> set_;
  std::uint64_t side_;
  bool tabulated_ = false;
  std::vector<std::uint32_t> dense_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> sparse_;
};

}  // namespace detail

struct SliceProfile {
  unsigned order = 2;
  unsigned level = 0;
  std::vector<double> grid;
  std::vector<double> values;
  double beta_n = 1.0;
  double spacing = 0.0;      // grid spacing actually used (0 for an irregular grid)
  double delta_n = 0.0;      // nominal spacing from gamma_tilde
  double gamma_tilde = 0.0;
  bool capped = false;       // spacing enlarged to respect the point cap
  double lipschitz = 0.0;    // bound on |dY/du|

  [[nodiscard]] double sup() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
  /// Upper end of the certified interval [grid sup, grid sup + slack] for the true sup.
  [[nodiscard]] double certified_sup_slack() const { return lipschitz * spacing; }
};

struct ProfileGrid {
  std::vector<double> points;
  double spacing = 0.0;
  double delta_n = 0.0;
  bool capped = false;
};

inline constexpr std::size_t kGridCapLog2 = 20;

/// Uniform grid on [0, m] with spacing max(delta_n, m / 2^20).
inline ProfileGrid profile_grid(const Realization& r, unsigned m, unsigned n, double gamma_tilde) {
  detail::require_order(m);
  const auto& p = r.params();
  const double logM = std::log(static_cast<double>(p.M));
  const double log_delta = -static_cast<double>(n) * (gamma_tilde + (m - 1.0) * p.d) * logM -
                           static_cast<double>(m) * p.beta.log_beta(n + 1);
  ProfileGrid g;
  g.delta_n = std::exp(log_delta);
  const double floor_spacing = std::ldexp(static_cast<double>(m), -static_cast<int>(kGridCapLog2));
  g.spacing = std::max(g.delta_n, floor_spacing);
  g.capped = g.delta_n < floor_spacing;
  const auto count = static_cast<std::size_t>(std::floor(m / g.spacing + 1e-9)) + 1;
  g.points.resize(count);
  for (std::size_t i = 0; i < count; ++i) g.points[i] = static_cast<double>(i) * g.spacing;
  return g;
}

/// Grid of all level-`level` breakpoints k M^{-level} in [0, m], refined `refine` times.
inline std::vector<double> breakpoint_grid(unsigned M, unsigned level, unsigned m, unsigned refine = 1) {
  const auto cells = checked_mul(ipow(M, level), static_cast<std::uint64_t>(m) * refine);
  if (!cells || *cells > (std::uint64_t{1} << 24)) throw Unsupported("breakpoint grid too large");
  std::vector<double> g(*cells + 1);
  const double h = std::pow(static_cast<double>(M), -static_cast<double>(level)) / refine;
  for (std::uint64_t k = 0; k <= *cells; ++k) g[k] = static_cast<double>(k) * h;
  return g;
}

/// Exact Y_n^u at each grid point, from the sum counts.
inline SliceProfile slice_profile(const Realization& r, unsigned m, unsigned n, std::span<const double> grid,
                                  unsigned workers = 1) {
  detail::require_line(r);
  detail::require_order(m);
  auto A = r.level(n);
  if (m == 3 && A.size() > 4096) throw Unsupported("triple profiles are limited to N_n <= 4096");
  const auto& p = r.params();
  const std::uint64_t side = ipow(p.M, n);
  const double sideD = static_cast<double>(side);

  SliceProfile out;
  out.order = m;
  out.level = n;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(grid.size(), 0.0);
  out.beta_n = p.beta.beta(n);
  if (grid.size() > 1) {
    const double s0 = grid[1] - grid[0];
    bool uniform = true;
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (std::abs((grid[i] - grid[i - 1]) - s0) > 1e-9 * std::max(1.0, s0)) uniform = false;
    out.spacing = uniform ? s0 : 0.0;
  }
  if (A.empty()) return out;

  // Required sums per grid point: floor(u/h) - (m-1) .. floor(u/h).
  std::vector<std::int64_t> cells(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) cells[i] = static_cast<std::int64_t>(std::floor(grid[i] * sideD));
  std::vector<std::int64_t> needed;
  for (auto k : cells)
    for (std::int64_t s = k - static_cast<std::int64_t>(m) + 1; s <= k; ++s)
      if (s >= 0 && s <= static_cast<std::int64_t>(m * (side - 1))) needed.push_back(s);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  const detail::SumCounts counts(A, side);
  std::vector<double> cvals(needed.size());
  parallel_chunks(needed.size(), workers, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) cvals[i] = static_cast<double>(counts.at(m, needed[i]));
  });
  auto lookup = [&](std::int64_t s) {
    auto it = std::lower_bound(needed.begin(), needed.end(), s);
    return it != needed.end() && *it == s ? cvals[static_cast<std::size_t>(it - needed.begin())] : 0.0;
  };

  const double log_scale = m * p.beta.log_beta(n) - (m - 1.0) * n * std::log(static_cast<double>(p.M));
  const double scale = std::exp(log_scale);  // beta^m h^{m-1}
  double cmax = 0.0;
  for (double c : cvals) cmax = std::max(cmax, c);
  if (m == 2) {
    // a priori Lipschitz bound 3 beta_n^2 M^n
    out.lipschitz = 3.0 * std::exp(2.0 * p.beta.log_beta(n)) * sideD;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i] * sideD;
      const auto k = cells[i];
      const double frac = t - static_cast<double>(k);
      const double v = lookup(k - 1) * (1.0 - frac) + lookup(k) * frac;
      out.values[i] = std::numbers::sqrt2 * scale * v;
    }
  } else {
    out.lipschitz = 3.0 * std::numbers::sqrt3 * scale * sideD * cmax;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i] * sideD;
      const auto k = cells[i];
      double v = 0.0;
      for (std::int64_t s = k - 2; s <= k; ++s) v += lookup(s) * detail::irwin_hall2(t - static_cast<double>(s));
      out.values[i] = 0.5 * std::numbers::sqrt3 * scale * v;
    }
  }
  for (auto& v : out.values) v = std::max(v, 0.0);
  return out;
}

inline SliceProfile slice_profile(const Realization& r, unsigned m, unsigned n, double gamma_tilde,
                                  unsigned workers = 1) {
  auto g = profile_grid(r, m, n, gamma_tilde);
  auto prof = slice_profile(r, m, n, g.points, workers);
  prof.spacing = g.spacing;
  prof.delta_n = g.delta_n;
  prof.gamma_tilde = gamma_tilde;
  prof.capped = g.capped;
  return prof;
}

/// Y_n^u by direct enumeration of the m-tuples whose product cube meets the fiber.
inline double slice_value_direct(const Realization& r, unsigned m, unsigned n, double u) {
  detail::require_line(r);
  detail::require_order(m);
  auto A = r.level(n);
  const auto& p = r.params();
  const double side = static_cast<double>(ipow(p.M, n));
  const double h = 1.0 / side;
  const double t = u * side;
  // range of tuple sums S with S < t < S + m
  auto key_range = [&](double lo, double hi) {
    // keys k with lo < k < hi
    const double a = std::floor(lo) + 1.0;
    const double b = std::ceil(hi) - 1.0;
    auto first = std::lower_bound(A.begin(), A.end(), static_cast<Key>(std::max(0.0, a)));
    auto last = b < 0.0 ? A.begin() : std::upper_bound(A.begin(), A.end(), static_cast<Key>(b));
    return std::pair{first, std::max(first, last)};
  };
  double total = 0.0;
  if (m == 2) {
    for (auto i : A) {
      auto [f, l] = key_range(t - 2.0 - static_cast<double>(i), t - static_cast<double>(i));
      for (auto it = f; it != l; ++it) total += chord_length(i * h, *it * h, h, u);
    }
  } else {
    for (auto i : A)
      for (auto j : A) {
        const double base = static_cast<double>(i + j);
        if (base >= t) break;
        auto [f, l] = key_range(t - 3.0 - base, t - base);
        for (auto it = f; it != l; ++it) total += plane_section_area(i * h, j * h, *it * h, h, u);
      }
  }
  return std::exp(m * p.beta.log_beta(n)) * total;
}

/// Exact integral of u -> Y_n^u over [0, m] by per-cell polynomial quadrature.
inline double slice_integral(const Realization& r, unsigned m, unsigned n) {
  const auto grid = breakpoint_grid(r.params().M, n, m, m == 2 ? 1 : 2);
  const auto prof = slice_profile(r, m, n, grid);
  const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  double total = 0.0;
  if (m == 2) {
    for (std::size_t i = 1; i < grid.size(); ++i) total += 0.5 * step * (prof.values[i - 1] + prof.values[i]);
  } else {
    // Simpson on each level-n cell (the profile is quadratic there)
    for (std::size_t i = 2; i < grid.size(); i += 2)
      total += step / 3.0 * (prof.values[i - 2] + 4.0 * prof.values[i - 1] + prof.values[i]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Marginal line profiles over x + y = u, 2x + y = u and x + 2y = u.

enum class LineKind { x_plus_y, two_x_plus_y, x_plus_two_y };

struct LineFamily {
  LineKind kind = LineKind::x_plus_y;
  double offset = 0.0;
};

inline const char* to_string(LineKind k) {
  switch (k) {
    case LineKind::x_plus_y: return "x+y";
    case LineKind::two_x_plus_y: return "2x+y";
    case LineKind::x_plus_two_y: return "x+2y";
  }
  return "?";
}

namespace detail {

// Length of {2x + y = w} (x,y in units of one cell) inside the unit square, divided by sqrt(5).
inline double skew_overlap(double w) {
  if (w <= 0.0 || w >= 3.0) return 0.0;
  if (w < 1.0) return 0.5 * w;
  if (w < 2.0) return 0.5;
  return 0.5 * (3.0 - w);
}

}  // namespace detail

/// beta_n^2 times the length of the line V inside A_n x A_n.
inline double marginal_line_profile(const Realization& r, const LineFamily& V, unsigned n) {
  detail::require_line(r);
  auto A = r.level(n);
  if (A.empty()) return 0.0;
  const auto& p = r.params();
  const double side = static_cast<double>(ipow(p.M, n));
  const double h = 1.0 / side;
  const double t = V.offset * side;
  const double b2 = std::exp(2.0 * p.beta.log_beta(n));
  double total = 0.0;
  if (V.kind == LineKind::x_plus_y) {
    for (auto i : A)
      for (auto j : A) total += chord_length(i * h, j * h, h, V.offset);
    return b2 * total;
  }
  // 2a + b = s with (a, b) = (i, j) or (j, i); both counts agree on A x A
  for (auto a : A)
    for (auto b : A) total += detail::skew_overlap(t - 2.0 * static_cast<double>(a) - static_cast<double>(b));
  return b2 * std::sqrt(5.0) * h * total;
}

/// Exact sup over offsets and kinds of the marginal line profile (attained at cell breakpoints).
inline double marginal_line_sup(const Realization& r, unsigned n) {
  detail::require_line(r);
  auto A = r.level(n);
  if (A.empty()) return 0.0;
  const auto& p = r.params();
  const std::uint64_t side = ipow(p.M, n);
  const double h = 1.0 / static_cast<double>(side);
  const double b2 = std::exp(2.0 * p.beta.log_beta(n));
  std::map<std::uint64_t, std::uint64_t> c2, c21;
  for (auto a : A)
    for (auto b : A) {
      ++c2[a + b];
      ++c21[2 * a + b];
    }
  double best = 0.0;
  for (auto [s, c] : c2) best = std::max(best, std::numbers::sqrt2 * b2 * h * static_cast<double>(c));
  // skew profile at integer t: (c21(t-1) + c21(t-2)) / 2
  std::map<std::uint64_t, double> at;
  for (auto [s, c] : c21) {
    at[s + 1] += 0.5 * static_cast<double>(c);
    at[s + 2] += 0.5 * static_cast<double>(c);
  }
  for (auto [t, v] : at) best = std::max(best, std::sqrt(5.0) * b2 * h * v);
  return best;
}

// ---------------------------------------------------------------------------
// Dependency graphs on the product cubes meeting a fiber.

struct DependencySummary {
  unsigned order = 2;
  std::size_t vertices = 0;
  std::size_t max_degree = 0;
  std::size_t semidiagonal = 0;  // vertices with a repeated interval (order 3)
  double marginal_sup = 0.0;     // X~_n = 1 + sup of the marginal line profiles
  double degree_scale = 0.0;     // X~_n beta_n^{-2} M^n
};

/// Vertices: product cubes in A_n^m (off-diagonal for m = 2) meeting {sum = u}
/// in positive measure. Edges join cubes sharing an interval.
inline DependencySummary dependency_graph(const Realization& r, double u, unsigned n, unsigned m) {
  detail::require_line(r);
  detail::require_order(m);
  auto A = r.level(n);
  const auto& p = r.params();
  const double side = static_cast<double>(ipow(p.M, n));
  const double t = u * side;

  std::vector<std::array<Key, 3>> verts;
  for (auto i : A)
    for (auto j : A) {
      const double base = static_cast<double>(i) + static_cast<double>(j);
      if (m == 2) {
        if (i != j && base < t && t < base + 2.0) verts.push_back({i, j, 0});
      } else {
        if (base >= t) continue;
        for (auto l : A) {
          const double s = base + static_cast<double>(l);
          if (s >= t) break;
          if (t < s + 3.0) verts.push_back({i, j, l});
        }
      }
    }

  DependencySummary out;
  out.order = m;
  out.vertices = verts.size();
  using K2 = std::pair<Key, Key>;
  std::unordered_map<Key, std::size_t> one;
  std::map<K2, std::size_t> two;
  std::map<std::array<Key, 3>, std::size_t> three;
  auto distinct = [&](const std::array<Key, 3>& v) {
    std::vector<Key> s(v.begin(), v.begin() + m);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  for (auto& v : verts) {
    auto s = distinct(v);
    if (s.size() < m) ++out.semidiagonal;
    for (std::size_t a = 0; a < s.size(); ++a) {
      ++one[s[a]];
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        ++two[{s[a], s[b]}];
        for (std::size_t c = b + 1; c < s.size(); ++c) ++three[{s[a], s[b], s[c]}];
      }
    }
  }
  for (auto& v : verts) {
    auto s = distinct(v);
    std::size_t reach = 0;  // inclusion-exclusion over the shared intervals
    for (std::size_t a = 0; a < s.size(); ++a) {
      reach += one[s[a]];
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        reach -= two[{s[a], s[b]}];
        for (std::size_t c = b + 1; c < s.size(); ++c) reach += three[{s[a], s[b], s[c]}];
      }
    }
    out.max_degree = std::max(out.max_degree, reach - 1);
  }
  if (m == 2) out.semidiagonal = 0;
  out.marginal_sup = 1.0 + marginal_line_sup(r, n);
  out.degree_scale = out.marginal_sup * std::exp(-2.0 * p.beta.log_beta(n)) * side;
  return out;
}

/// Dependency-graph concentration bound 2 exp(-2 rho^2 / ((Delta + 1) count R^2)).
inline double hoeffding_janson_bound(std::uint64_t Delta, std::uint64_t count, double R, double rho) {
  if (count == 0 || !(R > 0.0) || !(rho > 0.0)) throw InvalidParameter("need count >= 1, R > 0, rho > 0");
  return 2.0 * std::exp(-2.0 * rho * rho / ((static_cast<double>(Delta) + 1.0) * static_cast<double>(count) * R * R));
}

// ---------------------------------------------------------------------------
// Increments Y_{n+1}^u - Y_n^u split over level-n product squares.

struct IncrementTerm {
  CubeIndex cube;  // level n, coords (i, j) of the product square
  double value = 0.0;
  bool diagonal = false;
};

inline std::vector<IncrementTerm> increment_decomposition(const Realization& r, double u, unsigned n) {
  detail::require_line(r);
  auto A = r.level(n);
  auto B = r.level(n + 1);
  const auto& p = r.params();
  const std::uint64_t M = p.M;
  const double side = static_cast<double>(ipow(M, n));
  const double h = 1.0 / side;
  const double hc = h / static_cast<double>(M);
  const double b0 = std::exp(2.0 * p.beta.log_beta(n));
  const double b1 = std::exp(2.0 * p.beta.log_beta(n + 1));
  auto kids = [&](Key i) {
    auto f = std::lower_bound(B.begin(), B.end(), i * M);
    auto l = std::lower_bound(f, B.end(), (i + 1) * M);
    return B.subspan(static_cast<std::size_t>(f - B.begin()), static_cast<std::size_t>(l - f));
  };
  std::vector<IncrementTerm> out;
  for (auto i : A)
    for (auto j : A) {
      const double coarse = chord_length(i * h, j * h, h, u);
      if (coarse <= 0.0) continue;
      double fine = 0.0;
      auto ki = kids(i);
      auto kj = kids(j);
      for (auto a : ki)
        for (auto b : kj) fine += chord_length(a * hc, b * hc, hc, u);
      IncrementTerm term;
      term.cube = CubeIndex{n, {i, j}};
      term.value = b1 * fine - b0 * coarse;
      term.diagonal = i == j;
      out.push_back(term);
    }
  return out;
}

/// gamma_0 = 0, gamma_{k+1} = gamma~ / (1 + gamma~ - gamma_k).
inline std::vector<double> holder_bootstrap(double gamma_tilde, unsigned steps) {
  if (!(gamma_tilde > 0.0 && gamma_tilde <= 1.0)) throw InvalidParameter("gamma_tilde must lie in (0, 1]");
  std::vector<double> g{0.0};
  for (unsigned k = 0; k < steps; ++k) g.push_back(gamma_tilde / (1.0 + gamma_tilde - g.back()));
  return g;
}

struct HolderEstimate {
  double exponent = 0.0;  // -slope of log_M sup increment vs n
  double stderr_ = 0.0;
  double intercept = 0.0;
  std::vector<unsigned> levels;        // n with a nonzero increment Y_{n+1} - Y_n
  std::vector<double> log_increments;  // log_M of the normalised sup increment
  std::size_t zero_levels = 0;
};

/// Regression of log_M sup_u |Y_{n+1}^u - Y_n^u| / (1 + sqrt(Y_n^u)) against n.
/// Profiles must be on one common grid at consecutive levels. Levels with an
/// identically zero increment carry no decay information and are skipped; if
/// every increment is zero the exponent is +infinity.
inline HolderEstimate holder_exponent_estimate(std::span<const SliceProfile> profiles, unsigned M) {
  if (profiles.size() < 3) throw InsufficientData("Hoelder regression needs at least three levels");
  HolderEstimate est;
  std::vector<double> x;
  for (std::size_t k = 0; k + 1 < profiles.size(); ++k) {
    const auto& a = profiles[k];
    const auto& b = profiles[k + 1];
    if (b.level != a.level + 1 || a.grid != b.grid) throw InvalidParameter("profiles must be consecutive on one grid");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      sup = std::max(sup, std::abs(b.values[i] - a.values[i]) / (1.0 + std::sqrt(a.values[i])));
    if (sup <= 1e-12 * std::max(1.0, a.sup())) {
      ++est.zero_levels;
      continue;
    }
    est.levels.push_back(a.level);
    x.push_back(a.level);
    est.log_increments.push_back(std::log(sup) / std::log(static_cast<double>(M)));
  }
  if (x.empty()) {
    est.exponent = std::numeric_limits<double>::infinity();
    return est;
  }
  if (x.size() < 2) throw InsufficientData("fewer than two levels with a nonzero increment");
  const auto fit = fit_line(x, est.log_increments);
  est.exponent = -fit.slope;
  est.stderr_ = fit.slope_stderr;
  est.intercept = fit.intercept;
  return est;
}

/// Profiles of order m at levels lo..hi on the common breakpoint grid of level hi + 1.
inline std::vector<SliceProfile> holder_profiles(const Realization& r, unsigned m, unsigned lo, unsigned hi,
                                                 unsigned workers = 1) {
  const auto grid = breakpoint_grid(r.params().M, hi + 1, m, m == 2 ? 1 : 2);
  std::vector<SliceProfile> out;
  for (unsigned n = lo; n <= hi; ++n) out.push_back(slice_profile(r, m, n, grid, workers));
  return out;
}

/// Target Hoelder exponents of the m-fold convolution density.
inline double holder_target(unsigned m, double d, double alpha) {
  if (m == 2) return d / 2.0 - alpha;
  if (m == 3) {
    if (alpha <= d / 2.0) return 0.5 * (d - alpha);
    if (alpha < 2.0 * d / 3.0) return d - 1.5 * alpha;
    return 0.0;
  }
  throw Unsupported("holder target is tabulated for m = 2, 3");
}

}  // namespace cantor
