#pragma once

// M-adic cube indexing, the mass-scaling schedule beta_n, sparse per-level
// storage of the surviving cubes A_n, and the closed-form two-point and
// second-moment formulas of the subdivision martingale.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cantor/errors.hpp"

namespace cantor {

using Key = std::uint64_t;

inline constexpr unsigned kScheduleLevels = 1024;

inline std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
  return out;
}

inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, unsigned exp) {
  std::uint64_t out = 1;
  for (unsigned i = 0; i < exp; ++i) {
    auto next = checked_mul(out, base);
    if (!next) return std::nullopt;
    out = *next;
  }
  return out;
}

inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  auto v = checked_pow(base, exp);
  if (!v) throw LevelOutOfRange("integer power overflows 64 bits");
  return *v;
}

/// Exact nonnegative rational, used when beta_n is representable in 64 bits.
struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  [[nodiscard]] long double value() const { return static_cast<long double>(num) / den; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// The deterministic nondecreasing mass-scaling sequence beta_n.
///
/// Kept in a dual representation: the natural log of beta_n is always
/// available, and an exact rational is reported whenever the schedule has
/// one and it fits in 64 bits.
class BetaSchedule {
 public:
  enum class Kind : std::uint8_t { constant, geometric, capacity, table };

  BetaSchedule() = default;

  static BetaSchedule constant() { return {}; }

  /// beta_n = ratio^n with real ratio >= 1 (fractal percolation: ratio = 1/p).
  static BetaSchedule geometric(double ratio) {
    if (!(ratio >= 1.0) || !std::isfinite(ratio))
      throw InvalidParameter("geometric beta ratio must be finite and >= 1");
    BetaSchedule b;
    b.kind_ = ratio == 1.0 ? Kind::constant : Kind::geometric;
    b.log_ratio_ = std::log(ratio);
    return b;
  }

  /// beta_n = (num/den)^n with an exact rational ratio >= 1.
  static BetaSchedule geometric(std::uint64_t num, std::uint64_t den) {
    if (den == 0 || num < den) throw InvalidParameter("geometric beta ratio must be >= 1");
    const auto g = std::gcd(num, den);
    BetaSchedule b;
    b.kind_ = num == den ? Kind::constant : Kind::geometric;
    b.ratio_ = Rational{num / g, den / g};
    b.log_ratio_ = std::log(static_cast<double>(num)) - std::log(static_cast<double>(den));
    return b;
  }

  /// Greedy capacity-exact schedule: beta_{n+1} = M^d beta_n while
  /// beta_n <= M^{(n+1)(d-s)}, otherwise beta_{n+1} = beta_n.
  static BetaSchedule capacity(unsigned M, unsigned d, double s) {
    if (!(s > 0.0 && s < static_cast<double>(d)))
      throw InvalidParameter("capacity-exact construction needs 0 < s < d");
    BetaSchedule b;
    b.kind_ = Kind::capacity;
    b.base_ = M;
    b.dim_ = d;
    b.log_ratio_ = d * std::log(static_cast<double>(M));  // log of M^d
    b.steps_.assign(kScheduleLevels + 1, 0);
    for (unsigned n = 0; n < kScheduleLevels; ++n) {
      // compare in log_M units: log_M beta_n = d * k_n
      const double lhs = static_cast<double>(d) * b.steps_[n];
      const double rhs = (n + 1.0) * (static_cast<double>(d) - s);
      b.steps_[n + 1] = b.steps_[n] + (lhs <= rhs + 1e-9 ? 1U : 0U);
    }
    return b;
  }

  /// Explicit table beta_0 .. beta_K; levels beyond K are undefined.
  static BetaSchedule table(std::vector<double> values) {
    if (values.empty() || values.front() != 1.0) throw InvalidParameter("beta table must start with beta_0 = 1");
    BetaSchedule b;
    b.kind_ = Kind::table;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 1.0) || !std::isfinite(values[i]))
        throw InvalidParameter("beta table entries must be finite and >= 1");
      if (i > 0 && values[i] < values[i - 1]) throw InvalidParameter("beta table must be nondecreasing");
      b.log_table_.push_back(std::log(values[i]));
    }
    return b;
  }

  [[nodiscard]] Kind kind() const { return kind_; }

  /// Largest level with a defined value.
  [[nodiscard]] unsigned defined_levels() const {
    if (kind_ == Kind::table) return static_cast<unsigned>(log_table_.size() - 1);
    if (kind_ == Kind::capacity) return kScheduleLevels;
    return ~0U;
  }

  [[nodiscard]] double log_beta(unsigned n) const {
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::geometric: return n * log_ratio_;
      case Kind::capacity: check(n); return steps_[n] * log_ratio_;
      case Kind::table: check(n); return log_table_[n];
    }
    return 0.0;
  }

  [[nodiscard]] double beta(unsigned n) const { return std::exp(log_beta(n)); }

  [[nodiscard]] std::optional<Rational> exact(unsigned n) const {
    switch (kind_) {
      case Kind::constant: return Rational{1, 1};
      case Kind::geometric: {
        if (!ratio_) return std::nullopt;
        auto num = checked_pow(ratio_->num, n);
        auto den = checked_pow(ratio_->den, n);
        if (!num || !den) return std::nullopt;
        return Rational{*num, *den};
      }
      case Kind::capacity: {
        check(n);
        auto v = checked_pow(ipow(base_, dim_), steps_[n]);
        if (!v) return std::nullopt;
        return Rational{*v, 1};
      }
      case Kind::table: return std::nullopt;
    }
    return std::nullopt;
  }

  /// beta_n / beta_{n+1}: the retention probability of a child cube.
  [[nodiscard]] double retention(unsigned n) const {
    if (kind_ == Kind::capacity) {
      check(n + 1);
      return steps_[n + 1] > steps_[n] ? 1.0 / ipow(base_, dim_) : 1.0;
    }
    return std::exp(log_beta(n) - log_beta(n + 1));
  }

  /// Capacity-exact schedule: true when beta_{n+1} = M^d beta_n.
  [[nodiscard]] bool full_step(unsigned n) const {
    if (kind_ != Kind::capacity) return false;
    check(n + 1);
    return steps_[n + 1] > steps_[n];
  }

  /// Capacity-exact schedule: beta_n = (M^d)^{exponent(n)}.
  [[nodiscard]] unsigned exponent(unsigned n) const {
    check(n);
    return kind_ == Kind::capacity ? steps_[n] : 0U;
  }

 private:
  void check(unsigned n) const {
    if (n > defined_levels()) throw LevelOutOfRange("beta_n requested beyond the defined schedule");
  }

  Kind kind_ = Kind::constant;
  double log_ratio_ = 0.0;
  std::optional<Rational> ratio_;
  unsigned base_ = 2;
  unsigned dim_ = 1;
  std::vector<unsigned> steps_;
  std::vector<double> log_table_;
};

struct ModelParams {
  unsigned M = 2;
  unsigned d = 1;
  BetaSchedule beta;
  double alpha_lo = 0.0;  // liminf log_M(beta_n)/n
  double alpha_hi = 0.0;  // limsup log_M(beta_n)/n
  bool allow_extinction = false;  // beta_n may exceed M^{nd} (subcritical percolation)

  [[nodiscard]] std::uint64_t children() const { return ipow(M, d); }

  /// Deepest level whose packed keys (M^{nd} distinct values) fit in 63 bits.
  [[nodiscard]] unsigned max_level() const {
    unsigned n = 0;
    std::uint64_t span = 1;
    const std::uint64_t step = ipow(M, d);
    while (true) {
      auto next = checked_mul(span, step);
      if (!next || *next > (std::uint64_t{1} << 62)) return n;
      span = *next;
      ++n;
    }
  }

  /// Checks the schedule invariants on levels 0..levels.
  void validate(unsigned levels = 64) const {
    if (M < 2) throw InvalidParameter("base M must be >= 2");
    if (d != 1 && d != 2) throw InvalidParameter("dimension d must be 1 or 2");
    if (!(alpha_lo <= alpha_hi + 1e-12) || alpha_lo < -1e-12 || (!allow_extinction && alpha_hi > d + 1e-12))
      throw InvalidParameter("need 0 <= alpha_lo <= alpha_hi <= d");
    if (beta.log_beta(0) != 0.0) throw InvalidParameter("beta_0 must equal 1");
    const unsigned top = std::min(levels, beta.defined_levels());
    const double log_full = d * std::log(static_cast<double>(M));
    for (unsigned n = 1; n <= top; ++n) {
      if (beta.log_beta(n) < beta.log_beta(n - 1) - 1e-12)
        throw InvalidParameter("beta_n must be nondecreasing");
      if (!allow_extinction && beta.log_beta(n) > n * log_full * (1 + 1e-12) + 1e-12)
        throw InvalidParameter("beta_n must not exceed M^{nd}");
    }
  }
};

inline ModelParams make_params(unsigned M, unsigned d, BetaSchedule beta, double alpha_lo, double alpha_hi,
                               bool allow_extinction = false) {
  ModelParams p{M, d, std::move(beta), alpha_lo, alpha_hi, allow_extinction};
  p.validate();
  return p;
}

/// beta_n * M^{-nd}: the density-weighted volume of one level-n cube.
inline long double cube_weight(const ModelParams& params, unsigned n) {
  if (auto ex = params.beta.exact(n)) {
    if (auto vol = checked_pow(params.M, n * params.d)) {
      if (auto den = checked_mul(ex->den, *vol)) return static_cast<long double>(ex->num) / *den;
    }
  }
  return std::exp(static_cast<long double>(params.beta.log_beta(n)) -
                  static_cast<long double>(n) * params.d * std::log(static_cast<long double>(params.M)));
}

/// Half-open M-adic cube prod [j_i M^-n, (j_i+1) M^-n).
struct CubeIndex {
  unsigned level = 0;
  std::array<std::uint64_t, 2> coords{};

  friend bool operator==(const CubeIndex&, const CubeIndex&) = default;
};

/// Packs a cube into its interleaved-digit key. Children of a cube with key k
/// are the contiguous range [k M^d, (k+1) M^d), so sorted level arrays stay
/// sorted under refinement and descendants form one key interval.
inline Key encode_key(const CubeIndex& q, unsigned M, unsigned d) {
  if (d == 1) return q.coords[0];
  Key key = 0;
  std::uint64_t scale = ipow(M, q.level);
  for (unsigned k = 0; k < q.level; ++k) {
    scale /= M;
    const auto a = (q.coords[0] / scale) % M;
    const auto b = (q.coords[1] / scale) % M;
    key = key * M * M + a * M + b;
  }
  return key;
}

inline CubeIndex decode_key(unsigned level, Key key, unsigned M, unsigned d) {
  CubeIndex q{level, {0, 0}};
  if (d == 1) {
    q.coords[0] = key;
    return q;
  }
  std::uint64_t scale = 1;
  for (unsigned k = 0; k < level; ++k) {
    const auto digit = key % (std::uint64_t{M} * M);
    key /= std::uint64_t{M} * M;
    q.coords[0] += (digit / M) * scale;
    q.coords[1] += (digit % M) * scale;
    scale *= M;
  }
  return q;
}

inline bool valid_cube(const CubeIndex& q, unsigned M, unsigned d) {
  auto side = checked_pow(M, q.level);
  if (!side) return false;
  for (unsigned i = 0; i < d; ++i)
    if (q.coords[i] >= *side) return false;
  for (unsigned i = d; i < 2; ++i)
    if (q.coords[i] != 0) return false;
  return true;
}

inline CubeIndex parent_of(const CubeIndex& q, unsigned M) {
  if (q.level == 0) throw DomainError("the unit cube has no parent");
  return CubeIndex{q.level - 1, {q.coords[0] / M, q.coords[1] / M}};
}

/// The M^d offspring of q, in key order.
inline std::vector<CubeIndex> cube_children(const CubeIndex& q, unsigned M, unsigned d) {
  std::vector<CubeIndex> out;
  const auto count = ipow(M, d);
  out.reserve(count);
  const Key base = encode_key(q, M, d) * count;
  for (std::uint64_t c = 0; c < count; ++c) out.push_back(decode_key(q.level + 1, base + c, M, d));
  return out;
}

enum class GeneratorTag : std::uint8_t { percolation = 1, capacity = 2, behrend = 3, custom = 4 };

inline const char* to_string(GeneratorTag tag) {
  switch (tag) {
    case GeneratorTag::percolation: return "percolation";
    case GeneratorTag::capacity: return "capacity";
    case GeneratorTag::behrend: return "behrend";
    case GeneratorTag::custom: return "custom";
  }
  return "unknown";
}

/// One realization: the sets A_0 .. A_depth as sorted key arrays.
/// Immutable after construction.
class Realization {
 public:
  Realization(ModelParams params, std::vector<std::vector<Key>> levels, std::uint64_t seed, GeneratorTag tag,
              std::string generator_spec = {})
      : params_(std::move(params)),
        levels_(std::move(levels)),
        seed_(seed),
        tag_(tag),
        spec_(std::move(generator_spec)) {
    if (levels_.empty() || levels_[0].size() != 1 || levels_[0][0] != 0)
      throw InvalidParameter("A_0 must be the unit cube");
    const auto fan = params_.children();
    for (std::size_t n = 0; n < levels_.size(); ++n) {
      if (!std::is_sorted(levels_[n].begin(), levels_[n].end()) ||
          std::adjacent_find(levels_[n].begin(), levels_[n].end()) != levels_[n].end())
        throw InvalidParameter("level arrays must be strictly increasing");
      if (n > 0 && levels_[n].size() > fan * levels_[n - 1].size())
        throw InvalidParameter("N_{n+1} exceeds M^d N_n");
    }
  }

  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] unsigned depth() const { return static_cast<unsigned>(levels_.size() - 1); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] GeneratorTag tag() const { return tag_; }
  [[nodiscard]] const std::string& generator_spec() const { return spec_; }

  [[nodiscard]] std::span<const Key> level(unsigned n) const {
    check(n);
    return levels_[n];
  }

  [[nodiscard]] std::uint64_t count(unsigned n) const { return level(n).size(); }

  /// ||mu_n|| = beta_n M^{-nd} N_n.
  [[nodiscard]] double mass(unsigned n) const {
    return static_cast<double>(cube_weight(params_, n) * static_cast<long double>(count(n)));
  }

  [[nodiscard]] bool contains(unsigned n, Key key) const {
    auto lv = level(n);
    return std::binary_search(lv.begin(), lv.end(), key);
  }

  /// Number of level-n cubes of A_n inside q (q.level <= n).
  [[nodiscard]] std::uint64_t descendants(const CubeIndex& q, unsigned n) const {
    if (q.level > n) throw DomainError("cube is finer than the requested level");
    auto lv = level(n);
    const auto span = ipow(params_.children(), n - q.level);
    const Key lo = encode_key(q, params_.M, params_.d) * span;
    const Key hi = lo + span;
    return static_cast<std::uint64_t>(std::lower_bound(lv.begin(), lv.end(), hi) -
                                      std::lower_bound(lv.begin(), lv.end(), lo));
  }

  /// Exact check that every cube of A_{n+1} has its parent in A_n.
  [[nodiscard]] bool nested() const {
    const auto fan = params_.children();
    for (std::size_t n = 1; n < levels_.size(); ++n) {
      const auto& up = levels_[n - 1];
      std::size_t j = 0;
      for (Key k : levels_[n]) {
        const Key parent = k / fan;
        while (j < up.size() && up[j] < parent) ++j;
        if (j == up.size() || up[j] != parent) return false;
      }
    }
    return true;
  }

 private:
  void check(unsigned n) const {
    if (n >= levels_.size()) throw LevelOutOfRange("level " + std::to_string(n) + " exceeds generated depth");
  }

  ModelParams params_;
  std::vector<std::vector<Key>> levels_;
  std::uint64_t seed_ = 0;
  GeneratorTag tag_ = GeneratorTag::custom;
  std::string spec_;
};

/// mu_n(q) = beta_n Leb(q cap A_n).
inline double measure_of_cube(const Realization& r, const CubeIndex& q, unsigned n) {
  if (n > r.depth()) throw LevelOutOfRange("measure requested beyond generated depth");
  if (!valid_cube(q, r.params().M, r.params().d)) throw DomainError("invalid cube index");
  return static_cast<double>(cube_weight(r.params(), n) * static_cast<long double>(r.descendants(q, n)));
}

/// Point of [0,1)^d with M-adic rational coordinates num_i / M^level.
struct MadicPoint {
  unsigned level = 0;
  std::array<std::uint64_t, 2> num{};
};

/// The level m with kappa(x,y) = M^{-m}; nullopt when x == y.
inline std::optional<unsigned> separation_level(const MadicPoint& x, const MadicPoint& y, unsigned M, unsigned d) {
  for (const auto* p : {&x, &y}) {
    auto side = checked_pow(M, p->level);
    if (!side) throw DomainError("point level too deep");
    for (unsigned i = 0; i < d; ++i)
      if (p->num[i] >= *side) throw DomainError("point outside [0,1)^d");
  }
  const unsigned L = std::max(x.level, y.level);
  std::array<std::uint64_t, 2> a{}, b{};
  for (unsigned i = 0; i < d; ++i) {
    auto ax = checked_mul(x.num[i], ipow(M, L - x.level));
    auto by = checked_mul(y.num[i], ipow(M, L - y.level));
    if (!ax || !by) throw DomainError("point level too deep");
    a[i] = *ax;
    b[i] = *by;
  }
  if (a == b) return std::nullopt;
  // longest common prefix of the base-M digit strings, over all coordinates
  std::uint64_t scale = ipow(M, L);
  unsigned m = 0;
  for (unsigned k = 1; k <= L; ++k) {
    scale /= M;
    bool same = true;
    for (unsigned i = 0; i < d; ++i) same = same && (a[i] / scale == b[i] / scale);
    if (!same) break;
    m = k;
  }
  return m;
}

/// P(x, y in A_n) = beta_n^{-1} if n <= m, beta_m beta_n^{-2} if n > m.
inline double two_point_probability(const ModelParams& params, const MadicPoint& x, const MadicPoint& y, unsigned n) {
  const auto m = separation_level(x, y, params.M, params.d);
  if (!m || n <= *m) return std::exp(-params.beta.log_beta(n));
  return std::exp(params.beta.log_beta(*m) - 2.0 * params.beta.log_beta(n));
}

/// E(X_n^2), X_n = ||mu_n||, summing the two-point formula over separation levels.
inline double second_moment(const ModelParams& params, unsigned n) {
  const long double shrink = std::pow(static_cast<long double>(params.M), -static_cast<long double>(params.d));
  long double vol = 1.0L;  // M^{-md}
  long double total = 0.0L;
  for (unsigned m = 0; m < n; ++m) {
    total += vol * (1.0L - shrink) * std::exp(static_cast<long double>(params.beta.log_beta(m)));
    vol *= shrink;
  }
  total += vol * std::exp(static_cast<long double>(params.beta.log_beta(n)));
  return static_cast<double>(total);
}

/// Cauchy-Schwarz lower bound 1 / E(X_n^2) for P(X_n > 0).
inline double survival_lower_bound(const ModelParams& params, unsigned n) { return 1.0 / second_moment(params, n); }

}  // namespace cantor
