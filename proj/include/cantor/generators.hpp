#pragma once

// Offspring laws S_Q and the realization generator.
//
// A_{n+1} is the union over Q in A_n of the selected children S_Q. Each S_Q
// is drawn from the stream keyed by (seed, level of Q, key of Q), so the
// output is a pure function of (params, law, depth, seed).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cantor/arith.hpp"
#include "cantor/errors.hpp"
#include "cantor/madic.hpp"
#include "cantor/parallel.hpp"
#include "cantor/rng.hpp"

namespace cantor {

/// Progression-free digit set E of even residues mod an even M.
struct BehrendConfig {
  unsigned M = 2;
  std::vector<std::uint64_t> E{0};
  double epsilon = 0.0;  // target: #E >= M^{1-epsilon}

  [[nodiscard]] double achieved_epsilon() const {
    return 1.0 - std::log(static_cast<double>(E.size())) / std::log(static_cast<double>(M));
  }
  [[nodiscard]] bool meets_target() const { return achieved_epsilon() <= epsilon + 1e-12; }
};

inline void validate(const BehrendConfig& c) {
  if (c.M < 2 || c.M % 2 != 0) throw InvalidParameter("Behrend base M must be even");
  if (c.E.empty()) throw InvalidParameter("Behrend digit set must be nonempty");
  if (!std::is_sorted(c.E.begin(), c.E.end()) || std::adjacent_find(c.E.begin(), c.E.end()) != c.E.end())
    throw InvalidParameter("Behrend digit set must be sorted without repeats");
  for (auto e : c.E) {
    if (e >= c.M) throw InvalidParameter("Behrend digit out of range");
    if (e % 2 != 0) throw InvalidParameter("Behrend digits must be even");
  }
  if (auto t = find_progression_mod(c.E, c.M))
    throw InvalidParameter("Behrend digit set contains a progression mod M");
}

struct Percolation {
  double p = 0.5;
};

struct CapacityExact {
  double s = 0.5;
};

struct BehrendTranslate {
  BehrendConfig behrend;
};

/// User-supplied selection rule. `select` returns child digits in [0, M^d);
/// the caller-supplied schedule must satisfy P(child selected) = beta_n / beta_{n+1}.
struct Custom {
  std::string name = "custom";
  BetaSchedule beta;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  std::function<std::vector<std::uint64_t>(unsigned level, Key key, KeyedStream& stream)> select;
};

using OffspringLaw = std::variant<Percolation, CapacityExact, BehrendTranslate, Custom>;

inline GeneratorTag tag_of(const OffspringLaw& law) {
  switch (law.index()) {
    case 0: return GeneratorTag::percolation;
    case 1: return GeneratorTag::capacity;
    case 2: return GeneratorTag::behrend;
    default: return GeneratorTag::custom;
  }
}

/// The model parameters (beta schedule and alpha exponents) a law induces.
inline ModelParams params_for(const OffspringLaw& law, unsigned M, unsigned d) {
  const double logM = std::log(static_cast<double>(M));
  if (auto* perc = std::get_if<Percolation>(&law)) {
    if (!(perc->p > 0.0 && perc->p <= 1.0)) throw InvalidParameter("percolation needs 0 < p <= 1");
    const double a = -std::log(perc->p) / logM;
    return make_params(M, d, BetaSchedule::geometric(1.0 / perc->p), a, a, true);
  }
  if (auto* cap = std::get_if<CapacityExact>(&law)) {
    const double a = d - cap->s;
    return make_params(M, d, BetaSchedule::capacity(M, d, cap->s), a, a);
  }
  if (auto* beh = std::get_if<BehrendTranslate>(&law)) {
    validate(beh->behrend);
    if (d != 1 || M != beh->behrend.M) throw InvalidParameter("Behrend construction needs d = 1 and matching M");
    const auto size = beh->behrend.E.size();
    const double a = 1.0 - std::log(static_cast<double>(size)) / logM;
    return make_params(M, d, BetaSchedule::geometric(M, size), a, a);
  }
  const auto& custom = std::get<Custom>(law);
  if (!custom.select) throw InvalidParameter("custom law needs a selection rule");
  return make_params(M, d, custom.beta, custom.alpha_lo, custom.alpha_hi);
}

/// Offset a_Q of the Behrend translate E + a_Q at cube (level, key).
inline std::uint64_t behrend_offset(std::uint64_t seed, unsigned level, Key key, unsigned M) {
  KeyedStream stream(seed, level, key);
  return stream.below(M);
}

/// Child digits S_Q (sorted, in [0, M^d)) of the cube (level, key).
inline void select_children(const ModelParams& params, const OffspringLaw& law, unsigned level, Key key,
                            std::uint64_t seed, std::vector<std::uint64_t>& out) {
  out.clear();
  const std::uint64_t fan = params.children();
  KeyedStream stream(seed, level, key);
  switch (law.index()) {
    case 0: {
      const double p = std::get<Percolation>(law).p;
      for (std::uint64_t c = 0; c < fan; ++c)
        if (stream.uniform_at(c) < p) out.push_back(c);
      return;
    }
    case 1: {
      // beta_{n+1} = M^d beta_n keeps one child, beta_{n+1} = beta_n keeps all
      if (params.beta.full_step(level)) {
        out.push_back(stream.below(fan));
      } else {
        for (std::uint64_t c = 0; c < fan; ++c) out.push_back(c);
      }
      return;
    }
    case 2: {
      const auto& cfg = std::get<BehrendTranslate>(law).behrend;
      const auto a = stream.below(cfg.M);
      for (auto e : cfg.E) out.push_back((e + a) % cfg.M);
      std::sort(out.begin(), out.end());
      return;
    }
    default: {
      out = std::get<Custom>(law).select(level, key, stream);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      if (!out.empty() && out.back() >= fan) throw InvalidParameter("custom rule returned a digit >= M^d");
      return;
    }
  }
}

/// A_{level+1} from A_level.
inline std::vector<Key> next_level(const ModelParams& params, const OffspringLaw& law, std::span<const Key> parents,
                                   unsigned level, std::uint64_t seed, unsigned workers = 1) {
  const std::uint64_t fan = params.children();
  const std::size_t chunks = chunk_count(parents.size(), workers);
  std::vector<std::vector<Key>> parts(chunks);
  parallel_chunks(parents.size(), workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
    std::vector<std::uint64_t> digits;
    auto& part = parts[c];
    for (std::size_t i = begin; i < end; ++i) {
      select_children(params, law, level, parents[i], seed, digits);
      for (auto dgt : digits) part.push_back(parents[i] * fan + dgt);
    }
  });
  std::vector<Key> out;
  std::size_t total = 0;
  for (auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline void check_consistent(const ModelParams& params, const OffspringLaw& law, unsigned depth) {
  const auto derived = params_for(law, params.M, params.d);
  const unsigned top = std::min(depth + 1, std::min(params.beta.defined_levels(), derived.beta.defined_levels()));
  for (unsigned n = 0; n <= top; ++n) {
    const double a = params.beta.log_beta(n);
    const double b = derived.beta.log_beta(n);
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b)))
      throw InvalidParameter("model parameters do not match the offspring law");
  }
}

inline Realization generate(const ModelParams& params, const OffspringLaw& law, unsigned depth, std::uint64_t seed,
                            unsigned workers = 1, std::string spec = {}) {
  params.validate();
  check_consistent(params, law, depth);
  if (depth > params.max_level()) throw LevelOutOfRange("depth exceeds the packed-key capacity for this base");
  std::vector<std::vector<Key>> levels;
  levels.reserve(depth + 1);
  levels.push_back({0});
  for (unsigned n = 0; n < depth; ++n) levels.push_back(next_level(params, law, levels.back(), n, seed, workers));
  return Realization(params, std::move(levels), seed, tag_of(law), std::move(spec));
}

/// Whether cube q belongs to A_{q.level}, following only its ancestor path.
inline bool path_survives(const ModelParams& params, const OffspringLaw& law, std::uint64_t seed, const CubeIndex& q) {
  const std::uint64_t fan = params.children();
  const Key key = encode_key(q, params.M, params.d);
  std::vector<std::uint64_t> digits;
  for (unsigned k = 0; k < q.level; ++k) {
    const auto span = ipow(fan, q.level - k);
    const Key ancestor = key / span;
    const auto digit = (key / (span / fan)) % fan;
    select_children(params, law, k, ancestor, seed, digits);
    if (!std::binary_search(digits.begin(), digits.end(), digit)) return false;
  }
  return true;
}

enum class BehrendMode { exhaustive, greedy, sphere };

namespace detail {

// Largest progression-free subset of Z_K (K <= 24) containing 0, by branch and bound.
class MaxProgressionFree {
 public:
  explicit MaxProgressionFree(unsigned K) : K_(K) {}

  std::vector<std::uint64_t> solve() {
    current_ = {0};
    member_ = 1;
    best_ = current_;
    extend(1);
    return best_;
  }

 private:
  [[nodiscard]] bool in(std::uint64_t v) const { return (member_ >> v) & 1U; }

  // true when adding v creates a progression with current members
  [[nodiscard]] bool conflicts(std::uint64_t v) const {
    for (auto a : current_) {
      // v and a as the two ends: middle y with 2y = v + a
      const auto sum = (v + a) % K_;
      if (K_ % 2 == 1) {
        const auto y = (sum % 2 == 0 ? sum / 2 : (sum + K_) / 2) % K_;
        if (y != v && y != a && in(y)) return true;
      } else if (sum % 2 == 0) {
        for (auto y : {sum / 2, sum / 2 + K_ / 2})
          if (y != v && y != a && in(y)) return true;
      }
      // v as the middle, a as one end: the other end z = 2v - a
      const auto z = (2 * v + K_ - a) % K_;
      if (z != v && z != a && in(z)) return true;
    }
    return false;
  }

  void extend(std::uint64_t next) {
    if (current_.size() > best_.size()) best_ = current_;
    if (current_.size() + (K_ - next) <= best_.size()) return;
    for (std::uint64_t v = next; v < K_; ++v) {
      if (current_.size() + (K_ - v) <= best_.size()) return;
      if (conflicts(v)) continue;
      current_.push_back(v);
      member_ |= std::uint64_t{1} << v;
      extend(v + 1);
      member_ &= ~(std::uint64_t{1} << v);
      current_.pop_back();
    }
  }

  unsigned K_;
  std::vector<std::uint64_t> current_;
  std::vector<std::uint64_t> best_;
  std::uint64_t member_ = 0;
};

// Behrend's sphere construction inside [0, limit): integers whose base-(2q-1)
// digits are all < q and whose digit vectors share one squared norm.
inline std::vector<std::uint64_t> behrend_sphere(std::uint64_t limit) {
  std::vector<std::uint64_t> best{0};
  for (std::uint64_t q = 2; 2 * q - 1 <= std::max<std::uint64_t>(limit, 3) && q <= 256; ++q) {
    const std::uint64_t base = 2 * q - 1;
    std::map<std::uint64_t, std::vector<std::uint64_t>> shells;
    for (std::uint64_t x = 0; x < limit; ++x) {
      std::uint64_t rest = x;
      std::uint64_t norm = 0;
      bool ok = true;
      while (rest > 0) {
        const auto digit = rest % base;
        if (digit >= q) {
          ok = false;
          break;
        }
        norm += digit * digit;
        rest /= base;
      }
      if (ok) shells[norm].push_back(x);
    }
    for (auto& [norm, members] : shells)
      if (members.size() > best.size()) best = members;
  }
  return best;
}

}  // namespace detail

/// Largest-found progression-free set of even residues mod an even M.
inline BehrendConfig behrend_search(unsigned M, BehrendMode mode, double epsilon = 0.0) {
  if (M < 2 || M % 2 != 0) throw InvalidParameter("behrend_search needs an even base M >= 2");
  const unsigned K = M / 2;  // even residues 2x correspond to x in Z_{M/2}
  std::vector<std::uint64_t> half;
  switch (mode) {
    case BehrendMode::exhaustive:
      if (M > 40) throw InvalidParameter("exhaustive Behrend search is limited to M <= 40");
      half = detail::MaxProgressionFree(K).solve();
      break;
    case BehrendMode::greedy: {
      for (std::uint64_t v = 0; v < K; ++v) {
        half.push_back(v);
        if (!progression_free_mod(half, K)) half.pop_back();
      }
      break;
    }
    case BehrendMode::sphere:
      // elements below ceil(K/2) never wrap around mod K
      half = detail::behrend_sphere((K + 1) / 2);
      break;
  }
  BehrendConfig cfg;
  cfg.M = M;
  cfg.epsilon = epsilon;
  cfg.E.clear();
  for (auto x : half) cfg.E.push_back(2 * x);
  std::sort(cfg.E.begin(), cfg.E.end());
  validate(cfg);
  return cfg;
}

inline Realization behrend_generate(const BehrendConfig& config, unsigned depth, std::uint64_t seed,
                                    unsigned workers = 1) {
  validate(config);
  const OffspringLaw law = BehrendTranslate{config};
  return generate(params_for(law, config.M, 1), law, depth, seed, workers);
}

// ---------------------------------------------------------------------------
// Generator spec strings:
//   perc:M=2,d=2,p=0.7     cap:M=2,d=1,s=0.5     full:M=3,d=1
//   behrend:M=20,eps=0.25[,mode=exhaustive|greedy|sphere][,E=0;4;10]

struct GeneratorSpec {
  OffspringLaw law;
  ModelParams params;
  std::string canonical;
};

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidParameter("bad numeric value for '" + std::string(key) + "': " + std::string(text));
  return v;
}

inline unsigned parse_unsigned(std::string_view key, std::string_view text) {
  unsigned v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidParameter("bad integer value for '" + std::string(key) + "': " + std::string(text));
  return v;
}

}  // namespace detail

inline GeneratorSpec parse_generator_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string family(text.substr(0, colon));
  std::map<std::string, std::string> kv;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) throw InvalidParameter("malformed generator spec item: " + std::string(item));
      if (!kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))).second)
        throw InvalidParameter("duplicate generator spec key");
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw InvalidParameter("generator spec '" + family + "' needs key " + key);
    return *v;
  };

  GeneratorSpec out;
  const unsigned M = detail::parse_unsigned("M", need("M"));
  if (family == "perc" || family == "full") {
    const unsigned d = detail::parse_unsigned("d", take("d").value_or("1"));
    const double p = family == "full" ? 1.0 : detail::parse_number("p", need("p"));
    out.law = Percolation{p};
    out.params = params_for(out.law, M, d);
    out.canonical = family == "full" ? "full:M=" + std::to_string(M) + ",d=" + std::to_string(d)
                                     : "perc:M=" + std::to_string(M) + ",d=" + std::to_string(d) + ",p=" + format_double(p);
  } else if (family == "cap") {
    const unsigned d = detail::parse_unsigned("d", take("d").value_or("1"));
    const double s = detail::parse_number("s", need("s"));
    out.law = CapacityExact{s};
    out.params = params_for(out.law, M, d);
    out.canonical = "cap:M=" + std::to_string(M) + ",d=" + std::to_string(d) + ",s=" + format_double(s);
  } else if (family == "behrend") {
    const double eps = detail::parse_number("eps", take("eps").value_or("0"));
    BehrendConfig cfg;
    std::string mode_text;
    if (auto list = take("E")) {
      cfg.M = M;
      cfg.epsilon = eps;
      cfg.E.clear();
      std::string_view rest = *list;
      while (!rest.empty()) {
        const auto semi = rest.find(';');
        cfg.E.push_back(detail::parse_unsigned("E", rest.substr(0, semi)));
        if (semi == std::string_view::npos) break;
        rest = rest.substr(semi + 1);
      }
      std::sort(cfg.E.begin(), cfg.E.end());
      validate(cfg);
      mode_text = "explicit";
    } else {
      mode_text = take("mode").value_or(M <= 40 ? "exhaustive" : "sphere");
      BehrendMode mode = BehrendMode::sphere;
      if (mode_text == "exhaustive") mode = BehrendMode::exhaustive;
      else if (mode_text == "greedy") mode = BehrendMode::greedy;
      else if (mode_text != "sphere") throw InvalidParameter("unknown Behrend mode: " + mode_text);
      cfg = behrend_search(M, mode, eps);
    }
    if (auto d = take("d"); d && *d != "1") throw InvalidParameter("Behrend construction needs d = 1");
    out.law = BehrendTranslate{cfg};
    out.params = params_for(out.law, M, 1);
    std::string elems;
    for (auto e : cfg.E) elems += (elems.empty() ? "" : ";") + std::to_string(e);
    out.canonical = "behrend:M=" + std::to_string(M) + ",eps=" + format_double(eps) + ",E=" + elems;
  } else {
    throw InvalidParameter("unknown generator family: " + family);
  }
  if (!kv.empty()) throw InvalidParameter("unknown generator spec key: " + kv.begin()->first);
  return out;
}

inline Realization generate(const GeneratorSpec& spec, unsigned depth, std::uint64_t seed, unsigned workers = 1) {
  return generate(spec.params, spec.law, depth, seed, workers, spec.canonical);
}

}  // namespace cantor
