#pragma once

// Binary realization format (little endian):
//   magic "CNTR", u32 version, u32 M, u32 d, u64 seed, u8 tag, u32 depth,
//   u32 spec length + spec bytes, f64 log beta_n for n = 0..depth,
//   then per level: u64 run count, and (gap, length) LEB128 pairs where gap
//   is measured from the end of the previous run.
//
// A stored generator spec rebuilds the exact schedule on load; without one
// the stored log beta values become a tabulated schedule.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cantor/errors.hpp"
#include "cantor/generators.hpp"
#include "cantor/madic.hpp"

namespace cantor {

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw InvalidParameter("truncated realization file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_le(out, bits);
}

inline double get_f64(std::istream& in) {
  const auto bits = get_le<std::uint64_t>(in);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

inline void put_leb(std::ostream& out, std::uint64_t v) {
  do {
    unsigned char byte = v & 0x7f;
    v >>= 7;
    if (v) byte |= 0x80;
    out.put(static_cast<char>(byte));
  } while (v);
}

inline std::uint64_t get_leb(std::istream& in) {
  std::uint64_t v = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw InvalidParameter("truncated realization file");
    v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
    if (!(c & 0x80)) return v;
  }
  throw InvalidParameter("malformed varint in realization file");
}

}  // namespace detail

inline void write_realization(std::ostream& out, const Realization& r) {
  const auto& p = r.params();
  out.write("CNTR", 4);
  detail::put_le<std::uint32_t>(out, kFormatVersion);
  detail::put_le<std::uint32_t>(out, p.M);
  detail::put_le<std::uint32_t>(out, p.d);
  detail::put_le<std::uint64_t>(out, r.seed());
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(r.tag()));
  detail::put_le<std::uint32_t>(out, r.depth());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.generator_spec().size()));
  out.write(r.generator_spec().data(), static_cast<std::streamsize>(r.generator_spec().size()));
  for (unsigned n = 0; n <= r.depth(); ++n) detail::put_f64(out, p.beta.log_beta(n));
  for (unsigned n = 0; n <= r.depth(); ++n) {
    auto lv = r.level(n);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
    for (std::size_t i = 0; i < lv.size();) {
      std::size_t j = i + 1;
      while (j < lv.size() && lv[j] == lv[j - 1] + 1) ++j;
      runs.emplace_back(lv[i], j - i);
      i = j;
    }
    detail::put_le<std::uint64_t>(out, runs.size());
    std::uint64_t cursor = 0;
    for (auto [start, len] : runs) {
      detail::put_leb(out, start - cursor);
      detail::put_leb(out, len);
      cursor = start + len;
    }
  }
  if (!out) throw std::runtime_error("failed to write realization");
}

inline Realization read_realization(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "CNTR") throw InvalidParameter("not a realization file");
  if (detail::get_le<std::uint32_t>(in) != kFormatVersion) throw InvalidParameter("unsupported realization format version");
  const auto M = detail::get_le<std::uint32_t>(in);
  const auto d = detail::get_le<std::uint32_t>(in);
  const auto seed = detail::get_le<std::uint64_t>(in);
  const auto tag = static_cast<GeneratorTag>(detail::get_le<std::uint8_t>(in));
  const auto depth = detail::get_le<std::uint32_t>(in);
  const auto spec_len = detail::get_le<std::uint32_t>(in);
  std::string spec(spec_len, '\0');
  in.read(spec.data(), spec_len);
  std::vector<double> betas;
  for (unsigned n = 0; n <= depth; ++n) betas.push_back(std::exp(detail::get_f64(in)));
  betas.front() = 1.0;

  ModelParams params;
  if (!spec.empty()) {
    params = parse_generator_spec(spec).params;
  } else {
    for (std::size_t i = 1; i < betas.size(); ++i) betas[i] = std::max(betas[i], betas[i - 1]);
    const double a = depth > 0 ? std::log(betas.back()) / (depth * std::log(static_cast<double>(M))) : 0.0;
    params = make_params(M, d, BetaSchedule::table(betas), a, a, tag == GeneratorTag::percolation);
  }
  if (params.M != M || params.d != d) throw InvalidParameter("realization header disagrees with its generator spec");

  const auto fan = params.children();
  std::vector<std::vector<Key>> levels(depth + 1);
  for (unsigned n = 0; n <= depth; ++n) {
    const auto runs = detail::get_le<std::uint64_t>(in);
    std::uint64_t cursor = 0;
    const std::uint64_t limit = ipow(fan, n);
    for (std::uint64_t i = 0; i < runs; ++i) {
      const auto start = cursor + detail::get_leb(in);
      const auto len = detail::get_leb(in);
      if (len == 0 || start + len > limit) throw InvalidParameter("run outside the level range");
      for (std::uint64_t k = 0; k < len; ++k) levels[n].push_back(start + k);
      cursor = start + len;
    }
  }
  Realization r(std::move(params), std::move(levels), seed, tag, spec);
  if (!r.nested()) throw InvalidParameter("stored levels are not nested");
  return r;
}

/// Metadata sidecar for a stored realization.
inline nlohmann::json realization_metadata(const Realization& r) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["M"] = r.params().M;
  j["d"] = r.params().d;
  j["seed"] = r.seed();
  j["generator_tag"] = to_string(r.tag());
  j["generator_spec"] = r.generator_spec();
  j["depth"] = r.depth();
  j["alpha_lo"] = r.params().alpha_lo;
  j["alpha_hi"] = r.params().alpha_hi;
  auto& lv = j["levels"] = nlohmann::json::array();
  for (unsigned n = 0; n <= r.depth(); ++n)
    lv.push_back({{"n", n}, {"count", r.count(n)}, {"log_beta", r.params().beta.log_beta(n)}, {"mass", r.mass(n)}});
  return j;
}

}  // namespace cantor
