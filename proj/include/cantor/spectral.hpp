#pragma once

// Fourier coefficients, decay exponents, Riesz energies and related
// calculators for mu_n = beta_n 1_{A_n}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cantor/errors.hpp"
#include "cantor/madic.hpp"
#include "cantor/parallel.hpp"
#include "cantor/special.hpp"
#include "cantor/stats.hpp"

namespace cantor {

using Complex = std::complex<double>;

/// Coefficients at the frequencies xi = num / denom for num in [-k_max, k_max].
struct SpectrumProfile {
  unsigned level = 0;
  std::int64_t k_max = 0;
  std::uint64_t denom = 1;  // 1: integer frequencies, 2: half-integers
  std::vector<Complex> coeffs;  // index num + k_max
  double norm = 0.0;            // ||mu_n||
  double beta_n = 1.0;
  std::uint64_t runs = 0;       // maximal runs of consecutive surviving cells

  [[nodiscard]] Complex at(std::int64_t num) const {
    if (num < -k_max || num > k_max) throw InvalidParameter("frequency outside the computed range");
    return coeffs[static_cast<std::size_t>(num + k_max)];
  }
  [[nodiscard]] double frequency(std::int64_t num) const { return static_cast<double>(num) / static_cast<double>(denom); }
};

namespace detail {

inline std::uint64_t count_runs(std::span<const Key> keys) {
  std::uint64_t runs = 0;
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (i == 0 || keys[i] != keys[i - 1] + 1) ++runs;
  return runs;
}

}  // namespace detail

/// mu^_n(num / denom), d = 1, with the phase reduced exactly mod denom M^n.
inline Complex fourier_coefficient(const Realization& r, unsigned n, std::int64_t num, std::uint64_t denom = 1) {
  if (r.params().d != 1) throw Unsupported("fourier_coefficient is for d = 1");
  auto A = r.level(n);
  const auto side = ipow(r.params().M, n);
  const auto L = checked_mul(side, denom);
  if (!L) throw LevelOutOfRange("frequency lattice too fine");
  const double beta = r.params().beta.beta(n);
  if (num == 0) return {r.mass(n), 0.0};
  const std::uint64_t red = static_cast<std::uint64_t>(((num % static_cast<std::int64_t>(*L)) + static_cast<std::int64_t>(*L)) %
                                                      static_cast<std::int64_t>(*L));
  long double re = 0.0L, im = 0.0L;
  for (auto j : A) {
    const auto ph = static_cast<std::uint64_t>((static_cast<unsigned __int128>(red) * j) % *L);
    const long double ang = -2.0L * std::numbers::pi_v<long double> * ph / *L;
    re += std::cos(ang);
    im += std::sin(ang);
  }
  const double xi = static_cast<double>(num) / static_cast<double>(denom);
  // (1 - e^{-2 pi i xi h}) / (2 pi i xi)
  const auto rh = static_cast<std::uint64_t>(red % *L);
  const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(rh) / *L;
  const Complex cell = (Complex(1.0, 0.0) - Complex(std::cos(static_cast<double>(a)), std::sin(static_cast<double>(a)))) /
                       Complex(0.0, 2.0 * std::numbers::pi * xi);
  return beta * cell * Complex(static_cast<double>(re), static_cast<double>(im));
}

/// Coefficients for every num in [-k_max, k_max] at spacing 1/denom.
inline SpectrumProfile fourier_coeffs(const Realization& r, unsigned n, std::int64_t k_max, std::uint64_t denom = 1,
                                      unsigned workers = 1) {
  if (r.params().d != 1) throw Unsupported("fourier_coeffs is implemented for d = 1");
  if (k_max < 1) throw InvalidParameter("k_max must be >= 1");
  if (denom < 1) throw InvalidParameter("frequency denominator must be >= 1");
  auto A = r.level(n);
  const auto side = ipow(r.params().M, n);
  const auto Lopt = checked_mul(side, denom);
  if (!Lopt) throw LevelOutOfRange("frequency lattice too fine");
  const std::uint64_t L = *Lopt;

  SpectrumProfile sp;
  sp.level = n;
  sp.k_max = k_max;
  sp.denom = denom;
  sp.norm = r.mass(n);
  sp.beta_n = r.params().beta.beta(n);
  sp.runs = detail::count_runs(A);
  sp.coeffs.assign(static_cast<std::size_t>(2 * k_max + 1), Complex{});

  std::vector<Complex> table;
  const bool use_table = L <= (std::uint64_t{1} << 20);
  if (use_table) {
    table.resize(L);
    for (std::uint64_t i = 0; i < L; ++i) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(i) / L;
      table[i] = Complex(static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang)));
    }
  }
  auto phase = [&](std::uint64_t p) -> Complex {
    if (use_table) return table[p];
    const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(p) / L;
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
  };

  // nonnegative frequencies, then conjugate symmetry
  const auto count = static_cast<std::size_t>(k_max) + 1;
  parallel_chunks(count, workers, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const auto num = static_cast<std::int64_t>(idx);
      Complex value;
      if (num == 0) {
        value = {sp.norm, 0.0};
      } else {
        const std::uint64_t red = static_cast<std::uint64_t>(num) % L;
        Complex acc;
        std::uint64_t ph = 0, prev = 0;
        bool first = true;
        for (auto j : A) {
          // ph = red * j mod L, advanced incrementally
          if (first) {
            ph = static_cast<std::uint64_t>((static_cast<unsigned __int128>(red) * j) % L);
            first = false;
          } else {
            const auto step = static_cast<std::uint64_t>((static_cast<unsigned __int128>(red) * (j - prev)) % L);
            ph += step;
            if (ph >= L) ph -= L;
          }
          prev = j;
          acc += phase(ph);
        }
        const double xi = static_cast<double>(num) / static_cast<double>(denom);
        const Complex cell = (Complex(1.0, 0.0) - phase(red)) / Complex(0.0, 2.0 * std::numbers::pi * xi);
        value = sp.beta_n * cell * acc;
      }
      sp.coeffs[static_cast<std::size_t>(k_max + num)] = value;
      sp.coeffs[static_cast<std::size_t>(k_max - num)] = std::conj(value);
    }
  });
  sp.coeffs[static_cast<std::size_t>(k_max)] = {sp.norm, 0.0};
  return sp;
}

struct DecayEstimate {
  double sigma = 0.0;  // -2 * slope of log block sup against log |xi|
  double stderr_ = 0.0;
  double cap = 0.0;    // sigma <= d for any measure of finite energy
  std::vector<double> block_log_sup;
};

/// Regression of log sup_{|xi| in [2^j, 2^{j+1})} |mu^(xi)| against j log 2, j = 0 .. blocks-1.
inline DecayEstimate decay_exponent_estimate(const SpectrumProfile& sp, unsigned blocks, unsigned d = 1) {
  if (blocks < 2) throw InsufficientData("need at least two dyadic blocks");
  const double top = static_cast<double>(sp.k_max) / static_cast<double>(sp.denom);
  if (top < std::ldexp(1.0, static_cast<int>(blocks))) throw InsufficientData("k_max below 2^blocks");
  DecayEstimate est;
  est.cap = d;
  std::vector<double> x, y;
  for (unsigned j = 0; j < blocks; ++j) {
    const double lo = std::ldexp(1.0, static_cast<int>(j));
    const double hi = 2.0 * lo;
    double sup = 0.0;
    const auto first = static_cast<std::int64_t>(std::ceil(lo * static_cast<double>(sp.denom)));
    for (std::int64_t num = first; num <= sp.k_max && sp.frequency(num) < hi; ++num)
      sup = std::max(sup, std::abs(sp.at(num)));
    if (sup <= 0.0) continue;  // block of exact zeros carries no decay information
    x.push_back(j * std::numbers::ln2);
    y.push_back(std::log(sup));
    est.block_log_sup.push_back(std::log(sup));
  }
  if (x.size() < 2) throw InsufficientData("fewer than two blocks with nonzero coefficients");
  const auto fit = fit_line(x, y);
  est.sigma = -2.0 * fit.slope;
  est.stderr_ = 2.0 * fit.slope_stderr;
  return est;
}

// ---------------------------------------------------------------------------
// Riesz energies I_t(mu_n) = int int |x - y|^{-t} dmu_n dmu_n.

namespace detail {

// Offset counts #{(a, b) in A^2 : a - b = D} per coordinate difference.
inline std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> offset_counts(const Realization& r, unsigned n) {
  auto A = r.level(n);
  const auto& p = r.params();
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> out;
  if (p.d == 1) {
    std::unordered_map<std::int64_t, std::uint64_t> tmp;
    for (auto a : A)
      for (auto b : A) ++tmp[static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b)];
    for (auto [k, v] : tmp) out[{k, 0}] = v;
    return out;
  }
  std::vector<std::array<std::int64_t, 2>> pts;
  for (auto k : A) {
    auto c = decode_key(n, k, p.M, p.d);
    pts.push_back({static_cast<std::int64_t>(c.coords[0]), static_cast<std::int64_t>(c.coords[1])});
  }
  for (auto& a : pts)
    for (auto& b : pts) ++out[{a[0] - b[0], a[1] - b[1]}];
  return out;
}

// int_0^1 int_0^1 |D + x - y|^{-t} dx dy, in units of one cell.
inline double line_pair_kernel(std::int64_t D, double t) {
  const double c = 1.0 / ((1.0 - t) * (2.0 - t));
  const auto ad = static_cast<double>(std::llabs(D));
  if (ad >= 32.0) {
    const double q = 1.0 / (ad * ad);
    return std::pow(ad, -t) * (1.0 + t * (t + 1.0) / 12.0 * q + t * (t + 1.0) * (t + 2.0) * (t + 3.0) / 360.0 * q * q);
  }
  auto G = [&](double z) { return std::pow(std::abs(z), 2.0 - t) * c; };
  return G(ad + 1.0) - 2.0 * G(ad) + G(ad - 1.0);
}

// int over [-1,1]^2 of (1-|z1|)(1-|z2|) |D + z|^{-t} dz, in units of one cell.
inline double plane_pair_kernel(std::int64_t D1, std::int64_t D2, double t) {
  static const auto gl16 = gauss_legendre(16);
  static const auto gl24 = gauss_legendre(24);
  const auto& [gx, gw] = gl16;
  double total = 0.0;
  const double sx = static_cast<double>(-D1), sy = static_cast<double>(-D2);  // singular point
  for (int q1 = 0; q1 < 2; ++q1)
    for (int q2 = 0; q2 < 2; ++q2) {
      // quadrant cell [x0, x0+1] x [y0, y0+1] with x0, y0 in {-1, 0}
      const double x0 = q1 == 0 ? -1.0 : 0.0;
      const double y0 = q2 == 0 ? -1.0 : 0.0;
      const double s1 = q1 == 0 ? -1.0 : 1.0;  // sign of z1 on the cell
      const double s2 = q2 == 0 ? -1.0 : 1.0;
      bool vertex = false;
      double vx = 0.0, vy = 0.0;
      for (double cx : {x0, x0 + 1.0})
        for (double cy : {y0, y0 + 1.0})
          if (cx == sx && cy == sy) {
            vertex = true;
            vx = cx;
            vy = cy;
          }
      if (!vertex) {
        for (std::size_t i = 0; i < gx.size(); ++i)
          for (std::size_t j = 0; j < gx.size(); ++j) {
            const double z1 = x0 + 0.5 * (gx[i] + 1.0);
            const double z2 = y0 + 0.5 * (gx[j] + 1.0);
            const double w = (1.0 - std::abs(z1)) * (1.0 - std::abs(z2));
            const double dist = std::hypot(z1 + D1, z2 + D2);
            total += 0.25 * gw[i] * gw[j] * w * std::pow(dist, -t);
          }
        continue;
      }
      // polar coordinates about the singular vertex: z = v + (o1 x, o2 y), x, y in [0, 1]
      const double o1 = vx == x0 ? 1.0 : -1.0;
      const double o2 = vy == y0 ? 1.0 : -1.0;
      // 1 - |z_i| = a_i + b_i * (local coordinate)
      const double a1 = 1.0 - s1 * vx, b1 = -s1 * o1;
      const double a2 = 1.0 - s2 * vy, b2 = -s2 * o2;
      const auto& [px, pw] = gl24;
      for (int tri = 0; tri < 2; ++tri) {
        const double th0 = tri == 0 ? 0.0 : std::numbers::pi / 4.0;
        for (std::size_t k = 0; k < px.size(); ++k) {
          const double th = th0 + std::numbers::pi / 8.0 * (px[k] + 1.0);
          const double c = std::cos(th), s = std::sin(th);
          const double R = tri == 0 ? 1.0 / c : 1.0 / s;
          // int_0^R (a1 + b1 r c)(a2 + b2 r s) r^{1-t} dr
          const double radial = a1 * a2 * std::pow(R, 2.0 - t) / (2.0 - t) +
                                (a1 * b2 * s + b1 * a2 * c) * std::pow(R, 3.0 - t) / (3.0 - t) +
                                b1 * b2 * c * s * std::pow(R, 4.0 - t) / (4.0 - t);
          total += std::numbers::pi / 8.0 * pw[k] * radial;
        }
      }
    }
  return total;
}

}  // namespace detail

/// Exact pair-sum energy of mu_n. d = 1 uses closed forms; d = 2 uses a
/// polar rule about the singular corner and Gauss-Legendre elsewhere.
inline double energy_direct(const Realization& r, unsigned n, double t) {
  const auto& p = r.params();
  if (!(t > 0.0 && t < static_cast<double>(p.d))) throw DomainError("energy exponent t must lie in (0, d)");
  const auto counts = detail::offset_counts(r, n);
  const double logh = -static_cast<double>(n) * std::log(static_cast<double>(p.M));
  // beta^2 h^{2d} (cell size)^{-t}
  const double scale = std::exp(2.0 * p.beta.log_beta(n) + (2.0 * p.d - t) * logh);
  long double total = 0.0L;
  if (p.d == 1) {
    for (auto [D, c] : counts) total += static_cast<long double>(c) * detail::line_pair_kernel(D.first, t);
  } else {
    std::map<std::pair<std::int64_t, std::int64_t>, double> memo;
    for (auto [D, c] : counts) {
      // kernel is symmetric under sign flips and coordinate swap
      std::int64_t u = std::llabs(D.first), v = std::llabs(D.second);
      if (u > v) std::swap(u, v);
      auto it = memo.find({u, v});
      if (it == memo.end()) it = memo.emplace(std::pair{u, v}, detail::plane_pair_kernel(u, v, t)).first;
      total += static_cast<long double>(c) * it->second;
    }
  }
  return static_cast<double>(total) * scale;
}

enum class TailModel { report_truncated, extrapolate_powerlaw };

struct EnergyFourierReport {
  double value = 0.0;        // energy estimate
  double truncated = 0.0;    // partial sum estimate (no tail)
  double band_lo = 0.0;      // rigorous bracket for the energy
  double band_hi = 0.0;
  double tail_bound = 0.0;   // bound on the omitted frequency tail
  double smooth_term = 0.0;  // int int S dmu dmu
  std::int64_t terms = 0;
};

namespace detail {

// Smooth part S of the periodised (period 2) Riesz kernel: the periodisation is |z|^{-t} + S(z).
inline double periodic_remainder(double z, double t) {
  const double a = std::abs(z) / 2.0;
  return std::pow(2.0, -t) * (hurwitz_zeta(t, 1.0 + a) + hurwitz_zeta(t, 1.0 - a));
}

}  // namespace detail

/// Energy from half-integer Fourier coefficients (spectrum with denom = 2), d = 1.
///
/// mu_n lives in [0, 1), so on the circle of length 2 no mass wraps. With
/// gamma the Fourier constant of |x|^{-t},
///   I_t = 2^{-t} gamma sum_{j != 0} |j|^{t-1} |mu^(j/2)|^2 - int int S(x - y) dmu dmu.
/// The omitted tail is bounded with |mu^(xi)| <= beta R / (pi |xi|), R = run count.
inline EnergyFourierReport energy_fourier(const SpectrumProfile& sp, const Realization& r, double t,
                                          TailModel tail = TailModel::report_truncated) {
  if (r.params().d != 1) throw Unsupported("energy_fourier is implemented for d = 1");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("energy exponent t must lie in (0, d)");
  if (sp.denom != 2) throw InvalidParameter("energy_fourier needs a half-integer spectrum (denom = 2)");
  if (sp.k_max < 64) throw InsufficientData("energy_fourier needs k_max >= 64");
  const double gamma = riesz_constant_1d(t);
  const double pre = std::pow(2.0, -t) * gamma;
  long double sum = 0.0L;
  for (std::int64_t j = 1; j <= sp.k_max; ++j)
    sum += 2.0L * std::pow(static_cast<long double>(j), t - 1.0L) * std::norm(sp.at(j));

  // int int S dmu dmu: pair offsets times a Gauss-Legendre rule per cell pair
  const unsigned n = sp.level;
  static const auto gl = gauss_legendre(12);
  const auto counts = detail::offset_counts(r, n);
  const double h = std::pow(static_cast<double>(r.params().M), -static_cast<double>(n));
  const double b = sp.beta_n;
  long double smooth = 0.0L;
  for (auto [D, c] : counts) {
    // int_{-1}^{1} (1 - |w|) S(h (D + w)) dw, split at w = 0
    double k = 0.0;
    for (int half = 0; half < 2; ++half)
      for (std::size_t i = 0; i < gl.first.size(); ++i) {
        const double w = half == 0 ? 0.5 * (gl.first[i] - 1.0) : 0.5 * (gl.first[i] + 1.0);
        k += 0.5 * gl.second[i] * (1.0 - std::abs(w)) * detail::periodic_remainder(h * (D.first + w), t);
      }
    smooth += static_cast<long double>(c) * k;
  }
  const double smooth_term = static_cast<double>(smooth) * b * b * h * h;

  EnergyFourierReport rep;
  rep.terms = sp.k_max;
  rep.smooth_term = smooth_term;
  rep.truncated = pre * static_cast<double>(sum) - smooth_term;
  const double J = static_cast<double>(sp.k_max);
  const double br = b * static_cast<double>(sp.runs);
  rep.tail_bound = std::pow(2.0, 3.0 - t) * gamma * br * br / (std::numbers::pi * std::numbers::pi) *
                   std::pow(J, t - 2.0) / (2.0 - t);
  rep.band_lo = rep.truncated;
  rep.band_hi = rep.truncated + rep.tail_bound;
  rep.value = rep.truncated;
  if (tail == TailModel::extrapolate_powerlaw) {
    // tail terms behave like C j^{t-3} once the cell transform dominates; fit C on the top octave
    long double top = 0.0L;
    const std::int64_t j0 = sp.k_max / 2;
    long double ref = 0.0L;
    for (std::int64_t j = j0; j <= sp.k_max; ++j) {
      top += 2.0L * std::pow(static_cast<long double>(j), t - 1.0L) * std::norm(sp.at(j));
      ref += 2.0L * std::pow(static_cast<long double>(j), t - 3.0L);
    }
    const double C = ref > 0 ? static_cast<double>(top / ref) : 0.0;
    const double est = pre * C * std::pow(J, t - 2.0) / (2.0 - t);
    rep.value = rep.truncated + std::min(est, rep.tail_bound);
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct RestrictionExponents {
  double p_mockenhaupt = 0.0;
  double p_chen = 0.0;
  double q_chen = 0.0;
};

/// p_{s,sigma,d} = 2(2d - 2s + sigma)/sigma, and Chen's p = 2 n, q = p/(p - n).
inline RestrictionExponents restriction_exponents(double s, double sigma, unsigned d, unsigned n_conv = 2) {
  if (d < 1) throw InvalidParameter("d must be >= 1");
  if (!(sigma > 0.0 && sigma <= s + 1e-12 && s <= d + 1e-12)) throw InvalidParameter("need 0 < sigma <= s <= d");
  if (n_conv < 2) throw InvalidParameter("convolution power must be >= 2");
  RestrictionExponents e;
  e.p_mockenhaupt = 2.0 * (2.0 * d - 2.0 * s + sigma) / sigma;
  e.p_chen = 2.0 * n_conv;
  e.q_chen = e.p_chen / (e.p_chen - n_conv);
  return e;
}

struct MassDecay {
  double s = 0.0;  // fitted exponent of sup_x mu(B(x, r)) ~ r^s
  double stderr_ = 0.0;
  double C = 0.0;  // max over radii of sup mass / r^s
  bool degenerate = false;
  std::vector<double> sup_mass;
};

/// sup over centres of mu_n([x - r, x + r]) for d = 1 (exact: the optimum puts
/// a window end on a cell endpoint of A_n).
inline double sup_ball_mass(const Realization& r, unsigned n, double radius) {
  if (r.params().d != 1) throw Unsupported("sup_ball_mass is implemented for d = 1");
  auto A = r.level(n);
  if (A.empty()) return 0.0;
  const double h = std::pow(static_cast<double>(r.params().M), -static_cast<double>(n));
  const double beta = r.params().beta.beta(n);
  const double w = 2.0 * radius;
  // F(y) = Leb([0, y] cap A_n)
  auto F = [&](double y) {
    const double cell = std::floor(y / h);
    if (cell < 0) return 0.0;
    const auto c = static_cast<Key>(cell);
    const auto below = static_cast<double>(std::lower_bound(A.begin(), A.end(), c) - A.begin());
    double part = 0.0;
    if (std::binary_search(A.begin(), A.end(), c)) part = std::min(h, y - cell * h);
    return below * h + part;
  };
  double best = 0.0;
  for (auto k : A) {
    const double left = static_cast<double>(k) * h;
    best = std::max(best, F(left + w) - F(left));
    const double right = left + h;
    best = std::max(best, F(right) - F(right - w));
  }
  return beta * best;
}

inline MassDecay mass_decay_exponent(const Realization& r, unsigned n, std::span<const double> radii) {
  if (radii.empty()) throw InsufficientData("mass decay needs radii");
  MassDecay out;
  std::vector<double> x, y;
  for (double rad : radii) {
    if (!(rad > 0.0 && rad < 1.0)) throw DomainError("radii must lie in (0, 1)");
    const double m = sup_ball_mass(r, n, rad);
    out.sup_mass.push_back(m);
    if (m > 0.0) {
      x.push_back(std::log(rad));
      y.push_back(std::log(m));
    }
  }
  if (x.size() < 2) {
    out.degenerate = true;
    return out;
  }
  const auto fit = fit_line(x, y);
  out.s = fit.slope;
  out.stderr_ = fit.slope_stderr;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (out.sup_mass[i] > 0.0) out.C = std::max(out.C, out.sup_mass[i] / std::pow(radii[i], out.s));
  return out;
}

struct SumsetDimension {
  double exponent = 0.0;
  double stderr_ = 0.0;
  std::vector<std::uint64_t> counts;  // distinct level-n cells i + j per level
};

/// Box-counting exponent of A_n + A'_n over levels n_lo..n_hi (d = 1).
inline SumsetDimension sumset_boxdim(const Realization& r1, const Realization& r2, unsigned n_lo, unsigned n_hi) {
  if (r1.params().M != r2.params().M) throw InvalidParameter("sumset needs realizations with the same base");
  if (r1.params().d != 1 || r2.params().d != 1) throw Unsupported("sumset_boxdim is implemented for d = 1");
  if (n_hi <= n_lo) throw InsufficientData("sumset regression needs at least two levels");
  SumsetDimension out;
  std::vector<double> x, y;
  const double logM = std::log(static_cast<double>(r1.params().M));
  for (unsigned n = n_lo; n <= n_hi; ++n) {
    auto A = r1.level(n);
    auto B = r2.level(n);
    std::vector<std::uint64_t> sums;
    sums.reserve(A.size() * B.size());
    for (auto a : A)
      for (auto b : B) sums.push_back(a + b);
    std::sort(sums.begin(), sums.end());
    const auto distinct = static_cast<std::uint64_t>(std::unique(sums.begin(), sums.end()) - sums.begin());
    out.counts.push_back(distinct);
    if (distinct > 0) {
      x.push_back(n);
      y.push_back(std::log(static_cast<double>(distinct)) / logM);
    }
  }
  if (x.size() < 2) throw InsufficientData("sumset empty at too many levels");
  const auto fit = fit_line(x, y);
  out.exponent = fit.slope;
  out.stderr_ = fit.slope_stderr;
  return out;
}

}  // namespace cantor
