#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "cantor/errors.hpp"

namespace cantor {

/// Hurwitz zeta(s, a) for real s != 1 and a > 0, by Euler-Maclaurin
/// summation (this is the analytic continuation when s < 1).
inline double hurwitz_zeta(double s, double a) {
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta needs a > 0");
  if (s == 1.0) throw DomainError("hurwitz_zeta has a pole at s = 1");
  constexpr int kTerms = 12;
  // B_{2j} / (2j)!
  constexpr std::array<double, 8> kB = {1.0 / 12,         -1.0 / 720,           1.0 / 30240,
                                        -1.0 / 1209600,   1.0 / 47900160,       -691.0 / 1307674368000.0,
                                        1.0 / 74724249600, -3617.0 / 10670622842880000.0};
  long double sum = 0.0L;
  for (int k = 0; k < kTerms; ++k) sum += std::pow(static_cast<long double>(a) + k, -static_cast<long double>(s));
  const long double x = static_cast<long double>(a) + kTerms;
  sum += std::pow(x, 1.0L - s) / (s - 1.0L) + 0.5L * std::pow(x, -static_cast<long double>(s));
  long double rising = s;  // s (s+1) ... (s+2j-2)
  long double xpow = std::pow(x, -static_cast<long double>(s) - 1.0L);
  for (std::size_t j = 0; j < kB.size(); ++j) {
    sum += kB[j] * rising * xpow;
    rising *= (s + 2.0L * j + 1.0L) * (s + 2.0L * j + 2.0L);
    xpow /= x * x;
  }
  return static_cast<double>(sum);
}

/// Fourier transform constant of |x|^{-t} on the line: pi^{t-1/2} Gamma((1-t)/2) / Gamma(t/2).
inline double riesz_constant_1d(double t) {
  return std::pow(std::numbers::pi, t - 0.5) * std::tgamma((1.0 - t) / 2.0) / std::tgamma(t / 2.0);
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace cantor
