#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "cantor/errors.hpp"
#include "cantor/generators.hpp"
#include "cantor/madic.hpp"
#include "cantor/parallel.hpp"
#include "cantor/spectral.hpp"
#include "cantor/stats.hpp"

namespace cantor {

inline constexpr unsigned kDefaultMinLevel = 3;

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Slope of log_M N_n against n over n_min..n_max.
inline Estimate box_dimension(const Realization& r, unsigned n_min, unsigned n_max) {
  if (n_max <= n_min) throw InsufficientData("box dimension needs n_max > n_min");
  if (n_max > r.depth()) throw LevelOutOfRange("n_max exceeds generated depth");
  if (r.count(n_max) == 0) throw DomainError("realization is empty at n_max");
  const double logM = std::log(static_cast<double>(r.params().M));
  std::vector<double> x, y;
  for (unsigned n = n_min; n <= n_max; ++n) {
    x.push_back(n);
    y.push_back(std::log(static_cast<double>(r.count(n))) / logM);
  }
  const auto fit = fit_line(x, y);
  return {std::clamp(fit.slope, 0.0, static_cast<double>(r.params().d)), fit.slope_stderr};
}

/// Entropy dimension of mu_depth: slope of H_k / log M, where H_k is the
/// Shannon entropy of the normalised mass of level-k cubes.
inline Estimate mass_dimension(const Realization& r, unsigned n_min, unsigned n_max) {
  if (n_max <= n_min) throw InsufficientData("mass dimension needs n_max > n_min");
  if (n_max > r.depth()) throw LevelOutOfRange("n_max exceeds generated depth");
  const unsigned top = r.depth();
  auto fine = r.level(top);
  if (fine.empty()) throw DomainError("realization is empty");
  const double total = static_cast<double>(fine.size());
  const double logM = std::log(static_cast<double>(r.params().M));
  const auto fan = r.params().children();
  std::vector<double> x, y;
  for (unsigned k = n_min; k <= n_max; ++k) {
    const auto span = ipow(fan, top - k);
    double H = 0.0;
    for (std::size_t i = 0; i < fine.size();) {
      const Key cube = fine[i] / span;
      std::size_t j = i;
      while (j < fine.size() && fine[j] / span == cube) ++j;
      const double p = static_cast<double>(j - i) / total;
      H -= p * std::log(p);
      i = j;
    }
    x.push_back(k);
    y.push_back(H / logM);
  }
  const auto fit = fit_line(x, y);
  return {fit.slope, fit.slope_stderr};
}

struct EnergyBracket {
  double lo = 0.0;  // largest tested t whose energy stays bounded across levels
  double hi = 0.0;  // smallest tested t whose energy grows
  std::vector<double> t_values;
  std::vector<double> growth;  // slope of log_M I_t(mu_n) against n
};

/// Brackets the energy dimension by the growth rate of I_t(mu_n) across levels.
inline EnergyBracket energy_dimension_bracket(const Realization& r, std::span<const double> t_values, unsigned n_min,
                                              unsigned n_max, double growth_tol = 0.1) {
  if (n_max <= n_min) throw InsufficientData("energy bracket needs n_max > n_min");
  EnergyBracket out;
  out.hi = r.params().d;
  const double logM = std::log(static_cast<double>(r.params().M));
  for (double t : t_values) {
    std::vector<double> x, y;
    for (unsigned n = n_min; n <= n_max; ++n) {
      if (r.count(n) == 0) throw DomainError("realization is empty");
      x.push_back(n);
      y.push_back(std::log(energy_direct(r, n, t)) / logM);
    }
    const double slope = fit_line(x, y).slope;
    out.t_values.push_back(t);
    out.growth.push_back(slope);
    if (slope <= growth_tol) out.lo = std::max(out.lo, t);
    else out.hi = std::min(out.hi, t);
  }
  return out;
}

struct SurvivalStats {
  std::size_t trials = 0;
  std::size_t survived = 0;
  double frequency = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  double mass_mean = 0.0;
  double mass_variance = 0.0;
  double lower_bound = 0.0;   // 1 / E(X_n^2)
  bool respects_bound = true;  // frequency >= lower_bound - 4 stderr
  std::size_t nonempty_but_massless = 0;
};

inline SurvivalStats survival_statistics(const ModelParams& params, const OffspringLaw& law, unsigned depth,
                                         std::size_t trials, std::uint64_t seed, unsigned workers = 1) {
  if (trials < 100) throw InsufficientData("survival statistics need at least 100 trials");
  std::vector<double> mass(trials);
  std::vector<char> alive(trials);
  parallel_chunks(trials, workers, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      const auto r = generate(params, law, depth, trial_seed(seed, i));
      alive[i] = r.count(depth) > 0;
      mass[i] = r.mass(depth);
    }
  });
  SurvivalStats s;
  s.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    s.survived += alive[i] ? 1 : 0;
    if (alive[i] && !(mass[i] > 0.0)) ++s.nonempty_but_massless;
  }
  s.frequency = static_cast<double>(s.survived) / static_cast<double>(trials);
  s.stderr_ = std::sqrt(s.frequency * (1.0 - s.frequency) / static_cast<double>(trials));
  std::tie(s.ci_lo, s.ci_hi) = wilson_interval(s.survived, trials);
  const auto m = mean_estimate(mass);
  s.mass_mean = m.mean;
  s.mass_variance = m.variance;
  s.lower_bound = survival_lower_bound(params, depth);
  s.respects_bound = s.frequency >= s.lower_bound - 4.0 * std::max(s.stderr_, 1.0 / static_cast<double>(trials));
  return s;
}

struct DimensionReport {
  unsigned n_min = 0;
  unsigned n_max = 0;
  Estimate box;
  Estimate mass;
  EnergyBracket energy;
  bool has_energy = false;
};

inline DimensionReport dimension_report(const Realization& r, unsigned n_min, unsigned n_max,
                                        std::span<const double> energy_t = {}, unsigned energy_levels = 4) {
  DimensionReport rep;
  rep.n_min = n_min;
  rep.n_max = n_max;
  rep.box = box_dimension(r, n_min, n_max);
  rep.mass = mass_dimension(r, n_min, n_max);
  if (!energy_t.empty()) {
    const unsigned hi = std::min(n_max, r.depth());
    const unsigned lo = hi > energy_levels ? hi - energy_levels : 1;
    rep.energy = energy_dimension_bracket(r, energy_t, std::max(lo, 1U), hi);
    rep.has_energy = true;
  }
  return rep;
}

}  // namespace cantor
