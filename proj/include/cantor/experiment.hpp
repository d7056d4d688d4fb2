#pragma once

// Batch experiment runner: a flat key=value configuration, a fixed set of
// analyses, and deterministic CSV/JSON outputs stamped with the config hash.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cantor/convolution.hpp"
#include "cantor/dimension.hpp"
#include "cantor/errors.hpp"
#include "cantor/generators.hpp"
#include "cantor/patterns.hpp"
#include "cantor/serialize.hpp"
#include "cantor/spectral.hpp"
#include "cantor/stats.hpp"

namespace cantor {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed configuration text or values.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct ExperimentConfig {
  std::string gen = "perc:M=2,d=1,p=0.7";
  unsigned depth = 8;
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> analyses;
  std::map<std::string, std::string> params;  // per-analysis parameters
  std::string out = ".";
  std::string format = "csv,json";
  unsigned workers = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& known_analyses() {
  static const std::vector<std::string> k{"dim", "survival", "spectrum", "convolve", "holder", "energy", "scan"};
  return k;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("bad integer for '" + key + "': " + v);
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

/// Applies one key=value setting (used by both the file parser and CLI flags).
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "gen") c.gen = value;
  else if (key == "depth") c.depth = detail::parse_uint<unsigned>(key, value);
  else if (key == "trials") c.trials = detail::parse_uint<std::uint64_t>(key, value);
  else if (key == "seed") c.seed = detail::parse_uint<std::uint64_t>(key, value);
  else if (key == "analyze") c.analyses = detail::split(value, ',');
  else if (key == "out") c.out = value;
  else if (key == "format") c.format = value;
  else if (key == "workers") c.workers = detail::parse_uint<unsigned>(key, value);
  else if (key.rfind("param.", 0) == 0 && key.size() > 6) c.params[key.substr(6)] = value;
  else throw ConfigError("unknown config key: " + key);
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
  std::string line;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "gen=" << c.gen << "\n";
  os << "depth=" << c.depth << "\n";
  os << "trials=" << c.trials << "\n";
  os << "seed=" << c.seed << "\n";
  os << "analyze=";
  for (std::size_t i = 0; i < c.analyses.size(); ++i) os << (i ? "," : "") << c.analyses[i];
  os << "\n";
  os << "out=" << c.out << "\n";
  os << "format=" << c.format << "\n";
  os << "workers=" << c.workers << "\n";
  for (const auto& [k, v] : c.params) os << "param." << k << "=" << v << "\n";
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Output location and worker count do not change results, so they are not hashed.
inline std::string config_hash(const ExperimentConfig& c) {
  auto key = c;
  key.out.clear();
  key.workers = 1;
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(serialize_config(key));
  return os.str();
}

/// Checks values that the parser cannot (generator spec, analysis names).
inline void validate_config(const ExperimentConfig& c) {
  try {
    (void)parse_generator_spec(c.gen);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("generator spec: ") + e.what());
  }
  if (c.trials == 0) throw ConfigError("trials must be >= 1");
  for (const auto& a : c.analyses)
    if (std::find(known_analyses().begin(), known_analyses().end(), a) == known_analyses().end())
      throw ConfigError("unknown analysis: " + a);
  for (const auto& f : detail::split(c.format, ','))
    if (f != "csv" && f != "json") throw ConfigError("unknown format: " + f);
}

namespace detail {

inline double param_double(const ExperimentConfig& c, const std::string& key, double fallback) {
  auto it = c.params.find(key);
  if (it == c.params.end()) return fallback;
  double v = 0.0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
    throw ConfigError("bad numeric parameter " + key + "=" + it->second);
  return v;
}

inline std::uint64_t param_uint(const ExperimentConfig& c, const std::string& key, std::uint64_t fallback) {
  auto it = c.params.find(key);
  return it == c.params.end() ? fallback : parse_uint<std::uint64_t>(key, it->second);
}

inline std::string param_str(const ExperimentConfig& c, const std::string& key, std::string fallback) {
  auto it = c.params.find(key);
  return it == c.params.end() ? fallback : it->second;
}

inline std::vector<double> param_list(const ExperimentConfig& c, const std::string& key, std::vector<double> fallback) {
  auto it = c.params.find(key);
  if (it == c.params.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split(it->second, ';')) {
    double v = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc()) throw ConfigError("bad list parameter " + key);
    out.push_back(v);
  }
  return out;
}

inline std::string fmt(double v) { return format_double(v); }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# tool=cantor-lab version=" << kToolVersion << " config_hash=" << hash << "\n" << header << "\n";
  }
  template <class... T>
  void row(const T&... cols) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cols), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline nlohmann::json median_summary(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  const auto m = mean_estimate(v);
  return {{"median", median(v)}, {"mean", m.mean}, {"stderr", m.stderr_}, {"count", v.size()}};
}

}  // namespace detail

struct RunResult {
  nlohmann::json document;
  std::vector<std::filesystem::path> files;
};

/// Runs every requested analysis over all trials and writes the outputs.
/// Trials whose realization dies before the analysed level are skipped by
/// the conditioned analyses and counted in the summary.
inline RunResult run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const auto spec = parse_generator_spec(c.gen);
  const auto hash = config_hash(c);
  const auto formats = detail::split(c.format, ',');
  const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
  const bool json = std::find(formats.begin(), formats.end(), "json") != formats.end();
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);

  RunResult res;
  auto& doc = res.document;
  doc["tool"] = "cantor-lab";
  doc["version"] = kToolVersion;
  doc["config_hash"] = hash;
  doc["config"] = serialize_config(c);
  doc["generator"] = spec.canonical;
  auto& results = doc["results"] = nlohmann::json::object();

  std::vector<Realization> runs;
  runs.reserve(c.trials);
  for (std::uint64_t i = 0; i < c.trials; ++i) runs.push_back(generate(spec, c.depth, trial_seed(c.seed, i), c.workers));
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].count(c.depth) > 0) alive.push_back(i);
  doc["trials"] = {{"total", runs.size()}, {"surviving", alive.size()}};

  auto csv_file = [&](const std::string& name, const std::string& header) {
    res.files.push_back(dir / name);
    return detail::CsvWriter(dir / name, hash, header);
  };

  for (const auto& a : c.analyses) {
    if (a == "dim") {
      const auto n_min = static_cast<unsigned>(detail::param_uint(c, "nmin", kDefaultMinLevel));
      const auto n_max = static_cast<unsigned>(detail::param_uint(c, "nmax", c.depth));
      if (n_max <= n_min || n_max > c.depth) throw InsufficientData("dim needs nmin < nmax <= depth");
      std::vector<double> box, mass;
      for (auto i : alive) {
        const auto rep = dimension_report(runs[i], n_min, n_max);
        box.push_back(rep.box.value);
        mass.push_back(rep.mass.value);
      }
      results["dim"] = {{"n_min", n_min},
                        {"n_max", n_max},
                        {"box_dimension", detail::median_summary(box)},
                        {"mass_dimension", detail::median_summary(mass)},
                        {"target", spec.params.d - spec.params.alpha_hi}};
      if (csv) {
        auto w = csv_file("levels.csv", "trial,n,N_n,mass");
        for (std::size_t i = 0; i < runs.size(); ++i)
          for (unsigned n = 0; n <= c.depth; ++n) w.row(i, n, runs[i].count(n), detail::fmt(runs[i].mass(n)));
      }
    } else if (a == "survival") {
      const auto st = survival_statistics(spec.params, spec.law, c.depth, std::max<std::uint64_t>(c.trials, 100), c.seed,
                                          c.workers);
      results["survival"] = {{"trials", st.trials},         {"frequency", st.frequency},
                             {"wilson_lo", st.ci_lo},       {"wilson_hi", st.ci_hi},
                             {"mass_mean", st.mass_mean},   {"mass_variance", st.mass_variance},
                             {"lower_bound", st.lower_bound}, {"respects_bound", st.respects_bound},
                             {"nonempty_but_massless", st.nonempty_but_massless}};
    } else if (a == "spectrum") {
      const auto n = static_cast<unsigned>(detail::param_uint(c, "level", c.depth));
      const auto kmax = static_cast<std::int64_t>(detail::param_uint(c, "kmax", std::uint64_t{1} << std::min(c.depth, 16U)));
      const auto denom = detail::param_uint(c, "denom", 1);
      unsigned blocks = 0;
      while (std::ldexp(1.0, static_cast<int>(blocks + 1)) * static_cast<double>(denom) <= static_cast<double>(kmax)) ++blocks;
      blocks = static_cast<unsigned>(detail::param_uint(c, "blocks", blocks));
      std::vector<double> sig;
      for (std::size_t idx = 0; idx < alive.size(); ++idx) {
        const auto sp = fourier_coeffs(runs[alive[idx]], n, kmax, denom, c.workers);
        sig.push_back(decay_exponent_estimate(sp, blocks).sigma);
        if (idx == 0 && csv) {
          auto w = csv_file("spectrum.csv", "k,re,im,abs");
          for (std::int64_t k = 0; k <= kmax; ++k) {
            const auto z = sp.at(k);
            w.row(detail::fmt(sp.frequency(k)), detail::fmt(z.real()), detail::fmt(z.imag()), detail::fmt(std::abs(z)));
          }
        }
      }
      results["spectrum"] = {{"level", n}, {"k_max", kmax}, {"blocks", blocks},
                             {"sigma_hat", detail::median_summary(sig)},
                             {"target", spec.params.d - spec.params.alpha_hi}, {"cap", spec.params.d}};
    } else if (a == "convolve") {
      const auto m = static_cast<unsigned>(detail::param_uint(c, "order", 2));
      const auto n = static_cast<unsigned>(detail::param_uint(c, "level", c.depth));
      const double gt = detail::param_double(c, "gamma", 0.0);
      std::vector<double> sups;
      for (std::size_t idx = 0; idx < alive.size(); ++idx) {
        const auto prof = slice_profile(runs[alive[idx]], m, n, gt, c.workers);
        sups.push_back(prof.sup());
        if (idx == 0 && csv) {
          auto w = csv_file("profile.csv", "m,n,u,Y,certified_sup_slack");
          for (std::size_t i = 0; i < prof.grid.size(); ++i)
            w.row(m, n, detail::fmt(prof.grid[i]), detail::fmt(prof.values[i]), detail::fmt(prof.certified_sup_slack()));
        }
        if (idx == 0)
          results["convolve_grid"] = {{"spacing", prof.spacing}, {"delta_n", prof.delta_n}, {"capped", prof.capped},
                                      {"points", prof.grid.size()}};
      }
      results["convolve"] = {{"order", m}, {"level", n}, {"sup", detail::median_summary(sups)}};
    } else if (a == "holder") {
      const auto m = static_cast<unsigned>(detail::param_uint(c, "order", 2));
      const auto lo = static_cast<unsigned>(detail::param_uint(c, "lo", std::min(4U, c.depth)));
      const auto hi = static_cast<unsigned>(detail::param_uint(c, "hi", c.depth > 0 ? c.depth - 1 : 0));
      if (hi + 1 > c.depth) throw InsufficientData("holder needs hi + 1 <= depth");
      std::vector<double> ex;
      for (auto i : alive) {
        const auto profs = holder_profiles(runs[i], m, lo, hi, c.workers);
        ex.push_back(holder_exponent_estimate(profs, spec.params.M).exponent);
      }
      results["holder"] = {{"order", m}, {"levels", {lo, hi}}, {"exponent", detail::median_summary(ex)},
                           {"target", holder_target(m, spec.params.d, spec.params.alpha_hi)}};
    } else if (a == "energy") {
      const auto n = static_cast<unsigned>(detail::param_uint(c, "level", c.depth));
      const auto ts = detail::param_list(c, "t", {0.25, 0.5, 0.75});
      auto& arr = results["energy"] = nlohmann::json::array();
      std::unique_ptr<detail::CsvWriter> w;
      if (csv) w = std::make_unique<detail::CsvWriter>(csv_file("energy.csv", "trial,n,t,energy"));
      for (auto i : alive)
        for (double t : ts) {
          const double e = energy_direct(runs[i], n, t);
          arr.push_back({{"trial", i}, {"t", t}, {"energy", e}});
          if (w) w->row(i, n, detail::fmt(t), detail::fmt(e));
        }
    } else if (a == "scan") {
      const auto n = static_cast<unsigned>(detail::param_uint(c, "level", c.depth));
      const auto mode = detail::param_str(c, "mode", "endpoints");
      if (mode != "endpoints" && mode != "digits") throw ConfigError("scan mode must be endpoints or digits");
      std::uint64_t witnesses = 0, violations = 0, nodes = 0;
      std::unique_ptr<detail::CsvWriter> w;
      if (csv && mode == "endpoints") w = std::make_unique<detail::CsvWriter>(csv_file("witnesses.csv", "trial,k1,k2,k3,level,branch_level,parity"));
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto rep = ap_scan(runs[i], n, mode == "endpoints" ? ScanMode::endpoints : ScanMode::digit_sets);
        witnesses += rep.witness_count;
        violations += rep.digitset_violations;
        nodes += rep.nodes_checked;
        if (w)
          for (const auto& x : rep.ap_witnesses) w->row(i, x.k1, x.k2, x.k3, n, x.branch_level, to_string(x.parity));
      }
      results["scan"] = {{"mode", mode}, {"level", n}, {"witnesses", witnesses},
                         {"digitset_violations", violations}, {"nodes_checked", nodes}};
    }
  }

  if (json) {
    auto stamped = doc;
    const auto now = std::chrono::system_clock::now();
    stamped["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream out(dir / "run.json");
    if (!out) throw std::runtime_error("cannot write run.json");
    out << stamped.dump(2) << "\n";
    res.files.push_back(dir / "run.json");
  }
  return res;
}

}  // namespace cantor
