// cantor-lab: generate random M-adic martingale measures and analyse them.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 analysis precondition failure.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cantor/cantor.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kPreconditionError = 3;

std::string default_out_dir() {
  const char* env = std::getenv("CANTOR_LAB_OUT");
  return env && *env ? env : ".";
}

void print_value(const std::string& name, double v, const std::string& formula) {
  std::cout << name << " = " << std::setprecision(12) << v << "    [" << formula << "]\n";
}

struct SourceOptions {
  std::string gen = "perc:M=2,d=1,p=0.7";
  std::string input;
  unsigned depth = 8;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

void add_source(CLI::App* app, SourceOptions& o) {
  app->add_option("--gen", o.gen, "generator spec, e.g. perc:M=2,d=1,p=0.7");
  app->add_option("--input", o.input, "read a stored realization instead of generating");
  app->add_option("--depth", o.depth, "generation depth");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--workers", o.workers, "worker threads");
}

cantor::Realization load(const SourceOptions& o) {
  if (!o.input.empty()) {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw cantor::ConfigError("cannot open " + o.input);
    return cantor::read_realization(in);
  }
  cantor::GeneratorSpec spec;
  try {
    spec = cantor::parse_generator_spec(o.gen);
  } catch (const std::invalid_argument& e) {
    throw cantor::ConfigError(std::string("generator spec: ") + e.what());
  }
  return cantor::generate(spec, o.depth, o.seed, o.workers);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cantor-lab: random M-adic martingale measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cantor::kToolVersion);

  // run
  auto* run = app.add_subcommand("run", "run an experiment from a config file and/or flags");
  std::string config_path;
  std::vector<std::string> run_params;
  std::map<std::string, std::string> run_flags;
  run->add_option("--config", config_path, "flat key=value config file");
  for (const char* key : {"gen", "depth", "trials", "seed", "analyze", "out", "format", "workers"})
    run->add_option(std::string("--") + key, run_flags[key], std::string("override config key ") + key);
  run->add_option("--param", run_params, "analysis parameter key=value (repeatable)");

  // calc
  auto* calc = app.add_subcommand("calc", "closed-form calculators");
  calc->require_subcommand(1);
  double rs = 0, rsigma = 0;
  unsigned rd = 1, rn = 2;
  auto* c_restr = calc->add_subcommand("restriction", "restriction exponents p_{s,sigma,d} and Chen's range");
  c_restr->add_option("--s", rs)->required();
  c_restr->add_option("--sigma", rsigma)->required();
  c_restr->add_option("--d", rd)->required();
  c_restr->add_option("--n", rn, "convolution power");
  std::uint64_t hdelta = 0, hcount = 1;
  double hR = 1, hrho = 1;
  auto* c_hoef = calc->add_subcommand("hoeffding", "dependency-graph concentration bound");
  c_hoef->add_option("--delta", hdelta)->required();
  c_hoef->add_option("--count", hcount)->required();
  c_hoef->add_option("--R", hR)->required();
  c_hoef->add_option("--rho", hrho)->required();
  double bgamma = 1;
  unsigned bsteps = 3;
  auto* c_boot = calc->add_subcommand("bootstrap", "Hoelder bootstrap recursion");
  c_boot->add_option("--gamma", bgamma)->required();
  c_boot->add_option("--steps", bsteps);
  unsigned tm = 2;
  double td = 1, talpha = 0;
  auto* c_hold = calc->add_subcommand("holder-target", "target Hoelder exponent of the convolution density");
  c_hold->add_option("--m", tm)->required();
  c_hold->add_option("--d", td)->required();
  c_hold->add_option("--alpha", talpha)->required();

  // gen
  auto* gen = app.add_subcommand("gen", "generate and store a realization (binary + JSON sidecar)");
  SourceOptions gen_src;
  std::string gen_out;
  add_source(gen, gen_src);
  gen->add_option("--out", gen_out, "output file (default <out dir>/realization.cntr)");

  // scan
  auto* scan = app.add_subcommand("scan", "progression and homothety scans (d = 1)");
  SourceOptions scan_src;
  unsigned scan_level = 0;
  std::string scan_mode = "endpoints";
  std::vector<double> scan_pattern;
  double scan_tol = -1;
  std::string parity_E;
  unsigned parity_M = 0;
  add_source(scan, scan_src);
  scan->add_option("--level", scan_level, "resolution level (default depth)");
  scan->add_option("--mode", scan_mode, "endpoints | digits | homothety | parity")
      ->check(CLI::IsMember({"endpoints", "digits", "homothety", "parity"}));
  scan->add_option("--pattern", scan_pattern, "homothety pattern 0 1 t3 ...");
  scan->add_option("--tol", scan_tol, "homothety tolerance (default M^{2-n})");
  scan->add_option("--E", parity_E, "parity mode: digit set, e.g. 0;2;8");
  scan->add_option("--M", parity_M, "parity mode: base");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Fourier coefficients and decay exponent (d = 1)");
  SourceOptions spec_src;
  unsigned spec_level = 0;
  std::int64_t spec_kmax = 1024;
  std::uint64_t spec_denom = 1;
  unsigned spec_blocks = 0;
  std::string spec_out;
  add_source(spectrum, spec_src);
  spectrum->add_option("--level", spec_level, "level n (default depth)");
  spectrum->add_option("--kmax", spec_kmax, "largest frequency numerator");
  spectrum->add_option("--denom", spec_denom, "frequency spacing 1/denom");
  spectrum->add_option("--blocks", spec_blocks, "dyadic blocks for the decay fit (default: all)");
  spectrum->add_option("--out", spec_out, "CSV output (default stdout)");

  // convolve
  auto* convolve = app.add_subcommand("convolve", "slice profile Y_n^u of the self-convolution (d = 1)");
  SourceOptions conv_src;
  unsigned conv_order = 2, conv_level = 0;
  double conv_gamma = 0.0;
  std::string conv_out;
  add_source(convolve, conv_src);
  convolve->add_option("--order", conv_order, "2 or 3");
  convolve->add_option("--level", conv_level, "level n (default depth)");
  convolve->add_option("--gamma", conv_gamma, "gamma~ for the grid spacing");
  convolve->add_option("--out", conv_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (run->parsed()) {
      cantor::ExperimentConfig cfg;
      cfg.out = default_out_dir();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw cantor::ConfigError("cannot open config " + config_path);
        cfg = cantor::parse_config(in, cfg);
      }
      for (const auto& [k, v] : run_flags)
        if (run->count("--" + k)) cantor::apply_setting(cfg, k, v);
      for (const auto& kv : run_params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw cantor::ConfigError("--param expects key=value");
        cantor::apply_setting(cfg, "param." + kv.substr(0, eq), kv.substr(eq + 1));
      }
      const auto res = cantor::run_experiment(cfg);
      std::cout << res.document["results"].dump(2) << "\n";
      for (const auto& f : res.files) std::cerr << "wrote " << f.string() << "\n";
    } else if (calc->parsed()) {
      if (c_restr->parsed()) {
        const auto e = cantor::restriction_exponents(rs, rsigma, rd, rn);
        print_value("p_mockenhaupt", e.p_mockenhaupt, "2(2d - 2s + sigma)/sigma");
        print_value("p_chen", e.p_chen, "2n");
        print_value("q_chen", e.q_chen, "p/(p - n) at p = 2n");
      } else if (c_hoef->parsed()) {
        print_value("bound", cantor::hoeffding_janson_bound(hdelta, hcount, hR, hrho),
                    "2 exp(-2 rho^2 / ((Delta + 1) count R^2))");
      } else if (c_boot->parsed()) {
        const auto g = cantor::holder_bootstrap(bgamma, bsteps);
        for (std::size_t i = 0; i < g.size(); ++i)
          print_value("gamma_" + std::to_string(i), g[i], "gamma_{k+1} = g / (1 + g - gamma_k), gamma_0 = 0");
      } else if (c_hold->parsed()) {
        const char* formula = tm == 2 ? "d/2 - alpha"
                              : talpha <= td / 2 ? "(d - alpha)/2 for alpha <= d/2"
                                                 : "d - 3 alpha / 2 for d/2 <= alpha < 2d/3";
        print_value("gamma", cantor::holder_target(tm, td, talpha), formula);
      }
    } else if (gen->parsed()) {
      const auto r = load(gen_src);
      const std::string path = gen_out.empty() ? default_out_dir() + "/realization.cntr" : gen_out;
      std::filesystem::create_directories(std::filesystem::path(path).parent_path().empty()
                                              ? std::filesystem::path(".")
                                              : std::filesystem::path(path).parent_path());
      std::ofstream bin(path, std::ios::binary);
      if (!bin) throw std::runtime_error("cannot write " + path);
      cantor::write_realization(bin, r);
      std::ofstream meta(path + ".json");
      meta << cantor::realization_metadata(r).dump(2) << "\n";
      std::cout << "wrote " << path << " (" << r.count(r.depth()) << " cubes at level " << r.depth() << ")\n";
    } else if (scan->parsed()) {
      if (scan_mode == "parity") {
        cantor::BehrendConfig cfg;
        cfg.M = parity_M;
        cfg.E.clear();
        for (const auto& item : cantor::detail::split(parity_E, ';'))
          cfg.E.push_back(cantor::detail::parse_uint<std::uint64_t>("E", item));
        const auto cert = cantor::parity_certificate(cfg);
        std::cout << (cert.valid ? "valid" : "invalid") << ": " << cert.reason << "\n";
        return cert.valid ? 0 : 1;
      }
      const auto r = load(scan_src);
      const unsigned n = scan->count("--level") ? scan_level : r.depth();
      nlohmann::json j;
      if (scan_mode == "homothety") {
        const double tol = scan_tol >= 0 ? scan_tol : std::pow(static_cast<double>(r.params().M), 2.0 - n);
        const auto rep = cantor::homothety_search(r, n, scan_pattern, tol);
        j = {{"level", n}, {"tolerance", tol}, {"hits", rep.hit_count}};
      } else {
        const auto rep = cantor::ap_scan(r, n, scan_mode == "digits" ? cantor::ScanMode::digit_sets
                                                                    : cantor::ScanMode::endpoints);
        j = {{"level", n}, {"witnesses", rep.witness_count}, {"digitset_violations", rep.digitset_violations},
             {"nodes_checked", rep.nodes_checked}};
        auto& w = j["sample"] = nlohmann::json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(rep.ap_witnesses.size(), 20); ++i) {
          const auto& x = rep.ap_witnesses[i];
          w.push_back({{"k", {x.k1, x.k2, x.k3}}, {"branch_level", x.branch_level}, {"parity", cantor::to_string(x.parity)}});
        }
      }
      std::cout << j.dump(2) << "\n";
    } else if (spectrum->parsed()) {
      const auto r = load(spec_src);
      const unsigned n = spectrum->count("--level") ? spec_level : r.depth();
      const auto sp = cantor::fourier_coeffs(r, n, spec_kmax, spec_denom, spec_src.workers);
      std::ofstream file;
      auto& out = open_out(spec_out, file);
      out << "k,re,im,abs\n";
      for (std::int64_t k = 0; k <= spec_kmax; ++k) {
        const auto z = sp.at(k);
        out << cantor::format_double(sp.frequency(k)) << ',' << cantor::format_double(z.real()) << ','
            << cantor::format_double(z.imag()) << ',' << cantor::format_double(std::abs(z)) << '\n';
      }
      if (r.count(n) == 0) {
        std::cerr << "realization is empty at level " << n << "; spectrum is identically zero\n";
        return 0;
      }
      unsigned blocks = spec_blocks;
      if (blocks == 0)
        while (std::ldexp(1.0, static_cast<int>(blocks + 1)) * static_cast<double>(spec_denom) <= static_cast<double>(spec_kmax))
          ++blocks;
      const auto est = cantor::decay_exponent_estimate(sp, blocks);
      std::cerr << "sigma_hat = " << est.sigma << " +- " << est.stderr_ << " (cap " << est.cap << ")\n";
    } else if (convolve->parsed()) {
      const auto r = load(conv_src);
      const unsigned n = convolve->count("--level") ? conv_level : r.depth();
      const auto prof = cantor::slice_profile(r, conv_order, n, conv_gamma, conv_src.workers);
      std::ofstream file;
      auto& out = open_out(conv_out, file);
      out << "m,n,u,Y,certified_sup_slack\n";
      for (std::size_t i = 0; i < prof.grid.size(); ++i)
        out << conv_order << ',' << n << ',' << cantor::format_double(prof.grid[i]) << ','
            << cantor::format_double(prof.values[i]) << ',' << cantor::format_double(prof.certified_sup_slack()) << '\n';
      std::cerr << "sup = " << prof.sup() << " spacing = " << prof.spacing << (prof.capped ? " (capped)" : "") << "\n";
    }
  } catch (const cantor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    // InvalidParameter, Unsupported
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kPreconditionError;
  } catch (const std::logic_error& e) {
    // DomainError, LevelOutOfRange
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kPreconditionError;
  } catch (const cantor::InsufficientData& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kPreconditionError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
