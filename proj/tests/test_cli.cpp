#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cantor/experiment.hpp"

using namespace cantor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cantor_lab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_tool(const std::string& args, std::string* out = nullptr) {
  const auto log = fs::temp_directory_path() / "cantor_lab_test_stdout.txt";
  const std::string cmd = std::string(CANTOR_LAB_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.gen = "cap:M=2,d=1,s=0.5";
  c.depth = 11;
  c.trials = 7;
  c.seed = 123456789;
  c.analyses = {"dim", "spectrum"};
  c.params = {{"kmax", "512"}, {"t", "0.2;0.4"}};
  c.out = "/tmp/x y";
  c.workers = 3;
  std::istringstream in(serialize_config(c));
  const auto back = parse_config(in);
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, ParserErrors) {
  for (const char* text : {"depth=abc\n", "nonsense\n", "colour=blue\n", "trials=-1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), ConfigError) << text;
  }
  std::istringstream ok("# comment\n  gen = perc:M=3,d=1,p=0.9  \n\nseed=4 # trailing\n");
  const auto c = parse_config(ok);
  EXPECT_EQ(c.gen, "perc:M=3,d=1,p=0.9");
  EXPECT_EQ(c.seed, 4u);
  ExperimentConfig bad;
  bad.analyses = {"bogus"};
  EXPECT_THROW(validate_config(bad), ConfigError);
}

TEST(Run, DeterministicOutputs) {
  ExperimentConfig c;
  c.gen = "perc:M=2,d=1,p=0.75";
  c.depth = 8;
  c.trials = 4;
  c.seed = 5;
  c.analyses = {"dim", "spectrum", "convolve", "energy", "scan", "survival", "holder"};
  c.params = {{"kmax", "256"}, {"gamma", "0.4"}, {"level", "6"}};
  const auto da = scratch("det_a"), db = scratch("det_b");
  c.out = da.string();
  const auto a = run_experiment(c);
  c.out = db.string();
  const auto b = run_experiment(c);
  // the serialized config differs only in the output directory
  auto strip = [](nlohmann::json j) {
    j.erase("config");
    j.erase("config_hash");
    return j;
  };
  EXPECT_EQ(strip(a.document).dump(), strip(b.document).dump());
  for (const char* f : {"spectrum.csv", "profile.csv", "energy.csv", "witnesses.csv"}) {
    auto body = [](std::string text) { return text.substr(text.find('\n') + 1); };
    EXPECT_EQ(body(slurp(da / f)), body(slurp(db / f))) << f;
  }
}

TEST(Run, OutputsCarryHashAndVersion) {
  ExperimentConfig c;
  c.gen = "perc:M=2,d=1,p=0.8";
  c.depth = 7;
  c.trials = 2;
  c.analyses = {"dim", "spectrum"};
  c.params = {{"kmax", "128"}};
  c.out = scratch("hash").string();
  const auto res = run_experiment(c);
  const auto hash = config_hash(c);
  EXPECT_EQ(res.document["config_hash"], hash);
  EXPECT_EQ(res.document["version"], kToolVersion);
  bool saw_json = false;
  for (const auto& f : res.files) {
    const auto text = slurp(f);
    EXPECT_NE(text.find(hash), std::string::npos) << f;
    EXPECT_NE(text.find(kToolVersion), std::string::npos) << f;
    saw_json = saw_json || f.extension() == ".json";
  }
  EXPECT_TRUE(saw_json);
}

TEST(Tool, RunTwiceGivesIdenticalJsonModuloTimestamp) {
  const auto a = scratch("tool_a"), b = scratch("tool_b");
  const std::string common = "run --gen perc:M=2,d=2,p=0.7 --depth 6 --trials 50 --analyze dim,survival --seed 3";
  ASSERT_EQ(run_tool(common + " --out " + a.string()), 0);
  ASSERT_EQ(run_tool(common + " --out " + b.string()), 0);
  auto load = [](const fs::path& p) {
    auto j = nlohmann::json::parse(slurp(p / "run.json"));
    j.erase("timestamp");
    j.erase("config");
    return j;
  };
  EXPECT_EQ(load(a).dump(), load(b).dump());
  EXPECT_EQ(slurp(a / "levels.csv"), slurp(b / "levels.csv"));
  EXPECT_TRUE(load(a)["results"].contains("dim"));
}

TEST(Tool, ConfigFileWithFlagOverride) {
  const auto dir = scratch("cfg");
  {
    std::ofstream cfg(dir / "exp.cfg");
    cfg << "gen=cap:M=2,d=1,s=0.5\ndepth=10\ntrials=1\nanalyze=dim\nparam.nmin=4\nout=" << (dir / "ignored").string() << "\n";
  }
  std::string out;
  ASSERT_EQ(run_tool("run --config " + (dir / "exp.cfg").string() + " --out " + (dir / "o").string(), &out), 0) << out;
  const auto j = nlohmann::json::parse(slurp(dir / "o" / "run.json"));
  EXPECT_NEAR(j["results"]["dim"]["box_dimension"]["median"].get<double>(), 0.5, 0.05);
  EXPECT_FALSE(fs::exists(dir / "ignored"));
}

TEST(Tool, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(run_tool("run --gen nope:M=2 --out " + dir.string()), 2);
  EXPECT_EQ(run_tool("run --depth x"), 2);
  EXPECT_EQ(run_tool("run --analyze dim --param nmin=3 --param nmax=9 --depth 5 --out " + dir.string()), 3);
  EXPECT_EQ(run_tool("spectrum --gen perc:M=2,d=2,p=0.7 --depth 3"), 3);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "this is not a config\n";
  }
  EXPECT_EQ(run_tool("run --config " + (dir / "bad.cfg").string()), 2);
}

TEST(Tool, CalculatorOutputs) {
  std::string out;
  ASSERT_EQ(run_tool("calc restriction --s 0.6666 --sigma 0.6666 --d 1", &out), 0);
  EXPECT_NE(out.find("p_mockenhaupt = 4.0006"), std::string::npos) << out;
  ASSERT_EQ(run_tool("calc holder-target --m 2 --d 1 --alpha 0.3", &out), 0);
  EXPECT_NE(out.find("gamma = 0.2"), std::string::npos) << out;
  ASSERT_EQ(run_tool("calc holder-target --m 3 --d 1 --alpha 0.6", &out), 0);
  EXPECT_NE(out.find("gamma = 0.1"), std::string::npos) << out;
  ASSERT_EQ(run_tool("calc holder-target --m 3 --d 1 --alpha 0.4", &out), 0);
  EXPECT_NE(out.find("gamma = 0.3"), std::string::npos) << out;
  ASSERT_EQ(run_tool("calc hoeffding --delta 0 --count 1 --R 1 --rho 1", &out), 0);
  EXPECT_NE(out.find("0.270670566"), std::string::npos) << out;
  ASSERT_EQ(run_tool("calc bootstrap --gamma 1 --steps 3", &out), 0);
  EXPECT_NE(out.find("gamma_3 = 0.75"), std::string::npos) << out;
  EXPECT_EQ(run_tool("calc restriction --s 0.5"), 2);
}

TEST(Tool, GenScanSpectrumConvolve) {
  const auto dir = scratch("gen");
  const auto file = (dir / "r.cntr").string();
  std::string out;
  ASSERT_EQ(run_tool("gen --gen behrend:M=16 --depth 4 --seed 2 --out " + file, &out), 0) << out;
  EXPECT_TRUE(fs::exists(file + ".json"));
  ASSERT_EQ(run_tool("scan --input " + file + " --mode digits", &out), 0) << out;
  EXPECT_EQ(nlohmann::json::parse(out)["digitset_violations"], 0);
  ASSERT_EQ(run_tool("scan --mode parity --M 10 --E '0;2;8'", &out), 1);
  EXPECT_NE(out.find("invalid"), std::string::npos);
  ASSERT_EQ(run_tool("spectrum --input " + file + " --kmax 64 --out " + (dir / "s.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "s.csv").rfind("k,re,im,abs\n", 0), 0u);
  ASSERT_EQ(run_tool("convolve --input " + file + " --level 3 --out " + (dir / "c.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "c.csv").rfind("m,n,u,Y,certified_sup_slack\n", 0), 0u);
}

TEST(Tool, DefaultOutputDirFromEnvironment) {
  const auto dir = scratch("env");
  const std::string cmd = "CANTOR_LAB_OUT=" + dir.string() + " " + CANTOR_LAB_PATH +
                          " gen --gen perc:M=2,d=1,p=0.9 --depth 3 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "realization.cntr"));
}
