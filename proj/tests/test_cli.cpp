#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "shearlab/runner.hpp"

namespace fs = std::filesystem;
using namespace shearlab;

namespace {

const fs::path kScenarios = fs::path(SHEARLAB_SOURCE_DIR) / "scenarios";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "shearlab_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Json minimal() {
  return Json::parse(R"({"nu": 1e-2, "k": 1, "modulation": {"builtin": "zero", "horizon": 1}})");
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SHEARLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Scenario, MinimalParses) {
  const auto sc = parse_scenario(minimal());
  EXPECT_DOUBLE_EQ(sc.nu, 1e-2);
  EXPECT_EQ(sc.k, 1);
}

TEST(Scenario, UnknownTopLevelKeyRejected) {
  auto j = minimal();
  j["nuu"] = 1.0;
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, UnknownNestedKeyRejected) {
  auto j = minimal();
  j["envelope"] = {{"kind", "diffusion"}, {"log_spacing", true}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, MissingRequiredKeys) {
  auto j = minimal();
  j.erase("nu");
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = minimal();
  j.erase("modulation");
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, ValueChecks) {
  auto j = minimal();
  j["nu"] = -1.0;
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = minimal();
  j["k"] = 0;
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = minimal();
  j["k"] = 1.5;
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = minimal();
  j["nu"] = "small";
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = minimal();
  j["profile"] = {{"name", "poiseuille"}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, ShippedScenariosParse) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 10);
}

TEST(Scenario, MissingFileIsConfigError) {
  std::string err;
  const int code = guarded([&] { return run_simulate(load_scenario(kScenarios / "nope.json"), {}).exit_code; }, err);
  EXPECT_EQ(code, kExitConfig);
  EXPECT_FALSE(err.empty());
}

TEST(Runner, HeatSimulatePasses) {
  RunOptions opt;
  opt.out_dir = scratch("heat");
  const auto res = run_simulate(load_scenario(kScenarios / "heat.json"), opt);
  EXPECT_EQ(res.exit_code, kExitPass);
  EXPECT_EQ(res.report["status"], "PASS");
  EXPECT_TRUE(fs::exists(opt.out_dir / "energy.csv"));
  EXPECT_TRUE(fs::exists(opt.out_dir / "report.json"));
}

TEST(Runner, CsvHeaderCarriesHashAndSeed) {
  RunOptions opt;
  opt.out_dir = scratch("header");
  opt.seed = 17;
  run_simulate(load_scenario(kScenarios / "heat.json"), opt);
  const std::string csv = slurp(opt.out_dir / "energy.csv");
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv.rfind("# config_hash=", 0), 0u);
  EXPECT_NE(csv.find("seed=17"), std::string::npos);
  EXPECT_NE(csv.find("\nt,E0,E1,E2,E3,E4,Phi,Psi\n"), std::string::npos);
}

TEST(Runner, UnsupportedEnvelopeExitsTwoUnlessForced) {
  auto j = minimal();
  j["modulation"] = {{"builtin", "constant"}, {"value", 1.5}, {"horizon", 10}};
  j["envelope"] = {{"kind", "thm1"}, {"samples", 11}};
  const auto sc = parse_scenario(j);
  RunOptions opt;
  opt.out_dir = scratch("unsupported");
  std::string err;
  EXPECT_EQ(guarded([&] { return run_envelope(sc, opt).exit_code; }, err), kExitCheckFailed);
  opt.force = true;
  err.clear();
  const int forced = guarded([&] { return run_envelope(sc, opt).exit_code; }, err);
  EXPECT_NE(forced, kExitConfig) << err;
  EXPECT_NE(forced, kExitNumerical) << err;
}

TEST(Runner, UnknownCommandIsConfigError) {
  std::string err;
  const auto sc = parse_scenario(minimal());
  EXPECT_EQ(guarded([&] { return run_command("bogus", sc, {}).exit_code; }, err), kExitConfig);
}

TEST(Runner, SimulateIsDeterministic) {
  RunOptions a, b;
  a.out_dir = scratch("det_a");
  b.out_dir = scratch("det_b");
  const auto sc = load_scenario(kScenarios / "class0.json");
  run_simulate(sc, a);
  run_simulate(sc, b);
  EXPECT_EQ(slurp(a.out_dir / "energy.csv"), slurp(b.out_dir / "energy.csv"));
}

TEST(Runner, SeedOverrideChangesHash) {
  const auto sc = load_scenario(kScenarios / "heat.json");
  RunOptions a, b;
  b.seed = sc.seed + 1;
  EXPECT_NE(detail::config_hash(sc, a), detail::config_hash(sc, b));
  EXPECT_EQ(detail::config_hash(sc, a), detail::config_hash(sc, a));
}

TEST(Runner, SampleTimes) {
  const auto lin = detail::sample_times(10.0, 11, false);
  ASSERT_EQ(lin.size(), 11u);
  EXPECT_DOUBLE_EQ(lin.front(), 0.0);
  EXPECT_DOUBLE_EQ(lin.back(), 10.0);
  const auto lg = detail::sample_times(100.0, 5, true);
  ASSERT_EQ(lg.size(), 5u);
  EXPECT_DOUBLE_EQ(lg.front(), 0.0);
  EXPECT_NEAR(lg[1], 0.01, 1e-15);
  EXPECT_NEAR(lg.back(), 100.0, 1e-12);
  for (std::size_t i = 1; i < lg.size(); ++i) EXPECT_GT(lg[i], lg[i - 1]);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  EXPECT_EQ(cli("simulate --config " + (kScenarios / "heat.json").string() + " --out " + out.string()), 0);
  EXPECT_EQ(cli("admissibility --config " + (kScenarios / "admissibility_exp.json").string() + " --out " +
                out.string()),
            0);
  EXPECT_EQ(cli("simulate --config /nonexistent.json"), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("simulate"), 1);
}

TEST(Cli, BadScenarioIsConfigError) {
  const fs::path dir = scratch("cli_bad");
  auto j = minimal();
  j["unknown"] = 1;
  std::ofstream(dir / "bad.json") << j.dump();
  EXPECT_EQ(cli("simulate --config " + (dir / "bad.json").string() + " --out " + dir.string()), 1);
  std::ofstream(dir / "garbage.json") << "{not json";
  EXPECT_EQ(cli("simulate --config " + (dir / "garbage.json").string() + " --out " + dir.string()), 1);
}

TEST(Cli, ChecksOverride) {
  const fs::path out = scratch("cli_checks");
  EXPECT_EQ(cli("simulate --config " + (kScenarios / "heat.json").string() + " --checks identities --out " +
                out.string()),
            0);
  const auto rep = Json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(rep["checks"].contains("identities"));
}
