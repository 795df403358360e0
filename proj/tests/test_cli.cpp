#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("rpstab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(RPSTAB_CLI_PATH) + " " + args + " > " + (scratch() / "stdout").string() +
                          " 2> " + (scratch() / "stderr").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, BergerScan) {
  auto out = scratch() / "berger.json";
  ASSERT_EQ(run("berger-scan --p 2 --out " + out.string()), 0);
  auto j = nlohmann::json::parse(slurp(out));
  auto& crit = j["data"]["berger_curves"][0]["critical"];
  ASSERT_EQ(crit.size(), 2u);
  EXPECT_NEAR(crit[0]["t"].get<double>(), 2.0 / std::sqrt(11.0), 1e-6);
  EXPECT_TRUE(crit[0]["maximum"].get<bool>());
  EXPECT_EQ(j["summary"]["exit_code"], 0);
}

TEST(Cli, SchemaKeys) {
  auto out = scratch() / "schema.json";
  ASSERT_EQ(run("berger-scan --out " + out.string()), 0);
  auto j = nlohmann::json::parse(slurp(out));
  for (auto k : {"schema_version", "tool", "tool_version", "command", "config", "sign_calibration", "records", "data",
                 "summary"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_FALSE(j.contains("timing_seconds"));
  EXPECT_FALSE(j["config"].contains("threads"));
  for (auto& r : j["records"])
    for (auto k : {"name", "anchor", "value", "tol", "status"}) EXPECT_TRUE(r.contains(k)) << k;
}

TEST(Cli, TimingIsOptIn) {
  auto out = scratch() / "timing.json";
  ASSERT_EQ(run("berger-scan --timing --out " + out.string()), 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(out)).contains("timing_seconds"));
}

TEST(Cli, JsonOnStdoutWithoutOut) {
  ASSERT_EQ(run("berger-scan --p 3"), 0);
  auto j = nlohmann::json::parse(slurp(scratch() / "stdout"));
  EXPECT_EQ(j["command"], "berger-scan");
  EXPECT_NE(slurp(scratch() / "stderr").find("exit code 0"), std::string::npos);
}

TEST(Cli, ProductSphereFlagExitsTwo) {
  auto cfg = write("ps.toml", R"([run]
p = [2.0]

[[geometry]]
kind = "product_sphere"
dim = 3
curvature = 1.0
)");
  auto out = scratch() / "ps.json";
  ASSERT_EQ(run("stability-report --config " + cfg.string() + " --out " + out.string()), 2);
  auto j = nlohmann::json::parse(slurp(out));
  bool flagged = false;
  for (auto& r : j["records"])
    if (r["status"] == "flag" && r["value"].is_number() && std::abs(r["value"].get<double>() + 3.0) < 1e-12)
      flagged = true;
  EXPECT_TRUE(flagged);
  EXPECT_EQ(j["data"]["verdicts"][0]["verdict"], "FlaggedDiscrepancy");
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run("no-such-suite"), 3);
  auto bad = write("bad.toml", "[run]\np = [1.0]\n");
  EXPECT_EQ(run("stability-report --config " + bad.string()), 3);
  auto kind = write("kind.toml", "[[geometry]]\nkind = \"torus\"\ndim = 3\ncurvature = 1.0\n");
  EXPECT_EQ(run("stability-report --config " + kind.string()), 3);
  EXPECT_EQ(run("berger-scan --config " + (scratch() / "missing.toml").string()), 3);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ThreadCountDoesNotChangeReport) {
  auto cfg = write("id.toml", R"([run]
variations = 1

[[geometry]]
kind = "sphere"
dim = 3
curvature = 1.0
resolution = 12
)");
  auto a = scratch() / "t1.json", b = scratch() / "t8.json";
  const int ea = run("identity-check --config " + cfg.string() + " --threads 1 --out " + a.string());
  const int eb = run("identity-check --config " + cfg.string() + " --threads 8 --out " + b.string());
  EXPECT_EQ(ea, eb);
  const auto sa = slurp(a);
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b));
}

TEST(Cli, IdentityCheckOnSpherePasses) {
  auto cfg = write("id24.toml", R"([run]
variations = 1

[[geometry]]
kind = "sphere"
dim = 3
curvature = 1.0
)");
  auto out = scratch() / "id.json";
  EXPECT_EQ(run("identity-check --config " + cfg.string() + " --out " + out.string()), 0);
  auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["summary"]["fail"], 0);
  EXPECT_GT(j["summary"]["pass"].get<int>(), 5);
}
