#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace safe_arm {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SAFE_ARM_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, NoSubcommandFails) {
  const Result r = run_cli("");
  EXPECT_NE(r.code, 0);
}

TEST(Cli, TrainWithoutConfigPrintsUsage) {
  const Result r = run_cli("train --algo ppo");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("--config"), std::string::npos) << r.output;
}

TEST(Cli, TrainWithMissingConfigFileFails) {
  const Result r = run_cli("train --config /nonexistent/cfg.json");
  EXPECT_NE(r.code, 0);
}

TEST(Cli, BadAlgorithmRejected) {
  const fs::path cfg = fs::path(SAFE_ARM_CONFIG_DIR) / "desk.json";
  const Result r = run_cli("train --config " + cfg.string() + " --algo trpo");
  EXPECT_NE(r.code, 0);
}

TEST(Cli, MalformedConfigReportsError) {
  const fs::path dir = test::temp_dir("cli_bad_cfg");
  std::ofstream(dir / "cfg.json") << R"({"trainer": {"gamma": 2.0}})";
  const Result r = run_cli("train --config " + (dir / "cfg.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
}

TEST(Cli, TrainThenSummarize) {
  const fs::path dir = test::temp_dir("cli_train");
  std::ofstream(dir / "cfg.json") << R"({
    "env": {"max_episode_steps": 30},
    "trainer": {"steps_per_epoch": 96, "max_epochs": 2, "hidden_sizes": [8]},
    "seeds": [5]
  })";
  const fs::path runs = dir / "runs";
  const Result t = run_cli("train --config " + (dir / "cfg.json").string() +
                           " --algo cppo --ar ar2 --seed 5 --seed 6 --out " + runs.string());
  ASSERT_EQ(t.code, 0) << t.output;
  EXPECT_TRUE(fs::exists(runs / "cppo_ar2_seed5" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(runs / "cppo_ar2_seed6" / "report.json"));

  const Result s = run_cli("summarize --runs " + runs.string() + " --window 1");
  ASSERT_EQ(s.code, 0) << s.output;
  EXPECT_NE(s.output.find("AR2 (7DoF)"), std::string::npos);
  for (const char* f : {"summary.txt", "summary.csv", "reward_curves.csv", "cost_curves.svg"})
    EXPECT_TRUE(fs::exists(runs / f)) << f;
}

TEST(Cli, SummarizeEmptyDirFails) {
  const fs::path dir = test::temp_dir("cli_empty");
  EXPECT_NE(run_cli("summarize --runs " + dir.string()).code, 0);
}

TEST(Cli, GradcheckPasses) {
  const Result r = run_cli("gradcheck");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("[FAIL]"), std::string::npos);
}

TEST(Cli, SimcheckPasses) {
  const Result r = run_cli("simcheck");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("[FAIL]"), std::string::npos);
}

TEST(Cli, SummarizeReproducesShippedTable) {
  const fs::path shipped = fs::path(SAFE_ARM_RESULTS_DIR) / "desk";
  ASSERT_TRUE(fs::exists(shipped / "summary.txt")) << "missing shipped results in " << shipped;
  const fs::path out = test::temp_dir("cli_golden");
  const Result r = run_cli("summarize --runs " + (shipped / "runs").string() + " --window 10 --out " +
                           out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(out / "summary.txt"), slurp(shipped / "summary.txt"));
  EXPECT_EQ(slurp(out / "summary.csv"), slurp(shipped / "summary.csv"));
}

}  // namespace
}  // namespace safe_arm
