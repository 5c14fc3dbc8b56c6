#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlw/json_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "rlw_cli_test";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RLW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A run small enough to finish in well under a second.
std::string tiny_run(const fs::path& out, int seed) {
  return "run --scenario single-soliton --seed " + std::to_string(seed) +
         " --override model.hidden_layers=1 --override model.width=4"
         " --override train.adam_epochs=3 --override train.lbfgs_iters=2"
         " --override points.interior=30 --override points.initial=10 --override points.boundary=6"
         " --override output.grid_x=21 --override output.grid_t=5 --override conservation.grid=101"
         " --out " +
         out.string();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
  }
};

}  // namespace

TEST_F(Cli, RunWritesEveryArtifact) {
  const fs::path out = kRoot / "run";
  ASSERT_EQ(run_cli(tiny_run(out, 1)), 0);
  for (const char* f : {"field.csv", "invariants.csv", "history.csv", "peaks.csv", "metrics.json",
                        "checkpoint.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto manifest = rlw::Json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["exit_code"], 0);
  const auto metrics = rlw::Json::parse(slurp(out / "metrics.json"));
  EXPECT_TRUE(metrics.contains("field"));
  EXPECT_EQ(slurp(out / "field.csv").substr(0, 6), "x,t,u\n");
}

TEST_F(Cli, SeededRunsAreByteIdentical) {
  ASSERT_EQ(run_cli(tiny_run(kRoot / "a", 42)), 0);
  ASSERT_EQ(run_cli(tiny_run(kRoot / "b", 42)), 0);
  EXPECT_EQ(slurp(kRoot / "a" / "metrics.json"), slurp(kRoot / "b" / "metrics.json"));
  ASSERT_EQ(run_cli(tiny_run(kRoot / "c", 43)), 0);
  EXPECT_NE(slurp(kRoot / "a" / "metrics.json"), slurp(kRoot / "c" / "metrics.json"));
}

TEST_F(Cli, ConfigProblemsExitWithTwo) {
  EXPECT_EQ(run_cli("run --out " + (kRoot / "nokind").string()), 2);
  EXPECT_EQ(run_cli("run --scenario single-soliton --override model.depth=3 --out " +
                (kRoot / "badkey").string()),
            2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("run --config /nonexistent.cfg --out " + (kRoot / "nofile").string()), 2);
  std::ofstream(kRoot / "broken.json") << "{\"format\": ";
  EXPECT_EQ(run_cli("eval " + (kRoot / "broken.json").string() + " --out " + (kRoot / "e0").string()), 2);
}

TEST_F(Cli, EvalOutsideTheTrainedRegionExitsWithFour) {
  const fs::path out = kRoot / "for_eval";
  ASSERT_EQ(run_cli(tiny_run(out, 3)), 0);
  const std::string cp = (out / "checkpoint.json").string();
  EXPECT_EQ(run_cli("eval " + cp + " --t-max 25 --out " + (kRoot / "e1").string()), 4);
  EXPECT_EQ(run_cli("eval " + cp + " --x-min 10 --x-max 0 --out " + (kRoot / "e2").string()), 4);
  EXPECT_EQ(run_cli("eval " + cp + " --nx 11 --nt 3 --out " + (kRoot / "e3").string()), 0);
  EXPECT_TRUE(fs::exists(kRoot / "e3" / "field.csv"));
}

TEST_F(Cli, CompareWithItselfIsZero) {
  const fs::path out = kRoot / "for_compare";
  ASSERT_EQ(run_cli(tiny_run(out, 4)), 0);
  const std::string cp = (out / "checkpoint.json").string();
  ASSERT_EQ(run_cli("compare " + cp + " " + cp + " --nx 11 --nt 3 --out " + (kRoot / "cmp").string()), 0);
  const auto m = rlw::Json::parse(slurp(kRoot / "cmp" / "metrics.json"));
  ASSERT_EQ(m["pairs"].size(), 1u);
  EXPECT_EQ(m["pairs"][0]["max_abs_diff"].get<double>(), 0.0);
}

TEST_F(Cli, CompareOfDisjointFieldsExitsWithFour) {
  std::ofstream(kRoot / "left.csv") << "x,t,u\n0,0,1\n1,0,1\n0,1,1\n1,1,1\n";
  std::ofstream(kRoot / "right.csv") << "x,t,u\n5,0,1\n6,0,1\n5,1,1\n6,1,1\n";
  EXPECT_EQ(run_cli("compare " + (kRoot / "left.csv").string() + " " + (kRoot / "right.csv").string() +
                " --out " + (kRoot / "disjoint").string()),
            4);
}
