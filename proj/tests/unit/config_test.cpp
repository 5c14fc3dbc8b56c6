#include <gtest/gtest.h>

#include <algorithm>

#include "rlw/config.hpp"
#include "rlw/error.hpp"

using namespace rlw;

namespace {

std::string error_of(const std::string& text) {
  try {
    resolve_run_config(ConfigDocument::parse(text, "run.cfg"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ScenarioKindAloneIsComplete) {
  const RunConfig r = resolve_run_config(ConfigDocument::parse("[scenario]\nkind = two-soliton\n", "x"));
  EXPECT_EQ(r.train.scenario.kind, ScenarioKind::two_soliton);
  EXPECT_EQ(r.train.width, 100);
  EXPECT_EQ(r.train.adam_epochs, 50000);
  EXPECT_EQ(r.output.grid_x, 501u);
  EXPECT_EQ(r.output.grid_t, 101u);
  EXPECT_EQ(r.oracle.dx, 0.05);
  EXPECT_EQ(r.oracle.sample_times.size(), 101u);
  EXPECT_DOUBLE_EQ(r.peak_threshold(), 0.1);
}

TEST(Config, MissingKindIsNamed) {
  EXPECT_NE(error_of("[train]\nseed = 1\n").find("scenario.kind"), std::string::npos);
}

TEST(Config, CommentsSectionsAndValues) {
  const std::string text =
      "# desk run\n"
      "[scenario]\n"
      "kind = undular-bore   # bore\n"
      "slope = 2\n"
      "[model]\n"
      "hidden_layers = 4\n"
      "width = 32\n"
      "[train]\n"
      "variant = conservative\n"
      "strategy = causal:3\n"
      "adam_epochs = 10\n"
      "lambda_cons = 2.5e-5\n"
      "seed = 9\n"
      "[points]\n"
      "interior = 500\n"
      "[conservation]\n"
      "analytic_reference = yes\n"
      "[output]\n"
      "peak_threshold = 0.02\n"
      "[oracle]\n"
      "dt = 0.025\n";
  const RunConfig r = resolve_run_config(ConfigDocument::parse(text, "desk.cfg"));
  EXPECT_EQ(r.train.scenario.bore.d, 2.0);
  EXPECT_EQ(r.train.hidden_layers, 4);
  EXPECT_EQ(r.train.width, 32);
  EXPECT_EQ(r.train.variant, Variant::conservative);
  EXPECT_EQ(r.train.strategy, StrategyKind::causal);
  EXPECT_EQ(r.train.windows, 3);
  EXPECT_EQ(r.train.adam_epochs, 10);
  EXPECT_EQ(r.train.lambda_cons, 2.5e-5);
  EXPECT_EQ(r.train.seed, 9u);
  EXPECT_EQ(r.train.n_interior, 500u);
  EXPECT_TRUE(r.train.analytic_reference);
  EXPECT_DOUBLE_EQ(r.peak_threshold(), 0.02);
  EXPECT_EQ(r.oracle.dt, 0.025);
  EXPECT_EQ(r.oracle.dx, 0.15);
  EXPECT_EQ(r.oracle.scenario.bore.d, 2.0);
}

TEST(Config, BadLinesReportTheirLineNumber) {
  EXPECT_NE(error_of("[scenario]\nkind = single-soliton\njust words\n").find("run.cfg:3"),
            std::string::npos);
  EXPECT_NE(error_of("[scenario\n").find("run.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("kind = x\n").find("run.cfg:1"), std::string::npos);
  const std::string dup = error_of("[train]\nseed = 1\nseed = 2\n");
  EXPECT_NE(dup.find("run.cfg:3"), std::string::npos);
  EXPECT_NE(dup.find("duplicate"), std::string::npos);
}

TEST(Config, BadValuesNameTheKeyAndLine) {
  const std::string e = error_of("[scenario]\nkind = single-soliton\n[model]\nwidth = wide\n");
  EXPECT_NE(e.find("model.width"), std::string::npos);
  EXPECT_NE(e.find("run.cfg:4"), std::string::npos);
  EXPECT_NE(error_of("[scenario]\nkind = single-soliton\n[model]\nwidth = -3\n").find("model.width"),
            std::string::npos);
  EXPECT_NE(error_of("[scenario]\nkind = kdv\n").find("scenario.kind"), std::string::npos);
  EXPECT_NE(error_of("[scenario]\nkind = single-soliton\n[train]\nvariant = vanilla\n").find("train.variant"),
            std::string::npos);
  EXPECT_NE(error_of("[scenario]\nkind = single-soliton\n[train]\nlearning_rate = 1\n").find("train.learning_rate"),
            std::string::npos);
  EXPECT_NE(error_of("[scenario]\nkind = single-soliton\n[train]\nadam_lr = nan\n").find("train.adam_lr"),
            std::string::npos);
}

TEST(Config, OverridesReplaceFileValues) {
  ConfigDocument doc = ConfigDocument::parse("[scenario]\nkind = single-soliton\n[train]\nseed = 1\n", "f");
  doc.apply_override("train.seed=42");
  doc.apply_override("model.width = 16");
  const RunConfig r = resolve_run_config(doc);
  EXPECT_EQ(r.train.seed, 42u);
  EXPECT_EQ(r.train.width, 16);
  EXPECT_THROW(doc.apply_override("seed"), ConfigError);
  EXPECT_THROW(doc.apply_override("seed=3"), ConfigError);
}

TEST(Config, CurriculumNeedsConservative) {
  EXPECT_NE(error_of("[scenario]\nkind = two-soliton\n[train]\nstrategy = curriculum\n").find("train.strategy"),
            std::string::npos);
}

TEST(Config, EveryKnownKeyIsAccepted) {
  const auto& keys = known_config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "oracle.dx"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "conservation.resample_times"), keys.end());
}

TEST(Config, UnreadableFile) {
  EXPECT_THROW(ConfigDocument::load("/nonexistent/run.cfg"), ConfigError);
}
