#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlw/checkpoint.hpp"
#include "rlw/error.hpp"
#include "rlw/json_io.hpp"

using namespace rlw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rlw_checkpoint_test";
  fs::create_directories(dir);
  return dir / name;
}

Checkpoint sample_checkpoint() {
  TrainConfig cfg = TrainConfig::defaults(ScenarioConfig::undular_bore(2.0), Variant::conservative);
  cfg.hidden_layers = 2;
  cfg.width = 5;
  cfg.windows = 2;
  cfg.seed = 123456789012345ull;
  Checkpoint cp;
  cp.config = cfg;
  for (int w = 0; w < 2; ++w) {
    NetworkWindow nw;
    nw.t_begin = 125.0 * w;
    nw.t_end = 125.0 * (w + 1);
    nw.spec = cfg.model(nw.t_begin, nw.t_end);
    nw.params = init_params(nw.spec, 40 + static_cast<std::uint64_t>(w), true);
    nw.params.back() = -0.1 / 3.0;  // not representable in short decimal
    cp.windows.push_back(nw);
  }
  HistoryEntry h;
  h.epoch = 7;
  h.window = 1;
  h.stage = 1;
  h.phase = Phase::lbfgs;
  h.breakdown = {1.0 / 3.0, 2e-300, 5.5, 1e-17};
  h.total = -3.25;
  h.weights = {0.1, -0.2, 1.0 / 7.0};
  cp.history.push_back(h);
  cp.aborted = true;
  cp.failed_window = 1;
  return cp;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint cp = sample_checkpoint();
  const auto path = scratch("roundtrip.json");
  checkpoint_save(cp, path);
  const Checkpoint back = checkpoint_load(path);
  ASSERT_EQ(back.windows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.windows[i].params, cp.windows[i].params);
    EXPECT_EQ(back.windows[i].spec, cp.windows[i].spec);
    EXPECT_EQ(back.windows[i].t_begin, cp.windows[i].t_begin);
    EXPECT_EQ(back.windows[i].t_end, cp.windows[i].t_end);
  }
  ASSERT_EQ(back.history.size(), 1u);
  EXPECT_EQ(back.history[0].breakdown.l_ic, 2e-300);
  EXPECT_EQ(back.history[0].weights.lambda_bc, 1.0 / 7.0);
  EXPECT_EQ(back.history[0].phase, Phase::lbfgs);
  EXPECT_EQ(back.config.seed, cp.config.seed);
  EXPECT_EQ(back.config.scenario.bore.d, 2.0);
  EXPECT_EQ(back.config.strategy, StrategyKind::causal);
  EXPECT_EQ(back.config.variant, Variant::conservative);
  EXPECT_TRUE(back.aborted);
  EXPECT_EQ(back.failed_window, std::optional<std::size_t>(1));
  checkpoint_save(back, scratch("roundtrip2.json"));
  EXPECT_EQ(read_all(path), read_all(scratch("roundtrip2.json")));
}

TEST(Checkpoint, FieldEvaluatesTheStoredWindows) {
  const Checkpoint cp = sample_checkpoint();
  const SolutionField f = cp.field();
  EXPECT_EQ(f.window_count(), 2u);
  EXPECT_EQ(f.value(10.0, 200.0), forward_value(cp.windows[1].params, cp.windows[1].spec, 10.0, 200.0));
}

TEST(Checkpoint, TruncatedFileIsALoadError) {
  const auto path = scratch("full.json");
  checkpoint_save(sample_checkpoint(), path);
  const std::string text = read_all(path);
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 3}) {
    const auto broken = scratch("truncated.json");
    std::ofstream(broken) << text.substr(0, cut);
    EXPECT_THROW(checkpoint_load(broken), LoadError) << "cut at " << cut;
  }
  EXPECT_THROW(checkpoint_load(scratch("does-not-exist.json")), LoadError);
}

TEST(Checkpoint, MissingKeyIsNamed) {
  const auto path = scratch("missing.json");
  checkpoint_save(sample_checkpoint(), path);
  Json doc = Json::parse(read_all(path));
  doc["windows"][1].erase("params");
  std::ofstream(path) << doc.dump();
  try {
    checkpoint_load(path);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("windows[1]"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, OtherVersionIsUnsupported) {
  const auto path = scratch("version.json");
  checkpoint_save(sample_checkpoint(), path);
  Json doc = Json::parse(read_all(path));
  doc["format_version"] = kCheckpointFormatVersion + 1;
  std::ofstream(path) << doc.dump();
  EXPECT_THROW(checkpoint_load(path), UnsupportedVersionError);
}

TEST(JsonIo, HexDoublesAreExact) {
  for (double v : {0.1, -1.0 / 3.0, 1e-308, 6.02214076e23, 0.0}) {
    EXPECT_EQ(parse_double(Json(hex_double(v)), "v"), v);
  }
  EXPECT_EQ(parse_double(Json(2.5), "v"), 2.5);
  EXPECT_THROW(parse_double(Json("zzz"), "v"), LoadError);
}
