#include <gtest/gtest.h>

#include <cmath>

#include "rlw/error.hpp"
#include "rlw/train.hpp"

using namespace rlw;

namespace {

TrainConfig tiny(ScenarioKind kind, Variant variant = Variant::adaptive) {
  TrainConfig c = TrainConfig::defaults(ScenarioConfig::defaults(kind), variant);
  c.hidden_layers = 2;
  c.width = 8;
  c.n_interior = 60;
  c.n_initial = 20;
  c.n_boundary = 10;
  c.adam_epochs = 4;
  c.lbfgs_iters = 3;
  c.conservation_times = 4;
  c.conservation_grid = 101;
  c.seed = 3;
  return c;
}

bool same_history(const std::vector<HistoryEntry>& a, const std::vector<HistoryEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].total != b[i].total ||
        a[i].breakdown.l_pde != b[i].breakdown.l_pde || a[i].weights.lambda_ic != b[i].weights.lambda_ic) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Train, DefaultsFollowTheScenarioTable) {
  const auto single = TrainConfig::defaults(ScenarioConfig::single_soliton(), Variant::adaptive);
  EXPECT_EQ(single.hidden_layers, 8);
  EXPECT_EQ(single.width, 50);
  EXPECT_EQ(single.n_interior, 20000u);
  EXPECT_EQ(single.n_initial, 5000u);
  EXPECT_EQ(single.n_boundary, 5000u);
  EXPECT_EQ(single.adam_epochs, 30000);
  EXPECT_EQ(single.lbfgs_iters, 5000);
  EXPECT_DOUBLE_EQ(single.lambda_cons, 1e-4);
  EXPECT_EQ(single.strategy, StrategyKind::full);

  const auto two_a = TrainConfig::defaults(ScenarioConfig::two_soliton(), Variant::adaptive);
  const auto two_c = TrainConfig::defaults(ScenarioConfig::two_soliton(), Variant::conservative);
  EXPECT_EQ(two_a.strategy, StrategyKind::full);
  EXPECT_EQ(two_c.strategy, StrategyKind::curriculum);
  EXPECT_EQ(two_c.adam_epochs, 50000);
  EXPECT_EQ(two_c.lbfgs_iters, 10000);
  EXPECT_DOUBLE_EQ(two_c.lambda_cons, 1e-5);
  EXPECT_EQ(two_c.width, 100);

  for (Variant v : {Variant::adaptive, Variant::conservative}) {
    const auto bore = TrainConfig::defaults(ScenarioConfig::undular_bore(), v);
    EXPECT_EQ(bore.strategy, StrategyKind::causal);
    EXPECT_EQ(bore.windows, 5);
    EXPECT_EQ(bore.adam_epochs, 20000);
    EXPECT_EQ(bore.lbfgs_iters, 5000);
  }
}

TEST(Train, BoreWindowPlan) {
  const auto plan = TrainConfig::defaults(ScenarioConfig::undular_bore(), Variant::adaptive).plan();
  EXPECT_EQ(plan.boundaries, (std::vector<double>{0, 50, 100, 150, 200, 250}));
}

TEST(Train, NamesRoundTrip) {
  for (auto v : {Variant::adaptive, Variant::conservative}) EXPECT_EQ(parse_variant(to_string(v)), v);
  for (auto s : {StrategyKind::full, StrategyKind::curriculum, StrategyKind::causal}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_variant("standard-ish"), ConfigError);
}

TEST(Train, ValidationNamesTheField) {
  TrainConfig c = tiny(ScenarioKind::single_soliton);
  c.width = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.width"), std::string::npos);
  }
  c = tiny(ScenarioKind::two_soliton);
  c.strategy = StrategyKind::curriculum;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, CollocationCountsAndDomain) {
  const auto cfg = TrainConfig::defaults(ScenarioConfig::single_soliton(), Variant::conservative);
  const auto c = sample_collocation(cfg, 1, 0, 0.0, 20.0);
  EXPECT_EQ(c.interior_x.size(), 20000u);
  EXPECT_EQ(c.initial_x.size(), 5000u);
  EXPECT_EQ(c.boundary_x.size(), 5000u);
  for (std::size_t i = 0; i < c.interior_x.size(); ++i) {
    EXPECT_GE(c.interior_x[i], -40.0);
    EXPECT_LE(c.interior_x[i], 60.0);
    EXPECT_GE(c.interior_t[i], 0.0);
    EXPECT_LE(c.interior_t[i], 20.0);
  }
  for (double x : c.boundary_x) EXPECT_TRUE(x == -40.0 || x == 60.0);
  EXPECT_EQ(c.conservation_times.front(), 0.0);
  EXPECT_EQ(c.conservation_times.size(), 11u);
  EXPECT_EQ(c.conservation_grid.size(), 2001u);
}

TEST(Train, CollocationIsSeeded) {
  const auto cfg = tiny(ScenarioKind::two_soliton);
  const auto a = sample_collocation(cfg, 1, 0, 0.0, 30.0);
  const auto b = sample_collocation(cfg, 1, 0, 0.0, 30.0);
  EXPECT_EQ(a.interior_x, b.interior_x);
  EXPECT_EQ(a.initial_x, b.initial_x);
  EXPECT_EQ(a.boundary_t, b.boundary_t);
  EXPECT_NE(a.interior_x, sample_collocation(cfg, 2, 0, 0.0, 30.0).interior_x);
  auto other = cfg;
  other.seed = 4;
  EXPECT_NE(a.interior_x, sample_collocation(other, 1, 0, 0.0, 30.0).interior_x);
}

TEST(Train, ZeroBudgetStageReturnsItsInput) {
  const auto cfg = tiny(ScenarioKind::single_soliton);
  const MlpSpec spec = cfg.model(0, 20);
  const auto p = init_params(spec, 1, true);
  const auto r = train_stage(StageSettings{}, spec, p, sample_collocation(cfg, 1, 0, 0, 20),
                             cfg.scenario, LossOptions{});
  EXPECT_EQ(r.params, p);
  EXPECT_TRUE(r.history.empty());
  EXPECT_FALSE(r.aborted);
}

TEST(Train, HistoryHasOneEntryPerAdamEpochAndAcceptedLbfgsStep) {
  const auto cfg = tiny(ScenarioKind::single_soliton);
  const auto r = full_train(cfg);
  long adam = 0, lbfgs = 0;
  for (const auto& h : r.history) (h.phase == Phase::adam ? adam : lbfgs)++;
  EXPECT_EQ(adam, cfg.adam_epochs);
  EXPECT_LE(lbfgs, cfg.lbfgs_iters);
  for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].epoch, static_cast<long>(i));
  ASSERT_EQ(r.windows.size(), 1u);
}

TEST(Train, FullRunIsDeterministic) {
  const auto cfg = tiny(ScenarioKind::single_soliton, Variant::conservative);
  const auto a = train(cfg), b = train(cfg);
  EXPECT_EQ(a.windows[0].params, b.windows[0].params);
  EXPECT_TRUE(same_history(a.history, b.history));
}

TEST(Train, CurriculumStagesUseTheirLosses) {
  const auto cfg = tiny(ScenarioKind::two_soliton, Variant::conservative);
  ASSERT_EQ(cfg.strategy, StrategyKind::curriculum);
  const auto r = train(cfg);
  ASSERT_FALSE(r.history.empty());
  for (const auto& h : r.history) {
    if (h.stage == 1) {
      EXPECT_EQ(h.phase, Phase::adam);
      EXPECT_EQ(h.breakdown.l_cons, 0.0);
    } else {
      EXPECT_EQ(h.phase, Phase::lbfgs);
      EXPECT_GT(h.breakdown.l_cons, 0.0);
    }
  }
  EXPECT_EQ(r.history.front().stage, 1);
}

TEST(Train, CausalWindowsAreContiguous) {
  auto cfg = tiny(ScenarioKind::undular_bore);
  cfg.windows = 3;
  cfg.adam_epochs = 2;
  cfg.lbfgs_iters = 1;
  const auto r = train(cfg);
  ASSERT_EQ(r.windows.size(), 3u);
  EXPECT_EQ(r.windows[0].t_begin, 0.0);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(r.windows[i].t_begin, r.windows[i - 1].t_end);
  EXPECT_EQ(r.windows.back().t_end, 250.0);
  const SolutionField f = r.field(cfg.scenario);
  EXPECT_EQ(f.window_count(), 3u);
  EXPECT_EQ(r.windows[1].spec.scaling, InputScaling::for_box(-36, 300, r.windows[1].t_begin, r.windows[1].t_end));
}

TEST(Train, AnalyticInvariantsOfTheSoliton) {
  const auto inv = analytic_invariants(ScenarioConfig::single_soliton(), 4001);
  EXPECT_NEAR(inv.i1, 3.980, 1e-3);
  EXPECT_NEAR(inv.i2, 0.810, 1e-3);
  EXPECT_NEAR(inv.i3, 2.579, 1e-3);
}
