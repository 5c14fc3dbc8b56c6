#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "rlw/error.hpp"
#include "rlw/field.hpp"
#include "rlw/physics.hpp"

using namespace rlw;

namespace {

ConservedTriple soliton_invariants_at(double t, std::size_t n, const ScenarioConfig& sc) {
  const auto xs = linspace(sc.x_min, sc.x_max, n);
  std::vector<double> u(n), ux(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = oracle::soliton_partials(xs[i], t, sc.single.d, sc.single.x0, sc.rlw.epsilon,
                                            sc.rlw.mu);
    u[i] = p.u;
    ux[i] = p.ux;
  }
  return invariants(u, ux, xs[1] - xs[0], sc.rlw);
}

}  // namespace

TEST(Physics, ResidualOfTrivialFields) {
  const RlwParams rlw;
  EXPECT_EQ(rlw_residual(Jet{}, rlw), 0.0);
  EXPECT_EQ(rlw_residual(Jet{2.5, 0, 0, 0, 0, 0}, rlw), 0.0);
}

TEST(Physics, ExactSolitonSolvesTheEquationAtAReferencePoint) {
  const auto p = oracle::soliton_partials(3.7, 5.0, 0.1, 0.0, 1.0, 1.0);
  const Jet u{p.u, p.ux, p.ut, 0.0, 0.0, p.uxxt};
  EXPECT_LT(std::abs(rlw_residual(u, RlwParams{})), 1e-10);
}

TEST(Physics, ExactSolitonSolvesTheEquationEverywhere) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> X(-40, 60), T(0, 20);
  const ScenarioConfig sc = ScenarioConfig::single_soliton();
  for (int i = 0; i < 100; ++i) {
    const double x = X(rng), t = T(rng);
    const auto p = oracle::soliton_partials(x, t, 0.1, 0.0, 1.0, 1.0);
    EXPECT_NEAR(exact_single_soliton(x, t, sc), p.u, 1e-15);
    const Jet u{p.u, p.ux, p.ut, 0.0, 0.0, p.uxxt};
    EXPECT_LT(std::abs(rlw_residual(u, sc.rlw)), 1e-10);
  }
}

TEST(Physics, SolitonSpeedAndWavenumber) {
  const RlwParams rlw;
  EXPECT_DOUBLE_EQ(soliton_speed(0.1, rlw), 1.1);
  EXPECT_NEAR(soliton_wavenumber(0.1, rlw), 0.150755672, 1e-9);
}

TEST(Physics, ExactSolitonSpotValues) {
  const ScenarioConfig sc = ScenarioConfig::single_soliton();
  EXPECT_DOUBLE_EQ(exact_single_soliton(0.0, 0.0, sc), 0.3);
  EXPECT_NEAR(exact_single_soliton(1.1 * 20.0, 20.0, sc), 0.3, 1e-14);
  EXPECT_LT(exact_single_soliton(50.0, 0.0, sc), 1e-5);
}

TEST(Physics, TravellingWaveIdentity) {
  const ScenarioConfig sc = ScenarioConfig::single_soliton();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> X(-30, 30), S(0, 10);
  for (int i = 0; i < 50; ++i) {
    const double x = X(rng), t = S(rng), s = S(rng);
    EXPECT_NEAR(exact_single_soliton(x, t, sc), exact_single_soliton(x + 1.1 * s, t + s, sc), 1e-13);
  }
}

TEST(Physics, InitialConditions) {
  const ScenarioConfig two = ScenarioConfig::two_soliton();
  EXPECT_NEAR(initial_condition(15.0, two), 5.333, 1e-3);
  const ScenarioConfig bore = ScenarioConfig::undular_bore();
  EXPECT_DOUBLE_EQ(initial_condition(bore.bore.xc, bore), 0.05);
  EXPECT_NEAR(initial_condition(-1e4, bore), 0.1, 1e-15);
  EXPECT_NEAR(initial_condition(1e4, bore), 0.0, 1e-15);
}

TEST(Physics, InitialConditionSlopeIsTheDerivative) {
  for (const auto& sc : {ScenarioConfig::single_soliton(), ScenarioConfig::two_soliton(),
                         ScenarioConfig::undular_bore(2.0)}) {
    for (double x : {-3.0, 0.5, 14.0, 33.0, 41.0}) {
      const double fd = oracle::d1([&](double s) { return initial_condition(s, sc); }, x, 1e-3);
      EXPECT_NEAR(initial_condition_dx(x, sc), fd, 1e-8) << to_string(sc.kind) << " x=" << x;
    }
  }
}

TEST(Physics, BoundaryValues) {
  const ScenarioConfig single = ScenarioConfig::single_soliton();
  EXPECT_LT(std::abs(boundary_value(-40.0, 0.0, single)), 1e-4);
  const ScenarioConfig bore = ScenarioConfig::undular_bore();
  for (double t : {0.0, 100.0, 250.0}) EXPECT_NEAR(boundary_value(bore.x_min, t, bore), 0.1, 1e-12);
  const ScenarioConfig two = ScenarioConfig::two_soliton();
  EXPECT_LT(std::abs(boundary_value(120.0, 0.0, two)), 1e-6);
}

TEST(Physics, TrapezoidIsExactForLinears) {
  const std::vector<double> c(11, 2.5);
  EXPECT_DOUBLE_EQ(trapezoid(c, 0.3), 2.5 * 3.0);
  const auto x = linspace(0.0, 1.0, 7);
  EXPECT_NEAR(trapezoid(x, x[1] - x[0]), 0.5, 1e-15);
}

TEST(Physics, ZeroFieldHasZeroInvariants) {
  const std::vector<double> z(50, 0.0);
  const auto inv = invariants(z, z, 0.1, RlwParams{});
  EXPECT_EQ(inv.i1, 0.0);
  EXPECT_EQ(inv.i2, 0.0);
  EXPECT_EQ(inv.i3, 0.0);
}

TEST(Physics, SolitonInvariantsMatchClosedForms) {
  const ScenarioConfig sc = ScenarioConfig::single_soliton();
  const auto inv = soliton_invariants_at(0.0, 4001, sc);
  const auto cf = oracle::soliton_invariants_on(0.1, 1.0, 1.0, sc.x_min, sc.x_max, 0.0);
  EXPECT_NEAR(inv.i1 / cf.i1, 1.0, 1e-6);
  EXPECT_NEAR(inv.i2 / cf.i2, 1.0, 1e-6);
  EXPECT_NEAR(inv.i3 / cf.i3, 1.0, 1e-6);
  EXPECT_NEAR(inv.i1, 3.980, 1e-3);
  EXPECT_NEAR(inv.i2, 0.810, 1e-3);
  EXPECT_NEAR(inv.i3, 2.579, 1e-3);
}

TEST(Physics, TruncatedDomainLosesOnlyTheTail) {
  const auto line = oracle::soliton_invariants(0.1, 1.0, 1.0);
  const auto box = oracle::soliton_invariants_on(0.1, 1.0, 1.0, -40, 60, 0.0);
  EXPECT_LT(box.i1, line.i1);
  EXPECT_NEAR(box.i1 / line.i1, 1.0, 1e-5);
}

TEST(Physics, SolitonInvariantsDoNotDriftUnderTranslation) {
  // wide enough that neither tail reaches the ends
  ScenarioConfig sc = ScenarioConfig::single_soliton();
  sc.x_min = -200;
  sc.x_max = 220;
  const auto i0 = soliton_invariants_at(0.0, 16801, sc);
  for (double t : {5.0, 10.0, 15.0, 20.0}) {
    const auto it = soliton_invariants_at(t, 16801, sc);
    EXPECT_LT(std::abs(it.i1 - i0.i1) / i0.i1, 1e-8);
    EXPECT_LT(std::abs(it.i2 - i0.i2) / i0.i2, 1e-8);
    EXPECT_LT(std::abs(it.i3 - i0.i3) / i0.i3, 1e-8);
  }
}

TEST(Physics, TwoSolitonInvariants) {
  const ScenarioConfig sc = ScenarioConfig::two_soliton();
  const auto xs = linspace(sc.x_min, sc.x_max, 12001);
  std::vector<double> u, ux;
  for (double x : xs) {
    u.push_back(initial_condition(x, sc));
    ux.push_back(initial_condition_dx(x, sc));
  }
  const auto inv = invariants(u, ux, xs[1] - xs[0], sc.rlw);
  EXPECT_NEAR(inv.i1, 37.92, 0.005 * 37.92);
  EXPECT_NEAR(inv.i2, 120.52, 0.005 * 120.52);
  EXPECT_NEAR(inv.i3, 744.08, 0.005 * 744.08);
}

TEST(Physics, ScenarioNames) {
  for (auto k : {ScenarioKind::single_soliton, ScenarioKind::two_soliton, ScenarioKind::undular_bore}) {
    EXPECT_EQ(parse_scenario_kind(to_string(k)), k);
  }
  EXPECT_ANY_THROW(parse_scenario_kind("kdv"));
}

TEST(Physics, InvalidScenarioIsRejected) {
  ScenarioConfig sc = ScenarioConfig::single_soliton();
  sc.x_max = sc.x_min;
  EXPECT_ANY_THROW(sc.validate());
}
