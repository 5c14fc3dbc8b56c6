#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "rlw/error.hpp"
#include "rlw/network.hpp"

using namespace rlw;

TEST(Network, ParameterCountOfEightByFifty) {
  const MlpSpec spec = MlpSpec::hidden(8, 50);
  const std::size_t expected = 2 * 50 + 50 + 7 * (50 * 50 + 50) + 50 * 1 + 1;
  EXPECT_EQ(expected, 18051u);
  EXPECT_EQ(network_param_count(spec), expected);
  EXPECT_EQ(param_count(spec, true), expected + 3);
  EXPECT_EQ(init_params(spec, 1, true).size(), expected + 3);
}

TEST(Network, KaimingBoundsAndZeroBiases) {
  const MlpSpec spec = MlpSpec::hidden(3, 40);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto p = init_params(spec, seed, true);
    const double first = std::sqrt(3.0);
    for (std::size_t i = 0; i < 2 * 40; ++i) EXPECT_LE(std::abs(p[i]), first);
    for (std::size_t i = 80; i < 120; ++i) EXPECT_EQ(p[i], 0.0);
    const double hidden = std::sqrt(6.0 / 40.0);
    for (std::size_t i = 120; i < 120 + 1600; ++i) EXPECT_LE(std::abs(p[i]), hidden);
    for (std::size_t i = p.size() - 3; i < p.size(); ++i) EXPECT_EQ(p[i], 0.0);
  }
}

TEST(Network, SeedDeterminism) {
  const MlpSpec spec = MlpSpec::hidden(2, 16);
  EXPECT_EQ(init_params(spec, 7, false), init_params(spec, 7, false));
  EXPECT_NE(init_params(spec, 7, false), init_params(spec, 8, false));
}

TEST(Network, ZeroParametersGiveZeroField) {
  const MlpSpec spec = MlpSpec::hidden(3, 8);
  const std::vector<double> p(network_param_count(spec), 0.0);
  const Jet u = forward(p, spec, jet_seed(SeedKind::x_input, 1.3), jet_seed(SeedKind::t_input, 0.2));
  EXPECT_EQ(u, Jet{});
}

TEST(Network, SingleAffineLayer) {
  MlpSpec spec;
  spec.layer_widths = {2, 1};
  const std::vector<double> p{0.7, -1.9, 0.25};
  const Jet u = forward(p, spec, jet_seed(SeedKind::x_input, 2.0), jet_seed(SeedKind::t_input, 3.0));
  EXPECT_DOUBLE_EQ(u.v, 0.7 * 2.0 - 1.9 * 3.0 + 0.25);
  EXPECT_DOUBLE_EQ(u.dx, 0.7);
  EXPECT_DOUBLE_EQ(u.dt, -1.9);
  EXPECT_EQ(u.dxt, 0.0);
  EXPECT_EQ(u.dxx, 0.0);
  EXPECT_EQ(u.dxxt, 0.0);
}

TEST(Network, JetsMatchDifferencesOnEightByFifty) {
  const MlpSpec spec = MlpSpec::hidden(8, 50, InputScaling::for_box(-40, 60, 0, 20));
  const auto p = init_params(spec, 5, false);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> X(-40, 60), T(0, 20);
  for (int i = 0; i < 5; ++i) {
    const double x = X(rng), t = T(rng);
    const Jet u = forward(p, spec, jet_seed(SeedKind::x_input, x), jet_seed(SeedKind::t_input, t));
    const auto fd = oracle::fd_partials(
        [&](double a, double b) { return forward_value(p, spec, a, b); }, x, t, 0.05);
    EXPECT_NEAR(u.dx, fd.dx, 1e-6 * (1 + std::abs(u.dx)));
    EXPECT_NEAR(u.dt, fd.dt, 1e-6 * (1 + std::abs(u.dt)));
    EXPECT_NEAR(u.dxx, fd.dxx, 1e-6 * (1 + std::abs(u.dxx)));
    EXPECT_NEAR(u.dxt, fd.dxt, 1e-6 * (1 + std::abs(u.dxt)));
    EXPECT_NEAR(u.dxxt, fd.dxxt, 1e-4 * (1 + std::abs(u.dxxt)));
  }
}

TEST(Network, ValueOnlyForwardIsBitIdentical) {
  const MlpSpec spec = MlpSpec::hidden(4, 24, InputScaling::for_box(0, 120, 0, 30));
  const auto p = init_params(spec, 3, false);
  for (double x : {0.0, 17.5, 119.0}) {
    for (double t : {0.0, 12.25, 30.0}) {
      const Jet u = forward(p, spec, jet_seed(SeedKind::x_input, x), jet_seed(SeedKind::t_input, t));
      EXPECT_EQ(u.v, forward_value(p, spec, x, t));
    }
  }
}

TEST(Network, BatchAgreesWithPointwiseJets) {
  const MlpSpec spec = MlpSpec::hidden(3, 20, InputScaling::for_box(-40, 60, 0, 20));
  const auto p = init_params(spec, 8, false);
  const std::vector<double> xs{-39.0, -3.5, 0.0, 12.0, 59.5};
  const std::vector<double> ts{0.0, 4.0, 10.0, 19.0, 20.0};
  const Matrix m = evaluate_batch(p, spec, xs, ts, JetDepth::full);
  const Index n = static_cast<Index>(xs.size());
  for (Index i = 0; i < n; ++i) {
    const Jet u = forward(p, spec, jet_seed(SeedKind::x_input, xs[i]), jet_seed(SeedKind::t_input, ts[i]));
    const double tol = 1e-12;
    EXPECT_NEAR(m(0, jet_block::v * n + i), u.v, tol);
    EXPECT_NEAR(m(0, jet_block::x * n + i), u.dx, tol);
    EXPECT_NEAR(m(0, jet_block::t * n + i), u.dt, tol);
    EXPECT_NEAR(m(0, jet_block::xt * n + i), u.dxt, tol);
    EXPECT_NEAR(m(0, jet_block::xx * n + i), u.dxx, tol);
    EXPECT_NEAR(m(0, jet_block::xxt * n + i), u.dxxt, tol);
  }
}

TEST(Network, TapedBatchGradientMatchesDifferences) {
  const MlpSpec spec = MlpSpec::hidden(2, 8);
  const auto p = init_params(spec, 4, false);
  const std::vector<double> xs{0.3, -0.8, 1.1}, ts{0.5, 0.1, -0.4};
  const auto loss = [&](std::span<const double> q, Tape& tape) {
    const Var u = forward_batch(tape, q, spec, xs, ts, JetDepth::full);
    return tape.scale(tape.sum_squares(u), 0.5);
  };
  Tape tape;
  const auto g = tape.backward(loss(p, tape));
  const auto fd = oracle::fd_gradient(
      [&](std::span<const double> q) {
        Tape t;
        return t.scalar(loss(q, t));
      },
      p);
  EXPECT_LT(oracle::max_rel_diff(g, fd), 1e-5);
}

TEST(Network, InvalidSpecIsRejected) {
  MlpSpec spec;
  spec.layer_widths = {3, 4, 1};
  EXPECT_THROW(spec.validate(), UsageError);
}
