#include <gtest/gtest.h>

#include <cmath>

#include "rlw/error.hpp"
#include "rlw/field.hpp"
#include "rlw/metrics.hpp"

using namespace rlw;

TEST(Metrics, ErrorNormsOfIdenticalArrays) {
  const std::vector<double> r{1.0, -2.0, 0.5};
  const auto n = error_norms(r, r);
  EXPECT_EQ(n.l2_rel, 0.0);
  EXPECT_EQ(n.linf_rel, 0.0);
}

TEST(Metrics, ErrorNormsAreHomogeneous) {
  const std::vector<double> r{1.0, -2.0, 0.5, 4.0};
  for (double a : {0.1, -0.3, 2.0}) {
    std::vector<double> p;
    for (double v : r) p.push_back((1 + a) * v);
    const auto n = error_norms(p, r);
    EXPECT_NEAR(n.l2_rel, std::abs(a), 1e-15);
    EXPECT_NEAR(n.linf_rel, std::abs(a), 1e-15);
  }
}

TEST(Metrics, ErrorNormsRejectBadInput) {
  const std::vector<double> z(3, 0.0), one(3, 1.0), two(2, 1.0);
  EXPECT_THROW(error_norms(one, z), UsageError);
  EXPECT_THROW(error_norms(one, two), UsageError);
}

TEST(Metrics, ConservationPercentages) {
  const ConservedTriple a{2.0, 1.0, -4.0};
  const auto same = conservation_error_pct(a, a);
  EXPECT_EQ(same, (std::array<double, 3>{0, 0, 0}));
  const auto pct = conservation_error_pct(ConservedTriple{2.02, 1.0, -4.0}, a);
  EXPECT_NEAR(pct[0], 1.0, 1e-12);
  EXPECT_THROW(conservation_error_pct(a, ConservedTriple{0.0, 1.0, 1.0}), UsageError);
}

TEST(Metrics, SolitonPeak) {
  const ScenarioConfig sc = ScenarioConfig::single_soliton();
  const auto xs = linspace(-40, 60, 4001);
  std::vector<double> u;
  for (double x : xs) u.push_back(exact_single_soliton(x, 0.0, sc));
  const auto peaks = find_peaks(u, xs, kSolitonPeakThreshold);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_NEAR(peaks[0].position, 0.0, xs[1] - xs[0]);
  EXPECT_NEAR(peaks[0].amplitude, 0.3, 1e-4);
}

TEST(Metrics, ParabolaVertexIsRecovered) {
  const auto xs = linspace(0, 10, 101);
  std::vector<double> u;
  for (double x : xs) u.push_back(2.0 - 0.7 * (x - 4.3217) * (x - 4.3217));
  const auto peaks = find_peaks(u, xs, 0.0);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_NEAR(peaks[0].position, 4.3217, 1e-12);
  EXPECT_NEAR(peaks[0].amplitude, 2.0, 1e-12);
}

TEST(Metrics, PeaksAreLeadingFirstAndThresholded) {
  const auto xs = linspace(0, 20, 401);
  std::vector<double> u;
  for (double x : xs) {
    u.push_back(0.5 * std::exp(-(x - 5) * (x - 5)) + 0.2 * std::exp(-(x - 15) * (x - 15)) +
                0.005 * std::exp(-(x - 10) * (x - 10)));
  }
  const auto peaks = find_peaks(u, xs, 0.01);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_GT(peaks[0].position, peaks[1].position);
  EXPECT_NEAR(peaks[0].position, 15.0, 0.05);
  EXPECT_EQ(find_peaks(u, xs, 0.001).size(), 3u);
}

TEST(Metrics, PeaksTranslateWithTheGrid) {
  const auto xs = linspace(0, 30, 601);
  const double h = xs[1] - xs[0];
  const auto bump = [](double x) { return 1.0 / std::cosh(x - 11.37) / std::cosh(x - 11.37); };
  std::vector<double> u, shifted;
  for (double x : xs) {
    u.push_back(bump(x));
    shifted.push_back(bump(x - 37 * h));
  }
  const auto a = find_peaks(u, xs, 0.1), b = find_peaks(shifted, xs, 0.1);
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(b[0].position - a[0].position, 37 * h, 1e-9);
  EXPECT_NEAR(b[0].amplitude, a[0].amplitude, 1e-12);
}

TEST(Metrics, FlatOrEdgeMaximaAreNotPeaks) {
  const auto xs = linspace(0, 1, 5);
  EXPECT_TRUE(find_peaks(std::vector<double>{1, 1, 1, 1, 1}, xs, 0.0).empty());
  EXPECT_TRUE(find_peaks(std::vector<double>{5, 4, 3, 2, 1}, xs, 0.0).empty());
}

TEST(Metrics, DefaultThresholds) {
  EXPECT_EQ(default_peak_threshold(ScenarioKind::undular_bore), 0.01);
  EXPECT_EQ(default_peak_threshold(ScenarioKind::two_soliton), 0.1);
  EXPECT_EQ(default_peak_threshold(ScenarioKind::single_soliton), 0.1);
}
