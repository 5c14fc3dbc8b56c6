#pragma once

#include <array>
#include <span>
#include <vector>

#include "rlw/physics.hpp"

namespace rlw {

struct ErrorNorms {
  double l2_rel = 0.0;
  double linf_rel = 0.0;
};

/// ||pred - ref||_2 / ||ref||_2 and max|pred - ref| / max|ref|.
ErrorNorms error_norms(std::span<const double> pred, std::span<const double> ref);

/// |I_k(t) - I_k(0)| / |I_k(0)| * 100 for k = 1, 2, 3.
std::array<double, 3> conservation_error_pct(const ConservedTriple& now,
                                             const ConservedTriple& initial);

struct Peak {
  double position = 0.0;
  double amplitude = 0.0;
};

/// Leading wave (largest x) first.
using PeakList = std::vector<Peak>;

inline constexpr double kBorePeakThreshold = 0.01;
inline constexpr double kSolitonPeakThreshold = 0.1;

/// Strict interior local maxima above min_amplitude, each refined to the
/// vertex of the parabola through its three samples.
PeakList find_peaks(std::span<const double> profile, std::span<const double> grid,
                    double min_amplitude);

double default_peak_threshold(ScenarioKind kind);

}  // namespace rlw
