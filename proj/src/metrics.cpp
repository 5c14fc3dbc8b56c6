#include "rlw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlw/error.hpp"

namespace rlw {

ErrorNorms error_norms(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw UsageError("error_norms: length mismatch");
  double diff2 = 0.0;
  double ref2 = 0.0;
  double diff_max = 0.0;
  double ref_max = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = pred[i] - ref[i];
    diff2 += d * d;
    ref2 += ref[i] * ref[i];
    diff_max = std::max(diff_max, std::abs(d));
    ref_max = std::max(ref_max, std::abs(ref[i]));
  }
  if (ref_max == 0.0) throw UsageError("error_norms: reference is identically zero");
  return {std::sqrt(diff2) / std::sqrt(ref2), diff_max / ref_max};
}

std::array<double, 3> conservation_error_pct(const ConservedTriple& now,
                                             const ConservedTriple& initial) {
  const std::array<double, 3> a{now.i1, now.i2, now.i3};
  const std::array<double, 3> b{initial.i1, initial.i2, initial.i3};
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (b[k] == 0.0) {
      throw UsageError("conservation_error_pct: initial I" + std::to_string(k + 1) + " is zero");
    }
    out[k] = std::abs(a[k] - b[k]) / std::abs(b[k]) * 100.0;
  }
  return out;
}

PeakList find_peaks(std::span<const double> profile, std::span<const double> grid,
                    double min_amplitude) {
  if (profile.size() != grid.size()) throw UsageError("find_peaks: length mismatch");
  if (min_amplitude < 0.0) throw UsageError("find_peaks: negative threshold");
  PeakList peaks;
  if (profile.size() < 3) return peaks;
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 1; i + 1 < profile.size(); ++i) {
    const double a = profile[i - 1];
    const double b = profile[i];
    const double c = profile[i + 1];
    if (!(b > a && b > c && b > min_amplitude)) continue;
    const double p = 0.5 * (a - c) / (a - 2.0 * b + c);
    peaks.push_back({grid[i] + p * h, b - 0.25 * (a - c) * p});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& l, const Peak& r) { return l.position > r.position; });
  return peaks;
}

double default_peak_threshold(ScenarioKind kind) {
  return kind == ScenarioKind::undular_bore ? kBorePeakThreshold : kSolitonPeakThreshold;
}

}  // namespace rlw
