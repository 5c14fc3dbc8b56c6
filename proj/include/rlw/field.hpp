#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "rlw/network.hpp"

namespace rlw {

struct Region {
  double x_min = 0.0;
  double x_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  /// Closed-box membership with a few ulps of slack on each edge.
  bool contains(double x, double t) const;
  friend bool operator==(const Region&, const Region&) = default;
};

/// One trained network valid on [t_begin, t_end].
struct NetworkWindow {
  double t_begin = 0.0;
  double t_end = 0.0;
  MlpSpec spec;
  ParamVector params;
};

/// Profiles stored at increasing times on a uniform x grid.
struct GridSamples {
  double x_min = 0.0;
  double dx = 0.0;
  std::size_t nx = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[j][i] = u(x_min + i*dx, times[j])

  double x_max() const { return x_min + dx * static_cast<double>(nx - 1); }
  void validate() const;
};

struct Profile {
  std::vector<double> u;
  std::vector<double> u_x;
};

/// u(x, t) over a space-time region: a single network, an ordered list of
/// causal windows, or a sampled grid with bilinear interpolation.
class SolutionField {
 public:
  static SolutionField from_network(NetworkWindow window, double x_min, double x_max);
  /// Piecewise field: t in [t_0, t_1] uses window 0, t in (t_{i-1}, t_i]
  /// uses window i-1. Windows must be ordered and contiguous.
  static SolutionField stitch(std::vector<NetworkWindow> windows, double x_min, double x_max);
  static SolutionField from_grid(GridSamples grid);

  const Region& region() const { return region_; }
  bool is_grid() const { return std::holds_alternative<GridSamples>(backing_); }
  std::size_t window_count() const;
  const std::vector<NetworkWindow>& windows() const;
  const GridSamples& grid() const;

  /// Window that answers queries at time t. Throws RegionError outside.
  std::size_t window_index(double t) const;

  /// Throws RegionError outside region().
  double value(double x, double t) const;
  std::vector<double> values(std::span<const double> xs, double t) const;
  /// u and u_x at time t. Grid fields differentiate the stored profiles
  /// with second-order differences before interpolating.
  Profile profile(double t, std::span<const double> xs) const;

 private:
  explicit SolutionField(Region region) : region_(region) {}
  void check(double x, double t) const;
  Profile profile_impl(double t, std::span<const double> xs, bool with_dx) const;

  Region region_;
  std::variant<std::vector<NetworkWindow>, GridSamples> backing_;
};

/// Largest |u_left(x, t_i) - u_right(x, t_i)| over xs and every interior
/// window boundary t_i. Zero for single-window and grid fields.
double max_window_jump(const SolutionField& field, std::span<const double> xs);

/// n points from a to b inclusive.
std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace rlw
