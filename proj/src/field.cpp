#include "rlw/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlw/error.hpp"

namespace rlw {
namespace {

double slack(double a, double b) {
  return 8.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string describe(double x, double t, const Region& r) {
  std::ostringstream os;
  os.precision(17);
  os << "point (x=" << x << ", t=" << t << ") outside region [" << r.x_min << ", " << r.x_max
     << "] x [" << r.t_min << ", " << r.t_max << "]";
  return os.str();
}

// Nodal u_x: central differences inside, second-order one-sided at the ends.
std::vector<double> nodal_derivative(const std::vector<double>& u, double dx) {
  const std::size_t n = u.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (u[1] - u[0]) / dx;
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
  return d;
}

struct Bracket {
  std::size_t lo;
  std::size_t hi;
  double w;  // weight of hi
};

Bracket bracket_time(const std::vector<double>& times, double t) {
  if (times.size() == 1) return {0, 0, 0.0};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  hi = std::clamp<std::size_t>(hi, 1, times.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = std::clamp((t - times[lo]) / (times[hi] - times[lo]), 0.0, 1.0);
  return {lo, hi, w};
}

double interp_x(const std::vector<double>& row, const GridSamples& g, double x) {
  const double s = std::clamp((x - g.x_min) / g.dx, 0.0, static_cast<double>(g.nx - 1));
  const auto i = std::min(static_cast<std::size_t>(s), g.nx - 2);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * row[i] + w * row[i + 1];
}

}  // namespace

bool Region::contains(double x, double t) const {
  return x >= x_min - slack(x_min, x) && x <= x_max + slack(x_max, x) &&
         t >= t_min - slack(t_min, t) && t <= t_max + slack(t_max, t);
}

void GridSamples::validate() const {
  if (nx < 2 || !(dx > 0.0)) throw UsageError("grid needs at least 2 points and dx > 0");
  if (times.empty() || times.size() != values.size()) {
    throw UsageError("grid times and stored profiles differ in count");
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (values[j].size() != nx) throw UsageError("grid profile length differs from nx");
    if (j > 0 && !(times[j] > times[j - 1])) throw UsageError("grid times must increase");
  }
}

double max_window_jump(const SolutionField& field, std::span<const double> xs) {
  if (field.is_grid()) return 0.0;
  const auto& ws = field.windows();
  const Region& r = field.region();
  double jump = 0.0;
  for (std::size_t i = 1; i < ws.size(); ++i) {
    const double t = ws[i].t_begin;
    const auto left = SolutionField::from_network(ws[i - 1], r.x_min, r.x_max).values(xs, t);
    const auto right = SolutionField::from_network(ws[i], r.x_min, r.x_max).values(xs, t);
    for (std::size_t k = 0; k < xs.size(); ++k) jump = std::max(jump, std::abs(left[k] - right[k]));
  }
  return jump;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> v(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + h * static_cast<double>(i);
  v[n - 1] = b;
  return v;
}

SolutionField SolutionField::from_network(NetworkWindow window, double x_min, double x_max) {
  std::vector<NetworkWindow> one;
  one.push_back(std::move(window));
  return stitch(std::move(one), x_min, x_max);
}

SolutionField SolutionField::stitch(std::vector<NetworkWindow> windows, double x_min,
                                    double x_max) {
  if (windows.empty()) throw UsageError("stitch: no windows");
  if (!(x_max > x_min)) throw UsageError("stitch: empty x range");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    windows[i].spec.validate();
    if (!(windows[i].t_end > windows[i].t_begin)) throw UsageError("stitch: empty window");
    if (i > 0 && windows[i].t_begin != windows[i - 1].t_end) {
      throw UsageError("stitch: windows must be ordered and contiguous");
    }
  }
  SolutionField f(Region{x_min, x_max, windows.front().t_begin, windows.back().t_end});
  f.backing_ = std::move(windows);
  return f;
}

SolutionField SolutionField::from_grid(GridSamples grid) {
  grid.validate();
  SolutionField f(Region{grid.x_min, grid.x_max(), grid.times.front(), grid.times.back()});
  f.backing_ = std::move(grid);
  return f;
}

std::size_t SolutionField::window_count() const {
  if (is_grid()) return 0;
  return std::get<std::vector<NetworkWindow>>(backing_).size();
}

const std::vector<NetworkWindow>& SolutionField::windows() const {
  if (is_grid()) throw UsageError("grid-backed field has no windows");
  return std::get<std::vector<NetworkWindow>>(backing_);
}

const GridSamples& SolutionField::grid() const {
  if (!is_grid()) throw UsageError("network-backed field has no grid");
  return std::get<GridSamples>(backing_);
}

void SolutionField::check(double x, double t) const {
  if (!std::isfinite(x) || !std::isfinite(t) || !region_.contains(x, t)) {
    throw RegionError(describe(x, t, region_));
  }
}

std::size_t SolutionField::window_index(double t) const {
  check(region_.x_min, t);
  if (is_grid()) return 0;
  const auto& ws = std::get<std::vector<NetworkWindow>>(backing_);
  for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
    if (t <= ws[i].t_end) return i;
  }
  return ws.size() - 1;
}

double SolutionField::value(double x, double t) const {
  check(x, t);
  if (is_grid()) {
    const auto& g = std::get<GridSamples>(backing_);
    const Bracket b = bracket_time(g.times, t);
    const double lo = interp_x(g.values[b.lo], g, x);
    if (b.w == 0.0) return lo;
    return (1.0 - b.w) * lo + b.w * interp_x(g.values[b.hi], g, x);
  }
  const NetworkWindow& w = std::get<std::vector<NetworkWindow>>(backing_)[window_index(t)];
  return forward_value(w.params, w.spec, x, t);
}

std::vector<double> SolutionField::values(std::span<const double> xs, double t) const {
  return profile_impl(t, xs, false).u;
}

Profile SolutionField::profile(double t, std::span<const double> xs) const {
  return profile_impl(t, xs, true);
}

Profile SolutionField::profile_impl(double t, std::span<const double> xs, bool with_dx) const {
  for (double x : xs) check(x, t);
  Profile p;
  if (xs.empty()) return p;
  if (is_grid()) {
    const auto& g = std::get<GridSamples>(backing_);
    const Bracket b = bracket_time(g.times, t);
    p.u.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      p.u[i] = (1.0 - b.w) * interp_x(g.values[b.lo], g, xs[i]) +
               b.w * interp_x(g.values[b.hi], g, xs[i]);
    }
    if (with_dx) {
      const std::vector<double> d_lo = nodal_derivative(g.values[b.lo], g.dx);
      const std::vector<double> d_hi = nodal_derivative(g.values[b.hi], g.dx);
      p.u_x.resize(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        p.u_x[i] = (1.0 - b.w) * interp_x(d_lo, g, xs[i]) + b.w * interp_x(d_hi, g, xs[i]);
      }
    }
    return p;
  }
  const NetworkWindow& w = std::get<std::vector<NetworkWindow>>(backing_)[window_index(t)];
  const std::vector<double> ts(xs.size(), t);
  const JetDepth depth = with_dx ? JetDepth::first_x : JetDepth::value;
  const Matrix m = evaluate_batch(w.params, w.spec, xs, ts, depth);
  const auto n = static_cast<Index>(xs.size());
  p.u.resize(xs.size());
  for (Index i = 0; i < n; ++i) p.u[static_cast<std::size_t>(i)] = m(0, jet_block::v * n + i);
  if (with_dx) {
    p.u_x.resize(xs.size());
    for (Index i = 0; i < n; ++i) p.u_x[static_cast<std::size_t>(i)] = m(0, jet_block::x * n + i);
  }
  return p;
}

}  // namespace rlw
