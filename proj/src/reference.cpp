#include "rlw/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlw/error.hpp"

namespace rlw {
namespace {

// Number of intervals of width h in length, or -1 when h does not divide it.
long whole_intervals(double length, double h) {
  const double q = length / h;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q)) return -1;
  return static_cast<long>(r);
}

class Stepper {
 public:
  Stepper(const ScenarioConfig& sc, double dx, std::size_t n)
      : sc_(sc), n_(n), a_(sc.rlw.mu / (dx * dx)), inv2dx_(1.0 / (2.0 * dx)),
        sub_(n), diag_(n), super_(n), rhs_(n), lin_(n) {}

  // Solves for u_new from
  //   (I - mu D2)(u_new - u_old)/h + D0[lin * (u_new + u_old)/2] = 0,
  // lin = 1 + (eps/2) u_mid, with u_new fixed at the two ends.
  void step(const std::vector<double>& u_old, const std::vector<double>& u_mid, double h,
            double left, double right, std::vector<double>& u_new) {
    const double eps = sc_.rlw.epsilon;
    for (std::size_t i = 0; i < n_; ++i) lin_[i] = 1.0 + 0.5 * eps * u_mid[i];
    const std::size_t m = n_ - 2;  // interior unknowns
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      diag_[k] = (1.0 + 2.0 * a_) / h;
      super_[k] = -a_ / h + 0.5 * lin_[i + 1] * inv2dx_;
      sub_[k] = -a_ / h - 0.5 * lin_[i - 1] * inv2dx_;
      rhs_[k] = ((1.0 + 2.0 * a_) * u_old[i] - a_ * (u_old[i + 1] + u_old[i - 1])) / h -
                0.5 * (lin_[i + 1] * u_old[i + 1] - lin_[i - 1] * u_old[i - 1]) * inv2dx_;
    }
    rhs_[0] -= sub_[0] * left;
    rhs_[m - 1] -= super_[m - 1] * right;
    // Thomas elimination.
    for (std::size_t k = 1; k < m; ++k) {
      const double w = sub_[k] / diag_[k - 1];
      diag_[k] -= w * super_[k - 1];
      rhs_[k] -= w * rhs_[k - 1];
    }
    u_new.resize(n_);
    u_new[0] = left;
    u_new[n_ - 1] = right;
    u_new[m] = rhs_[m - 1] / diag_[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
      u_new[k + 1] = (rhs_[k] - super_[k] * u_new[k + 2]) / diag_[k];
    }
  }

 private:
  const ScenarioConfig& sc_;
  std::size_t n_;
  double a_;
  double inv2dx_;
  std::vector<double> sub_, diag_, super_, rhs_, lin_;
};

double max_abs(const std::vector<double>& u) {
  double m = 0.0;
  for (double v : u) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

FdConfig FdConfig::defaults(const ScenarioConfig& scenario) {
  FdConfig c;
  c.scenario = scenario;
  switch (scenario.kind) {
    case ScenarioKind::single_soliton:
      c.dx = 0.1;
      c.dt = 0.01;
      break;
    case ScenarioKind::two_soliton:
      c.dx = 0.05;
      c.dt = 0.005;
      break;
    case ScenarioKind::undular_bore:
      c.dx = 0.15;
      c.dt = 0.05;
      break;
  }
  c.sample_times = linspace(0.0, scenario.t_final, 101);
  return c;
}

std::size_t FdConfig::cell_count() const {
  const long n = whole_intervals(scenario.x_max - scenario.x_min, dx);
  if (n < 2) throw ConfigError("fd: dx must divide the domain length into at least 2 cells");
  return static_cast<std::size_t>(n);
}

std::size_t FdConfig::step_count() const {
  const long n = whole_intervals(scenario.t_final, dt);
  if (n < 1) throw ConfigError("fd: dt must divide t_final");
  return static_cast<std::size_t>(n);
}

void FdConfig::validate() const {
  scenario.validate();
  if (!(dx > 0.0) || !(dt > 0.0)) throw ConfigError("fd: dx and dt must be positive");
  cell_count();
  step_count();
  if (sample_times.empty()) throw ConfigError("fd: no sample times");
  for (std::size_t j = 0; j < sample_times.size(); ++j) {
    const double t = sample_times[j];
    if (!(t >= 0.0) || t > scenario.t_final * (1.0 + 1e-12)) {
      throw ConfigError("fd: sample time " + std::to_string(t) + " outside [0, t_final]");
    }
    if (j > 0 && !(t > sample_times[j - 1])) throw ConfigError("fd: sample times must increase");
    const double q = t / dt;
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) {
      throw ConfigError("fd: sample time " + std::to_string(t) + " is not a multiple of dt");
    }
  }
}

SolutionField fd_solve(const FdConfig& cfg) {
  cfg.validate();
  const ScenarioConfig& sc = cfg.scenario;
  const std::size_t n = cfg.cell_count() + 1;
  const std::size_t steps = cfg.step_count();
  const std::vector<double> xs = linspace(sc.x_min, sc.x_max, n);

  std::vector<double> u0(n);
  for (std::size_t i = 0; i < n; ++i) u0[i] = initial_condition(xs[i], sc);
  // The grid ends must carry the Dirichlet data, including at t = 0.
  u0.front() = boundary_value(sc.x_min, 0.0, sc);
  u0.back() = boundary_value(sc.x_max, 0.0, sc);
  const double limit = 10.0 * std::max(max_abs(u0), 1e-300);

  GridSamples out;
  out.x_min = sc.x_min;
  out.dx = (sc.x_max - sc.x_min) / static_cast<double>(n - 1);
  out.nx = n;
  std::vector<std::size_t> sample_steps;
  for (double t : cfg.sample_times) {
    sample_steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
  }
  std::size_t next_sample = 0;
  auto record = [&](std::size_t step, const std::vector<double>& u) {
    while (next_sample < sample_steps.size() && sample_steps[next_sample] == step) {
      out.times.push_back(cfg.sample_times[next_sample]);
      out.values.push_back(u);
      ++next_sample;
    }
  };
  auto guard = [&](std::size_t step, const std::vector<double>& u) {
    const double m = max_abs(u);
    if (!(m <= limit)) {
      throw InstabilityError("fd: max|u| = " + std::to_string(m) + " exceeds 10x the initial max at step " +
                                 std::to_string(step),
                             step);
    }
  };

  record(0, u0);
  Stepper stepper(sc, out.dx, n);
  const auto time_at = [&](std::size_t k) { return cfg.dt * static_cast<double>(k); };
  const auto bl = [&](std::size_t k) { return boundary_value(sc.x_min, time_at(k), sc); };
  const auto br = [&](std::size_t k) { return boundary_value(sc.x_max, time_at(k), sc); };

  std::vector<double> predictor;
  std::vector<double> mid(n);
  std::vector<double> prev = u0;
  std::vector<double> cur;
  stepper.step(u0, u0, cfg.dt, bl(1), br(1), predictor);
  for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u0[i] + predictor[i]);
  stepper.step(u0, mid, cfg.dt, bl(1), br(1), cur);
  guard(1, cur);
  record(1, cur);

  std::vector<double> next;
  for (std::size_t k = 2; k <= steps; ++k) {
    stepper.step(prev, cur, 2.0 * cfg.dt, bl(k), br(k), next);
    guard(k, next);
    std::swap(prev, cur);
    std::swap(cur, next);
    record(k, cur);
  }
  return SolutionField::from_grid(std::move(out));
}

}  // namespace rlw
