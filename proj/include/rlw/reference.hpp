#pragma once

#include <vector>

#include "rlw/field.hpp"
#include "rlw/physics.hpp"

namespace rlw {

/// Finite-difference oracle settings. Profiles are kept only at
/// `sample_times`, each of which must fall on a time step.
struct FdConfig {
  ScenarioConfig scenario;
  double dx = 0.1;
  double dt = 0.01;
  std::vector<double> sample_times;

  /// Per-scenario resolutions (soliton 0.1/0.01, two-soliton 0.05/0.005,
  /// bore 0.15/0.05) and 101 uniform sample times over [0, t_final].
  static FdConfig defaults(const ScenarioConfig& scenario);

  std::size_t cell_count() const;
  std::size_t step_count() const;
  /// Throws ConfigError when dx or dt does not divide its interval, or a
  /// sample time is off the time grid.
  void validate() const;
};

/// Three-level linearized scheme
///   (I - mu D2)(u^{n+1} - u^{n-1}) / (2 dt) + D0[ub + (eps/2) u^n ub] = 0,
///   ub = (u^{n+1} + u^{n-1}) / 2,
/// with Dirichlet ends, started by a predictor-corrector Crank-Nicolson step.
/// Throws InstabilityError once max|u| exceeds ten times its initial value.
SolutionField fd_solve(const FdConfig& cfg);

}  // namespace rlw
