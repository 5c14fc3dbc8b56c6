#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rlw {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_size(std::size_t n, double lr = 1e-3);
};

/// One bias-corrected Adam update in place.
/// Throws OptimizerError naming the first non-finite gradient entry.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<ObjectiveValue(std::span<const double>)>;

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho = 0.0;  // 1 / (s.y)
};

struct LbfgsState {
  std::size_t history_capacity = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_steps = 25;
  /// Multiplies the initial trial step of every line search.
  double step_scale = 1.0;
  double gradient_tolerance = 1e-9;
  double curvature_tolerance = 1e-10;

  std::deque<CurvaturePair> history;
  bool has_cache = false;
  double value = 0.0;
  std::vector<double> gradient;
  bool converged = false;
  long iterations = 0;
  long function_evaluations = 0;
  std::vector<std::string> warnings;
};

struct LbfgsStepResult {
  bool accepted = false;  // parameters moved to a new point with f' <= f
  bool converged = false;
  double value = 0.0;     // objective at the returned parameters
  double step_length = 0.0;
};

/// One outer L-BFGS iteration: two-loop direction, strong-Wolfe line
/// search, history update. Falls back to a short steepest-descent step
/// (and records a warning) when the line search fails.
LbfgsStepResult lbfgs_step(LbfgsState& state, std::vector<double>& params,
                           const Objective& objective);

}  // namespace rlw
