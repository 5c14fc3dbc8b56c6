#include "rlw/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "rlw/error.hpp"

namespace rlw {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Trial {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  std::vector<double> gradient;
};

class LineSearch {
 public:
  LineSearch(const Objective& objective, std::span<const double> x0, std::span<const double> dir,
             double f0, double slope0, const LbfgsState& state)
      : objective_(objective), x0_(x0), dir_(dir), f0_(f0), slope0_(slope0), state_(state),
        point_(x0.size()) {}

  Trial evaluate(double alpha) {
    for (std::size_t i = 0; i < point_.size(); ++i) point_[i] = x0_[i] + alpha * dir_[i];
    ++evaluations_;
    Trial t;
    t.alpha = alpha;
    ObjectiveValue ov = objective_(point_);
    if (!std::isfinite(ov.value) || ov.gradient.size() != point_.size()) {
      t.value = std::numeric_limits<double>::infinity();
      t.slope = std::numeric_limits<double>::quiet_NaN();
      return t;
    }
    t.value = ov.value;
    t.gradient = std::move(ov.gradient);
    t.slope = dot(t.gradient, dir_);
    if (!std::isfinite(t.slope)) t.value = std::numeric_limits<double>::infinity();
    if (sufficient_decrease(t) && (!best_ || t.value < best_->value)) best_ = t;
    return t;
  }

  bool sufficient_decrease(const Trial& t) const {
    return std::isfinite(t.value) && t.value <= f0_ + state_.c1 * t.alpha * slope0_;
  }

  bool curvature(const Trial& t) const { return std::abs(t.slope) <= -state_.c2 * slope0_; }

  bool budget_left() const { return evaluations_ < state_.max_line_search_steps; }

  // Strong-Wolfe search (bracketing phase followed by zoom).
  std::optional<Trial> run(double alpha0) {
    Trial prev{0.0, f0_, slope0_, {}};
    double alpha = alpha0;
    bool first = true;
    while (budget_left()) {
      Trial cur = evaluate(alpha);
      if (!sufficient_decrease(cur) || (!first && cur.value >= prev.value)) {
        return zoom(prev, cur);
      }
      if (curvature(cur)) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      alpha *= 2.0;
      first = false;
    }
    return best_;
  }

  int evaluations() const { return evaluations_; }

 private:
  std::optional<Trial> zoom(Trial lo, Trial hi) {
    while (budget_left()) {
      const double alpha = interpolate(lo, hi);
      Trial cur = evaluate(alpha);
      if (!sufficient_decrease(cur) || cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (curvature(cur)) return cur;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    return best_;
  }

  // Safeguarded cubic interpolation; bisection when the cubic is unusable.
  static double interpolate(const Trial& lo, const Trial& hi) {
    const double a = lo.alpha;
    const double b = hi.alpha;
    const double mid = 0.5 * (a + b);
    if (!std::isfinite(hi.value) || !std::isfinite(hi.slope) || !std::isfinite(lo.slope)) {
      return mid;
    }
    const double d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom == 0.0) return mid;
    double alpha = b - (b - a) * (hi.slope + d2 - d1) / denom;
    const double lower = std::min(a, b) + 0.1 * std::abs(b - a);
    const double upper = std::max(a, b) - 0.1 * std::abs(b - a);
    if (!std::isfinite(alpha) || alpha < lower || alpha > upper) alpha = mid;
    return alpha;
  }

  const Objective& objective_;
  std::span<const double> x0_;
  std::span<const double> dir_;
  double f0_;
  double slope0_;
  const LbfgsState& state_;
  std::vector<double> point_;
  std::optional<Trial> best_;
  int evaluations_ = 0;
};

std::vector<double> two_loop_direction(const LbfgsState& state, std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(state.history.size());
  for (std::size_t k = state.history.size(); k-- > 0;) {
    const CurvaturePair& p = state.history[k];
    alpha[k] = p.rho * dot(p.s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * p.y[i];
  }
  if (!state.history.empty()) {
    const CurvaturePair& last = state.history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& qi : q) qi *= gamma;
  }
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    const CurvaturePair& p = state.history[k];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * p.s[i];
  }
  for (double& qi : q) qi = -qi;
  return q;
}

}  // namespace

AdamState AdamState::for_size(std::size_t n, double lr) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.lr = lr;
  return s;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw UsageError("adam_step: parameter, gradient and moment lengths differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw OptimizerError("adam_step: non-finite gradient at index " + std::to_string(i));
    }
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

LbfgsStepResult lbfgs_step(LbfgsState& state, std::vector<double>& params,
                           const Objective& objective) {
  if (!state.has_cache || state.gradient.size() != params.size()) {
    ObjectiveValue ov = objective(params);
    ++state.function_evaluations;
    if (!std::isfinite(ov.value)) throw OptimizerError("lbfgs_step: non-finite objective at start");
    if (ov.gradient.size() != params.size()) {
      throw UsageError("lbfgs_step: gradient length differs from parameter count");
    }
    state.value = ov.value;
    state.gradient = std::move(ov.gradient);
    state.has_cache = true;
    state.history.clear();
  }

  LbfgsStepResult result;
  result.value = state.value;
  if (norm(state.gradient) < state.gradient_tolerance) {
    state.converged = true;
    result.converged = true;
    return result;
  }

  std::vector<double> dir = two_loop_direction(state, state.gradient);
  double slope = dot(dir, state.gradient);
  if (!(slope < 0.0)) {
    state.history.clear();
    dir = two_loop_direction(state, state.gradient);
    slope = dot(dir, state.gradient);
  }

  double alpha0 = 1.0;
  if (state.history.empty()) {
    double l1 = 0.0;
    for (double gi : state.gradient) l1 += std::abs(gi);
    alpha0 = std::min(1.0, 1.0 / l1);
  }
  alpha0 *= state.step_scale;

  LineSearch search(objective, params, dir, state.value, slope, state);
  std::optional<Trial> accepted = search.run(alpha0);
  state.function_evaluations += search.evaluations();

  if (!accepted) {
    state.warnings.push_back("line search failed at iteration " +
                             std::to_string(state.iterations) + "; taking a gradient step");
    state.history.clear();
    const double gnorm = norm(state.gradient);
    double step = 1e-3 * state.step_scale / gnorm;
    std::vector<double> trial(params.size());
    for (int k = 0; k < 30; ++k, step *= 0.5) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        trial[i] = params[i] - step * state.gradient[i];
      }
      ObjectiveValue ov = objective(trial);
      ++state.function_evaluations;
      if (std::isfinite(ov.value) && ov.value <= state.value &&
          ov.gradient.size() == params.size()) {
        accepted = Trial{step, ov.value, 0.0, std::move(ov.gradient)};
        dir = state.gradient;
        for (double& d : dir) d = -d;
        break;
      }
    }
    if (!accepted) {
      ++state.iterations;
      return result;
    }
  }

  CurvaturePair pair;
  pair.s.resize(params.size());
  pair.y.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    pair.s[i] = accepted->alpha * dir[i];
    params[i] += pair.s[i];
    pair.y[i] = accepted->gradient[i] - state.gradient[i];
  }
  const double sy = dot(pair.s, pair.y);
  if (sy > state.curvature_tolerance) {
    pair.rho = 1.0 / sy;
    state.history.push_back(std::move(pair));
    if (state.history.size() > state.history_capacity) state.history.pop_front();
  }
  state.value = accepted->value;
  state.gradient = std::move(accepted->gradient);
  ++state.iterations;

  result.accepted = true;
  result.value = state.value;
  result.step_length = accepted->alpha;
  if (norm(state.gradient) < state.gradient_tolerance) {
    state.converged = true;
    result.converged = true;
  }
  return result;
}

}  // namespace rlw
