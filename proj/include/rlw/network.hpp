#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlw/jet.hpp"
#include "rlw/tape.hpp"

namespace rlw {

/// Fixed affine map applied to (x, t) before the first layer:
/// x_hat = x_scale * (x - x_center), likewise for t.
struct InputScaling {
  double x_center = 0.0;
  double x_scale = 1.0;
  double t_center = 0.0;
  double t_scale = 1.0;

  /// Maps [x_min, x_max] x [t_min, t_max] onto [-1, 1]^2.
  static InputScaling for_box(double x_min, double x_max, double t_min, double t_max);
  friend bool operator==(const InputScaling&, const InputScaling&) = default;
};

/// Fully connected SiLU network. Widths run from the 2 inputs to the
/// scalar output; SiLU on hidden layers, identity on the output layer.
struct MlpSpec {
  std::vector<int> layer_widths;
  InputScaling scaling;

  /// `hidden_layers` hidden layers of `width` neurons each.
  static MlpSpec hidden(int hidden_layers, int width, InputScaling scaling = {});
  void validate() const;
  std::size_t layer_count() const { return layer_widths.size() - 1; }
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Flat trainable parameters. Per layer: weights (out x in, row-major),
/// then biases. Optionally followed by log-weights lambda_pde, lambda_ic,
/// lambda_bc.
using ParamVector = std::vector<double>;

std::size_t network_param_count(const MlpSpec& spec);
std::size_t param_count(const MlpSpec& spec, bool adaptive_weights);
/// Index of lambda_pde in a vector that carries adaptive weights.
inline std::size_t lambda_offset(const MlpSpec& spec) { return network_param_count(spec); }

/// Kaiming-uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)], zero
/// biases, zero lambdas.
ParamVector init_params(const MlpSpec& spec, std::uint64_t seed, bool attach_adaptive);

/// Single point, forward-mode jets. Pure; not recorded on any tape.
Jet forward(std::span<const double> params, const MlpSpec& spec, const Jet& x, const Jet& t);
/// Value-only twin of forward(); identical bits to forward(...).v.
double forward_value(std::span<const double> params, const MlpSpec& spec, double x, double t);

/// Batched jet forward recorded on `tape`. Returns a 1 x (C*n) node whose
/// column blocks are the jet components (see JetDepth).
Var forward_batch(Tape& tape, std::span<const double> params, const MlpSpec& spec,
                  std::span<const double> xs, std::span<const double> ts, JetDepth depth);
/// Untaped version of forward_batch with the same kernels.
Matrix evaluate_batch(std::span<const double> params, const MlpSpec& spec,
                      std::span<const double> xs, std::span<const double> ts, JetDepth depth);

}  // namespace rlw
