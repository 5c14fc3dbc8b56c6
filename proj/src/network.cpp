#include "rlw/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rlw/error.hpp"

namespace rlw {
namespace {

Matrix input_block(const InputScaling& s, std::span<const double> xs, std::span<const double> ts,
                   JetDepth depth) {
  if (xs.size() != ts.size()) throw UsageError("forward_batch: x and t counts differ");
  const auto n = static_cast<Index>(xs.size());
  Matrix a = Matrix::Zero(2, component_count(depth) * n);
  for (Index j = 0; j < n; ++j) {
    a(0, j) = s.x_scale * (xs[static_cast<std::size_t>(j)] + (-s.x_center));
    a(1, j) = s.t_scale * (ts[static_cast<std::size_t>(j)] + (-s.t_center));
  }
  if (depth != JetDepth::value) a.block(0, n, 1, n).setConstant(s.x_scale);
  if (depth == JetDepth::full) a.block(1, 2 * n, 1, n).setConstant(s.t_scale);
  return a;
}

Matrix weight_block(std::span<const double> params, std::size_t offset, int rows, int cols) {
  Matrix w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      w(r, c) = params[offset + static_cast<std::size_t>(r * cols + c)];
    }
  }
  return w;
}

void check_length(std::span<const double> params, const MlpSpec& spec) {
  spec.validate();
  if (params.size() < network_param_count(spec)) {
    throw UsageError("parameter vector shorter than the network requires");
  }
}

PropagationError layer_error(std::size_t layer, const std::exception& e) {
  return PropagationError("layer " + std::to_string(layer) + ": " + e.what());
}

}  // namespace

InputScaling InputScaling::for_box(double x_min, double x_max, double t_min, double t_max) {
  if (!(x_max > x_min) || !(t_max > t_min)) throw UsageError("input scaling box is empty");
  return {0.5 * (x_min + x_max), 2.0 / (x_max - x_min), 0.5 * (t_min + t_max),
          2.0 / (t_max - t_min)};
}

MlpSpec MlpSpec::hidden(int hidden_layers, int width, InputScaling scaling) {
  MlpSpec spec;
  spec.layer_widths.push_back(2);
  for (int i = 0; i < hidden_layers; ++i) spec.layer_widths.push_back(width);
  spec.layer_widths.push_back(1);
  spec.scaling = scaling;
  spec.validate();
  return spec;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw UsageError("network needs at least an input and output width");
  if (layer_widths.front() != 2) throw UsageError("first layer width must be 2 (x, t)");
  if (layer_widths.back() != 1) throw UsageError("last layer width must be 1");
  for (int w : layer_widths) {
    if (w <= 0) throw UsageError("layer widths must be positive");
  }
  if (!(scaling.x_scale > 0.0) || !(scaling.t_scale > 0.0) || !std::isfinite(scaling.x_center) ||
      !std::isfinite(scaling.t_center)) {
    throw UsageError("input scaling must be finite with positive scales");
  }
}

std::size_t network_param_count(const MlpSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const auto in = static_cast<std::size_t>(spec.layer_widths[l]);
    const auto out = static_cast<std::size_t>(spec.layer_widths[l + 1]);
    n += in * out + out;
  }
  return n;
}

std::size_t param_count(const MlpSpec& spec, bool adaptive_weights) {
  return network_param_count(spec) + (adaptive_weights ? 3 : 0);
}

ParamVector init_params(const MlpSpec& spec, std::uint64_t seed, bool attach_adaptive) {
  spec.validate();
  ParamVector p(param_count(spec, attach_adaptive), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int k = 0; k < in * out; ++k) p[offset++] = dist(rng);
    offset += static_cast<std::size_t>(out);  // biases stay zero
  }
  return p;
}

Jet forward(std::span<const double> params, const MlpSpec& spec, const Jet& x, const Jet& t) {
  check_length(params, spec);
  const InputScaling& s = spec.scaling;
  std::vector<Jet> a{s.x_scale * (x + jet_seed(SeedKind::constant, -s.x_center)),
                     s.t_scale * (t + jet_seed(SeedKind::constant, -s.t_center))};
  std::size_t offset = 0;
  const std::size_t layers = spec.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const std::size_t bias_offset = offset + static_cast<std::size_t>(in * out);
    std::vector<Jet> z(static_cast<std::size_t>(out));
    try {
      for (int r = 0; r < out; ++r) {
        Jet acc = jet_seed(SeedKind::constant, params[bias_offset + static_cast<std::size_t>(r)]);
        for (int c = 0; c < in; ++c) {
          acc = acc + params[offset + static_cast<std::size_t>(r * in + c)] *
                          a[static_cast<std::size_t>(c)];
        }
        z[static_cast<std::size_t>(r)] = l + 1 < layers ? silu(acc) : acc;
      }
    } catch (const PropagationError& e) {
      throw layer_error(l, e);
    }
    a = std::move(z);
    offset = bias_offset + static_cast<std::size_t>(out);
  }
  return a.front();
}

double forward_value(std::span<const double> params, const MlpSpec& spec, double x, double t) {
  check_length(params, spec);
  const InputScaling& s = spec.scaling;
  std::vector<double> a{s.x_scale * (x + (-s.x_center)), s.t_scale * (t + (-s.t_center))};
  std::size_t offset = 0;
  const std::size_t layers = spec.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const std::size_t bias_offset = offset + static_cast<std::size_t>(in * out);
    std::vector<double> z(static_cast<std::size_t>(out));
    for (int r = 0; r < out; ++r) {
      double acc = params[bias_offset + static_cast<std::size_t>(r)];
      for (int c = 0; c < in; ++c) {
        acc = acc + params[offset + static_cast<std::size_t>(r * in + c)] *
                        a[static_cast<std::size_t>(c)];
      }
      const double value = l + 1 < layers ? silu_derivatives(acc).s0 : acc;
      if (!std::isfinite(value)) {
        throw PropagationError("layer " + std::to_string(l) + ": non-finite activation");
      }
      z[static_cast<std::size_t>(r)] = value;
    }
    a = std::move(z);
    offset = bias_offset + static_cast<std::size_t>(out);
  }
  return a.front();
}

Var forward_batch(Tape& tape, std::span<const double> params, const MlpSpec& spec,
                  std::span<const double> xs, std::span<const double> ts, JetDepth depth) {
  check_length(params, spec);
  const auto n = static_cast<Index>(xs.size());
  Var a = tape.constant(input_block(spec.scaling, xs, ts, depth));
  std::size_t offset = 0;
  const std::size_t layers = spec.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    try {
      Var w = tape.param(params, offset, out, in);
      offset += static_cast<std::size_t>(in * out);
      Var b = tape.param(params, offset, out, 1);
      offset += static_cast<std::size_t>(out);
      Var z = tape.add_bias(tape.matmul(w, a), b, n);
      a = l + 1 < layers ? tape.jet_silu(z, depth, n) : z;
    } catch (const PropagationError& e) {
      throw layer_error(l, e);
    }
  }
  return a;
}

Matrix evaluate_batch(std::span<const double> params, const MlpSpec& spec,
                      std::span<const double> xs, std::span<const double> ts, JetDepth depth) {
  check_length(params, spec);
  const auto n = static_cast<Index>(xs.size());
  Matrix a = input_block(spec.scaling, xs, ts, depth);
  std::size_t offset = 0;
  const std::size_t layers = spec.layer_count();
  Matrix z;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const Matrix w = weight_block(params, offset, out, in);
    offset += static_cast<std::size_t>(in * out);
    const Matrix b = weight_block(params, offset, out, 1);
    offset += static_cast<std::size_t>(out);
    z.noalias() = w * a;
    z.leftCols(n).colwise() += b.col(0);
    if (l + 1 < layers) {
      detail::jet_silu_forward(z, depth, n, a);
    } else {
      a = z;
    }
    if (!a.allFinite()) {
      throw PropagationError("layer " + std::to_string(l) + ": non-finite activation");
    }
  }
  return a;
}

}  // namespace rlw
