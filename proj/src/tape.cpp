#include "rlw/tape.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "rlw/error.hpp"
#include "rlw/jet.hpp"

namespace rlw {
namespace {

std::atomic<std::uint64_t> next_serial{1};

void accumulate(Matrix& target, const Matrix& contribution) {
  if (target.size() == 0) {
    target = contribution;
  } else {
    target += contribution;
  }
}

}  // namespace

namespace detail {

Index derivative_count(JetDepth depth) {
  switch (depth) {
    case JetDepth::value:
      return 1;
    case JetDepth::first_x:
      return 2;
    case JetDepth::full:
      return 4;
  }
  return 4;
}

void jet_silu_forward(const Matrix& z, JetDepth depth, Index n, Matrix& out, Matrix* derivs) {
  const Index rows = z.rows();
  out.resize(rows, z.cols());
  const Index kept = derivative_count(depth);
  if (derivs != nullptr) derivs->resize(rows, kept * n);
  auto keep = [&](Index r, Index j, const SiluDerivatives& d) {
    if (derivs == nullptr) return;
    const double all[4] = {d.s1, d.s2, d.s3, d.s4};
    for (Index k = 0; k < kept; ++k) (*derivs)(r, k * n + j) = all[k];
  };
  switch (depth) {
    case JetDepth::value:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          const SiluDerivatives d = silu_derivatives(z(r, j));
          out(r, j) = d.s0;
          keep(r, j, d);
        }
      }
      return;
    case JetDepth::first_x:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          const SiluDerivatives d = silu_derivatives(z(r, j));
          out(r, j) = d.s0;
          out(r, n + j) = d.s1 * z(r, n + j);
          keep(r, j, d);
        }
      }
      return;
    case JetDepth::full:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          const SiluDerivatives d = silu_derivatives(z(r, j));
          const double zx = z(r, n + j);
          const double zt = z(r, 2 * n + j);
          const double zxt = z(r, 3 * n + j);
          const double zxx = z(r, 4 * n + j);
          const double zxxt = z(r, 5 * n + j);
          const double zx2 = zx * zx;
          out(r, j) = d.s0;
          out(r, n + j) = d.s1 * zx;
          out(r, 2 * n + j) = d.s1 * zt;
          out(r, 3 * n + j) = d.s2 * zx * zt + d.s1 * zxt;
          out(r, 4 * n + j) = d.s2 * zx2 + d.s1 * zxx;
          out(r, 5 * n + j) =
              d.s3 * zx2 * zt + d.s2 * (2.0 * zx * zxt + zxx * zt) + d.s1 * zxxt;
          keep(r, j, d);
        }
      }
      return;
  }
}

void jet_silu_backward(const Matrix& z, const Matrix& g, JetDepth depth, Index n, Matrix& dz,
                       const Matrix* derivs) {
  const Index rows = z.rows();
  dz.resize(rows, z.cols());
  const Index kept = derivative_count(depth);
  auto at = [&](Index r, Index j) {
    if (derivs == nullptr) return silu_derivatives(z(r, j));
    SiluDerivatives d{0.0, (*derivs)(r, j), 0.0, 0.0, 0.0};
    if (kept > 1) d.s2 = (*derivs)(r, n + j);
    if (kept > 2) {
      d.s3 = (*derivs)(r, 2 * n + j);
      d.s4 = (*derivs)(r, 3 * n + j);
    }
    return d;
  };
  switch (depth) {
    case JetDepth::value:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          dz(r, j) = g(r, j) * at(r, j).s1;
        }
      }
      return;
    case JetDepth::first_x:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          const SiluDerivatives d = at(r, j);
          const double zx = z(r, n + j);
          const double gv = g(r, j);
          const double gx = g(r, n + j);
          dz(r, j) = gv * d.s1 + gx * d.s2 * zx;
          dz(r, n + j) = gx * d.s1;
        }
      }
      return;
    case JetDepth::full:
      for (Index j = 0; j < n; ++j) {
        for (Index r = 0; r < rows; ++r) {
          const SiluDerivatives d = at(r, j);
          const double zx = z(r, n + j);
          const double zt = z(r, 2 * n + j);
          const double zxt = z(r, 3 * n + j);
          const double zxx = z(r, 4 * n + j);
          const double zxxt = z(r, 5 * n + j);
          const double gv = g(r, j);
          const double gx = g(r, n + j);
          const double gt = g(r, 2 * n + j);
          const double gxt = g(r, 3 * n + j);
          const double gxx = g(r, 4 * n + j);
          const double gxxt = g(r, 5 * n + j);
          const double zx2 = zx * zx;
          dz(r, j) = gv * d.s1 + gx * d.s2 * zx + gt * d.s2 * zt +
                     gxt * (d.s3 * zx * zt + d.s2 * zxt) + gxx * (d.s3 * zx2 + d.s2 * zxx) +
                     gxxt * (d.s4 * zx2 * zt + d.s3 * (2.0 * zx * zxt + zxx * zt) + d.s2 * zxxt);
          dz(r, n + j) = gx * d.s1 + gxt * d.s2 * zt + gxx * 2.0 * d.s2 * zx +
                         gxxt * (2.0 * d.s3 * zx * zt + 2.0 * d.s2 * zxt);
          dz(r, 2 * n + j) = gt * d.s1 + gxt * d.s2 * zx + gxxt * (d.s3 * zx2 + d.s2 * zxx);
          dz(r, 3 * n + j) = gxt * d.s1 + gxxt * 2.0 * d.s2 * zx;
          dz(r, 4 * n + j) = gxx * d.s1 + gxxt * d.s2 * zt;
          dz(r, 5 * n + j) = gxxt * d.s1;
        }
      }
      return;
  }
}

}  // namespace detail

Tape::Tape() : serial_(next_serial.fetch_add(1)) {}

Var Tape::record(Node n, const char* name) {
  n.name = name;
  nodes_.push_back(std::move(n));
  return Var{serial_, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != serial_ || v.id >= nodes_.size()) {
    throw UsageError("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

Var Tape::param(std::span<const double> params, std::size_t offset, Index rows, Index cols) {
  if (param_length_set_ && params.size() != param_length_) {
    throw UsageError("parameter leaves on one tape must share a parameter vector length");
  }
  const auto count = static_cast<std::size_t>(rows * cols);
  if (offset + count > params.size()) throw UsageError("parameter block out of range");
  param_length_ = params.size();
  param_length_set_ = true;
  Node n;
  n.op = Op::param;
  n.value.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      n.value(r, c) = params[offset + static_cast<std::size_t>(r * cols + c)];
    }
  }
  n.i0 = static_cast<Index>(offset);
  return record(std::move(n), "param");
}

Var Tape::input(Matrix value) {
  Node n;
  n.op = Op::input;
  n.value = std::move(value);
  return record(std::move(n), "input");
}

Var Tape::input(double value) { return input(Matrix::Constant(1, 1, value)); }

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(value);
  return record(std::move(n), "constant");
}

Var Tape::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::matmul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.cols() != bv.rows()) throw UsageError("matmul: inner dimensions differ");
  Node n = make_node(Op::matmul, a.id, b.id);
  n.value.noalias() = av * bv;
  return record(std::move(n), "matmul");
}

Var Tape::add(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) throw UsageError("add: shape mismatch");
  Node n = make_node(Op::add, a.id, b.id);
  n.value = av + bv;
  return record(std::move(n), "add");
}

Var Tape::sub(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) throw UsageError("sub: shape mismatch");
  Node n = make_node(Op::sub, a.id, b.id);
  n.value = av - bv;
  return record(std::move(n), "sub");
}

Var Tape::mul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) throw UsageError("mul: shape mismatch");
  Node n = make_node(Op::mul, a.id, b.id);
  n.value = av.cwiseProduct(bv);
  return record(std::move(n), "mul");
}

Var Tape::scale(Var a, double s) {
  Node n = make_node(Op::scale, a.id);
  n.value = s * node(a).value;
  n.c = s;
  return record(std::move(n), "scale");
}

Var Tape::exp(Var a) {
  Node n = make_node(Op::exp, a.id);
  n.value = node(a).value.array().exp().matrix();
  return record(std::move(n), "exp");
}

Var Tape::add_bias(Var z, Var bias, Index columns) {
  const Matrix& zv = node(z).value;
  const Matrix& bv = node(bias).value;
  if (bv.cols() != 1 || bv.rows() != zv.rows() || columns > zv.cols()) {
    throw UsageError("add_bias: shape mismatch");
  }
  Node n = make_node(Op::add_bias, z.id, bias.id);
  n.value = zv;
  n.value.leftCols(columns).colwise() += bv.col(0);
  n.i0 = columns;
  return record(std::move(n), "add_bias");
}

Var Tape::slice_cols(Var a, Index begin, Index count) {
  const Matrix& av = node(a).value;
  if (begin < 0 || count < 0 || begin + count > av.cols()) {
    throw UsageError("slice_cols: range out of bounds");
  }
  Node n = make_node(Op::slice_cols, a.id);
  n.value = av.middleCols(begin, count);
  n.i0 = begin;
  n.i1 = count;
  return record(std::move(n), "slice_cols");
}

Var Tape::jet_silu(Var z, JetDepth depth, Index n) {
  const Matrix& zv = node(z).value;
  if (zv.cols() != component_count(depth) * n) throw UsageError("jet_silu: block layout mismatch");
  Node nd = make_node(Op::jet_silu, z.id);
  detail::jet_silu_forward(zv, depth, n, nd.value, &nd.aux);
  nd.i0 = n;
  nd.i1 = static_cast<Index>(depth);
  return record(std::move(nd), "silu");
}

Var Tape::sum(Var a) {
  Node n = make_node(Op::sum, a.id);
  n.value = Matrix::Constant(1, 1, node(a).value.sum());
  return record(std::move(n), "sum");
}

Var Tape::sum_squares(Var a) {
  Node n = make_node(Op::sum_squares, a.id);
  n.value = Matrix::Constant(1, 1, node(a).value.squaredNorm());
  return record(std::move(n), "sum_squares");
}

Var Tape::weighted_sum(Var a, Matrix weights) {
  const Matrix& av = node(a).value;
  if (weights.rows() != av.rows() || weights.cols() != av.cols()) {
    throw UsageError("weighted_sum: weight shape mismatch");
  }
  Node n = make_node(Op::weighted_sum, a.id);
  n.value = Matrix::Constant(1, 1, weights.cwiseProduct(av).sum());
  n.aux = std::move(weights);
  return record(std::move(n), "weighted_sum");
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.size() != 1) throw UsageError("scalar: node is not 1x1");
  if (!std::isfinite(m(0, 0))) throw_first_non_finite(v);
  return m(0, 0);
}

void Tape::throw_first_non_finite(Var v) const {
  for (std::uint32_t i = 0; i <= v.id; ++i) {
    if (!nodes_[i].value.allFinite()) {
      throw PropagationError(std::string("non-finite value produced by tape primitive '") +
                             nodes_[i].name + "' (node " + std::to_string(i) + ")");
    }
  }
  throw PropagationError("non-finite value on tape");
}

GradVector Tape::backward(Var output) {
  GradVector g(param_length_, 0.0);
  backward(output, g);
  return g;
}

void Tape::backward(Var output, std::span<double> gradient) {
  const Node& out = node(output);
  if (out.value.size() != 1) throw UsageError("backward: output must be a scalar node");
  if (!std::isfinite(out.value(0, 0))) throw_first_non_finite(output);
  if (gradient.size() != param_length_) {
    throw UsageError("backward: gradient length differs from parameter vector length");
  }
  adjoints_.assign(nodes_.size(), Matrix());
  adjoints_[output.id] = Matrix::Ones(1, 1);

  for (std::size_t k = output.id + 1; k-- > 0;) {
    const Matrix& g = adjoints_[k];
    if (g.size() == 0) continue;
    const Node& n = nodes_[k];
    switch (n.op) {
      case Op::param: {
        const Index rows = n.value.rows();
        const Index cols = n.value.cols();
        const auto base = static_cast<std::size_t>(n.i0);
        for (Index r = 0; r < rows; ++r) {
          for (Index c = 0; c < cols; ++c) {
            gradient[base + static_cast<std::size_t>(r * cols + c)] += g(r, c);
          }
        }
        break;
      }
      case Op::input:
      case Op::constant:
        break;
      case Op::matmul: {
        const Matrix& av = nodes_[n.a].value;
        const Matrix& bv = nodes_[n.b].value;
        Matrix ga;
        ga.noalias() = g * bv.transpose();
        Matrix gb;
        gb.noalias() = av.transpose() * g;
        accumulate(adjoints_[n.a], ga);
        accumulate(adjoints_[n.b], gb);
        break;
      }
      case Op::add:
        accumulate(adjoints_[n.a], g);
        accumulate(adjoints_[n.b], g);
        break;
      case Op::sub:
        accumulate(adjoints_[n.a], g);
        accumulate(adjoints_[n.b], -g);
        break;
      case Op::mul: {
        accumulate(adjoints_[n.a], g.cwiseProduct(nodes_[n.b].value));
        accumulate(adjoints_[n.b], g.cwiseProduct(nodes_[n.a].value));
        break;
      }
      case Op::scale:
        accumulate(adjoints_[n.a], n.c * g);
        break;
      case Op::exp:
        accumulate(adjoints_[n.a], g.cwiseProduct(n.value));
        break;
      case Op::add_bias: {
        accumulate(adjoints_[n.a], g);
        Matrix gb = g.leftCols(n.i0).rowwise().sum();
        accumulate(adjoints_[n.b], gb);
        break;
      }
      case Op::slice_cols: {
        const Matrix& av = nodes_[n.a].value;
        Matrix& target = adjoints_[n.a];
        if (target.size() == 0) target = Matrix::Zero(av.rows(), av.cols());
        target.middleCols(n.i0, n.i1) += g;
        break;
      }
      case Op::jet_silu: {
        Matrix dz;
        detail::jet_silu_backward(nodes_[n.a].value, g, static_cast<JetDepth>(n.i1), n.i0, dz,
                                  &n.aux);
        accumulate(adjoints_[n.a], dz);
        break;
      }
      case Op::sum: {
        const Matrix& av = nodes_[n.a].value;
        accumulate(adjoints_[n.a], Matrix::Constant(av.rows(), av.cols(), g(0, 0)));
        break;
      }
      case Op::sum_squares:
        accumulate(adjoints_[n.a], (2.0 * g(0, 0)) * nodes_[n.a].value);
        break;
      case Op::weighted_sum:
        accumulate(adjoints_[n.a], g(0, 0) * n.aux);
        break;
    }
  }

  for (double gi : gradient) {
    if (!std::isfinite(gi)) throw PropagationError("non-finite entry in parameter gradient");
  }
}

Matrix Tape::adjoint(Var v) const {
  const Node& n = node(v);
  if (v.id >= adjoints_.size()) throw UsageError("adjoint: no backward pass recorded");
  const Matrix& a = adjoints_[v.id];
  if (a.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return a;
}

}  // namespace rlw
