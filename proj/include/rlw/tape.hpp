#pragma once

// Reverse-mode tape over dense matrix values.
//
// Nodes are matrix-valued so a whole batch of collocation points moves
// through one node per primitive. Jet components of a batch live in
// contiguous column blocks ordered v | x | t | xt | xx | xxt (see
// JetLayout), and each block is an ordinary tape value: parameter
// gradients flow backwards through the forward-mode jet algebra without
// nesting one AD mode inside the other.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rlw {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using GradVector = std::vector<double>;

/// Handle to a tape node. Only valid on the tape that issued it.
struct Var {
  std::uint64_t tape = 0;
  std::uint32_t id = 0;
};

/// How many jet components a batch carries.
/// value: {v}; first_x: {v, x}; full: {v, x, t, xt, xx, xxt}.
enum class JetDepth { value = 1, first_x = 2, full = 6 };

constexpr int component_count(JetDepth d) { return static_cast<int>(d); }

namespace jet_block {
inline constexpr int v = 0;
inline constexpr int x = 1;
inline constexpr int t = 2;
inline constexpr int xt = 3;
inline constexpr int xx = 4;
inline constexpr int xxt = 5;
}  // namespace jet_block

class Tape {
 public:
  Tape();

  /// Leaf bound to params[offset, offset + rows*cols), stored row-major.
  /// All parameter leaves on one tape must come from vectors of one length.
  Var param(std::span<const double> params, std::size_t offset, Index rows, Index cols);
  /// Differentiable leaf outside the parameter vector; read its adjoint
  /// after backward().
  Var input(Matrix value);
  Var input(double value);
  Var constant(Matrix value);
  Var constant(double value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var exp(Var a);
  /// Adds the column vector `bias` to the first `columns` columns of z.
  Var add_bias(Var z, Var bias, Index columns);
  Var slice_cols(Var a, Index begin, Index count);
  /// SiLU applied to a batch jet with `components` blocks of n columns each.
  Var jet_silu(Var z, JetDepth depth, Index n);
  Var sum(Var a);
  Var sum_squares(Var a);
  /// sum(weights .* a) with constant weights of a's shape.
  Var weighted_sum(Var a, Matrix weights);

  const Matrix& value(Var v) const;
  /// Throws PropagationError naming the first primitive that produced a
  /// non-finite entry when the scalar is not finite.
  double scalar(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t param_count() const noexcept { return param_length_; }

  /// d(output)/d(params). Output must be a finite 1x1 node of this tape.
  GradVector backward(Var output);
  /// Same, accumulated into `gradient` (length must equal param_count()).
  void backward(Var output, std::span<double> gradient);
  /// Adjoint of any node from the most recent backward pass.
  Matrix adjoint(Var v) const;

 private:
  enum class Op : std::uint8_t {
    param, input, constant, matmul, add, sub, mul, scale, exp,
    add_bias, slice_cols, jet_silu, sum, sum_squares, weighted_sum
  };
  struct Node {
    Op op = Op::input;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    Matrix value;
    Matrix aux;
    double c = 0.0;
    Index i0 = 0;
    Index i1 = 0;
    const char* name = "";
  };

  static Node make_node(Op op, std::uint32_t a, std::uint32_t b = 0) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return n;
  }
  Var record(Node node, const char* name);
  [[noreturn]] void throw_first_non_finite(Var v) const;
  const Node& node(Var v) const;

  std::uint64_t serial_;
  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::size_t param_length_ = 0;
  bool param_length_set_ = false;
};

namespace detail {
/// Shared by the taped and untaped batch forward so both produce
/// identical bits.
/// `derivs`, when given, receives silu' .. silu'''' (as many as the depth
/// needs) so the backward pass can skip recomputing them.
void jet_silu_forward(const Matrix& z, JetDepth depth, Index n, Matrix& out,
                      Matrix* derivs = nullptr);
void jet_silu_backward(const Matrix& z, const Matrix& upstream, JetDepth depth, Index n,
                       Matrix& dz, const Matrix* derivs = nullptr);
Index derivative_count(JetDepth depth);
}  // namespace detail

}  // namespace rlw
