#pragma once

// Forward-mode truncated Taylor jets in (x, t).
//
// A Jet carries the value of a function together with the partials
// {x, t, xt, xx, xxt}. The (1,1) coefficient is never read by the RLW
// residual but the product rule for (2,1) consumes it, so it is tracked.

namespace rlw {

struct Jet {
  double v = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  double dxt = 0.0;
  double dxx = 0.0;
  double dxxt = 0.0;

  friend bool operator==(const Jet&, const Jet&) = default;
};

enum class SeedKind { x_input, t_input, constant };

enum class JetOp { add, mul, scale, silu, tanh, neg };

Jet jet_seed(SeedKind kind, double value);

/// Binary primitives (add, mul) use `b`; unary ones ignore it.
Jet jet_apply(JetOp op, const Jet& a, const Jet& b);
/// `scale` multiplies by `s`; add treats `s` as a constant jet.
Jet jet_apply(JetOp op, const Jet& a, double s);

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet operator-(const Jet& a);

Jet silu(const Jet& z);
Jet tanh(const Jet& z);

/// Chain rule for a scalar function f applied to a jet, given
/// f(z.v), f'(z.v), f''(z.v), f'''(z.v).
Jet compose(const Jet& z, double f0, double f1, double f2, double f3);

/// silu(z) = z * sigmoid(z) and its first four derivatives, in closed form.
struct SiluDerivatives {
  double s0, s1, s2, s3, s4;
};
SiluDerivatives silu_derivatives(double z);

}  // namespace rlw
