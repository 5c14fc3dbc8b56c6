#include "rlw/jet.hpp"

#include <cmath>
#include <string>

#include "rlw/error.hpp"

namespace rlw {
namespace {

Jet checked(const Jet& r, const char* primitive) {
  if (!std::isfinite(r.v) || !std::isfinite(r.dx) || !std::isfinite(r.dt) ||
      !std::isfinite(r.dxt) || !std::isfinite(r.dxx) || !std::isfinite(r.dxxt)) {
    throw PropagationError(std::string("non-finite jet produced by primitive '") +
                           primitive + "'");
  }
  return r;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Jet add_raw(const Jet& a, const Jet& b) {
  return {a.v + b.v, a.dx + b.dx, a.dt + b.dt, a.dxt + b.dxt, a.dxx + b.dxx, a.dxxt + b.dxxt};
}

Jet mul_raw(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.dx = a.dx * b.v + a.v * b.dx;
  r.dt = a.dt * b.v + a.v * b.dt;
  r.dxt = a.dxt * b.v + a.dx * b.dt + a.dt * b.dx + a.v * b.dxt;
  r.dxx = a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx;
  r.dxxt = a.dxxt * b.v + a.dxx * b.dt + 2.0 * (a.dxt * b.dx + a.dx * b.dxt) + a.dt * b.dxx +
           a.v * b.dxxt;
  return r;
}

Jet scale_raw(const Jet& a, double s) {
  return {s * a.v, s * a.dx, s * a.dt, s * a.dxt, s * a.dxx, s * a.dxxt};
}

}  // namespace

Jet jet_seed(SeedKind kind, double value) {
  if (!std::isfinite(value)) throw UsageError("jet_seed: value must be finite");
  Jet j;
  j.v = value;
  if (kind == SeedKind::x_input) j.dx = 1.0;
  if (kind == SeedKind::t_input) j.dt = 1.0;
  return j;
}

SiluDerivatives silu_derivatives(double z) {
  const double s = sigmoid(z);
  const double p = s * (1.0 - s);                           // sigma'
  const double q = 1.0 - 2.0 * s;
  const double d2 = p * q;                                  // sigma''
  const double d3 = p * (1.0 - 6.0 * s + 6.0 * s * s);      // sigma'''
  const double d4 = d2 * (1.0 - 12.0 * s + 12.0 * s * s);   // sigma''''
  return {z * s, s + z * p, 2.0 * p + z * d2, 3.0 * d2 + z * d3, 4.0 * d3 + z * d4};
}

Jet compose(const Jet& z, double f0, double f1, double f2, double f3) {
  const double zx2 = z.dx * z.dx;
  Jet r;
  r.v = f0;
  r.dx = f1 * z.dx;
  r.dt = f1 * z.dt;
  r.dxt = f2 * z.dx * z.dt + f1 * z.dxt;
  r.dxx = f2 * zx2 + f1 * z.dxx;
  r.dxxt = f3 * zx2 * z.dt + f2 * (2.0 * z.dx * z.dxt + z.dxx * z.dt) + f1 * z.dxxt;
  return r;
}

Jet silu(const Jet& z) {
  const SiluDerivatives d = silu_derivatives(z.v);
  return checked(compose(z, d.s0, d.s1, d.s2, d.s3), "silu");
}

Jet tanh(const Jet& z) {
  const double th = std::tanh(z.v);
  const double sech2 = 1.0 - th * th;
  return checked(compose(z, th, sech2, -2.0 * th * sech2, sech2 * (6.0 * th * th - 2.0)), "tanh");
}

Jet jet_apply(JetOp op, const Jet& a, const Jet& b) {
  switch (op) {
    case JetOp::add:
      return checked(add_raw(a, b), "add");
    case JetOp::mul:
      return checked(mul_raw(a, b), "mul");
    case JetOp::scale:
      throw UsageError("jet_apply: scale takes a scalar operand");
    case JetOp::silu:
      return silu(a);
    case JetOp::tanh:
      return tanh(a);
    case JetOp::neg:
      return checked(scale_raw(a, -1.0), "neg");
  }
  throw UsageError("jet_apply: unknown primitive");
}

Jet jet_apply(JetOp op, const Jet& a, double s) {
  switch (op) {
    case JetOp::scale:
      return checked(scale_raw(a, s), "scale");
    case JetOp::add:
      return checked(add_raw(a, jet_seed(SeedKind::constant, s)), "add");
    case JetOp::mul:
      return checked(scale_raw(a, s), "mul");
    default:
      return jet_apply(op, a, Jet{});
  }
}

Jet operator+(const Jet& a, const Jet& b) { return jet_apply(JetOp::add, a, b); }
Jet operator-(const Jet& a, const Jet& b) { return checked(add_raw(a, scale_raw(b, -1.0)), "sub"); }
Jet operator*(const Jet& a, const Jet& b) { return jet_apply(JetOp::mul, a, b); }
Jet operator*(double s, const Jet& a) { return jet_apply(JetOp::scale, a, s); }
Jet operator-(const Jet& a) { return jet_apply(JetOp::neg, a, Jet{}); }

}  // namespace rlw
