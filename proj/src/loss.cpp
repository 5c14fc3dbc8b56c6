#include "rlw/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rlw/error.hpp"
#include "rlw/parallel.hpp"

namespace rlw {
namespace {

struct ChunkRange {
  std::size_t begin;
  std::size_t count;
};

std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

ChunkRange chunk_range(std::size_t index, std::size_t n, std::size_t chunk) {
  const std::size_t begin = index * chunk;
  return {begin, std::min(chunk, n - begin)};
}

template <typename T>
std::span<const T> sub(const std::vector<T>& v, ChunkRange r) {
  return std::span<const T>(v).subspan(r.begin, r.count);
}

Matrix row_of(std::span<const double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Index>(i)) = values[i];
  return m;
}

Matrix trapezoid_weights(std::size_t n, double h) {
  Matrix w = Matrix::Constant(1, static_cast<Index>(n), h);
  w(0, 0) = 0.5 * h;
  w(0, static_cast<Index>(n) - 1) = 0.5 * h;
  return w;
}

// Value-only residual mirroring the taped operation order.
Matrix residual_values(const Matrix& u, Index n, const RlwParams& rlw) {
  const Matrix v = u.middleCols(jet_block::v * n, n);
  const Matrix ux = u.middleCols(jet_block::x * n, n);
  const Matrix ut = u.middleCols(jet_block::t * n, n);
  const Matrix uxxt = u.middleCols(jet_block::xxt * n, n);
  const Matrix a = ut + ux;
  const Matrix b = rlw.epsilon * Matrix(v.cwiseProduct(ux));
  const Matrix c = a + b;
  const Matrix d = rlw.mu * uxxt;
  return c - d;
}

double mean_square_values(std::span<const double> params, const MlpSpec& spec,
                          const std::vector<double>& xs, const std::vector<double>& ts,
                          const std::vector<double>* targets, const RlwParams* rlw,
                          std::size_t chunk) {
  const std::size_t n = xs.size();
  const auto inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> parts(chunk_count(n, chunk));
  parallel_for(parts.size(), [&](std::size_t c) {
    const ChunkRange r = chunk_range(c, n, chunk);
    const auto cols = static_cast<Index>(r.count);
    if (rlw != nullptr) {
      const Matrix u = evaluate_batch(params, spec, sub(xs, r), sub(ts, r), JetDepth::full);
      parts[c] = inv_n * residual_values(u, cols, *rlw).squaredNorm();
    } else {
      const Matrix u = evaluate_batch(params, spec, sub(xs, r), sub(ts, r), JetDepth::value);
      parts[c] = inv_n * Matrix(u - row_of(sub(*targets, r))).squaredNorm();
    }
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

// Taped mean of squares over one point class, chunk by chunk.
double mean_square_taped(std::span<const double> params, const MlpSpec& spec,
                         const std::vector<double>& xs, const std::vector<double>& ts,
                         const std::vector<double>* targets, const RlwParams* rlw,
                         std::size_t chunk, std::span<double> gradient) {
  const std::size_t n = xs.size();
  const auto inv_n = 1.0 / static_cast<double>(n);
  return reduce_chunks(chunk_count(n, chunk), gradient, [&](std::size_t c, std::span<double> g) {
    const ChunkRange r = chunk_range(c, n, chunk);
    const auto cols = static_cast<Index>(r.count);
    Tape tape;
    Var term;
    if (rlw != nullptr) {
      Var u = forward_batch(tape, params, spec, sub(xs, r), sub(ts, r), JetDepth::full);
      term = rlw_residual(tape, u, cols, *rlw);
    } else {
      Var u = forward_batch(tape, params, spec, sub(xs, r), sub(ts, r), JetDepth::value);
      term = tape.sub(u, tape.constant(row_of(sub(*targets, r))));
    }
    Var s = tape.scale(tape.sum_squares(term), inv_n);
    tape.backward(s, g);
    return tape.scalar(s);
  });
}

std::vector<double> constant_times(double t, std::size_t n) { return std::vector<double>(n, t); }

}  // namespace

double CollocationSet::grid_spacing() const {
  if (conservation_grid.size() < 2) throw UsageError("conservation grid needs at least two points");
  return (conservation_grid.back() - conservation_grid.front()) /
         static_cast<double>(conservation_grid.size() - 1);
}

void CollocationSet::validate(bool needs_conservation) const {
  if (interior_x.empty()) throw UsageError("collocation set has no interior points");
  if (initial_x.empty()) throw UsageError("collocation set has no initial points");
  if (boundary_x.empty()) throw UsageError("collocation set has no boundary points");
  if (interior_x.size() != interior_t.size()) throw UsageError("interior x/t lengths differ");
  if (initial_x.size() != initial_target.size()) {
    throw UsageError("initial points and targets differ in length");
  }
  if (boundary_x.size() != boundary_t.size() || boundary_x.size() != boundary_target.size()) {
    throw UsageError("boundary points and targets differ in length");
  }
  if (needs_conservation) {
    if (conservation_times.empty()) throw UsageError("conservation loss needs sample times");
    if (conservation_grid.size() < 2) throw UsageError("conservation grid needs two points");
  }
}

AdaptiveWeights AdaptiveWeights::from_params(std::span<const double> params, const MlpSpec& spec) {
  const std::size_t off = lambda_offset(spec);
  if (params.size() != off + 3) throw UsageError("parameter vector carries no adaptive weights");
  return {params[off], params[off + 1], params[off + 2]};
}

Var rlw_residual(Tape& tape, Var u, Index n, const RlwParams& rlw) {
  Var v = tape.slice_cols(u, jet_block::v * n, n);
  Var ux = tape.slice_cols(u, jet_block::x * n, n);
  Var ut = tape.slice_cols(u, jet_block::t * n, n);
  Var uxxt = tape.slice_cols(u, jet_block::xxt * n, n);
  Var c = tape.add(tape.add(ut, ux), tape.scale(tape.mul(v, ux), rlw.epsilon));
  return tape.sub(c, tape.scale(uxxt, rlw.mu));
}

LossBreakdown component_losses(std::span<const double> params, const MlpSpec& spec,
                               const CollocationSet& colloc, const ScenarioConfig& scenario) {
  colloc.validate(false);
  constexpr std::size_t chunk = LossOptions{}.chunk_size;
  LossBreakdown b;
  b.l_pde = mean_square_values(params, spec, colloc.interior_x, colloc.interior_t, nullptr,
                               &scenario.rlw, chunk);
  b.l_ic = mean_square_values(params, spec, colloc.initial_x,
                              constant_times(colloc.initial_t, colloc.initial_x.size()),
                              &colloc.initial_target, nullptr, chunk);
  b.l_bc = mean_square_values(params, spec, colloc.boundary_x, colloc.boundary_t,
                              &colloc.boundary_target, nullptr, chunk);
  return b;
}

double adaptive_total(const LossBreakdown& b, const AdaptiveWeights& w) {
  const std::array<double, 3> l{b.l_pde, b.l_ic, b.l_bc};
  const std::array<double, 3> lam{w.lambda_pde, w.lambda_ic, w.lambda_bc};
  double total = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    total += 0.5 * std::exp(-lam[j]) * l[j] + 0.5 * lam[j];
  }
  return total;
}

Var adaptive_total(Tape& tape, std::span<const Var, 3> losses, std::span<const Var, 3> lambdas) {
  Var total{};
  for (std::size_t j = 0; j < 3; ++j) {
    Var weight = tape.exp(tape.scale(lambdas[j], -1.0));
    Var term = tape.add(tape.scale(tape.mul(weight, losses[j]), 0.5), tape.scale(lambdas[j], 0.5));
    total = j == 0 ? term : tape.add(total, term);
  }
  return total;
}

double conservative_total(const LossBreakdown& b, const AdaptiveWeights& w, double l_cons,
                          double lambda_cons) {
  if (!(lambda_cons >= 0.0)) throw UsageError("lambda_cons must be non-negative");
  return adaptive_total(b, w) + lambda_cons * l_cons;
}

double conservation_penalty(std::span<const ConservedTriple> per_time,
                            const ConservedTriple& reference) {
  if (per_time.empty()) throw UsageError("conservation penalty needs at least one time");
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  for (const ConservedTriple& c : per_time) {
    s1 += (c.i1 - reference.i1) * (c.i1 - reference.i1);
    s2 += (c.i2 - reference.i2) * (c.i2 - reference.i2);
    s3 += (c.i3 - reference.i3) * (c.i3 - reference.i3);
  }
  const auto inv = 1.0 / static_cast<double>(per_time.size());
  return inv * s1 + inv * s2 + inv * s3;
}

std::vector<ConservedTriple> network_invariants(std::span<const double> params,
                                                const MlpSpec& spec, const CollocationSet& colloc,
                                                const RlwParams& rlw) {
  const std::vector<double>& grid = colloc.conservation_grid;
  const double h = colloc.grid_spacing();
  const auto n = static_cast<Index>(grid.size());
  std::vector<ConservedTriple> out(colloc.conservation_times.size());
  parallel_for(out.size(), [&](std::size_t i) {
    const std::vector<double> ts = constant_times(colloc.conservation_times[i], grid.size());
    const Matrix u = evaluate_batch(params, spec, grid, ts, JetDepth::first_x);
    std::vector<double> values(u.data(), u.data() + n);
    std::vector<double> dx(u.data() + n, u.data() + 2 * n);
    out[i] = invariants(values, dx, h, rlw);
  });
  return out;
}

double conservation_loss(std::span<const double> params, const MlpSpec& spec,
                         const CollocationSet& colloc, const ScenarioConfig& scenario,
                         const std::optional<ConservedTriple>& reference) {
  colloc.validate(true);
  const std::vector<ConservedTriple> per_time =
      network_invariants(params, spec, colloc, scenario.rlw);
  return conservation_penalty(per_time, reference.value_or(per_time.front()));
}

LossEvaluation evaluate_loss(std::span<const double> params, const MlpSpec& spec,
                             const CollocationSet& colloc, const ScenarioConfig& scenario,
                             const LossOptions& options) {
  const bool conservative = options.kind == LossKind::conservative;
  const bool weighted = options.kind != LossKind::standard;
  colloc.validate(conservative);
  if (weighted && params.size() != param_count(spec, true)) {
    throw UsageError("adaptive loss needs a parameter vector with adaptive weights attached");
  }
  if (!(options.lambda_cons >= 0.0)) throw UsageError("lambda_cons must be non-negative");
  if (options.chunk_size == 0) throw UsageError("chunk size must be positive");

  const std::size_t p = params.size();
  const std::size_t chunk = options.chunk_size;
  std::vector<double> g_pde(p, 0.0);
  std::vector<double> g_ic(p, 0.0);
  std::vector<double> g_bc(p, 0.0);

  LossEvaluation result;
  LossBreakdown& b = result.breakdown;
  b.l_pde = mean_square_taped(params, spec, colloc.interior_x, colloc.interior_t, nullptr,
                              &scenario.rlw, chunk, g_pde);
  b.l_ic = mean_square_taped(params, spec, colloc.initial_x,
                             constant_times(colloc.initial_t, colloc.initial_x.size()),
                             &colloc.initial_target, nullptr, chunk, g_ic);
  b.l_bc = mean_square_taped(params, spec, colloc.boundary_x, colloc.boundary_t,
                             &colloc.boundary_target, nullptr, chunk, g_bc);

  std::vector<ConservedTriple> per_time;
  if (conservative) per_time = network_invariants(params, spec, colloc, scenario.rlw);
  const auto nt = static_cast<Index>(per_time.size());

  // Outer graph: component losses, invariants and lambdas are its leaves.
  Tape outer;
  const std::array<Var, 3> l{outer.input(b.l_pde), outer.input(b.l_ic), outer.input(b.l_bc)};
  Var total;
  if (weighted) {
    const std::size_t off = lambda_offset(spec);
    const std::array<Var, 3> lam{outer.param(params, off, 1, 1), outer.param(params, off + 1, 1, 1),
                                 outer.param(params, off + 2, 1, 1)};
    total = adaptive_total(outer, l, lam);
    result.weights = AdaptiveWeights::from_params(params, spec);
  } else {
    total = outer.add(outer.add(l[0], l[1]), l[2]);
  }
  Var invariants_node{};
  if (conservative) {
    Matrix values(3, nt);
    for (Index i = 0; i < nt; ++i) {
      const ConservedTriple& c = per_time[static_cast<std::size_t>(i)];
      values(0, i) = c.i1;
      values(1, i) = c.i2;
      values(2, i) = c.i3;
    }
    invariants_node = outer.input(values);
    Var deviation;
    if (options.reference_invariants) {
      const ConservedTriple& r = *options.reference_invariants;
      Matrix ref(3, nt);
      ref.row(0).setConstant(r.i1);
      ref.row(1).setConstant(r.i2);
      ref.row(2).setConstant(r.i3);
      deviation = outer.sub(invariants_node, outer.constant(ref));
    } else {
      // I * (Id - e_0 1^T) subtracts the first column from every column.
      Matrix shift = Matrix::Identity(nt, nt);
      shift.row(0).array() -= 1.0;
      deviation = outer.matmul(invariants_node, outer.constant(shift));
    }
    Var l_cons = outer.scale(outer.sum_squares(deviation), 1.0 / static_cast<double>(nt));
    b.l_cons = outer.scalar(l_cons);
    total = outer.add(total, outer.scale(l_cons, options.lambda_cons));
  }

  result.total = outer.scalar(total);
  result.gradient.assign(p, 0.0);
  if (weighted) {
    outer.backward(total, result.gradient);
  } else {
    outer.backward(total, std::span<double>{});
  }
  const double a_pde = outer.adjoint(l[0])(0, 0);
  const double a_ic = outer.adjoint(l[1])(0, 0);
  const double a_bc = outer.adjoint(l[2])(0, 0);
  for (std::size_t i = 0; i < p; ++i) {
    result.gradient[i] += a_pde * g_pde[i] + a_ic * g_ic[i] + a_bc * g_bc[i];
  }

  if (conservative) {
    const Matrix adj = outer.adjoint(invariants_node);
    const std::vector<double>& grid = colloc.conservation_grid;
    const auto n = static_cast<Index>(grid.size());
    const Matrix weights = trapezoid_weights(grid.size(), colloc.grid_spacing());
    const double mu = scenario.rlw.mu;
    std::vector<double> g_cons(p, 0.0);
    reduce_chunks(per_time.size(), g_cons, [&](std::size_t i, std::span<double> g) {
      const auto col = static_cast<Index>(i);
      if (adj.col(col).isZero(0.0)) return 0.0;
      Tape tape;
      const std::vector<double> ts = constant_times(colloc.conservation_times[i], grid.size());
      Var u = forward_batch(tape, params, spec, grid, ts, JetDepth::first_x);
      Var v = tape.slice_cols(u, 0, n);
      Var ux = tape.slice_cols(u, n, n);
      Var v2 = tape.mul(v, v);
      Var i1 = tape.weighted_sum(v, weights);
      Var i2 = tape.weighted_sum(tape.add(v2, tape.scale(tape.mul(ux, ux), mu)), weights);
      Var i3 = tape.weighted_sum(tape.add(tape.mul(v2, v), tape.scale(v2, 3.0)), weights);
      Var s = tape.add(tape.add(tape.scale(i1, adj(0, col)), tape.scale(i2, adj(1, col))),
                       tape.scale(i3, adj(2, col)));
      tape.backward(s, g);
      return 0.0;
    });
    for (std::size_t i = 0; i < p; ++i) result.gradient[i] += g_cons[i];
  }

  for (std::size_t i = 0; i < p; ++i) {
    if (!std::isfinite(result.gradient[i])) {
      throw PropagationError("non-finite loss gradient at parameter " + std::to_string(i));
    }
  }
  return result;
}

}  // namespace rlw
