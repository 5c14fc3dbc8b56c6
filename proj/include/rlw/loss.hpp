#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rlw/network.hpp"
#include "rlw/physics.hpp"
#include "rlw/tape.hpp"

namespace rlw {

/// Points at which the loss terms are evaluated. Targets for the initial
/// and boundary classes are stored alongside the points so that a causal
/// window can hand its prediction to the next one.
struct CollocationSet {
  std::vector<double> interior_x;
  std::vector<double> interior_t;

  double initial_t = 0.0;
  std::vector<double> initial_x;
  std::vector<double> initial_target;

  std::vector<double> boundary_x;
  std::vector<double> boundary_t;
  std::vector<double> boundary_target;

  /// First entry is the reference time I_k(0) is taken at.
  std::vector<double> conservation_times;
  /// Uniform x grid for the trapezoid rule.
  std::vector<double> conservation_grid;

  double grid_spacing() const;
  /// Throws UsageError on empty classes or mismatched array lengths.
  void validate(bool needs_conservation) const;
};

struct LossBreakdown {
  double l_pde = 0.0;
  double l_ic = 0.0;
  double l_bc = 0.0;
  double l_cons = 0.0;

  double unweighted_sum() const { return l_pde + l_ic + l_bc + l_cons; }
};

struct AdaptiveWeights {
  double lambda_pde = 0.0;
  double lambda_ic = 0.0;
  double lambda_bc = 0.0;

  /// Reads the three log-weights stored after the network parameters.
  static AdaptiveWeights from_params(std::span<const double> params, const MlpSpec& spec);
};

enum class LossKind { standard, adaptive, conservative };

struct LossOptions {
  LossKind kind = LossKind::adaptive;
  double lambda_cons = 0.0;
  /// When set, I_k(0) comes from these values instead of the network at
  /// the first conservation time.
  std::optional<ConservedTriple> reference_invariants;
  std::size_t chunk_size = 512;
};

struct LossEvaluation {
  double total = 0.0;
  LossBreakdown breakdown;
  AdaptiveWeights weights;
  GradVector gradient;
};

/// Mean squared PDE residual, IC misfit and BC misfit (values only).
LossBreakdown component_losses(std::span<const double> params, const MlpSpec& spec,
                               const CollocationSet& colloc, const ScenarioConfig& scenario);

/// sum_j (exp(-lambda_j) L_j + lambda_j) / 2 over PDE, IC, BC.
double adaptive_total(const LossBreakdown& b, const AdaptiveWeights& w);
/// Taped version; L_j and lambda_j are 1x1 nodes.
Var adaptive_total(Tape& tape, std::span<const Var, 3> losses, std::span<const Var, 3> lambdas);

double conservative_total(const LossBreakdown& b, const AdaptiveWeights& w, double l_cons,
                          double lambda_cons);

/// sum_k (1/N_t) sum_i |I_k(t_i) - I_k(ref)|^2.
double conservation_penalty(std::span<const ConservedTriple> per_time,
                            const ConservedTriple& reference);

/// Invariants of the network field at each conservation time.
std::vector<ConservedTriple> network_invariants(std::span<const double> params,
                                                const MlpSpec& spec, const CollocationSet& colloc,
                                                const RlwParams& rlw);

double conservation_loss(std::span<const double> params, const MlpSpec& spec,
                         const CollocationSet& colloc, const ScenarioConfig& scenario,
                         const std::optional<ConservedTriple>& reference = std::nullopt);

/// Total loss for the chosen formulation and its gradient with respect to
/// every entry of `params` (network weights and, when present, lambdas).
LossEvaluation evaluate_loss(std::span<const double> params, const MlpSpec& spec,
                             const CollocationSet& colloc, const ScenarioConfig& scenario,
                             const LossOptions& options);

/// Residual u_t + u_x + eps*u*u_x - mu*u_xxt of a full-depth batch jet.
Var rlw_residual(Tape& tape, Var u, Index n, const RlwParams& rlw);

}  // namespace rlw
