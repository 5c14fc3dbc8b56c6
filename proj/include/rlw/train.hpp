#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlw/field.hpp"
#include "rlw/loss.hpp"
#include "rlw/network.hpp"
#include "rlw/physics.hpp"

namespace rlw {

enum class Variant { adaptive, conservative };
enum class StrategyKind { full, curriculum, causal };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
std::string_view to_string(StrategyKind s);
StrategyKind parse_strategy(std::string_view name);

/// Uniform partition t_0 = 0 < t_1 < ... < t_N = t_final.
struct WindowPlan {
  std::vector<double> boundaries;

  static WindowPlan uniform(double t_final, int windows);
  std::size_t count() const { return boundaries.size() - 1; }
};

struct TrainConfig {
  ScenarioConfig scenario;
  Variant variant = Variant::adaptive;
  StrategyKind strategy = StrategyKind::full;
  int windows = 1;  // causal only

  /// Hidden layout; the input scaling is filled in per window.
  int hidden_layers = 8;
  int width = 50;
  bool normalize_inputs = true;

  // Counts are per window for causal training.
  std::size_t n_interior = 20000;
  std::size_t n_initial = 5000;
  std::size_t n_boundary = 5000;

  // Curriculum: Adam budget is stage 1, L-BFGS budget is stage 2.
  long adam_epochs = 30000;
  long lbfgs_iters = 5000;
  double adam_lr = 1e-3;
  double lambda_cons = 1e-4;
  double stage2_step_scale = 0.1;

  std::size_t conservation_times = 11;
  std::size_t conservation_grid = 2001;
  bool analytic_reference = false;
  bool resample_conservation_times = false;

  std::uint64_t seed = 0;
  std::size_t chunk_size = 512;

  /// Per-scenario defaults with the strategy each variant uses for it.
  static TrainConfig defaults(const ScenarioConfig& scenario, Variant variant);

  MlpSpec model(double t_begin, double t_end) const;
  WindowPlan plan() const;
  bool conservation_active() const { return variant == Variant::conservative; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Phase { adam, lbfgs };

struct HistoryEntry {
  long epoch = 0;  // running index over the whole run
  int window = 0;
  int stage = 1;
  Phase phase = Phase::adam;
  LossBreakdown breakdown;
  double total = 0.0;
  AdaptiveWeights weights;
};

/// Collocation points for one stage of one window. Streams are derived
/// from (seed, stage, window, point class). Initial targets are the
/// analytic IC; causal training replaces them for later windows.
CollocationSet sample_collocation(const TrainConfig& cfg, int stage, int window, double t_begin,
                                  double t_end);

struct StageSettings {
  long adam_epochs = 0;
  long lbfgs_iters = 0;
  double adam_lr = 1e-3;
  double step_scale = 1.0;
  int stage = 1;
  int window = 0;
  long first_epoch = 0;
  /// Fresh conservation times each Adam epoch (first time kept fixed).
  bool resample_conservation_times = false;
  std::uint64_t resample_seed = 0;
};

struct StageResult {
  ParamVector params;  // last parameters with a finite loss
  std::vector<HistoryEntry> history;
  bool aborted = false;
  std::string message;
  std::vector<std::string> warnings;
};

using ProgressFn = std::function<void(const HistoryEntry&)>;

/// Adam for adam_epochs, then up to lbfgs_iters L-BFGS iterations (stops
/// early on convergence or a failed fallback step). A non-finite loss ends
/// the stage with the last good parameters.
StageResult train_stage(const StageSettings& settings, const MlpSpec& spec, ParamVector params,
                        const CollocationSet& colloc, const ScenarioConfig& scenario,
                        const LossOptions& loss, const ProgressFn& progress = {});

struct TrainResult {
  std::vector<NetworkWindow> windows;
  std::vector<HistoryEntry> history;
  bool aborted = false;
  std::optional<std::size_t> failed_window;
  std::string message;
  std::vector<std::string> warnings;

  SolutionField field(const ScenarioConfig& scenario) const;
};

/// Single network on the full horizon with the variant's loss.
TrainResult full_train(const TrainConfig& cfg, const ProgressFn& progress = {});
/// Stage 1: adaptive loss, Adam only. Stage 2: conservative loss, L-BFGS
/// only, with the reduced step scale.
TrainResult curriculum_train(const TrainConfig& cfg, const ProgressFn& progress = {});
/// One network per window; later windows take their IC from the previous
/// window at its end time. On failure, returns the windows finished so far.
TrainResult causal_train(const TrainConfig& cfg, const ProgressFn& progress = {});
/// Dispatches on cfg.strategy.
TrainResult train(const TrainConfig& cfg, const ProgressFn& progress = {});

/// Invariants of the analytic IC on the conservation grid.
ConservedTriple analytic_invariants(const ScenarioConfig& scenario, std::size_t grid_points);

}  // namespace rlw
