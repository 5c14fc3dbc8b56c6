#include "rlw/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rlw/error.hpp"
#include "rlw/optim.hpp"

namespace rlw {
namespace {

enum class PointClass : std::uint64_t { interior = 1, initial = 2, boundary = 3, conservation = 4 };

std::mt19937_64 stream(std::uint64_t seed, int stage, int window, PointClass cls) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage), static_cast<std::uint32_t>(window),
                    static_cast<std::uint32_t>(cls)};
  return std::mt19937_64(seq);
}

std::uint64_t window_init_seed(std::uint64_t seed, int window) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x1417u, static_cast<std::uint32_t>(window)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

LossOptions loss_options(const TrainConfig& cfg, bool conservative) {
  LossOptions o;
  o.kind = conservative ? LossKind::conservative : LossKind::adaptive;
  o.lambda_cons = conservative ? cfg.lambda_cons : 0.0;
  if (conservative && cfg.analytic_reference) {
    o.reference_invariants = analytic_invariants(cfg.scenario, cfg.conservation_grid);
  }
  o.chunk_size = cfg.chunk_size;
  return o;
}

HistoryEntry entry_from(const LossEvaluation& ev, const StageSettings& s, Phase phase,
                        long epoch) {
  HistoryEntry e;
  e.epoch = epoch;
  e.window = s.window;
  e.stage = s.stage;
  e.phase = phase;
  e.breakdown = ev.breakdown;
  e.total = ev.total;
  e.weights = ev.weights;
  return e;
}

void config_check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

void append(TrainResult& into, StageResult&& stage) {
  into.history.insert(into.history.end(), std::make_move_iterator(stage.history.begin()),
                      std::make_move_iterator(stage.history.end()));
  into.warnings.insert(into.warnings.end(), stage.warnings.begin(), stage.warnings.end());
  if (stage.aborted) {
    into.aborted = true;
    into.message = stage.message;
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  return v == Variant::adaptive ? "adaptive" : "conservative";
}

Variant parse_variant(std::string_view name) {
  if (name == "adaptive") return Variant::adaptive;
  if (name == "conservative") return Variant::conservative;
  throw ConfigError("unknown variant '" + std::string(name) + "' (adaptive|conservative)");
}

std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::full:
      return "full";
    case StrategyKind::curriculum:
      return "curriculum";
    case StrategyKind::causal:
      return "causal";
  }
  return "full";
}

StrategyKind parse_strategy(std::string_view name) {
  if (name == "full") return StrategyKind::full;
  if (name == "curriculum") return StrategyKind::curriculum;
  if (name == "causal") return StrategyKind::causal;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (full|curriculum|causal)");
}

WindowPlan WindowPlan::uniform(double t_final, int windows) {
  if (windows < 1) throw ConfigError("window count must be at least 1");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  WindowPlan p;
  p.boundaries = linspace(0.0, t_final, static_cast<std::size_t>(windows) + 1);
  return p;
}

TrainConfig TrainConfig::defaults(const ScenarioConfig& scenario, Variant variant) {
  TrainConfig c;
  c.scenario = scenario;
  c.variant = variant;
  switch (scenario.kind) {
    case ScenarioKind::single_soliton:
      c.hidden_layers = 8;
      c.width = 50;
      c.n_interior = 20000;
      c.n_initial = 5000;
      c.n_boundary = 5000;
      c.adam_epochs = 30000;
      c.lbfgs_iters = 5000;
      c.lambda_cons = 1e-4;
      c.strategy = StrategyKind::full;
      break;
    case ScenarioKind::two_soliton:
      c.hidden_layers = 8;
      c.width = 100;
      c.n_interior = 40000;
      c.n_initial = 10000;
      c.n_boundary = 10000;
      c.adam_epochs = 50000;
      c.lbfgs_iters = 10000;
      c.lambda_cons = 1e-5;
      c.strategy =
          variant == Variant::conservative ? StrategyKind::curriculum : StrategyKind::full;
      break;
    case ScenarioKind::undular_bore:
      c.hidden_layers = 8;
      c.width = 100;
      c.n_interior = 40000;
      c.n_initial = 10000;
      c.n_boundary = 10000;
      c.adam_epochs = 20000;
      c.lbfgs_iters = 5000;
      c.lambda_cons = 1e-5;
      c.strategy = StrategyKind::causal;
      c.windows = 5;
      break;
  }
  return c;
}

MlpSpec TrainConfig::model(double t_begin, double t_end) const {
  InputScaling scaling;
  if (normalize_inputs) {
    scaling = InputScaling::for_box(scenario.x_min, scenario.x_max, t_begin, t_end);
  }
  return MlpSpec::hidden(hidden_layers, width, scaling);
}

WindowPlan TrainConfig::plan() const {
  return WindowPlan::uniform(scenario.t_final,
                             strategy == StrategyKind::causal ? windows : 1);
}

void TrainConfig::validate() const {
  try {
    scenario.validate();
  } catch (const UsageError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  config_check(hidden_layers >= 1, "model.hidden_layers", "must be at least 1");
  config_check(width >= 1, "model.width", "must be at least 1");
  config_check(n_interior > 0, "points.interior", "must be positive");
  config_check(n_initial > 0, "points.initial", "must be positive");
  config_check(n_boundary >= 2, "points.boundary", "must be at least 2");
  config_check(adam_epochs >= 0, "train.adam_epochs", "must be non-negative");
  config_check(lbfgs_iters >= 0, "train.lbfgs_iters", "must be non-negative");
  config_check(adam_lr >= 0.0 && std::isfinite(adam_lr), "train.adam_lr", "must be >= 0");
  config_check(lambda_cons >= 0.0 && std::isfinite(lambda_cons), "train.lambda_cons",
               "must be >= 0");
  config_check(stage2_step_scale > 0.0, "train.stage2_step_scale", "must be positive");
  config_check(conservation_times >= 1, "conservation.times", "must be at least 1");
  config_check(conservation_grid >= 2, "conservation.grid", "must be at least 2");
  config_check(chunk_size >= 1, "train.chunk_size", "must be positive");
  config_check(windows >= 1, "train.windows", "must be at least 1");
  config_check(!(strategy == StrategyKind::curriculum && variant == Variant::adaptive),
               "train.strategy", "curriculum training needs the conservative variant");
}

ConservedTriple analytic_invariants(const ScenarioConfig& scenario, std::size_t grid_points) {
  const std::vector<double> xs = linspace(scenario.x_min, scenario.x_max, grid_points);
  std::vector<double> u(xs.size());
  std::vector<double> ux(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    u[i] = initial_condition(xs[i], scenario);
    ux[i] = initial_condition_dx(xs[i], scenario);
  }
  return invariants(u, ux, xs[1] - xs[0], scenario.rlw);
}

CollocationSet sample_collocation(const TrainConfig& cfg, int stage, int window, double t_begin,
                                  double t_end) {
  const ScenarioConfig& sc = cfg.scenario;
  CollocationSet c;
  std::uniform_real_distribution<double> ux(sc.x_min, sc.x_max);
  std::uniform_real_distribution<double> ut(t_begin, t_end);

  auto gen = stream(cfg.seed, stage, window, PointClass::interior);
  c.interior_x.resize(cfg.n_interior);
  c.interior_t.resize(cfg.n_interior);
  for (std::size_t i = 0; i < cfg.n_interior; ++i) {
    c.interior_x[i] = ux(gen);
    c.interior_t[i] = ut(gen);
  }

  gen = stream(cfg.seed, stage, window, PointClass::initial);
  c.initial_t = t_begin;
  c.initial_x.resize(cfg.n_initial);
  c.initial_target.resize(cfg.n_initial);
  for (std::size_t i = 0; i < cfg.n_initial; ++i) {
    c.initial_x[i] = ux(gen);
    c.initial_target[i] = initial_condition(c.initial_x[i], sc);
  }

  gen = stream(cfg.seed, stage, window, PointClass::boundary);
  const std::size_t left = (cfg.n_boundary + 1) / 2;
  c.boundary_x.resize(cfg.n_boundary);
  c.boundary_t.resize(cfg.n_boundary);
  c.boundary_target.resize(cfg.n_boundary);
  for (std::size_t i = 0; i < cfg.n_boundary; ++i) {
    c.boundary_x[i] = i < left ? sc.x_min : sc.x_max;
    c.boundary_t[i] = ut(gen);
    c.boundary_target[i] = boundary_value(c.boundary_x[i], c.boundary_t[i], sc);
  }

  c.conservation_times = linspace(t_begin, t_end, cfg.conservation_times);
  c.conservation_grid = linspace(sc.x_min, sc.x_max, cfg.conservation_grid);
  return c;
}

StageResult train_stage(const StageSettings& settings, const MlpSpec& spec, ParamVector params,
                        const CollocationSet& colloc, const ScenarioConfig& scenario,
                        const LossOptions& loss, const ProgressFn& progress) {
  if (params.size() != param_count(spec, true)) {
    throw UsageError("train_stage: parameter vector does not match the model");
  }
  StageResult out;
  out.params = params;
  long epoch = settings.first_epoch;
  auto emit = [&](HistoryEntry e) {
    if (progress) progress(e);
    out.history.push_back(std::move(e));
  };
  auto abort_with = [&](const std::string& why) {
    out.aborted = true;
    out.message = "stage " + std::to_string(settings.stage) + ", window " +
                  std::to_string(settings.window) + ": " + why;
  };

  // Adam.
  AdamState adam = AdamState::for_size(params.size(), settings.adam_lr);
  CollocationSet working = colloc;
  std::mt19937_64 time_gen(settings.resample_seed);
  const double t0 = colloc.conservation_times.empty() ? 0.0 : colloc.conservation_times.front();
  const double t1 = colloc.conservation_times.empty() ? 0.0 : colloc.conservation_times.back();
  std::uniform_real_distribution<double> draw_t(t0, t1);
  for (long k = 0; k < settings.adam_epochs; ++k) {
    if (settings.resample_conservation_times && working.conservation_times.size() > 1) {
      for (std::size_t i = 1; i < working.conservation_times.size(); ++i) {
        working.conservation_times[i] = draw_t(time_gen);
      }
      std::sort(working.conservation_times.begin() + 1, working.conservation_times.end());
    }
    LossEvaluation ev;
    try {
      ev = evaluate_loss(params, spec, working, scenario, loss);
    } catch (const PropagationError& e) {
      abort_with(std::string("non-finite value during Adam epoch ") + std::to_string(epoch) +
                 " (" + e.what() + ")");
      return out;
    }
    if (!std::isfinite(ev.total)) {
      abort_with("non-finite loss at Adam epoch " + std::to_string(epoch));
      return out;
    }
    out.params = params;
    emit(entry_from(ev, settings, Phase::adam, epoch));
    try {
      adam_step(adam, params, ev.gradient);
    } catch (const OptimizerError& e) {
      abort_with(e.what());
      return out;
    }
    ++epoch;
  }

  // L-BFGS on the fixed point set.
  if (settings.lbfgs_iters > 0) {
    // Evaluations made during the current iteration, searched by value
    // once the step is accepted so history needs no extra loss pass.
    std::vector<LossEvaluation> seen;
    Objective objective = [&](std::span<const double> p) -> ObjectiveValue {
      try {
        LossEvaluation ev = evaluate_loss(p, spec, colloc, scenario, loss);
        ObjectiveValue ov{ev.total, ev.gradient};
        ev.gradient.clear();
        seen.push_back(std::move(ev));
        return ov;
      } catch (const PropagationError&) {
        return {std::numeric_limits<double>::infinity(), {}};
      }
    };
    LbfgsState state;
    state.step_scale = settings.step_scale;
    for (long it = 0; it < settings.lbfgs_iters; ++it) {
      seen.clear();
      LbfgsStepResult r;
      try {
        r = lbfgs_step(state, params, objective);
      } catch (const OptimizerError& e) {
        abort_with(e.what());
        break;
      }
      if (!std::isfinite(r.value)) {
        abort_with("non-finite loss in L-BFGS iteration " + std::to_string(it));
        break;
      }
      if (r.accepted) {
        out.params = params;
        auto match = std::find_if(seen.rbegin(), seen.rend(),
                                  [&](const LossEvaluation& e) { return e.total == r.value; });
        LossEvaluation ev = match != seen.rend()
                                ? *match
                                : evaluate_loss(params, spec, colloc, scenario, loss);
        emit(entry_from(ev, settings, Phase::lbfgs, epoch));
        ++epoch;
      }
      if (r.converged || !r.accepted) break;
    }
    for (std::string& w : state.warnings) {
      out.warnings.push_back("window " + std::to_string(settings.window) + ", stage " +
                             std::to_string(settings.stage) + ": " + w);
    }
  }
  if (!out.aborted) out.params = params;
  return out;
}

SolutionField TrainResult::field(const ScenarioConfig& scenario) const {
  return SolutionField::stitch(windows, scenario.x_min, scenario.x_max);
}

TrainResult full_train(const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const double t_end = cfg.scenario.t_final;
  const MlpSpec spec = cfg.model(0.0, t_end);
  const CollocationSet colloc = sample_collocation(cfg, 1, 0, 0.0, t_end);
  StageSettings s;
  s.adam_epochs = cfg.adam_epochs;
  s.lbfgs_iters = cfg.lbfgs_iters;
  s.adam_lr = cfg.adam_lr;
  s.resample_conservation_times = cfg.resample_conservation_times;
  s.resample_seed = stream(cfg.seed, 1, 0, PointClass::conservation)();
  StageResult r = train_stage(s, spec, init_params(spec, window_init_seed(cfg.seed, 0), true),
                              colloc, cfg.scenario, loss_options(cfg, cfg.conservation_active()),
                              progress);
  TrainResult out;
  out.windows.push_back({0.0, t_end, spec, r.params});
  if (r.aborted) out.failed_window = 0;
  append(out, std::move(r));
  return out;
}

TrainResult curriculum_train(const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.strategy != StrategyKind::curriculum) {
    throw ConfigError("train.strategy: curriculum_train needs the curriculum strategy");
  }
  const double t_end = cfg.scenario.t_final;
  const MlpSpec spec = cfg.model(0.0, t_end);
  TrainResult out;

  StageSettings s1;
  s1.stage = 1;
  s1.adam_epochs = cfg.adam_epochs;
  s1.adam_lr = cfg.adam_lr;
  StageResult r1 = train_stage(s1, spec, init_params(spec, window_init_seed(cfg.seed, 0), true),
                               sample_collocation(cfg, 1, 0, 0.0, t_end), cfg.scenario,
                               loss_options(cfg, false), progress);
  ParamVector params = r1.params;
  const long next_epoch = s1.first_epoch + static_cast<long>(r1.history.size());
  append(out, std::move(r1));
  if (!out.aborted) {
    StageSettings s2;
    s2.stage = 2;
    s2.lbfgs_iters = cfg.lbfgs_iters;
    s2.step_scale = cfg.stage2_step_scale;
    s2.first_epoch = next_epoch;
    StageResult r2 = train_stage(s2, spec, params, sample_collocation(cfg, 2, 0, 0.0, t_end),
                                 cfg.scenario, loss_options(cfg, true), progress);
    params = r2.params;
    append(out, std::move(r2));
  }
  out.windows.push_back({0.0, t_end, spec, params});
  if (out.aborted) out.failed_window = 0;
  return out;
}

TrainResult causal_train(const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const WindowPlan plan = cfg.plan();
  TrainResult out;
  long epoch = 0;
  for (std::size_t w = 0; w < plan.count(); ++w) {
    const int wi = static_cast<int>(w);
    const double t0 = plan.boundaries[w];
    const double t1 = plan.boundaries[w + 1];
    const MlpSpec spec = cfg.model(t0, t1);
    CollocationSet colloc = sample_collocation(cfg, 1, wi, t0, t1);
    if (w > 0) {
      const NetworkWindow& prev = out.windows.back();
      const std::vector<double> ts(colloc.initial_x.size(), t0);
      const Matrix u = evaluate_batch(prev.params, prev.spec, colloc.initial_x, ts,
                                      JetDepth::value);
      for (std::size_t i = 0; i < colloc.initial_x.size(); ++i) {
        colloc.initial_target[i] = u(0, static_cast<Index>(i));
      }
    }
    StageSettings s;
    s.window = wi;
    s.adam_epochs = cfg.adam_epochs;
    s.lbfgs_iters = cfg.lbfgs_iters;
    s.adam_lr = cfg.adam_lr;
    s.first_epoch = epoch;
    s.resample_conservation_times = cfg.resample_conservation_times;
    s.resample_seed = stream(cfg.seed, 1, wi, PointClass::conservation)();
    StageResult r = train_stage(s, spec, init_params(spec, window_init_seed(cfg.seed, wi), true),
                                colloc, cfg.scenario,
                                loss_options(cfg, cfg.conservation_active()), progress);
    epoch += static_cast<long>(r.history.size());
    const bool aborted = r.aborted;
    if (!aborted) out.windows.push_back({t0, t1, spec, r.params});
    append(out, std::move(r));
    if (aborted) {
      out.failed_window = w;
      break;
    }
  }
  return out;
}

TrainResult train(const TrainConfig& cfg, const ProgressFn& progress) {
  switch (cfg.strategy) {
    case StrategyKind::full:
      return full_train(cfg, progress);
    case StrategyKind::curriculum:
      return curriculum_train(cfg, progress);
    case StrategyKind::causal:
      return causal_train(cfg, progress);
  }
  throw ConfigError("train.strategy: unknown strategy");
}

}  // namespace rlw
