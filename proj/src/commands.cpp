#include "rlw/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "rlw/checkpoint.hpp"
#include "rlw/error.hpp"
#include "rlw/json_io.hpp"
#include "rlw/metrics.hpp"
#include "rlw/parallel.hpp"
#include "rlw/reference.hpp"

namespace rlw {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Files written so far, in order; the manifest lists exactly these.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
    out.precision(17);
    files_.push_back(name);
    return out;
  }
  void record(const std::string& name) { files_.push_back(name); }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_json(Outputs& out, const std::string& name, const Json& j) {
  auto f = out.open(name);
  f << j.dump(2) << '\n';
}

/// Everything derived from sampling a field on the output grid.
struct Sampled {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<std::vector<double>> u;  // u[j][i] at (xs[i], ts[j])
  std::vector<ConservedTriple> invariants;
  std::vector<PeakList> peaks;
};

Sampled sample_field(const SolutionField& field, std::vector<double> xs, std::vector<double> ts,
                     std::size_t conservation_grid, const RlwParams& rlw, double threshold) {
  Sampled s;
  s.xs = std::move(xs);
  s.ts = std::move(ts);
  const bool has_width = s.xs.size() >= 2 && s.xs.back() > s.xs.front();
  const auto cx = has_width ? linspace(s.xs.front(), s.xs.back(), conservation_grid)
                            : std::vector<double>{};
  const double h = cx.size() >= 2 ? cx[1] - cx[0] : 0.0;
  for (double t : s.ts) {
    s.u.push_back(field.values(s.xs, t));
    if (!has_width) continue;
    const Profile p = field.profile(t, cx);
    s.invariants.push_back(invariants(p.u, p.u_x, h, rlw));
    s.peaks.push_back(find_peaks(p.u, cx, threshold));
  }
  return s;
}

void write_field_csv(Outputs& out, const Sampled& s) {
  auto f = out.open("field.csv");
  f << "x,t,u\n";
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      f << num(s.xs[i]) << ',' << num(s.ts[j]) << ',' << num(s.u[j][i]) << '\n';
    }
  }
}

void write_invariants_csv(Outputs& out, const Sampled& s) {
  auto f = out.open("invariants.csv");
  f << "t,I1,I2,I3\n";
  for (std::size_t j = 0; j < s.invariants.size(); ++j) {
    const auto& c = s.invariants[j];
    f << num(s.ts[j]) << ',' << num(c.i1) << ',' << num(c.i2) << ',' << num(c.i3) << '\n';
  }
}

void write_peaks_csv(Outputs& out, const Sampled& s) {
  auto f = out.open("peaks.csv");
  f << "t,rank,position,amplitude\n";
  for (std::size_t j = 0; j < s.peaks.size(); ++j) {
    for (std::size_t r = 0; r < s.peaks[j].size(); ++r) {
      f << num(s.ts[j]) << ',' << r + 1 << ',' << num(s.peaks[j][r].position) << ','
        << num(s.peaks[j][r].amplitude) << '\n';
    }
  }
}

void write_history_csv(Outputs& out, const std::vector<HistoryEntry>& history) {
  auto f = out.open("history.csv");
  f << "epoch,window,stage,phase,l_pde,l_ic,l_bc,l_cons,total,lambda_pde,lambda_ic,lambda_bc\n";
  for (const auto& h : history) {
    f << h.epoch << ',' << h.window << ',' << h.stage << ','
      << (h.phase == Phase::adam ? "adam" : "lbfgs") << ',' << num(h.breakdown.l_pde) << ','
      << num(h.breakdown.l_ic) << ',' << num(h.breakdown.l_bc) << ',' << num(h.breakdown.l_cons)
      << ',' << num(h.total) << ',' << num(h.weights.lambda_pde) << ','
      << num(h.weights.lambda_ic) << ',' << num(h.weights.lambda_bc) << '\n';
  }
}

void write_empty_field_outputs(Outputs& out) {
  out.open("field.csv") << "x,t,u\n";
  out.open("invariants.csv") << "t,I1,I2,I3\n";
  out.open("peaks.csv") << "t,rank,position,amplitude\n";
}

Json norms_json(const ErrorNorms& n) { return Json{{"l2_rel", n.l2_rel}, {"linf_rel", n.linf_rel}}; }

Json peaks_json(const PeakList& peaks) {
  Json arr = Json::array();
  for (const auto& p : peaks) arr.push_back(Json{{"position", p.position}, {"amplitude", p.amplitude}});
  return arr;
}

/// u_ref(x, t) on the sampled grid, either closed form or another field.
using ReferenceFn = std::function<std::vector<double>(const std::vector<double>&, double)>;

Json field_metrics(const Sampled& s, const ReferenceFn& reference, const std::string& ref_name) {
  Json m;
  m["grid"] = Json{{"nx", s.xs.size()}, {"nt", s.ts.size()}};
  if (reference) {
    std::vector<double> pred, ref;
    for (std::size_t j = 0; j < s.ts.size(); ++j) {
      const auto r = reference(s.xs, s.ts[j]);
      pred.insert(pred.end(), s.u[j].begin(), s.u[j].end());
      ref.insert(ref.end(), r.begin(), r.end());
    }
    m["reference"] = ref_name;
    try {
      const ErrorNorms all = error_norms(pred, ref);
      m["l2_rel"] = all.l2_rel;
      m["linf_rel"] = all.linf_rel;
      const std::size_t n = s.xs.size();
      const ErrorNorms last = error_norms(std::span(pred).last(n), std::span(ref).last(n));
      m["final_time"] = norms_json(last);
    } catch (const UsageError& e) {
      m["reference_error"] = e.what();
    }
  } else {
    m["reference"] = nullptr;
  }
  if (!s.invariants.empty()) {
    m["invariants_initial"] = to_json(s.invariants.front());
    m["invariants_final"] = to_json(s.invariants.back());
    try {
      std::array<double, 3> worst{0.0, 0.0, 0.0};
      std::array<double, 3> final_pct{0.0, 0.0, 0.0};
      for (const auto& inv : s.invariants) {
        final_pct = conservation_error_pct(inv, s.invariants.front());
        for (int k = 0; k < 3; ++k) worst[k] = std::max(worst[k], final_pct[k]);
      }
      m["conservation_drift_pct"] =
          Json{{"I1", final_pct[0]}, {"I2", final_pct[1]}, {"I3", final_pct[2]}};
      m["conservation_drift_max_pct"] = Json{{"I1", worst[0]}, {"I2", worst[1]}, {"I3", worst[2]}};
    } catch (const UsageError& e) {
      m["conservation_drift_pct"] = nullptr;
      m["conservation_drift_error"] = e.what();
    }
    m["peaks_initial"] = peaks_json(s.peaks.front());
    m["peaks_final"] = peaks_json(s.peaks.back());
  }
  return m;
}

Json loss_json(const std::vector<HistoryEntry>& history) {
  if (history.empty()) return nullptr;
  auto entry = [](const HistoryEntry& h) {
    return Json{{"epoch", h.epoch},
                {"total", h.total},
                {"component_sum", h.breakdown.unweighted_sum()},
                {"l_pde", h.breakdown.l_pde},
                {"l_ic", h.breakdown.l_ic},
                {"l_bc", h.breakdown.l_bc},
                {"l_cons", h.breakdown.l_cons}};
  };
  Json j{{"initial", entry(history.front())}, {"final", entry(history.back())}};
  const double last = history.back().breakdown.unweighted_sum();
  j["component_sum_reduction"] =
      last > 0.0 ? Json(history.front().breakdown.unweighted_sum() / last) : Json(nullptr);
  return j;
}

Json fd_json(const FdConfig& c) {
  return Json{{"scenario", to_json(c.scenario)},
              {"dx", c.dx},
              {"dt", c.dt},
              {"sample_times", c.sample_times.size()}};
}

ReferenceFn exact_reference(const ScenarioConfig& sc) {
  return [sc](const std::vector<double>& xs, double t) {
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) r[i] = exact_single_soliton(xs[i], t, sc);
    return r;
  };
}

ReferenceFn field_reference(std::shared_ptr<SolutionField> f) {
  return [f](const std::vector<double>& xs, double t) { return f->values(xs, t); };
}

void write_manifest(Outputs& out, const std::string& command, int code, const std::string& message,
                    Json config, Json timings, const std::vector<std::string>& warnings) {
  Json m;
  m["command"] = command;
  m["exit_code"] = code;
  m["status"] = code == exit_code::ok ? "ok" : code == exit_code::aborted ? "aborted" : "error";
  m["message"] = message;
  m["out_dir"] = fs::absolute(out.dir()).string();
  m["config"] = std::move(config);
  m["workers"] = worker_count();
  m["timings_s"] = std::move(timings);
  m["warnings"] = warnings;
  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  m["files"] = files;
  write_json(out, "manifest.json", m);
}

ProgressFn progress_logger(std::ostream& log) {
  return [&log](const HistoryEntry& h) {
    const bool adam = h.phase == Phase::adam;
    if (h.epoch % (adam ? 500 : 50) != 0) return;
    log << "window " << h.window << " stage " << h.stage << (adam ? " adam " : " lbfgs ")
        << "epoch " << h.epoch << " total " << num(h.total) << " components "
        << num(h.breakdown.unweighted_sum()) << '\n';
  };
}

/// Output times inside [t0, t1] from the configured uniform grid.
std::vector<double> times_within(const std::vector<double>& ts, double t0, double t1) {
  const Region probe{0.0, 0.0, t0, t1};
  std::vector<double> r;
  for (double t : ts) {
    if (probe.contains(0.0, t)) r.push_back(t);
  }
  return r;
}

int report(std::ostream& log, const std::string& what, int code) {
  log << "error: " << what << '\n';
  return code;
}

}  // namespace

int cmd_run(const ConfigDocument& doc, const fs::path& out_dir, std::ostream& log) {
  const auto t_start = Clock::now();
  RunConfig run;
  try {
    run = resolve_run_config(doc);
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  }
  try {
    Outputs out(out_dir);
    const ScenarioConfig& sc = run.train.scenario;
    log << "training " << to_string(sc.kind) << " " << to_string(run.train.variant) << " "
        << to_string(run.train.strategy) << " seed " << run.train.seed << '\n';

    const auto t_train = Clock::now();
    TrainResult result = train(run.train, progress_logger(log));
    const double train_s = seconds_since(t_train);
    if (result.aborted) log << "training aborted: " << result.message << '\n';
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';

    const Checkpoint cp = Checkpoint::from_result(run.train, result);
    checkpoint_save(cp, out.dir() / "checkpoint.json");
    out.record("checkpoint.json");
    write_history_csv(out, result.history);

    Json metrics;
    metrics["scenario"] = to_string(sc.kind);
    metrics["variant"] = to_string(run.train.variant);
    metrics["strategy"] = to_string(run.train.strategy);
    metrics["seed"] = run.train.seed;
    metrics["aborted"] = result.aborted;
    metrics["windows_trained"] = result.windows.size();
    metrics["loss"] = loss_json(result.history);

    double oracle_s = 0.0;
    const auto t_out = Clock::now();
    if (result.windows.empty()) {
      write_empty_field_outputs(out);
    } else {
      const SolutionField field = result.field(sc);
      const Region& reg = field.region();
      const auto xs = linspace(sc.x_min, sc.x_max, run.output.grid_x);
      const auto all_ts = linspace(0.0, sc.t_final, run.output.grid_t);
      const Sampled s = sample_field(field, xs, times_within(all_ts, reg.t_min, reg.t_max),
                                     run.train.conservation_grid, sc.rlw, run.peak_threshold());
      write_field_csv(out, s);
      write_invariants_csv(out, s);
      write_peaks_csv(out, s);

      ReferenceFn reference;
      std::string ref_name;
      if (sc.has_exact_solution()) {
        reference = exact_reference(sc);
        ref_name = "exact";
      } else if (run.output.oracle) {
        const auto t_oracle = Clock::now();
        try {
          reference = field_reference(std::make_shared<SolutionField>(fd_solve(run.oracle)));
          ref_name = "oracle";
        } catch (const InstabilityError& e) {
          log << "warning: oracle unavailable: " << e.what() << '\n';
          result.warnings.push_back(std::string("oracle: ") + e.what());
        }
        oracle_s = seconds_since(t_oracle);
      }
      metrics["field"] = field_metrics(s, reference, ref_name);
      metrics["window_continuity_max_jump"] = max_window_jump(field, xs);
    }
    write_json(out, "metrics.json", metrics);

    const int code = result.aborted ? exit_code::aborted : exit_code::ok;
    Json timings{{"train", train_s},
                 {"oracle", oracle_s},
                 {"outputs", seconds_since(t_out) - oracle_s},
                 {"total", seconds_since(t_start)}};
    Json config{{"train", to_json(run.train)},
                {"output", Json{{"grid_x", run.output.grid_x},
                                {"grid_t", run.output.grid_t},
                                {"peak_threshold", run.peak_threshold()},
                                {"oracle", run.output.oracle}}}};
    if (!sc.has_exact_solution() && run.output.oracle) config["oracle"] = fd_json(run.oracle);
    write_manifest(out, "run", code, result.message, std::move(config), std::move(timings),
                   result.warnings);
    log << (code == exit_code::ok ? "done: " : "partial outputs in ") << out.dir().string() << '\n';
    return code;
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  } catch (const RegionError& e) {
    return report(log, e.what(), exit_code::region);
  }
}

int cmd_eval(const fs::path& checkpoint, const EvalGrid& grid, const fs::path& out_dir,
             std::ostream& log) {
  const auto t_start = Clock::now();
  Checkpoint cp;
  try {
    cp = checkpoint_load(checkpoint);
  } catch (const LoadError& e) {
    return report(log, e.what(), exit_code::config);
  }
  if (cp.windows.empty()) {
    return report(log, "checkpoint '" + checkpoint.string() + "' holds no trained window",
                  exit_code::region);
  }
  if (grid.nx == 0 || grid.nt == 0) {
    return report(log, "evaluation grid needs at least one point per axis", exit_code::region);
  }
  try {
    const SolutionField field = cp.field();
    const Region& reg = field.region();
    const double x0 = grid.x_min.value_or(reg.x_min), x1 = grid.x_max.value_or(reg.x_max);
    const double t0 = grid.t_min.value_or(reg.t_min), t1 = grid.t_max.value_or(reg.t_max);
    if (x1 < x0 || t1 < t0) {
      return report(log, "evaluation grid bounds are reversed", exit_code::region);
    }
    if (!reg.contains(x0, t0) || !reg.contains(x1, t1)) {
      std::ostringstream msg;
      msg << "evaluation grid [" << x0 << ", " << x1 << "] x [" << t0 << ", " << t1
          << "] leaves the trained region [" << reg.x_min << ", " << reg.x_max << "] x ["
          << reg.t_min << ", " << reg.t_max << "]";
      return report(log, msg.str(), exit_code::region);
    }
    Outputs out(out_dir);
    const ScenarioConfig& sc = cp.config.scenario;
    const double threshold = default_peak_threshold(sc.kind);
    const Sampled s = sample_field(field, linspace(x0, x1, grid.nx), linspace(t0, t1, grid.nt),
                                   cp.config.conservation_grid, sc.rlw, threshold);
    write_field_csv(out, s);
    write_invariants_csv(out, s);
    write_peaks_csv(out, s);

    Json metrics;
    metrics["scenario"] = to_string(sc.kind);
    metrics["source"] = checkpoint.filename().string();
    metrics["field"] = sc.has_exact_solution() ? field_metrics(s, exact_reference(sc), "exact")
                                               : field_metrics(s, {}, "");
    if (sc.has_exact_solution()) {
      // Flat copies for scripts that only want the headline norms.
      metrics["l2_rel"] = metrics["field"].value("l2_rel", Json(nullptr));
      metrics["linf_rel"] = metrics["field"].value("linf_rel", Json(nullptr));
    }
    write_json(out, "metrics.json", metrics);
    Json config{{"checkpoint", fs::absolute(checkpoint).string()},
                {"grid", Json{{"x_min", x0}, {"x_max", x1}, {"t_min", t0}, {"t_max", t1},
                              {"nx", grid.nx}, {"nt", grid.nt}}},
                {"train", to_json(cp.config)}};
    write_manifest(out, "eval", exit_code::ok, "", std::move(config),
                   Json{{"total", seconds_since(t_start)}}, {});
    return exit_code::ok;
  } catch (const RegionError& e) {
    return report(log, e.what(), exit_code::region);
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  }
}

SolutionField load_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x,t,u") {
    throw LoadError(path.string() + ": expected header 'x,t,u'");
  }
  GridSamples g;
  std::vector<double> xs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double x, t, u;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> x >> c1 >> t >> c2 >> u) || c1 != ',' || c2 != ',') {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (g.times.empty() || t != g.times.back()) {
      if (!g.times.empty() && g.values.back().size() != xs.size()) {
        throw LoadError(path.string() + ": time " + num(g.times.back()) + " has " +
                        std::to_string(g.values.back().size()) + " rows, expected " +
                        std::to_string(xs.size()));
      }
      g.times.push_back(t);
      g.values.emplace_back();
    }
    if (g.times.size() == 1) {
      xs.push_back(x);
    } else if (g.values.back().size() >= xs.size() || x != xs[g.values.back().size()]) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) +
                      ": x does not repeat the first time block");
    }
    g.values.back().push_back(u);
  }
  if (g.times.empty() || xs.size() < 2 || g.values.back().size() != xs.size()) {
    throw LoadError(path.string() + ": not a rectangular field with at least two x points");
  }
  g.x_min = xs.front();
  g.nx = xs.size();
  g.dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - (g.x_min + g.dx * static_cast<double>(i))) > 1e-9 * (1.0 + std::abs(xs[i]))) {
      throw LoadError(path.string() + ": x grid is not uniform");
    }
  }
  try {
    return SolutionField::from_grid(std::move(g));
  } catch (const UsageError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

int cmd_compare(const std::vector<fs::path>& sources, const EvalGrid& grid,
                std::optional<double> peak_threshold, const fs::path& out_dir, std::ostream& log) {
  const auto t_start = Clock::now();
  if (sources.size() < 2) return report(log, "compare needs at least two sources", exit_code::config);
  std::vector<SolutionField> fields;
  std::optional<ScenarioKind> kind;
  try {
    for (const auto& p : sources) {
      if (p.extension() == ".csv") {
        fields.push_back(load_field_csv(p));
      } else {
        const Checkpoint cp = checkpoint_load(p);
        if (cp.windows.empty()) {
          return report(log, "checkpoint '" + p.string() + "' holds no trained window",
                        exit_code::region);
        }
        if (!kind) kind = cp.config.scenario.kind;
        fields.push_back(cp.field());
      }
    }
  } catch (const LoadError& e) {
    return report(log, e.what(), exit_code::config);
  }

  Region overlap = fields.front().region();
  for (const auto& f : fields) {
    const Region& r = f.region();
    overlap.x_min = std::max(overlap.x_min, r.x_min);
    overlap.x_max = std::min(overlap.x_max, r.x_max);
    overlap.t_min = std::max(overlap.t_min, r.t_min);
    overlap.t_max = std::min(overlap.t_max, r.t_max);
  }
  if (!(overlap.x_min < overlap.x_max) || overlap.t_min > overlap.t_max) {
    return report(log, "sources share no common region", exit_code::region);
  }
  const double x0 = grid.x_min.value_or(overlap.x_min), x1 = grid.x_max.value_or(overlap.x_max);
  const double t0 = grid.t_min.value_or(overlap.t_min), t1 = grid.t_max.value_or(overlap.t_max);
  if (!(x0 < x1) || t1 < t0 || !overlap.contains(x0, t0) || !overlap.contains(x1, t1) ||
      grid.nx < 2 || grid.nt == 0) {
    return report(log, "comparison grid is empty or outside the common region", exit_code::region);
  }
  const double threshold =
      peak_threshold.value_or(kind ? default_peak_threshold(*kind) : kBorePeakThreshold);

  try {
    Outputs out(out_dir);
    const auto xs = linspace(x0, x1, grid.nx);
    const auto ts = linspace(t0, t1, grid.nt);
    std::vector<std::vector<std::vector<double>>> u(fields.size());
    std::vector<std::vector<PeakList>> peaks(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      for (double t : ts) {
        u[k].push_back(fields[k].values(xs, t));
        peaks[k].push_back(find_peaks(u[k].back(), xs, threshold));
      }
    }

    auto norms = out.open("norms.csv");
    norms << "a,b,t,linf_abs,l2_abs,linf_rel,l2_rel\n";
    auto pdiff = out.open("peaks_diff.csv");
    pdiff << "a,b,t,rank,position_a,amplitude_a,position_b,amplitude_b,d_position,d_amplitude\n";
    Json pairs = Json::array();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t b = a + 1; b < fields.size(); ++b) {
        auto diff = out.open("diff_" + std::to_string(a) + "_" + std::to_string(b) + ".csv");
        diff << "x,t,u_a,u_b,diff\n";
        double max_abs = 0.0;
        std::vector<double> all_a, all_b;
        for (std::size_t j = 0; j < ts.size(); ++j) {
          double linf = 0.0, sq = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = u[a][j][i] - u[b][j][i];
            diff << num(xs[i]) << ',' << num(ts[j]) << ',' << num(u[a][j][i]) << ','
                 << num(u[b][j][i]) << ',' << num(d) << '\n';
            linf = std::max(linf, std::abs(d));
            sq += d * d;
          }
          max_abs = std::max(max_abs, linf);
          ErrorNorms rel{nan, nan};
          try {
            rel = error_norms(u[a][j], u[b][j]);
          } catch (const UsageError&) {
          }
          norms << a << ',' << b << ',' << num(ts[j]) << ',' << num(linf) << ',' << num(std::sqrt(sq))
                << ',' << num(rel.linf_rel) << ',' << num(rel.l2_rel) << '\n';
          all_a.insert(all_a.end(), u[a][j].begin(), u[a][j].end());
          all_b.insert(all_b.end(), u[b][j].begin(), u[b][j].end());

          const auto& pa = peaks[a][j];
          const auto& pb = peaks[b][j];
          for (std::size_t r = 0; r < std::max(pa.size(), pb.size()); ++r) {
            const Peak qa = r < pa.size() ? pa[r] : Peak{nan, nan};
            const Peak qb = r < pb.size() ? pb[r] : Peak{nan, nan};
            pdiff << a << ',' << b << ',' << num(ts[j]) << ',' << r + 1 << ',' << num(qa.position)
                  << ',' << num(qa.amplitude) << ',' << num(qb.position) << ','
                  << num(qb.amplitude) << ',' << num(qa.position - qb.position) << ','
                  << num(qa.amplitude - qb.amplitude) << '\n';
          }
        }
        Json pj{{"a", a}, {"b", b}, {"max_abs_diff", max_abs}};
        try {
          const ErrorNorms n = error_norms(all_a, all_b);
          pj["l2_rel"] = n.l2_rel;
          pj["linf_rel"] = n.linf_rel;
        } catch (const UsageError&) {
          pj["l2_rel"] = nullptr;
          pj["linf_rel"] = nullptr;
        }
        pj["peaks_final_a"] = peaks_json(peaks[a].back());
        pj["peaks_final_b"] = peaks_json(peaks[b].back());
        pairs.push_back(std::move(pj));
      }
    }
    norms.close();
    pdiff.close();

    Json src = Json::array();
    for (const auto& p : sources) src.push_back(p.string());
    Json region{{"x_min", x0}, {"x_max", x1}, {"t_min", t0}, {"t_max", t1}};
    write_json(out, "metrics.json",
               Json{{"sources", src}, {"region", region}, {"peak_threshold", threshold},
                    {"pairs", pairs}});
    write_manifest(out, "compare", exit_code::ok, "",
                   Json{{"sources", src}, {"region", region}, {"nx", grid.nx}, {"nt", grid.nt}},
                   Json{{"total", seconds_since(t_start)}}, {});
    return exit_code::ok;
  } catch (const RegionError& e) {
    return report(log, e.what(), exit_code::region);
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  }
}

int cmd_oracle(const ConfigDocument& doc, const fs::path& out_dir, std::ostream& log) {
  const auto t_start = Clock::now();
  RunConfig run;
  try {
    run = resolve_run_config(doc);
    run.oracle.validate();
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  }
  try {
    Outputs out(out_dir);
    const ScenarioConfig& sc = run.oracle.scenario;
    log << "oracle " << to_string(sc.kind) << " dx " << run.oracle.dx << " dt " << run.oracle.dt
        << '\n';
    const auto t_solve = Clock::now();
    std::optional<SolutionField> field;
    std::string message;
    try {
      field = fd_solve(run.oracle);
    } catch (const InstabilityError& e) {
      message = e.what();
      log << "oracle aborted: " << message << '\n';
    }
    const double solve_s = seconds_since(t_solve);
    Json metrics{{"scenario", to_string(sc.kind)},
                 {"dx", run.oracle.dx},
                 {"dt", run.oracle.dt},
                 {"aborted", !field.has_value()}};
    if (field) {
      const Sampled s = sample_field(*field, linspace(sc.x_min, sc.x_max, run.output.grid_x),
                                     run.oracle.sample_times, run.train.conservation_grid, sc.rlw,
                                     run.peak_threshold());
      write_field_csv(out, s);
      write_invariants_csv(out, s);
      write_peaks_csv(out, s);
      metrics["field"] = sc.has_exact_solution() ? field_metrics(s, exact_reference(sc), "exact")
                                                 : field_metrics(s, {}, "");
    } else {
      write_empty_field_outputs(out);
    }
    write_json(out, "metrics.json", metrics);
    const int code = field ? exit_code::ok : exit_code::aborted;
    write_manifest(out, "oracle", code, message, fd_json(run.oracle),
                   Json{{"solve", solve_s}, {"total", seconds_since(t_start)}}, {});
    return code;
  } catch (const ConfigError& e) {
    return report(log, e.what(), exit_code::config);
  } catch (const RegionError& e) {
    return report(log, e.what(), exit_code::region);
  }
}

}  // namespace rlw
