// rlw: train, evaluate and compare RLW solvers from the command line.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rlw/commands.hpp"
#include "rlw/parallel.hpp"
#include "rlw/error.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string scenario;
  std::string variant;
  std::string strategy;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out = "out";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "Config file ([section] / key = value)");
  cmd->add_option("--scenario", f.scenario, "single-soliton, two-soliton or undular-bore");
  cmd->add_option("--variant", f.variant, "adaptive or conservative");
  cmd->add_option("--strategy", f.strategy, "full, curriculum or causal[:N]");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--override", f.overrides, "section.key=value, repeatable; applied last");
  cmd->add_option("--out", f.out, "Output directory");
}

rlw::ConfigDocument build_document(const RunFlags& f) {
  rlw::ConfigDocument doc;
  if (!f.config.empty()) doc = rlw::ConfigDocument::load(f.config);
  if (!f.scenario.empty()) doc.set("scenario.kind", f.scenario, "--scenario");
  if (!f.variant.empty()) doc.set("train.variant", f.variant, "--variant");
  if (!f.strategy.empty()) doc.set("train.strategy", f.strategy, "--strategy");
  if (f.seed) doc.set("train.seed", std::to_string(*f.seed), "--seed");
  for (const auto& o : f.overrides) doc.apply_override(o);
  return doc;
}

void add_grid_flags(CLI::App* cmd, rlw::EvalGrid& g) {
  cmd->add_option("--x-min", g.x_min);
  cmd->add_option("--x-max", g.x_max);
  cmd->add_option("--t-min", g.t_min);
  cmd->add_option("--t-max", g.t_max);
  cmd->add_option("--nx", g.nx, "Points in x (default 501)");
  cmd->add_option("--nt", g.nt, "Points in t (default 101)");
}

}  // namespace

int main(int argc, char** argv) {
  rlw::retain_heap_memory();
  CLI::App app{"Physics-informed and finite-difference solvers for the RLW equation.\n"
               "Worker threads: RLW_WORKERS (default: all cores)."};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Train a network and write all artifacts");
  add_run_flags(run, run_flags);

  RunFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "Finite-difference reference solve");
  add_run_flags(oracle, oracle_flags);

  std::string checkpoint;
  std::string eval_out = "eval";
  rlw::EvalGrid eval_grid;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a grid");
  eval->add_option("checkpoint", checkpoint, "checkpoint.json")->required();
  eval->add_option("--out", eval_out, "Output directory");
  add_grid_flags(eval, eval_grid);

  std::vector<std::string> sources;
  std::string compare_out = "compare";
  std::optional<double> peak_threshold;
  rlw::EvalGrid compare_grid;
  auto* compare = app.add_subcommand("compare", "Difference fields between two or more sources");
  compare->add_option("sources", sources, "checkpoint.json or field.csv files")->required();
  compare->add_option("--out", compare_out, "Output directory");
  compare->add_option("--peak-threshold", peak_threshold);
  add_grid_flags(compare, compare_grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rlw::exit_code::config;
  }

  try {
    if (*run) return rlw::cmd_run(build_document(run_flags), run_flags.out, std::cerr);
    if (*oracle) return rlw::cmd_oracle(build_document(oracle_flags), oracle_flags.out, std::cerr);
    if (*eval) return rlw::cmd_eval(checkpoint, eval_grid, eval_out, std::cerr);
    std::vector<std::filesystem::path> paths(sources.begin(), sources.end());
    return rlw::cmd_compare(paths, compare_grid, peak_threshold, compare_out, std::cerr);
  } catch (const rlw::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rlw::exit_code::config;
  } catch (const rlw::RegionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rlw::exit_code::region;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rlw::exit_code::aborted;
  }
}
