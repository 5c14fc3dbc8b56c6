#pragma once

// The four CLI subcommands as library calls. Each returns a process exit
// code and writes its artifacts plus manifest.json into out_dir.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlw/config.hpp"

namespace rlw {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int aborted = 3;
inline constexpr int region = 4;
}  // namespace exit_code

/// Trains per the resolved document and writes field.csv, invariants.csv,
/// history.csv, peaks.csv, metrics.json, checkpoint.json, manifest.json.
/// An aborted run still writes whatever the finished windows support.
int cmd_run(const ConfigDocument& doc, const std::filesystem::path& out_dir, std::ostream& log);

/// Evaluation grid; unset bounds default to the field's region.
struct EvalGrid {
  std::optional<double> x_min, x_max, t_min, t_max;
  std::size_t nx = 501;
  std::size_t nt = 101;
};

int cmd_eval(const std::filesystem::path& checkpoint, const EvalGrid& grid,
             const std::filesystem::path& out_dir, std::ostream& log);

/// Sources are checkpoint .json files or field.csv files.
int cmd_compare(const std::vector<std::filesystem::path>& sources, const EvalGrid& grid,
                std::optional<double> peak_threshold, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Finite-difference solve of the configured scenario.
int cmd_oracle(const ConfigDocument& doc, const std::filesystem::path& out_dir, std::ostream& log);

/// Reads a field.csv (x,t,u, x fastest) back into a grid field.
/// Throws LoadError when the rows do not form a uniform rectangle.
SolutionField load_field_csv(const std::filesystem::path& path);

}  // namespace rlw
