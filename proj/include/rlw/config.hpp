#pragma once

// Run configuration files. Grammar, one item per line:
//
//   # comment            (also after a value)
//   [section]
//   key = value
//
// Keys are addressed as section.key. Overrides use the same dotted form
// ("train.seed=42") and replace file values. Every scenario default comes
// from the built-in tables, so an empty file plus scenario.kind is a
// complete configuration.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlw/reference.hpp"
#include "rlw/train.hpp"

namespace rlw {

struct ConfigEntry {
  std::string value;
  std::string origin;  // "file.cfg:12" or "override"
};

struct ConfigDocument {
  std::map<std::string, ConfigEntry> entries;

  /// Throws ConfigError with the line number on malformed input.
  static ConfigDocument parse(const std::string& text, const std::string& source);
  static ConfigDocument load(const std::string& path);
  /// "section.key=value".
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& origin);
};

struct OutputConfig {
  std::size_t grid_x = 501;
  std::size_t grid_t = 101;
  std::optional<double> peak_threshold;  // scenario default when unset
  bool oracle = true;                    // compare against the FD oracle when no exact solution
};

struct RunConfig {
  TrainConfig train;
  FdConfig oracle;
  OutputConfig output;

  double peak_threshold() const;
};

/// Builds the run from defaults plus document values. scenario.kind is
/// required; unknown keys and bad values raise ConfigError naming the key
/// and where it was set.
RunConfig resolve_run_config(const ConfigDocument& doc);

/// Every accepted dotted key, for documentation and diagnostics.
const std::vector<std::string>& known_config_keys();

}  // namespace rlw
