#include "rlw/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "rlw/error.hpp"
#include "rlw/metrics.hpp"

namespace rlw {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const ConfigEntry& e, const std::string& want) {
  throw ConfigError(e.origin + ": " + key + ": expected " + want + ", got '" + e.value + "'");
}

double as_real(const std::string& key, const ConfigEntry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    bad_value(key, e, "a finite real");
  }
  return v;
}

template <typename T>
T as_integer(const std::string& key, const ConfigEntry& e, T min_value) {
  T v{};
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end || v < min_value) {
    bad_value(key, e, "an integer >= " + std::to_string(min_value));
  }
  return v;
}

bool as_bool(const std::string& key, const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off") return false;
  bad_value(key, e, "true or false");
}

using Setter = std::function<void(RunConfig&, const std::string&, const ConfigEntry&)>;

// Order matters: scenario geometry first, then everything that may depend on it.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"scenario.kind", [](RunConfig&, const std::string&, const ConfigEntry&) {}},
      {"scenario.slope",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.bore.d = as_real(k, e);
       }},
      {"scenario.epsilon",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.rlw.epsilon = as_real(k, e);
       }},
      {"scenario.mu",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.rlw.mu = as_real(k, e);
       }},
      {"scenario.x_min",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.x_min = as_real(k, e);
       }},
      {"scenario.x_max",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.x_max = as_real(k, e);
       }},
      {"scenario.t_final",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.t_final = as_real(k, e);
       }},
      {"scenario.d",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.single.d = as_real(k, e);
       }},
      {"scenario.x0",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.single.x0 = as_real(k, e);
       }},
      {"scenario.a1",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.two.a1 = as_real(k, e);
       }},
      {"scenario.a2",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.two.a2 = as_real(k, e);
       }},
      {"scenario.x1",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.two.x1 = as_real(k, e);
       }},
      {"scenario.x2",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.two.x2 = as_real(k, e);
       }},
      {"scenario.u0",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.bore.u0 = as_real(k, e);
       }},
      {"scenario.xc",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.scenario.bore.xc = as_real(k, e);
       }},
      {"train.variant", [](RunConfig&, const std::string&, const ConfigEntry&) {}},
      {"train.strategy",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         std::string v = e.value;
         const auto colon = v.find(':');
         if (colon != std::string::npos) {
           ConfigEntry count{v.substr(colon + 1), e.origin};
           r.train.windows = as_integer<int>(k, count, 1);
           v = v.substr(0, colon);
         }
         try {
           r.train.strategy = parse_strategy(v);
         } catch (const ConfigError&) {
           bad_value(k, e, "full, curriculum, causal or causal:N");
         }
       }},
      {"train.windows",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.windows = as_integer<int>(k, e, 1);
       }},
      {"train.adam_epochs",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.adam_epochs = as_integer<long>(k, e, 0);
       }},
      {"train.lbfgs_iters",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.lbfgs_iters = as_integer<long>(k, e, 0);
       }},
      {"train.adam_lr",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.adam_lr = as_real(k, e);
       }},
      {"train.lambda_cons",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.lambda_cons = as_real(k, e);
       }},
      {"train.stage2_step_scale",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.stage2_step_scale = as_real(k, e);
       }},
      {"train.seed",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.seed = as_integer<std::uint64_t>(k, e, 0);
       }},
      {"train.chunk_size",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.chunk_size = as_integer<std::size_t>(k, e, 1);
       }},
      {"model.hidden_layers",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.hidden_layers = as_integer<int>(k, e, 1);
       }},
      {"model.width",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.width = as_integer<int>(k, e, 1);
       }},
      {"model.normalize_inputs",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.normalize_inputs = as_bool(k, e);
       }},
      {"points.interior",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.n_interior = as_integer<std::size_t>(k, e, 1);
       }},
      {"points.initial",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.n_initial = as_integer<std::size_t>(k, e, 1);
       }},
      {"points.boundary",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.n_boundary = as_integer<std::size_t>(k, e, 2);
       }},
      {"conservation.times",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.conservation_times = as_integer<std::size_t>(k, e, 1);
       }},
      {"conservation.grid",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.conservation_grid = as_integer<std::size_t>(k, e, 2);
       }},
      {"conservation.analytic_reference",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.analytic_reference = as_bool(k, e);
       }},
      {"conservation.resample_times",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.train.resample_conservation_times = as_bool(k, e);
       }},
      {"output.grid_x",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.output.grid_x = as_integer<std::size_t>(k, e, 2);
       }},
      {"output.grid_t",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.output.grid_t = as_integer<std::size_t>(k, e, 2);
       }},
      {"output.peak_threshold",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         const double v = as_real(k, e);
         if (v < 0.0) bad_value(k, e, "a non-negative real");
         r.output.peak_threshold = v;
       }},
      {"oracle.enabled",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.output.oracle = as_bool(k, e);
       }},
      {"oracle.dx",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.oracle.dx = as_real(k, e);
       }},
      {"oracle.dt",
       [](RunConfig& r, const std::string& k, const ConfigEntry& e) {
         r.oracle.dt = as_real(k, e);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string origin = source + ":" + std::to_string(line_no);
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(origin + ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    if (section.empty() && key.find('.') == std::string::npos) {
      throw ConfigError(origin + ": key '" + key + "' appears before any [section]");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.entries.contains(full)) {
      throw ConfigError(origin + ": duplicate key '" + full + "' (first set at " +
                        doc.entries.at(full).origin + ")");
    }
    doc.set(full, value, origin);
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void ConfigDocument::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) {
    throw ConfigError("override '" + assignment + "': key must be section.key");
  }
  set(key, trim(assignment.substr(eq + 1)), "override '" + assignment + "'");
}

void ConfigDocument::set(const std::string& key, const std::string& value,
                         const std::string& origin) {
  entries[key] = ConfigEntry{value, origin};
}

double RunConfig::peak_threshold() const {
  return output.peak_threshold.value_or(default_peak_threshold(train.scenario.kind));
}

RunConfig resolve_run_config(const ConfigDocument& doc) {
  for (const auto& [key, entry] : doc.entries) {
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(entry.origin + ": unknown key '" + key + "'");
    }
  }
  const auto kind_it = doc.entries.find("scenario.kind");
  if (kind_it == doc.entries.end()) {
    throw ConfigError("missing required key 'scenario.kind' (single-soliton, two-soliton or "
                      "undular-bore)");
  }
  ScenarioKind kind;
  try {
    kind = parse_scenario_kind(kind_it->second.value);
  } catch (const std::exception&) {
    bad_value("scenario.kind", kind_it->second, "single-soliton, two-soliton or undular-bore");
  }
  Variant variant = Variant::adaptive;
  if (const auto v = doc.entries.find("train.variant"); v != doc.entries.end()) {
    try {
      variant = parse_variant(v->second.value);
    } catch (const ConfigError&) {
      bad_value("train.variant", v->second, "adaptive or conservative");
    }
  }

  RunConfig run;
  run.train = TrainConfig::defaults(ScenarioConfig::defaults(kind), variant);
  bool oracle_seeded = false;
  for (const auto& [key, setter] : setters()) {
    if (!oracle_seeded && key.rfind("oracle.", 0) == 0) {
      run.oracle = FdConfig::defaults(run.train.scenario);
      oracle_seeded = true;
    }
    const auto it = doc.entries.find(key);
    if (it != doc.entries.end()) setter(run, key, it->second);
  }
  run.oracle.scenario = run.train.scenario;
  run.oracle.sample_times = linspace(0.0, run.train.scenario.t_final, run.output.grid_t);
  run.train.validate();
  return run;
}

}  // namespace rlw
