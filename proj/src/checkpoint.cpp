#include "rlw/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rlw/error.hpp"
#include "rlw/json_io.hpp"

namespace rlw {
namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw LoadError(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get_as(const Json& j, const char* key, const std::string& where) {
  try {
    return require(j, key, where).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(where + "." + key + ": " + e.what());
  }
}

double get_double(const Json& j, const char* key, const std::string& where) {
  return parse_double(require(j, key, where), where + "." + key);
}

Json hex_array(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(hex_double(x));
  return a;
}

std::vector<double> double_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw LoadError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_double(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json scaling_json(const InputScaling& s) {
  return Json{{"x_center", hex_double(s.x_center)},
              {"x_scale", hex_double(s.x_scale)},
              {"t_center", hex_double(s.t_center)},
              {"t_scale", hex_double(s.t_scale)}};
}

InputScaling scaling_from(const Json& j, const std::string& where) {
  return {get_double(j, "x_center", where), get_double(j, "x_scale", where),
          get_double(j, "t_center", where), get_double(j, "t_scale", where)};
}

std::string_view phase_name(Phase p) { return p == Phase::adam ? "adam" : "lbfgs"; }

Phase parse_phase(const std::string& s) {
  if (s == "adam") return Phase::adam;
  if (s == "lbfgs") return Phase::lbfgs;
  throw LoadError("history: unknown phase '" + s + "'");
}

const char* const kHistoryColumns[] = {"epoch",  "window", "stage",     "phase",
                                       "l_pde",  "l_ic",   "l_bc",      "l_cons",
                                       "total",  "lambda_pde", "lambda_ic", "lambda_bc"};

}  // namespace

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
      throw LoadError(what + ": cannot parse '" + s + "' as a real");
    }
    return v;
  }
  throw LoadError(what + ": expected a real");
}

Json to_json(const ScenarioConfig& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  j["epsilon"] = s.rlw.epsilon;
  j["mu"] = s.rlw.mu;
  j["x_min"] = s.x_min;
  j["x_max"] = s.x_max;
  j["t_final"] = s.t_final;
  j["single"] = {{"d", s.single.d}, {"x0", s.single.x0}};
  j["two"] = {{"a1", s.two.a1}, {"a2", s.two.a2}, {"x1", s.two.x1}, {"x2", s.two.x2}};
  j["bore"] = {{"u0", s.bore.u0}, {"xc", s.bore.xc}, {"d", s.bore.d}};
  return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
  const std::string w = "scenario";
  ScenarioConfig s;
  try {
    s.kind = parse_scenario_kind(get_as<std::string>(j, "kind", w));
  } catch (const UsageError& e) {
    throw LoadError(w + ".kind: " + e.what());
  }
  s.rlw.epsilon = get_double(j, "epsilon", w);
  s.rlw.mu = get_double(j, "mu", w);
  s.x_min = get_double(j, "x_min", w);
  s.x_max = get_double(j, "x_max", w);
  s.t_final = get_double(j, "t_final", w);
  const Json& single = require(j, "single", w);
  s.single.d = get_double(single, "d", w + ".single");
  s.single.x0 = get_double(single, "x0", w + ".single");
  const Json& two = require(j, "two", w);
  s.two.a1 = get_double(two, "a1", w + ".two");
  s.two.a2 = get_double(two, "a2", w + ".two");
  s.two.x1 = get_double(two, "x1", w + ".two");
  s.two.x2 = get_double(two, "x2", w + ".two");
  const Json& bore = require(j, "bore", w);
  s.bore.u0 = get_double(bore, "u0", w + ".bore");
  s.bore.xc = get_double(bore, "xc", w + ".bore");
  s.bore.d = get_double(bore, "d", w + ".bore");
  return s;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["variant"] = std::string(to_string(c.variant));
  j["strategy"] = std::string(to_string(c.strategy));
  j["windows"] = c.windows;
  j["hidden_layers"] = c.hidden_layers;
  j["width"] = c.width;
  j["normalize_inputs"] = c.normalize_inputs;
  j["n_interior"] = c.n_interior;
  j["n_initial"] = c.n_initial;
  j["n_boundary"] = c.n_boundary;
  j["adam_epochs"] = c.adam_epochs;
  j["lbfgs_iters"] = c.lbfgs_iters;
  j["adam_lr"] = c.adam_lr;
  j["lambda_cons"] = c.lambda_cons;
  j["stage2_step_scale"] = c.stage2_step_scale;
  j["conservation_times"] = c.conservation_times;
  j["conservation_grid"] = c.conservation_grid;
  j["analytic_reference"] = c.analytic_reference;
  j["resample_conservation_times"] = c.resample_conservation_times;
  j["seed"] = c.seed;
  j["chunk_size"] = c.chunk_size;
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  const std::string w = "train";
  TrainConfig c;
  try {
    c.variant = parse_variant(get_as<std::string>(j, "variant", w));
    c.strategy = parse_strategy(get_as<std::string>(j, "strategy", w));
  } catch (const ConfigError& e) {
    throw LoadError(w + ": " + e.what());
  }
  c.windows = get_as<int>(j, "windows", w);
  c.hidden_layers = get_as<int>(j, "hidden_layers", w);
  c.width = get_as<int>(j, "width", w);
  c.normalize_inputs = get_as<bool>(j, "normalize_inputs", w);
  c.n_interior = get_as<std::size_t>(j, "n_interior", w);
  c.n_initial = get_as<std::size_t>(j, "n_initial", w);
  c.n_boundary = get_as<std::size_t>(j, "n_boundary", w);
  c.adam_epochs = get_as<long>(j, "adam_epochs", w);
  c.lbfgs_iters = get_as<long>(j, "lbfgs_iters", w);
  c.adam_lr = get_double(j, "adam_lr", w);
  c.lambda_cons = get_double(j, "lambda_cons", w);
  c.stage2_step_scale = get_double(j, "stage2_step_scale", w);
  c.conservation_times = get_as<std::size_t>(j, "conservation_times", w);
  c.conservation_grid = get_as<std::size_t>(j, "conservation_grid", w);
  c.analytic_reference = get_as<bool>(j, "analytic_reference", w);
  c.resample_conservation_times = get_as<bool>(j, "resample_conservation_times", w);
  c.seed = get_as<std::uint64_t>(j, "seed", w);
  c.chunk_size = get_as<std::size_t>(j, "chunk_size", w);
  return c;
}

Json to_json(const ConservedTriple& t) { return Json{{"I1", t.i1}, {"I2", t.i2}, {"I3", t.i3}}; }

Checkpoint Checkpoint::from_result(const TrainConfig& cfg, const TrainResult& result) {
  Checkpoint cp;
  cp.config = cfg;
  cp.windows = result.windows;
  cp.history = result.history;
  cp.aborted = result.aborted;
  cp.failed_window = result.failed_window;
  return cp;
}

SolutionField Checkpoint::field() const {
  return SolutionField::stitch(windows, config.scenario.x_min, config.scenario.x_max);
}

void checkpoint_save(const Checkpoint& cp, const std::filesystem::path& path) {
  Json doc;
  doc["format"] = "rlw-checkpoint";
  doc["format_version"] = kCheckpointFormatVersion;
  doc["spec"] = {{"hidden_layers", cp.config.hidden_layers}, {"width", cp.config.width},
                 {"activation", "silu"}};
  doc["scenario"] = to_json(cp.config.scenario);
  doc["train"] = to_json(cp.config);
  doc["seed"] = cp.config.seed;
  doc["aborted"] = cp.aborted;
  doc["failed_window"] = cp.failed_window ? Json(*cp.failed_window) : Json(nullptr);

  Json windows = Json::array();
  for (std::size_t i = 0; i < cp.windows.size(); ++i) {
    const NetworkWindow& w = cp.windows[i];
    const std::size_t net = network_param_count(w.spec);
    Json jw;
    jw["index"] = i;
    jw["t_begin"] = hex_double(w.t_begin);
    jw["t_end"] = hex_double(w.t_end);
    jw["layer_widths"] = w.spec.layer_widths;
    jw["scaling"] = scaling_json(w.spec.scaling);
    jw["params"] = hex_array(std::span<const double>(w.params).first(net));
    jw["lambdas"] = hex_array(std::span<const double>(w.params).subspan(net));
    windows.push_back(std::move(jw));
  }
  doc["windows"] = std::move(windows);

  Json columns = Json::array();
  for (const char* c : kHistoryColumns) columns.push_back(c);
  Json rows = Json::array();
  for (const HistoryEntry& e : cp.history) {
    rows.push_back(Json::array({e.epoch, e.window, e.stage, phase_name(e.phase),
                                hex_double(e.breakdown.l_pde), hex_double(e.breakdown.l_ic),
                                hex_double(e.breakdown.l_bc), hex_double(e.breakdown.l_cons),
                                hex_double(e.total), hex_double(e.weights.lambda_pde),
                                hex_double(e.weights.lambda_ic),
                                hex_double(e.weights.lambda_bc)}));
  }
  doc["history"] = {{"columns", std::move(columns)}, {"rows", std::move(rows)}};

  Json summary;
  summary["entries"] = cp.history.size();
  if (!cp.history.empty()) {
    const HistoryEntry& f = cp.history.front();
    const HistoryEntry& l = cp.history.back();
    summary["first_total"] = f.total;
    summary["last_total"] = l.total;
    summary["last_components"] = {{"l_pde", l.breakdown.l_pde}, {"l_ic", l.breakdown.l_ic},
                                  {"l_bc", l.breakdown.l_bc}, {"l_cons", l.breakdown.l_cons}};
  }
  doc["history_summary"] = std::move(summary);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw LoadError("failed writing '" + path.string() + "'");
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
  }
  const std::string w = "checkpoint";
  if (!doc.is_object()) throw LoadError(w + ": top level must be an object");
  const int version = get_as<int>(doc, "format_version", w);
  if (version != kCheckpointFormatVersion) {
    throw UnsupportedVersionError("checkpoint format_version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kCheckpointFormatVersion) + ")");
  }

  Checkpoint cp;
  cp.config = train_config_from_json(require(doc, "train", w));
  cp.config.scenario = scenario_from_json(require(doc, "scenario", w));
  cp.config.seed = get_as<std::uint64_t>(doc, "seed", w);
  cp.aborted = get_as<bool>(doc, "aborted", w);
  const Json& fw = require(doc, "failed_window", w);
  if (!fw.is_null()) cp.failed_window = fw.get<std::size_t>();

  const Json& windows = require(doc, "windows", w);
  if (!windows.is_array()) throw LoadError(w + ".windows: expected an array");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::string ww = w + ".windows[" + std::to_string(i) + "]";
    const Json& jw = windows[i];
    NetworkWindow nw;
    nw.t_begin = get_double(jw, "t_begin", ww);
    nw.t_end = get_double(jw, "t_end", ww);
    nw.spec.layer_widths = get_as<std::vector<int>>(jw, "layer_widths", ww);
    nw.spec.scaling = scaling_from(require(jw, "scaling", ww), ww + ".scaling");
    try {
      nw.spec.validate();
    } catch (const UsageError& e) {
      throw LoadError(ww + ": " + e.what());
    }
    nw.params = double_array(require(jw, "params", ww), ww + ".params");
    const std::vector<double> lambdas = double_array(require(jw, "lambdas", ww), ww + ".lambdas");
    if (nw.params.size() != network_param_count(nw.spec)) {
      throw LoadError(ww + ".params: length does not match layer_widths");
    }
    if (lambdas.size() != 3) throw LoadError(ww + ".lambdas: expected 3 entries");
    nw.params.insert(nw.params.end(), lambdas.begin(), lambdas.end());
    cp.windows.push_back(std::move(nw));
  }

  const Json& rows = require(require(doc, "history", w), "rows", w + ".history");
  if (!rows.is_array()) throw LoadError(w + ".history.rows: expected an array");
  cp.history.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string wr = w + ".history.rows[" + std::to_string(i) + "]";
    const Json& r = rows[i];
    if (!r.is_array() || r.size() != std::size(kHistoryColumns)) {
      throw LoadError(wr + ": expected " + std::to_string(std::size(kHistoryColumns)) +
                      " columns");
    }
    try {
      HistoryEntry e;
      e.epoch = r[0].get<long>();
      e.window = r[1].get<int>();
      e.stage = r[2].get<int>();
      e.phase = parse_phase(r[3].get<std::string>());
      e.breakdown = {parse_double(r[4], wr), parse_double(r[5], wr), parse_double(r[6], wr),
                     parse_double(r[7], wr)};
      e.total = parse_double(r[8], wr);
      e.weights = {parse_double(r[9], wr), parse_double(r[10], wr), parse_double(r[11], wr)};
      cp.history.push_back(e);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(wr + ": " + e.what());
    }
  }
  return cp;
}

}  // namespace rlw
