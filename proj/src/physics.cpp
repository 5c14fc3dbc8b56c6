#include "rlw/physics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rlw/error.hpp"

namespace rlw {
namespace {

double sech2(double z) {
  const double c = std::cosh(z);
  return 1.0 / (c * c);
}

// 3A sech^2(k (x - c)) and its x-derivative.
double soliton_profile(double x, double center, double a, const RlwParams& rlw) {
  const double k = soliton_wavenumber(a, rlw);
  return 3.0 * a * sech2(k * (x - center));
}

double soliton_profile_dx(double x, double center, double a, const RlwParams& rlw) {
  const double k = soliton_wavenumber(a, rlw);
  const double z = k * (x - center);
  return -6.0 * a * k * sech2(z) * std::tanh(z);
}

}  // namespace

void RlwParams::validate() const {
  if (!(epsilon > 0.0) || !(mu > 0.0)) throw ConfigError("epsilon and mu must be positive");
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::single_soliton:
      return "single-soliton";
    case ScenarioKind::two_soliton:
      return "two-soliton";
    case ScenarioKind::undular_bore:
      return "undular-bore";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "single-soliton") return ScenarioKind::single_soliton;
  if (name == "two-soliton") return ScenarioKind::two_soliton;
  if (name == "undular-bore") return ScenarioKind::undular_bore;
  throw ConfigError("unknown scenario kind '" + std::string(name) +
                    "' (expected single-soliton, two-soliton or undular-bore)");
}

ScenarioConfig ScenarioConfig::single_soliton() { return ScenarioConfig{}; }

ScenarioConfig ScenarioConfig::two_soliton() {
  ScenarioConfig c;
  c.kind = ScenarioKind::two_soliton;
  c.x_min = 0.0;
  c.x_max = 120.0;
  c.t_final = 30.0;
  return c;
}

ScenarioConfig ScenarioConfig::undular_bore(double slope) {
  ScenarioConfig c;
  c.kind = ScenarioKind::undular_bore;
  c.rlw = {1.5, 1.0 / 6.0};
  c.x_min = -36.0;
  c.x_max = 300.0;
  c.t_final = 250.0;
  c.bore.d = slope;
  return c;
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::single_soliton:
      return single_soliton();
    case ScenarioKind::two_soliton:
      return two_soliton();
    case ScenarioKind::undular_bore:
      return undular_bore();
  }
  throw ConfigError("unknown scenario kind");
}

void ScenarioConfig::validate() const {
  rlw.validate();
  if (!(x_min < x_max)) throw ConfigError("scenario requires x_min < x_max");
  if (!(t_final > 0.0)) throw ConfigError("scenario requires t_final > 0");
  switch (kind) {
    case ScenarioKind::single_soliton:
      if (!(single.d > 0.0)) throw ConfigError("single soliton amplitude d must be positive");
      break;
    case ScenarioKind::two_soliton:
      if (!(two.a1 > 0.0) || !(two.a2 > 0.0)) {
        throw ConfigError("two-soliton amplitudes must be positive");
      }
      break;
    case ScenarioKind::undular_bore:
      if (!(bore.d > 0.0)) throw ConfigError("bore slope width d must be positive");
      break;
  }
}

double soliton_speed(double d, const RlwParams& rlw) { return 1.0 + rlw.epsilon * d; }

double soliton_wavenumber(double d, const RlwParams& rlw) {
  return 0.5 * std::sqrt(rlw.epsilon * d / (rlw.mu * soliton_speed(d, rlw)));
}

double rlw_residual(const Jet& u, const RlwParams& rlw) {
  return u.dt + u.dx + rlw.epsilon * u.v * u.dx - rlw.mu * u.dxxt;
}

double exact_single_soliton(double x, double t, const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::single_soliton) {
    throw UsageError("exact solution is only available for the single soliton");
  }
  const double v = soliton_speed(cfg.single.d, cfg.rlw);
  return soliton_profile(x, v * t + cfg.single.x0, cfg.single.d, cfg.rlw);
}

double initial_condition(double x, const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::single_soliton:
      return exact_single_soliton(x, 0.0, cfg);
    case ScenarioKind::two_soliton:
      return soliton_profile(x, cfg.two.x1, cfg.two.a1, cfg.rlw) +
             soliton_profile(x, cfg.two.x2, cfg.two.a2, cfg.rlw);
    case ScenarioKind::undular_bore:
      return 0.5 * cfg.bore.u0 * (1.0 - std::tanh((x - cfg.bore.xc) / cfg.bore.d));
  }
  return 0.0;
}

double initial_condition_dx(double x, const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::single_soliton:
      return soliton_profile_dx(x, cfg.single.x0, cfg.single.d, cfg.rlw);
    case ScenarioKind::two_soliton:
      return soliton_profile_dx(x, cfg.two.x1, cfg.two.a1, cfg.rlw) +
             soliton_profile_dx(x, cfg.two.x2, cfg.two.a2, cfg.rlw);
    case ScenarioKind::undular_bore:
      return -0.5 * cfg.bore.u0 * sech2((x - cfg.bore.xc) / cfg.bore.d) / cfg.bore.d;
  }
  return 0.0;
}

double boundary_value(double x, double t, const ScenarioConfig& cfg) {
  const bool left = x == cfg.x_min;
  if (!left && x != cfg.x_max) throw UsageError("boundary_value: x is not a domain endpoint");
  switch (cfg.kind) {
    case ScenarioKind::single_soliton:
      return exact_single_soliton(x, t, cfg);
    case ScenarioKind::two_soliton:
      return 0.0;
    case ScenarioKind::undular_bore:
      return left ? cfg.bore.u0 : 0.0;
  }
  return 0.0;
}

double trapezoid(std::span<const double> values, double spacing) {
  if (values.size() < 2) throw UsageError("trapezoid: need at least two samples");
  if (!(spacing > 0.0)) throw UsageError("trapezoid: spacing must be positive");
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  return spacing * (interior + 0.5 * (values.front() + values.back()));
}

ConservedTriple invariants(std::span<const double> u, std::span<const double> u_x, double spacing,
                           const RlwParams& rlw) {
  if (u.size() != u_x.size()) throw UsageError("invariants: u and u_x lengths differ");
  std::vector<double> f2(u.size());
  std::vector<double> f3(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    f2[i] = ui * ui + rlw.mu * u_x[i] * u_x[i];
    f3[i] = ui * ui * ui + 3.0 * ui * ui;
  }
  return {trapezoid(u, spacing), trapezoid(f2, spacing), trapezoid(f3, spacing)};
}

}  // namespace rlw
