#pragma once

// The RLW equation u_t + u_x + eps*u*u_x - mu*u_xxt = 0, its benchmark
// scenarios and the three conserved integrals.

#include <span>
#include <string>
#include <string_view>

#include "rlw/jet.hpp"

namespace rlw {

struct RlwParams {
  double epsilon = 1.0;  // nonlinearity
  double mu = 1.0;       // dispersion

  void validate() const;
};

enum class ScenarioKind { single_soliton, two_soliton, undular_bore };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

struct SingleSolitonParams {
  double d = 0.1;  // amplitude parameter; peak is 3d
  double x0 = 0.0;
};

struct TwoSolitonParams {
  // Peak heights 3*A_j are 5.333 and 1.688.
  double a1 = 5.333 / 3.0;
  double a2 = 1.688 / 3.0;
  double x1 = 15.0;
  double x2 = 35.0;
};

struct BoreParams {
  double u0 = 0.1;
  double xc = 0.0;
  double d = 5.0;  // slope width
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::single_soliton;
  RlwParams rlw;
  double x_min = -40.0;
  double x_max = 60.0;
  double t_final = 20.0;
  SingleSolitonParams single;
  TwoSolitonParams two;
  BoreParams bore;

  static ScenarioConfig single_soliton();
  static ScenarioConfig two_soliton();
  /// Undular bore with slope width d (5 = gentle, 2 = steep).
  static ScenarioConfig undular_bore(double slope = 5.0);
  static ScenarioConfig defaults(ScenarioKind kind);

  void validate() const;
  bool has_exact_solution() const { return kind == ScenarioKind::single_soliton; }
};

struct ConservedTriple {
  double i1 = 0.0;  // mass
  double i2 = 0.0;  // momentum
  double i3 = 0.0;  // energy
};

/// Soliton speed v = 1 + eps*d and wave number k = sqrt(eps*d/(mu*v))/2.
double soliton_speed(double d, const RlwParams& rlw);
double soliton_wavenumber(double d, const RlwParams& rlw);

/// u_t + u_x + eps*u*u_x - mu*u_xxt read from the jet.
double rlw_residual(const Jet& u, const RlwParams& rlw);

double exact_single_soliton(double x, double t, const ScenarioConfig& cfg);
double initial_condition(double x, const ScenarioConfig& cfg);
/// d/dx of initial_condition, in closed form.
double initial_condition_dx(double x, const ScenarioConfig& cfg);
/// Dirichlet data at x = x_min or x = x_max.
double boundary_value(double x, double t, const ScenarioConfig& cfg);

/// Composite trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> values, double spacing);
/// I1 = int u, I2 = int (u^2 + mu*u_x^2), I3 = int (u^3 + 3u^2).
ConservedTriple invariants(std::span<const double> u, std::span<const double> u_x, double spacing,
                           const RlwParams& rlw);

}  // namespace rlw
