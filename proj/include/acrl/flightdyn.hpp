#pragma once

#include <array>
#include <cmath>

namespace acrl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// 3-DOF point mass. gamma is the flight-path pitch, phi the heading, v true speed.
struct AircraftState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double v = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
};

// mu bank angle, nx longitudinal load factor, nz normal load factor.
struct AircraftControls {
  double mu = 0.0;
  double nx = 0.0;
  double nz = 1.0;
};

struct AircraftDeriv {
  double x_dot = 0.0;
  double y_dot = 0.0;
  double z_dot = 0.0;
  double v_dot = 0.0;
  double gamma_dot = 0.0;
  double phi_dot = 0.0;
};

struct PhysicsConfig {
  double g = 9.81;
  double dt = 0.05;
  double nx_min = -1.0;
  double nx_max = 2.0;
  double nz_min = 0.0;
  double nz_max = 8.0;
  double v_min = 250.0;
  double v_max = 400.0;
  double gamma_limit = 1.48;  // keeps 1/cos(gamma) well away from the pole
  double z_max = 15000.0;
};

// Point-mass equations of motion. Throws std::domain_error when v <= 0 or
// |cos(gamma)| < 1e-6 (heading rate undefined).
AircraftDeriv aircraft_derivatives(const AircraftState& s, const AircraftControls& c, double g);

struct AircraftStepResult {
  AircraftState state;
  bool ground_impact = false;  // z <= 0 after the step; caller treats as terminal
};

// One RK4 step of length cfg.dt, then clamps: v to [v_min, v_max], gamma to
// +-gamma_limit, z to z_max from above, phi wrapped to (-pi, pi].
AircraftStepResult step_aircraft(const AircraftState& s, const AircraftControls& c,
                                 const PhysicsConfig& cfg);

// Maps raw [-1,1] network outputs onto the control box. Inputs are clamped to
// [-1,1] first, so out-of-range raws saturate instead of extrapolating.
AircraftControls clamp_controls(const std::array<double, 3>& raw, const PhysicsConfig& cfg);

// Velocity vector of a state (used by guidance geometry and observations).
std::array<double, 3> velocity_vector(const AircraftState& s);

}  // namespace acrl
