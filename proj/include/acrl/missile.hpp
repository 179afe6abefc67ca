#pragma once

#include <Eigen/Core>

#include "acrl/flightdyn.hpp"

namespace acrl {

using Vec3 = Eigen::Vector3d;

struct MissileConfig {
  double g = 9.81;
  double P0 = 12000.0;   // boost thrust, formula units
  double G0 = 170.0;     // launch mass, formula units
  double G_t = 5.0;      // mass burn rate per second of boost
  double t_w = 12.0;     // boost duration, s
  double rho = 0.607;    // air density used by the drag term
  double S_m = 0.0324;   // reference area
  double C_Dm = 0.9;     // drag coefficient
  double K = 4.0;        // proportional-navigation gain
  double n_cap = 40.0;   // guidance command saturation
  double fuze_radius = 30.0;  // closest-approach kill distance, m
  double timeout = 27.0;      // self-destruct time, s
  double min_speed = 50.0;    // floor keeping the 1/v terms finite
};

struct MissileState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double v = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double t_flight = 0.0;
  bool active = false;
  double min_approach = 1e30;  // running closest approach to the target, m
};

struct GuidanceCommand {
  double n_mc = 0.0;  // course (lateral) load factor
  double n_mh = 0.0;  // climb (vertical) load factor
};

struct Propulsion {
  double thrust = 0.0;
  double drag = 0.0;
  double mass = 0.0;
};

// Boost thrust until t_w, zero after; mass burns linearly during boost and
// freezes at burnout; drag is quadratic in speed.
Propulsion propulsion(double t_flight, double v_m, const MissileConfig& cfg);

struct LineOfSight {
  double beta = 0.0;      // LOS azimuth
  double eps = 0.0;       // LOS elevation
  double beta_dot = 0.0;
  double eps_dot = 0.0;
  double range = 0.0;
};

// Relative geometry r = target - missile. Throws std::domain_error when the
// horizontal component of r collapses (rates undefined).
LineOfSight line_of_sight(const MissileState& m, const Vec3& target_pos, const Vec3& target_vel);

// Proportional navigation from LOS rates; gamma_target is the target's pitch.
// Commands saturate at +-n_cap. Near the cos(eps+beta) pole the previous
// command is held rather than amplified.
GuidanceCommand png_commands(const LineOfSight& los, const MissileState& m,
                             const MissileConfig& cfg, double gamma_target,
                             const GuidanceCommand& prev);

// One RK4 step of length dt with the command held. The target is assumed to
// move linearly from target_before to target_after during the step;
// min_approach is updated with the closest approach of the relative-motion
// segment, not just the endpoints.
MissileState step_missile(const MissileState& m, const GuidanceCommand& cmd,
                          const MissileConfig& cfg, double dt, const Vec3& target_before,
                          const Vec3& target_after);

enum class MissileVerdict { InFlight, Hit, Missed };

// Hit as soon as min_approach is inside the fuze radius; Missed once past
// timeout without a hit.
MissileVerdict check_fuze(const MissileState& m, const MissileConfig& cfg);

inline Vec3 missile_position(const MissileState& m) { return {m.x, m.y, m.z}; }
Vec3 missile_velocity(const MissileState& m);

// Spawns an (active) missile from the shooter's position, speed and attitude.
MissileState launch_missile(const AircraftState& shooter);

// Distance from the origin to the segment [a, b].
double segment_min_distance(const Vec3& a, const Vec3& b);

}  // namespace acrl
