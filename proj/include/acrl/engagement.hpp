#pragma once

#include <array>
#include <optional>
#include <string>

#include "acrl/flightdyn.hpp"
#include "acrl/missile.hpp"
#include "acrl/rng.hpp"

namespace acrl {

enum class Side { Red, Blue };
inline Side other(Side s) { return s == Side::Red ? Side::Blue : Side::Red; }

enum class Result { RedWin, BlueWin, Draw };
enum class Reason { Fuze, BothMissed, Timeout, GroundImpact };

struct Outcome {
  Result result = Result::Draw;
  Reason reason = Reason::Timeout;
  double reward_red = 0.0;   // +1 win, -1 loss, 0 draw
  double reward_blue = 0.0;
};

// Normalized sampling domain for the initial geometry: a is the bearing of
// blue off red's nose in [-1,1] ~ [-180 deg, 180 deg], b the separation in
// [-1,1] ~ [4 km, 16 km].
struct Intervals {
  double a_lo = -1.0;
  double a_hi = 1.0;
  double b_lo = -1.0;
  double b_hi = 1.0;
};

struct InitialConditions {
  double a = 0.0;
  double b = 0.0;
  double v_red = 325.0;
  double v_blue = 325.0;
  double z_red = 6000.0;
  double z_blue = 6000.0;
};

enum class BlueHeading { Mirror, Facing, Parallel };

struct EngagementConfig {
  double decision_dt = 0.5;     // agent decision period; must be a multiple of physics dt
  double max_time = 100.0;      // episode cap, s
  double off_axis_deg = 60.0;   // launch gate on target azimuth off the shooter's nose
  double dist_min = 4000.0;     // separation band mapped from b
  double dist_max = 16000.0;
  double alt_min = 3000.0;      // initial altitude band
  double alt_max = 9000.0;
  double obs_d_max = 20000.0;   // normalization bound for distances
  double obs_z_max = 15000.0;   // normalization bound for altitude
  BlueHeading blue_heading = BlueHeading::Mirror;
};

struct SimConfig {
  PhysicsConfig physics;
  MissileConfig missile;
  EngagementConfig engagement;
};

struct EngagementState {
  AircraftState red;
  AircraftState blue;
  std::optional<MissileState> red_missile;   // exists once red has fired
  std::optional<MissileState> blue_missile;
  GuidanceCommand red_cmd;    // last guidance command, held through LOS poles
  GuidanceCommand blue_cmd;
  bool red_fired = false;
  bool blue_fired = false;
  long substeps = 0;          // physics steps taken; t == substeps * dt
  double t = 0.0;
  std::optional<Outcome> outcome;
};

// Raw network outputs. controls_raw maps onto (mu, nx, nz) via clamp_controls;
// the missile fires on the first decision step where fire_raw > 0.
struct AgentAction {
  std::array<double, 3> controls_raw{0.0, 0.0, 0.0};
  double fire_raw = -1.0;
};

// Feature order: own phi, gamma, v, z; distance d; own-missile flag f1, its
// phi1, gamma1, distance-to-opponent d1; heading crossing angle; opponent
// missile flag f2. All min-max scaled into [-1,1]; missile features are -1
// while no such missile is in flight.
using ObservationVector = std::array<double, 11>;

// Red starts at the origin heading +x; blue at bearing a*pi, distance
// denorm(b), heading per cfg.engagement.blue_heading. Deterministic in ic.
EngagementState reset(const InitialConditions& ic, const SimConfig& cfg);

ObservationVector observe(const EngagementState& s, Side side, const SimConfig& cfg);

enum class LaunchResult { Live, WastedOffAxis };

// Spawns the side's missile. Outside the off-axis cone the round is wasted:
// it spawns inactive and can never hit, but the side has spent its shot.
// Throws std::logic_error if the side already fired.
LaunchResult try_launch(EngagementState& s, Side side, const SimConfig& cfg);

// Advances one decision period (N physics sub-steps). Fire decisions apply at
// the boundary; controls are held for the whole period. Returns the outcome
// when the episode ends during this step, nullptr otherwise. Throws
// std::logic_error if called on a terminal state.
const Outcome* step(EngagementState& s, const AgentAction& red_action,
                    const AgentAction& blue_action, const SimConfig& cfg);

// a, b uniform over the intervals; speeds and altitudes uniform over the
// config bands. Draw order: a, b, v_red, v_blue, z_red, z_blue.
InitialConditions sample_initial_conditions(const Intervals& iv, const SimConfig& cfg, Rng& rng);

// Relabels red<->blue (aircraft, missiles, flags, outcome). The engine is
// side-symmetric, so stepping a swapped state with swapped actions yields the
// swapped trajectory bit for bit.
EngagementState swap_sides(const EngagementState& s);

// Angle between the shooter's velocity vector and the line of sight to the
// target, in [0, pi].
double target_azimuth(const AircraftState& shooter, const Vec3& target_pos);

double denorm_angle(double a);                                // a in [-1,1] -> radians
double denorm_distance(double b, const EngagementConfig& c);  // b in [-1,1] -> meters

const char* to_string(Result r);
const char* to_string(Reason r);

}  // namespace acrl
