#include "acrl/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acrl {

double denorm_angle(double a) { return a * kPi; }

double denorm_distance(double b, const EngagementConfig& c) {
  return c.dist_min + (b + 1.0) * 0.5 * (c.dist_max - c.dist_min);
}

EngagementState reset(const InitialConditions& ic, const SimConfig& cfg) {
  const EngagementConfig& e = cfg.engagement;
  double theta = denorm_angle(ic.a);
  double d = denorm_distance(ic.b, e);

  EngagementState s;
  s.red.x = 0.0;
  s.red.y = 0.0;
  s.red.z = ic.z_red;
  s.red.v = ic.v_red;
  s.red.gamma = 0.0;
  s.red.phi = 0.0;

  s.blue.x = d * std::cos(theta);
  s.blue.y = d * std::sin(theta);
  s.blue.z = ic.z_blue;
  s.blue.v = ic.v_blue;
  s.blue.gamma = 0.0;
  switch (e.blue_heading) {
    case BlueHeading::Mirror:
      // Anti-parallel: each side sees the other at azimuth |theta|, so the
      // angle parameter grades difficulty the same way for both sides.
      s.blue.phi = kPi;
      break;
    case BlueHeading::Facing:
      s.blue.phi = wrap_angle(theta + kPi);
      break;
    case BlueHeading::Parallel:
      s.blue.phi = 0.0;
      break;
  }
  return s;
}

double target_azimuth(const AircraftState& shooter, const Vec3& target_pos) {
  auto vv = velocity_vector(shooter);
  Vec3 v{vv[0], vv[1], vv[2]};
  Vec3 los = target_pos - Vec3{shooter.x, shooter.y, shooter.z};
  double denom = v.norm() * los.norm();
  if (denom <= 0.0) return 0.0;
  double c = std::clamp(v.dot(los) / denom, -1.0, 1.0);
  return std::acos(c);
}

namespace {

double norm_feature(double x, double lo, double hi) {
  double u = 2.0 * (x - lo) / (hi - lo) - 1.0;
  return std::clamp(u, -1.0, 1.0);
}

Vec3 aircraft_pos(const AircraftState& a) { return {a.x, a.y, a.z}; }

double heading_crossing_angle(const AircraftState& a, const AircraftState& b) {
  auto va = velocity_vector(a);
  auto vb = velocity_vector(b);
  Vec3 u{va[0], va[1], va[2]};
  Vec3 w{vb[0], vb[1], vb[2]};
  double denom = u.norm() * w.norm();
  if (denom <= 0.0) return 0.0;
  return std::acos(std::clamp(u.dot(w) / denom, -1.0, 1.0));
}

}  // namespace

ObservationVector observe(const EngagementState& s, Side side, const SimConfig& cfg) {
  const EngagementConfig& e = cfg.engagement;
  const PhysicsConfig& p = cfg.physics;
  const AircraftState& own = side == Side::Red ? s.red : s.blue;
  const AircraftState& opp = side == Side::Red ? s.blue : s.red;
  const std::optional<MissileState>& own_m = side == Side::Red ? s.red_missile : s.blue_missile;
  const std::optional<MissileState>& opp_m = side == Side::Red ? s.blue_missile : s.red_missile;

  double d = (aircraft_pos(own) - aircraft_pos(opp)).norm();
  double hca = heading_crossing_angle(own, opp);

  bool own_inflight = own_m.has_value() && own_m->active;
  bool opp_inflight = opp_m.has_value() && opp_m->active;

  ObservationVector o;
  o[0] = norm_feature(own.phi, -kPi, kPi);
  o[1] = norm_feature(own.gamma, -kPi, kPi);
  o[2] = norm_feature(own.v, p.v_min, p.v_max);
  o[3] = norm_feature(own.z, 0.0, e.obs_z_max);
  o[4] = norm_feature(d, 0.0, e.obs_d_max);
  if (own_inflight) {
    double d1 = (missile_position(*own_m) - aircraft_pos(opp)).norm();
    o[5] = 1.0;
    o[6] = norm_feature(own_m->phi, -kPi, kPi);
    o[7] = norm_feature(own_m->gamma, -kPi, kPi);
    o[8] = norm_feature(d1, 0.0, e.obs_d_max);
  } else {
    o[5] = -1.0;
    o[6] = -1.0;
    o[7] = -1.0;
    o[8] = -1.0;
  }
  o[9] = norm_feature(hca, -kPi, kPi);
  o[10] = opp_inflight ? 1.0 : -1.0;
  return o;
}

LaunchResult try_launch(EngagementState& s, Side side, const SimConfig& cfg) {
  bool& fired = side == Side::Red ? s.red_fired : s.blue_fired;
  if (fired) {
    throw std::logic_error("try_launch: side already fired");
  }
  const AircraftState& shooter = side == Side::Red ? s.red : s.blue;
  const AircraftState& target = side == Side::Red ? s.blue : s.red;
  std::optional<MissileState>& slot = side == Side::Red ? s.red_missile : s.blue_missile;

  fired = true;
  slot = launch_missile(shooter);
  double az = target_azimuth(shooter, aircraft_pos(target));
  if (az > deg2rad(cfg.engagement.off_axis_deg)) {
    slot->active = false;  // shot wasted, counts as a miss
    return LaunchResult::WastedOffAxis;
  }
  return LaunchResult::Live;
}

namespace {

struct SubstepDeaths {
  bool red_dead = false;
  bool blue_dead = false;
  bool by_fuze = false;
};

void finish(EngagementState& s, Result r, Reason why) {
  Outcome o;
  o.result = r;
  o.reason = why;
  o.reward_red = r == Result::RedWin ? 1.0 : (r == Result::BlueWin ? -1.0 : 0.0);
  o.reward_blue = -o.reward_red;
  s.outcome = o;
}

// Updates guidance, advances one physics step, runs the fuze, and reports
// which aircraft died this substep.
SubstepDeaths substep(EngagementState& s, const AircraftControls& red_c,
                      const AircraftControls& blue_c, const SimConfig& cfg) {
  double dt = cfg.physics.dt;

  // Guidance from the synchronized pre-step states.
  if (s.red_missile && s.red_missile->active) {
    auto bv = velocity_vector(s.blue);
    try {
      LineOfSight los = line_of_sight(*s.red_missile, aircraft_pos(s.blue), {bv[0], bv[1], bv[2]});
      s.red_cmd = png_commands(los, *s.red_missile, cfg.missile, s.blue.gamma, s.red_cmd);
    } catch (const std::domain_error&) {
      // degenerate geometry: hold the previous command
    }
  }
  if (s.blue_missile && s.blue_missile->active) {
    auto rv = velocity_vector(s.red);
    try {
      LineOfSight los = line_of_sight(*s.blue_missile, aircraft_pos(s.red), {rv[0], rv[1], rv[2]});
      s.blue_cmd = png_commands(los, *s.blue_missile, cfg.missile, s.red.gamma, s.blue_cmd);
    } catch (const std::domain_error&) {
    }
  }

  Vec3 red_before = aircraft_pos(s.red);
  Vec3 blue_before = aircraft_pos(s.blue);

  AircraftStepResult rr = step_aircraft(s.red, red_c, cfg.physics);
  AircraftStepResult br = step_aircraft(s.blue, blue_c, cfg.physics);
  s.red = rr.state;
  s.blue = br.state;

  SubstepDeaths deaths;
  if (s.red_missile && s.red_missile->active) {
    *s.red_missile =
        step_missile(*s.red_missile, s.red_cmd, cfg.missile, dt, blue_before, aircraft_pos(s.blue));
    if (s.red_missile->z <= 0.0) s.red_missile->active = false;
    switch (check_fuze(*s.red_missile, cfg.missile)) {
      case MissileVerdict::Hit:
        s.red_missile->active = false;
        deaths.blue_dead = true;
        deaths.by_fuze = true;
        break;
      case MissileVerdict::Missed:
        s.red_missile->active = false;
        break;
      case MissileVerdict::InFlight:
        break;
    }
  }
  if (s.blue_missile && s.blue_missile->active) {
    *s.blue_missile =
        step_missile(*s.blue_missile, s.blue_cmd, cfg.missile, dt, red_before, aircraft_pos(s.red));
    if (s.blue_missile->z <= 0.0) s.blue_missile->active = false;
    switch (check_fuze(*s.blue_missile, cfg.missile)) {
      case MissileVerdict::Hit:
        s.blue_missile->active = false;
        deaths.red_dead = true;
        deaths.by_fuze = true;
        break;
      case MissileVerdict::Missed:
        s.blue_missile->active = false;
        break;
      case MissileVerdict::InFlight:
        break;
    }
  }

  deaths.red_dead = deaths.red_dead || rr.ground_impact;
  deaths.blue_dead = deaths.blue_dead || br.ground_impact;

  s.substeps += 1;
  s.t = static_cast<double>(s.substeps) * dt;
  return deaths;
}

}  // namespace

const Outcome* step(EngagementState& s, const AgentAction& red_action,
                    const AgentAction& blue_action, const SimConfig& cfg) {
  if (s.outcome) {
    throw std::logic_error("step: episode already terminal");
  }
  double dd = cfg.engagement.decision_dt;
  double dt = cfg.physics.dt;
  long n = std::lround(dd / dt);
  if (n < 1 || std::fabs(static_cast<double>(n) * dt - dd) > 1e-9) {
    throw std::invalid_argument("step: decision_dt must be a positive multiple of physics dt");
  }

  if (red_action.fire_raw > 0.0 && !s.red_fired) try_launch(s, Side::Red, cfg);
  if (blue_action.fire_raw > 0.0 && !s.blue_fired) try_launch(s, Side::Blue, cfg);

  AircraftControls red_c = clamp_controls(red_action.controls_raw, cfg.physics);
  AircraftControls blue_c = clamp_controls(blue_action.controls_raw, cfg.physics);

  for (long k = 0; k < n; ++k) {
    SubstepDeaths d = substep(s, red_c, blue_c, cfg);
    if (d.red_dead || d.blue_dead) {
      Result r = d.red_dead && d.blue_dead ? Result::Draw
                 : d.red_dead              ? Result::BlueWin
                                           : Result::RedWin;
      finish(s, r, d.by_fuze ? Reason::Fuze : Reason::GroundImpact);
      return &*s.outcome;
    }
    bool red_spent = s.red_fired && s.red_missile && !s.red_missile->active;
    bool blue_spent = s.blue_fired && s.blue_missile && !s.blue_missile->active;
    if (red_spent && blue_spent) {
      finish(s, Result::Draw, Reason::BothMissed);
      return &*s.outcome;
    }
    if (s.t >= cfg.engagement.max_time) {
      finish(s, Result::Draw, Reason::Timeout);
      return &*s.outcome;
    }
  }
  return nullptr;
}

InitialConditions sample_initial_conditions(const Intervals& iv, const SimConfig& cfg, Rng& rng) {
  const EngagementConfig& e = cfg.engagement;
  const PhysicsConfig& p = cfg.physics;
  InitialConditions ic;
  ic.a = rng.uniform(iv.a_lo, iv.a_hi);
  ic.b = rng.uniform(iv.b_lo, iv.b_hi);
  ic.v_red = rng.uniform(p.v_min, p.v_max);
  ic.v_blue = rng.uniform(p.v_min, p.v_max);
  ic.z_red = rng.uniform(e.alt_min, e.alt_max);
  ic.z_blue = rng.uniform(e.alt_min, e.alt_max);
  return ic;
}

EngagementState swap_sides(const EngagementState& s) {
  EngagementState w = s;
  std::swap(w.red, w.blue);
  std::swap(w.red_missile, w.blue_missile);
  std::swap(w.red_cmd, w.blue_cmd);
  std::swap(w.red_fired, w.blue_fired);
  if (w.outcome) {
    Outcome& o = *w.outcome;
    if (o.result == Result::RedWin) {
      o.result = Result::BlueWin;
    } else if (o.result == Result::BlueWin) {
      o.result = Result::RedWin;
    }
    std::swap(o.reward_red, o.reward_blue);
  }
  return w;
}

const char* to_string(Result r) {
  switch (r) {
    case Result::RedWin: return "red_win";
    case Result::BlueWin: return "blue_win";
    default: return "draw";
  }
}

const char* to_string(Reason r) {
  switch (r) {
    case Reason::Fuze: return "fuze";
    case Reason::BothMissed: return "both_missed";
    case Reason::Timeout: return "timeout";
    default: return "ground_impact";
  }
}

}  // namespace acrl
