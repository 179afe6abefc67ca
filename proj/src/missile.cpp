#include "acrl/missile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acrl {

Propulsion propulsion(double t_flight, double v_m, const MissileConfig& cfg) {
  Propulsion p;
  p.drag = 0.5 * cfg.rho * v_m * v_m * cfg.S_m * cfg.C_Dm;
  if (t_flight <= cfg.t_w) {
    p.thrust = cfg.P0;
    p.mass = cfg.G0 - cfg.G_t * t_flight;
  } else {
    p.thrust = 0.0;
    p.mass = cfg.G0 - cfg.G_t * cfg.t_w;
  }
  return p;
}

Vec3 missile_velocity(const MissileState& m) {
  double cg = std::cos(m.gamma);
  return {m.v * cg * std::cos(m.phi), m.v * cg * std::sin(m.phi), m.v * std::sin(m.gamma)};
}

LineOfSight line_of_sight(const MissileState& m, const Vec3& target_pos, const Vec3& target_vel) {
  Vec3 r = target_pos - missile_position(m);
  Vec3 r_dot = target_vel - missile_velocity(m);

  double h2 = r.x() * r.x() + r.y() * r.y();
  if (h2 < 1e-6) {
    throw std::domain_error("line_of_sight: degenerate horizontal geometry");
  }
  double h = std::sqrt(h2);
  double r2 = h2 + r.z() * r.z();

  LineOfSight los;
  los.range = std::sqrt(r2);
  los.beta = std::atan2(r.y(), r.x());
  los.eps = std::atan2(r.z(), h);
  los.beta_dot = (r_dot.y() * r.x() - r_dot.x() * r.y()) / h2;
  los.eps_dot = (h2 * r_dot.z() - r.z() * (r_dot.x() * r.x() + r_dot.y() * r.y())) / (r2 * h);
  return los;
}

GuidanceCommand png_commands(const LineOfSight& los, const MissileState& m,
                             const MissileConfig& cfg, double gamma_target,
                             const GuidanceCommand& prev) {
  double lead = los.eps + los.beta;
  double c_lead = std::cos(lead);
  if (std::fabs(c_lead) <= 1e-3) {
    return prev;  // hold through the pole instead of commanding garbage
  }
  GuidanceCommand cmd;
  cmd.n_mc = cfg.K * (m.v * std::cos(gamma_target) / cfg.g) *
             (los.beta_dot + std::tan(los.eps) * std::tan(lead) * los.eps_dot);
  cmd.n_mh = m.v * cfg.K * los.eps_dot / (cfg.g * c_lead);
  cmd.n_mc = std::clamp(cmd.n_mc, -cfg.n_cap, cfg.n_cap);
  cmd.n_mh = std::clamp(cmd.n_mh, -cfg.n_cap, cfg.n_cap);
  return cmd;
}

namespace {

struct MDeriv {
  double x_dot, y_dot, z_dot, v_dot, gamma_dot, phi_dot;
};

MDeriv missile_derivatives(const MissileState& m, const GuidanceCommand& cmd,
                           const MissileConfig& cfg, double t, bool boost) {
  double cg = std::cos(m.gamma);
  double sg = std::sin(m.gamma);
  Propulsion p = propulsion(t, m.v, cfg);
  if (!boost) {
    // a coast segment may start at the cutoff instant itself, where the
    // pointwise boundary still reads as boost
    p.thrust = 0.0;
    p.mass = cfg.G0 - cfg.G_t * cfg.t_w;
  }

  MDeriv d;
  d.x_dot = m.v * cg * std::cos(m.phi);
  d.y_dot = m.v * cg * std::sin(m.phi);
  d.z_dot = m.v * sg;
  d.v_dot = (p.thrust - p.drag) * cfg.g / p.mass - cfg.g * sg;
  d.phi_dot = cmd.n_mc * cfg.g / (m.v * cg);
  d.gamma_dot = (cmd.n_mh - cg) * cfg.g / m.v;
  return d;
}

MissileState add_scaled(const MissileState& m, const MDeriv& d, double h) {
  MissileState r = m;
  r.x += h * d.x_dot;
  r.y += h * d.y_dot;
  r.z += h * d.z_dot;
  r.v += h * d.v_dot;
  r.gamma += h * d.gamma_dot;
  r.phi += h * d.phi_dot;
  return r;
}

// One RK4 advance of length h with the regime (boost or coast) held fixed, so
// the thrust discontinuity never lands between stages.
MissileState rk4_segment(const MissileState& m, const GuidanceCommand& cmd,
                         const MissileConfig& cfg, double h, bool boost) {
  double t0 = m.t_flight;
  MDeriv k1 = missile_derivatives(m, cmd, cfg, t0, boost);
  MDeriv k2 = missile_derivatives(add_scaled(m, k1, h / 2.0), cmd, cfg, t0 + h / 2.0, boost);
  MDeriv k3 = missile_derivatives(add_scaled(m, k2, h / 2.0), cmd, cfg, t0 + h / 2.0, boost);
  MDeriv k4 = missile_derivatives(add_scaled(m, k3, h), cmd, cfg, t0 + h, boost);

  MissileState n = m;
  n.x += h / 6.0 * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
  n.y += h / 6.0 * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot);
  n.z += h / 6.0 * (k1.z_dot + 2.0 * k2.z_dot + 2.0 * k3.z_dot + k4.z_dot);
  n.v += h / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  n.gamma += h / 6.0 * (k1.gamma_dot + 2.0 * k2.gamma_dot + 2.0 * k3.gamma_dot + k4.gamma_dot);
  n.phi += h / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);
  n.t_flight = m.t_flight + h;
  return n;
}

}  // namespace

double segment_min_distance(const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double dd = d.squaredNorm();
  double s = 0.0;
  if (dd > 0.0) {
    s = std::clamp(-a.dot(d) / dd, 0.0, 1.0);
  }
  return (a + s * d).norm();
}

MissileState step_missile(const MissileState& m, const GuidanceCommand& cmd,
                          const MissileConfig& cfg, double dt, const Vec3& target_before,
                          const Vec3& target_after) {
  const double t0 = m.t_flight;
  const double t1 = t0 + dt;

  // Closest approach is tracked in the relative frame; straight-line motion
  // between endpoints bounds the true minimum well below the fuze radius.
  MissileState n;
  double min_seg;
  if (t0 < cfg.t_w && cfg.t_w < t1) {
    // the cutoff lands inside this step: integrate each side separately
    const double h1 = cfg.t_w - t0;
    const Vec3 target_mid = target_before + (h1 / dt) * (target_after - target_before);
    MissileState mid = rk4_segment(m, cmd, cfg, h1, true);
    n = rk4_segment(mid, cmd, cfg, dt - h1, false);
    min_seg = std::min(segment_min_distance(missile_position(m) - target_before,
                                            missile_position(mid) - target_mid),
                       segment_min_distance(missile_position(mid) - target_mid,
                                            missile_position(n) - target_after));
  } else {
    n = rk4_segment(m, cmd, cfg, dt, t1 <= cfg.t_w);
    min_seg = segment_min_distance(missile_position(m) - target_before,
                                   missile_position(n) - target_after);
  }

  n.v = std::max(n.v, cfg.min_speed);
  n.gamma = std::clamp(n.gamma, -kPi / 2.0 + 1e-3, kPi / 2.0 - 1e-3);
  n.phi = wrap_angle(n.phi);
  n.t_flight = m.t_flight + dt;
  n.min_approach = std::min(m.min_approach, min_seg);
  return n;
}

MissileVerdict check_fuze(const MissileState& m, const MissileConfig& cfg) {
  if (m.min_approach <= cfg.fuze_radius) return MissileVerdict::Hit;
  if (m.t_flight > cfg.timeout) return MissileVerdict::Missed;
  return MissileVerdict::InFlight;
}

MissileState launch_missile(const AircraftState& shooter) {
  MissileState m;
  m.x = shooter.x;
  m.y = shooter.y;
  m.z = shooter.z;
  m.v = shooter.v;
  m.gamma = shooter.gamma;
  m.phi = shooter.phi;
  m.t_flight = 0.0;
  m.active = true;
  m.min_approach = 1e30;
  return m;
}

}  // namespace acrl
