#include "acrl/flightdyn.hpp"

#include <algorithm>
#include <stdexcept>

namespace acrl {

AircraftDeriv aircraft_derivatives(const AircraftState& s, const AircraftControls& c, double g) {
  if (s.v <= 0.0) {
    throw std::domain_error("aircraft_derivatives: non-positive speed");
  }
  double cg = std::cos(s.gamma);
  if (std::fabs(cg) < 1e-6) {
    throw std::domain_error("aircraft_derivatives: vertical flight path, heading rate undefined");
  }
  double sg = std::sin(s.gamma);

  AircraftDeriv d;
  d.x_dot = s.v * cg * std::cos(s.phi);
  d.y_dot = s.v * cg * std::sin(s.phi);
  d.z_dot = s.v * sg;
  d.v_dot = g * (c.nx - sg);
  d.gamma_dot = (g / s.v) * (c.nz * std::cos(c.mu) - cg);
  d.phi_dot = g * c.nz * std::sin(c.mu) / (s.v * cg);
  return d;
}

namespace {

AircraftState add_scaled(const AircraftState& s, const AircraftDeriv& d, double h) {
  AircraftState r = s;
  r.x += h * d.x_dot;
  r.y += h * d.y_dot;
  r.z += h * d.z_dot;
  r.v += h * d.v_dot;
  r.gamma += h * d.gamma_dot;
  r.phi += h * d.phi_dot;
  return r;
}

}  // namespace

AircraftStepResult step_aircraft(const AircraftState& s, const AircraftControls& c,
                                 const PhysicsConfig& cfg) {
  double h = cfg.dt;
  AircraftDeriv k1 = aircraft_derivatives(s, c, cfg.g);
  AircraftDeriv k2 = aircraft_derivatives(add_scaled(s, k1, h / 2.0), c, cfg.g);
  AircraftDeriv k3 = aircraft_derivatives(add_scaled(s, k2, h / 2.0), c, cfg.g);
  AircraftDeriv k4 = aircraft_derivatives(add_scaled(s, k3, h), c, cfg.g);

  AircraftState n = s;
  n.x += h / 6.0 * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
  n.y += h / 6.0 * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot);
  n.z += h / 6.0 * (k1.z_dot + 2.0 * k2.z_dot + 2.0 * k3.z_dot + k4.z_dot);
  n.v += h / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  n.gamma += h / 6.0 * (k1.gamma_dot + 2.0 * k2.gamma_dot + 2.0 * k3.gamma_dot + k4.gamma_dot);
  n.phi += h / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);

  n.v = std::clamp(n.v, cfg.v_min, cfg.v_max);
  n.gamma = std::clamp(n.gamma, -cfg.gamma_limit, cfg.gamma_limit);
  n.phi = wrap_angle(n.phi);
  n.z = std::min(n.z, cfg.z_max);

  return {n, n.z <= 0.0};
}

AircraftControls clamp_controls(const std::array<double, 3>& raw, const PhysicsConfig& cfg) {
  auto unit = [](double r) { return std::clamp(r, -1.0, 1.0); };
  auto affine = [&](double r, double lo, double hi) {
    return lo + (unit(r) + 1.0) * 0.5 * (hi - lo);
  };
  AircraftControls c;
  c.mu = affine(raw[0], -kPi, kPi);
  c.nx = affine(raw[1], cfg.nx_min, cfg.nx_max);
  c.nz = affine(raw[2], cfg.nz_min, cfg.nz_max);
  return c;
}

std::array<double, 3> velocity_vector(const AircraftState& s) {
  double cg = std::cos(s.gamma);
  return {s.v * cg * std::cos(s.phi), s.v * cg * std::sin(s.phi), s.v * std::sin(s.gamma)};
}

}  // namespace acrl
