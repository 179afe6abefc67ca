#include "acrl/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace acrl {

using Json = nlohmann::ordered_json;

namespace {

const char* heading_name(BlueHeading h) {
  switch (h) {
    case BlueHeading::Mirror: return "mirror";
    case BlueHeading::Facing: return "facing";
    case BlueHeading::Parallel: return "parallel";
  }
  return "mirror";
}

BlueHeading heading_from(const std::string& s) {
  if (s == "mirror") return BlueHeading::Mirror;
  if (s == "facing") return BlueHeading::Facing;
  if (s == "parallel") return BlueHeading::Parallel;
  throw std::runtime_error("config: engagement.blue_heading must be one of mirror/facing/parallel");
}

Json to_json_tree(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.run.seed;
  j["iterations"] = c.run.iterations;
  j["runs"] = c.run.runs;
  j["workers"] = c.run.workers;
  j["threads"] = c.run.threads;
  j["out_dir"] = c.run.out_dir;

  Json& p = j["physics"];
  p["g"] = c.sim.physics.g;
  p["dt"] = c.sim.physics.dt;
  p["nx_min"] = c.sim.physics.nx_min;
  p["nx_max"] = c.sim.physics.nx_max;
  p["nz_min"] = c.sim.physics.nz_min;
  p["nz_max"] = c.sim.physics.nz_max;
  p["v_min"] = c.sim.physics.v_min;
  p["v_max"] = c.sim.physics.v_max;
  p["gamma_limit"] = c.sim.physics.gamma_limit;
  p["z_max"] = c.sim.physics.z_max;

  Json& m = j["missile"];
  m["boost_thrust"] = c.sim.missile.P0;
  m["launch_mass"] = c.sim.missile.G0;
  m["mass_rate"] = c.sim.missile.G_t;
  m["boost_time"] = c.sim.missile.t_w;
  m["air_density"] = c.sim.missile.rho;
  m["ref_area"] = c.sim.missile.S_m;
  m["drag_coef"] = c.sim.missile.C_Dm;
  m["nav_gain"] = c.sim.missile.K;
  m["accel_cap"] = c.sim.missile.n_cap;
  m["fuze_radius"] = c.sim.missile.fuze_radius;
  m["timeout"] = c.sim.missile.timeout;
  m["min_speed"] = c.sim.missile.min_speed;

  Json& e = j["engagement"];
  e["decision_dt"] = c.sim.engagement.decision_dt;
  e["max_time"] = c.sim.engagement.max_time;
  e["off_axis_deg"] = c.sim.engagement.off_axis_deg;
  e["dist_min"] = c.sim.engagement.dist_min;
  e["dist_max"] = c.sim.engagement.dist_max;
  e["alt_min"] = c.sim.engagement.alt_min;
  e["alt_max"] = c.sim.engagement.alt_max;
  e["obs_d_max"] = c.sim.engagement.obs_d_max;
  e["obs_z_max"] = c.sim.engagement.obs_z_max;
  e["blue_heading"] = heading_name(c.sim.engagement.blue_heading);

  Json& n = j["net"];
  n["hidden1"] = c.net.hidden1;
  n["hidden2"] = c.net.hidden2;
  n["log_std_init"] = c.net.log_std_init;

  Json& o = j["ppo"];
  o["clip_eps"] = c.ppo.clip_eps;
  o["gamma"] = c.ppo.gamma;
  o["gae_lambda"] = c.ppo.gae_lambda;
  o["epochs"] = c.ppo.epochs;
  o["minibatch"] = c.ppo.minibatch;
  o["value_coef"] = c.ppo.value_coef;
  o["entropy_coef"] = c.ppo.entropy_coef;
  o["actor_lr"] = c.ppo.actor_lr;
  o["critic_lr"] = c.ppo.critic_lr;
  o["n_steps"] = c.ppo.n_steps;
  o["grad_block"] = c.ppo.grad_block;

  Json& u = j["curriculum"];
  u["enabled"] = c.curriculum.enabled;
  u["delta"] = c.curriculum.delta;
  u["win_threshold"] = c.curriculum.win_threshold;
  u["probe_sims"] = c.curriculum.probe_sims;
  u["n_opponents"] = c.curriculum.n_opponents;
  u["episodes_per_opponent"] = c.curriculum.episodes_per_opponent;
  u["fallback_halfwidth"] = c.curriculum.fallback_halfwidth;

  Json& a = j["adam"];
  a["beta1"] = c.adam.beta1;
  a["beta2"] = c.adam.beta2;
  a["eps"] = c.adam.eps;
  return j;
}

ExperimentConfig from_json_tree(const Json& j) {
  ExperimentConfig c;
  j.at("seed").get_to(c.run.seed);
  j.at("iterations").get_to(c.run.iterations);
  j.at("runs").get_to(c.run.runs);
  j.at("workers").get_to(c.run.workers);
  j.at("threads").get_to(c.run.threads);
  j.at("out_dir").get_to(c.run.out_dir);

  const Json& p = j.at("physics");
  p.at("g").get_to(c.sim.physics.g);
  p.at("dt").get_to(c.sim.physics.dt);
  p.at("nx_min").get_to(c.sim.physics.nx_min);
  p.at("nx_max").get_to(c.sim.physics.nx_max);
  p.at("nz_min").get_to(c.sim.physics.nz_min);
  p.at("nz_max").get_to(c.sim.physics.nz_max);
  p.at("v_min").get_to(c.sim.physics.v_min);
  p.at("v_max").get_to(c.sim.physics.v_max);
  p.at("gamma_limit").get_to(c.sim.physics.gamma_limit);
  p.at("z_max").get_to(c.sim.physics.z_max);

  const Json& m = j.at("missile");
  m.at("boost_thrust").get_to(c.sim.missile.P0);
  m.at("launch_mass").get_to(c.sim.missile.G0);
  m.at("mass_rate").get_to(c.sim.missile.G_t);
  m.at("boost_time").get_to(c.sim.missile.t_w);
  m.at("air_density").get_to(c.sim.missile.rho);
  m.at("ref_area").get_to(c.sim.missile.S_m);
  m.at("drag_coef").get_to(c.sim.missile.C_Dm);
  m.at("nav_gain").get_to(c.sim.missile.K);
  m.at("accel_cap").get_to(c.sim.missile.n_cap);
  m.at("fuze_radius").get_to(c.sim.missile.fuze_radius);
  m.at("timeout").get_to(c.sim.missile.timeout);
  m.at("min_speed").get_to(c.sim.missile.min_speed);
  c.sim.missile.g = c.sim.physics.g;

  const Json& e = j.at("engagement");
  e.at("decision_dt").get_to(c.sim.engagement.decision_dt);
  e.at("max_time").get_to(c.sim.engagement.max_time);
  e.at("off_axis_deg").get_to(c.sim.engagement.off_axis_deg);
  e.at("dist_min").get_to(c.sim.engagement.dist_min);
  e.at("dist_max").get_to(c.sim.engagement.dist_max);
  e.at("alt_min").get_to(c.sim.engagement.alt_min);
  e.at("alt_max").get_to(c.sim.engagement.alt_max);
  e.at("obs_d_max").get_to(c.sim.engagement.obs_d_max);
  e.at("obs_z_max").get_to(c.sim.engagement.obs_z_max);
  c.sim.engagement.blue_heading = heading_from(e.at("blue_heading").get<std::string>());

  const Json& n = j.at("net");
  n.at("hidden1").get_to(c.net.hidden1);
  n.at("hidden2").get_to(c.net.hidden2);
  n.at("log_std_init").get_to(c.net.log_std_init);

  const Json& o = j.at("ppo");
  o.at("clip_eps").get_to(c.ppo.clip_eps);
  o.at("gamma").get_to(c.ppo.gamma);
  o.at("gae_lambda").get_to(c.ppo.gae_lambda);
  o.at("epochs").get_to(c.ppo.epochs);
  o.at("minibatch").get_to(c.ppo.minibatch);
  o.at("value_coef").get_to(c.ppo.value_coef);
  o.at("entropy_coef").get_to(c.ppo.entropy_coef);
  o.at("actor_lr").get_to(c.ppo.actor_lr);
  o.at("critic_lr").get_to(c.ppo.critic_lr);
  o.at("n_steps").get_to(c.ppo.n_steps);
  o.at("grad_block").get_to(c.ppo.grad_block);

  const Json& u = j.at("curriculum");
  u.at("enabled").get_to(c.curriculum.enabled);
  u.at("delta").get_to(c.curriculum.delta);
  u.at("win_threshold").get_to(c.curriculum.win_threshold);
  u.at("probe_sims").get_to(c.curriculum.probe_sims);
  u.at("n_opponents").get_to(c.curriculum.n_opponents);
  u.at("episodes_per_opponent").get_to(c.curriculum.episodes_per_opponent);
  u.at("fallback_halfwidth").get_to(c.curriculum.fallback_halfwidth);

  const Json& a = j.at("adam");
  a.at("beta1").get_to(c.adam.beta1);
  a.at("beta2").get_to(c.adam.beta2);
  a.at("eps").get_to(c.adam.eps);
  return c;
}

void check_keys(const Json& in, const Json& ref, const std::string& prefix) {
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!ref.contains(it.key())) {
      throw std::runtime_error("config: unknown key: " + path);
    }
    const Json& r = ref.at(it.key());
    if (r.is_object()) {
      if (!it->is_object()) {
        throw std::runtime_error("config: " + path + " must be an object");
      }
      check_keys(*it, r, path);
    } else if (it->is_object()) {
      throw std::runtime_error("config: " + path + " must be a value, not an object");
    }
  }
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const std::string& text) {
  Json in;
  try {
    in = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: parse error at line " +
                             std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }
  if (!in.is_object()) throw std::runtime_error("config: top level must be an object");

  Json merged = to_json_tree(default_config());
  check_keys(in, merged, "");
  merged.merge_patch(in);
  try {
    return from_json_tree(merged);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) { return to_json_tree(c).dump(2) + "\n"; }

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + what);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const PhysicsConfig& p = c.sim.physics;
  require(p.g > 0.0, "physics.g must be positive");
  require(p.dt > 0.0, "physics.dt must be positive");
  require(p.nx_min <= p.nx_max, "physics.nx_min must not exceed nx_max");
  require(p.nz_min <= p.nz_max, "physics.nz_min must not exceed nz_max");
  require(p.v_min > 0.0 && p.v_min < p.v_max, "physics speed band must satisfy 0 < v_min < v_max");
  require(p.gamma_limit > 0.0 && p.gamma_limit < kPi / 2.0,
          "physics.gamma_limit must lie in (0, pi/2)");
  require(p.z_max > 0.0, "physics.z_max must be positive");

  const MissileConfig& m = c.sim.missile;
  require(m.P0 >= 0.0, "missile.boost_thrust must be non-negative");
  require(m.G0 > 0.0, "missile.launch_mass must be positive");
  require(m.G_t >= 0.0, "missile.mass_rate must be non-negative");
  require(m.t_w >= 0.0, "missile.boost_time must be non-negative");
  require(m.G0 - m.G_t * m.t_w > 0.0, "missile mass must stay positive through boost");
  require(m.rho >= 0.0 && m.S_m >= 0.0 && m.C_Dm >= 0.0, "missile drag terms must be non-negative");
  require(m.K > 0.0, "missile.nav_gain must be positive");
  require(m.n_cap > 0.0, "missile.accel_cap must be positive");
  require(m.fuze_radius > 0.0, "missile.fuze_radius must be positive");
  require(m.timeout > 0.0, "missile.timeout must be positive");
  require(m.min_speed > 0.0, "missile.min_speed must be positive");

  const EngagementConfig& e = c.sim.engagement;
  require(e.decision_dt > 0.0, "engagement.decision_dt must be positive");
  const double ratio = e.decision_dt / p.dt;
  const double rounded = std::round(ratio);
  require(rounded >= 1.0 && std::abs(ratio - rounded) < 1e-6,
          "engagement.decision_dt must be an integer multiple of physics.dt");
  require(e.max_time > 0.0, "engagement.max_time must be positive");
  require(e.off_axis_deg > 0.0 && e.off_axis_deg <= 180.0,
          "engagement.off_axis_deg must lie in (0, 180]");
  require(e.dist_min > 0.0 && e.dist_min < e.dist_max,
          "engagement distance band must satisfy 0 < dist_min < dist_max");
  require(e.alt_min > 0.0 && e.alt_min < e.alt_max,
          "engagement altitude band must satisfy 0 < alt_min < alt_max");
  require(e.alt_max <= p.z_max, "engagement.alt_max must not exceed physics.z_max");
  require(e.obs_d_max > 0.0, "engagement.obs_d_max must be positive");
  require(e.obs_z_max > 0.0, "engagement.obs_z_max must be positive");

  require(c.net.hidden1 > 0 && c.net.hidden2 > 0, "net hidden sizes must be positive");

  const PpoConfig& o = c.ppo;
  require(o.clip_eps > 0.0 && o.clip_eps < 1.0, "ppo.clip_eps must lie in (0, 1)");
  require(o.gamma > 0.0 && o.gamma <= 1.0, "ppo.gamma must lie in (0, 1]");
  require(o.gae_lambda >= 0.0 && o.gae_lambda <= 1.0, "ppo.gae_lambda must lie in [0, 1]");
  require(o.epochs > 0, "ppo.epochs must be positive");
  require(o.minibatch > 0, "ppo.minibatch must be positive");
  require(o.value_coef >= 0.0, "ppo.value_coef must be non-negative");
  require(o.entropy_coef >= 0.0, "ppo.entropy_coef must be non-negative");
  require(o.actor_lr > 0.0 && o.critic_lr > 0.0, "ppo learning rates must be positive");
  require(o.n_steps > 0, "ppo.n_steps must be positive");
  require(o.grad_block > 0, "ppo.grad_block must be positive");

  const CurriculumConfig& u = c.curriculum;
  require(u.delta > 0.0, "curriculum.delta must be positive");
  require(u.win_threshold >= 0, "curriculum.win_threshold must be non-negative");
  require(u.probe_sims > 0, "curriculum.probe_sims must be positive");
  require(u.n_opponents > 0, "curriculum.n_opponents must be positive");
  require(u.episodes_per_opponent > 0, "curriculum.episodes_per_opponent must be positive");
  require(u.fallback_halfwidth > 0.0 && u.fallback_halfwidth <= 1.0,
          "curriculum.fallback_halfwidth must lie in (0, 1]");

  const AdamConfig& a = c.adam;
  require(a.beta1 >= 0.0 && a.beta1 < 1.0, "adam.beta1 must lie in [0, 1)");
  require(a.beta2 >= 0.0 && a.beta2 < 1.0, "adam.beta2 must lie in [0, 1)");
  require(a.eps > 0.0, "adam.eps must be positive");

  const RunConfig& r = c.run;
  require(r.iterations > 0, "iterations must be positive");
  require(r.runs > 0, "runs must be positive");
  require(r.workers > 0, "workers must be positive");
  require(r.threads >= 0, "threads must be non-negative");
  require(!r.out_dir.empty(), "out_dir must not be empty");
  require(o.n_steps % r.workers == 0, "ppo.n_steps must be a multiple of workers");
}

}  // namespace acrl
