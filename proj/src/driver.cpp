#include "acrl/driver.hpp"

namespace acrl {

AgentAction to_agent_action(const VecX<float>& a) {
  AgentAction act;
  act.controls_raw[0] = static_cast<double>(a(0));
  act.controls_raw[1] = static_cast<double>(a(1));
  act.controls_raw[2] = static_cast<double>(a(2));
  act.fire_raw = static_cast<double>(a(3));
  return act;
}

AgentAction policy_action(const PolicyParameters& params, const ObservationVector& obs,
                          bool stochastic, Rng& rng) {
  thread_local MlpT<float>::Workspace ws;
  VecX<float> x = obs_to_input<float>(obs);
  ActionDistT<float> dist = forward_actor(params, x, ws);
  if (stochastic) return to_agent_action(sample_action(dist, rng));
  return to_agent_action(dist.mean);
}

EpisodeResult run_episode(const PolicyParameters& red, const PolicyParameters& blue,
                          const InitialConditions& ic, const SimConfig& cfg, bool stochastic,
                          std::uint64_t action_seed, const StepCallback& on_step) {
  EngagementState st = reset(ic, cfg);
  Rng rng(action_seed);
  EpisodeResult res;
  while (!st.outcome) {
    AgentAction act_red = policy_action(red, observe(st, Side::Red, cfg), stochastic, rng);
    AgentAction act_blue = policy_action(blue, observe(st, Side::Blue, cfg), stochastic, rng);
    if (on_step) on_step(st, act_red, act_blue);
    step(st, act_red, act_blue, cfg);
    ++res.decision_steps;
  }
  res.outcome = *st.outcome;
  return res;
}

}  // namespace acrl
