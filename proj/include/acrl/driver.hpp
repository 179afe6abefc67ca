#pragma once

#include <functional>

#include "acrl/engagement.hpp"
#include "acrl/netpolicy.hpp"
#include "acrl/rng.hpp"

namespace acrl {

// Observation packed for the network input.
template <class S>
VecX<S> obs_to_input(const ObservationVector& o) {
  VecX<S> x(static_cast<Eigen::Index>(o.size()));
  for (std::size_t i = 0; i < o.size(); ++i) x(static_cast<Eigen::Index>(i)) = static_cast<S>(o[i]);
  return x;
}

AgentAction to_agent_action(const VecX<float>& a);

// Raw action pulled from a policy: tanh-bounded control means plus fire
// logit, either sampled or deterministic (distribution mean).
AgentAction policy_action(const PolicyParameters& params, const ObservationVector& obs,
                          bool stochastic, Rng& rng);

struct EpisodeResult {
  Outcome outcome;
  int decision_steps = 0;
};

using StepCallback =
    std::function<void(const EngagementState&, const AgentAction&, const AgentAction&)>;

// Plays one engagement to termination. Actions are drawn red first, then
// blue, at every decision step; a single Rng drives both so the draw sequence
// is fixed by action_seed alone.
EpisodeResult run_episode(const PolicyParameters& red, const PolicyParameters& blue,
                          const InitialConditions& ic, const SimConfig& cfg, bool stochastic,
                          std::uint64_t action_seed, const StepCallback& on_step = nullptr);

}  // namespace acrl
