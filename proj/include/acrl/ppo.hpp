#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "acrl/driver.hpp"
#include "acrl/engagement.hpp"
#include "acrl/netpolicy.hpp"
#include "acrl/parallel.hpp"

namespace acrl {

struct PpoConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 6;
  int minibatch = 1024;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double actor_lr = 0.002;
  double critic_lr = 0.001;
  int n_steps = 8192;
  int grad_block = 64;  // samples per gradient block; reduction is in block order
};

// One stretch of consecutive transitions from a single episode. Episodes cut
// off by the step quota bootstrap from the critic's value of the next state.
struct Segment {
  int begin = 0;
  int end = 0;
  bool bootstrap = false;
  float bootstrap_value = 0.0f;
};

struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<float> obs;          // n * obs_dim, row per transition
  std::vector<float> actions;      // n * act_dim
  std::vector<float> logp_old;     // n
  std::vector<float> value_old;    // n
  std::vector<float> reward;       // n
  std::vector<std::uint8_t> done;  // n
  std::vector<Segment> segments;
  std::vector<float> advantage;  // normalized, filled by compute_advantages
  std::vector<float> ret;        // raw advantage + value

  // learner-side tallies over episodes completed during collection
  int episodes = 0;
  int wins = 0;
  int losses = 0;
  int draws = 0;

  int size() const { return static_cast<int>(logp_old.size()); }
};

// Collects exactly ppo.n_steps learner transitions, split evenly across
// workers (n_steps must divide). Worker w draws everything it needs from
// derive_seed(seed, Stream::Collect, w), and worker buffers are concatenated
// in worker order, so the result is identical for any Exec mode/thread count.
// Both sides act stochastically; the opponent's draws share the worker Rng,
// interleaved learner-then-opponent at each decision step.
RolloutBuffer collect_rollouts(const PolicyParameters& learner, const PolicyParameters& opponent,
                               Side learner_side, const Intervals& iv, const SimConfig& sim,
                               const PpoConfig& ppo, int workers, std::uint64_t seed, Exec exec);

// GAE(lambda) per segment, computed in double; ret = raw advantage + value.
// Advantages are then normalized to zero mean / unit std over the whole
// buffer (std + 1e-8 in the denominator).
// raw_advantage, when given, receives the per-transition advantages at full
// double precision before normalization quantizes them to float.
void compute_advantages(RolloutBuffer& buf, const PpoConfig& ppo,
                        std::vector<double>* raw_advantage = nullptr);

template <class S>
S clipped_surrogate(S ratio, S adv, S eps) {
  S lo = S(1) - eps;
  S hi = S(1) + eps;
  S clipped = ratio < lo ? lo : (ratio > hi ? hi : ratio);
  S u = ratio * adv;
  S c = clipped * adv;
  return u < c ? u : c;
}

// Per-sample sums; divide by the sample count for batch means. Accumulated in
// double regardless of the compute scalar.
struct LossAccum {
  double surrogate = 0.0;  // sum of min(r*A, clip(r)*A)
  double value = 0.0;      // sum of (V - ret)^2
  double kl = 0.0;         // sum of (r - 1) - log r
  double clip_count = 0.0; // count of |r - 1| > eps
  double entropy = 0.0;    // sum of distribution entropies
  void add(const LossAccum& o) {
    surrogate += o.surrogate;
    value += o.value;
    kl += o.kl;
    clip_count += o.clip_count;
    entropy += o.entropy;
  }
};

template <class S>
struct PpoWorkspace {
  typename MlpT<S>::Workspace actor;
  typename MlpT<S>::Workspace critic;
};

// Loss terms for transition i, and, when the grad pointers are given, the
// gradient of the per-sample training loss
//   -min(r*A, clip(r)*A) + value_coef*(V - ret)^2 - entropy_coef*H
// accumulated into them (caller divides by the batch size). The clipped
// branch contributes an exactly zero policy gradient. Templated so the same
// arithmetic can be replayed in double for finite-difference checks.
template <class S>
void ppo_sample_terms(const PolicyParametersT<S>& params, const RolloutBuffer& buf, int i,
                      S clip_eps, S value_coef, S entropy_coef, LossAccum& acc,
                      MlpGradsT<S>* actor_g, VecX<S>* log_std_g, MlpGradsT<S>* critic_g,
                      PpoWorkspace<S>& ws);

struct TrainStats {
  double surrogate_loss = 0.0;  // mean of -min(r*A, clip(r)*A)
  double value_loss = 0.0;      // mean of value_coef * (V - ret)^2
  double approx_kl = 0.0;       // mean of (r - 1) - log r
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

struct NonFiniteLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Clipped-objective update: epochs x shuffled minibatches, gradients
// accumulated in grad_block-sized blocks reduced in order, one Adam step per
// minibatch (actor + log_std at actor_lr, critic at critic_lr). Epoch e
// shuffles with derive_seed(seed, Stream::Shuffle, e). On any non-finite loss
// or gradient the parameters and optimizer are restored to their state on
// entry and NonFiniteLoss is thrown. Stats are per-sample means over every
// minibatch processed.
TrainStats ppo_update(PolicyParameters& params, OptimizerState& opt, const RolloutBuffer& buf,
                      const PpoConfig& ppo, const AdamConfig& adam, std::uint64_t seed, Exec exec);

}  // namespace acrl
