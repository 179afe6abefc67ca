#include "acrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace acrl {

namespace {

struct WorkerBuf {
  std::vector<float> obs;
  std::vector<float> actions;
  std::vector<float> logp_old;
  std::vector<float> value_old;
  std::vector<float> reward;
  std::vector<std::uint8_t> done;
  std::vector<Segment> segments;
  int count = 0;
  int episodes = 0, wins = 0, losses = 0, draws = 0;
};

double learner_reward(const Outcome& o, Side learner_side) {
  return learner_side == Side::Red ? o.reward_red : o.reward_blue;
}

}  // namespace

RolloutBuffer collect_rollouts(const PolicyParameters& learner, const PolicyParameters& opponent,
                               Side learner_side, const Intervals& iv, const SimConfig& sim,
                               const PpoConfig& ppo, int workers, std::uint64_t seed, Exec exec) {
  if (workers <= 0 || ppo.n_steps <= 0 || ppo.n_steps % workers != 0) {
    throw std::invalid_argument("collect_rollouts: n_steps must be a positive multiple of workers");
  }
  const int quota = ppo.n_steps / workers;
  const int obs_dim = learner.actor.in_dim();
  const int act_dim = static_cast<int>(learner.log_std.size());

  std::vector<WorkerBuf> bufs(static_cast<std::size_t>(workers));
  parallel_for(static_cast<std::size_t>(workers), exec, [&](std::size_t w) {
    Rng rng(derive_seed(seed, Stream::Collect, w));
    WorkerBuf& wb = bufs[w];
    wb.obs.reserve(static_cast<std::size_t>(quota) * static_cast<std::size_t>(obs_dim));
    wb.actions.reserve(static_cast<std::size_t>(quota) * static_cast<std::size_t>(act_dim));
    MlpT<float>::Workspace ws;

    while (wb.count < quota) {
      InitialConditions ic = sample_initial_conditions(iv, sim, rng);
      EngagementState st = reset(ic, sim);
      const int seg_begin = wb.count;

      while (!st.outcome) {
        ObservationVector obs_l = observe(st, learner_side, sim);
        ObservationVector obs_o = observe(st, other(learner_side), sim);
        VecX<float> x = obs_to_input<float>(obs_l);
        ActionDistT<float> dist = forward_actor(learner, x, ws);
        VecX<float> a = sample_action(dist, rng);
        float lp = log_prob(dist, a);
        float val = forward_critic(learner, x, ws);
        AgentAction act_l = to_agent_action(a);
        AgentAction act_o = policy_action(opponent, obs_o, true, rng);

        for (int k = 0; k < obs_dim; ++k) wb.obs.push_back(x(k));
        for (int k = 0; k < act_dim; ++k) wb.actions.push_back(a(k));
        wb.logp_old.push_back(lp);
        wb.value_old.push_back(val);
        wb.reward.push_back(0.0f);
        wb.done.push_back(0);
        ++wb.count;

        if (learner_side == Side::Red) {
          step(st, act_l, act_o, sim);
        } else {
          step(st, act_o, act_l, sim);
        }

        if (st.outcome) {
          double r = learner_reward(*st.outcome, learner_side);
          wb.reward.back() = static_cast<float>(r);
          wb.done.back() = 1;
          wb.segments.push_back({seg_begin, wb.count, false, 0.0f});
          ++wb.episodes;
          if (r > 0.0) ++wb.wins;
          else if (r < 0.0) ++wb.losses;
          else ++wb.draws;
          break;
        }
        if (wb.count == quota) {
          ObservationVector nobs = observe(st, learner_side, sim);
          float bv = forward_critic(learner, obs_to_input<float>(nobs), ws);
          wb.segments.push_back({seg_begin, wb.count, true, bv});
          break;
        }
      }
    }
  });

  RolloutBuffer out;
  out.obs_dim = obs_dim;
  out.act_dim = act_dim;
  for (const WorkerBuf& wb : bufs) {
    const int offset = out.size();
    out.obs.insert(out.obs.end(), wb.obs.begin(), wb.obs.end());
    out.actions.insert(out.actions.end(), wb.actions.begin(), wb.actions.end());
    out.logp_old.insert(out.logp_old.end(), wb.logp_old.begin(), wb.logp_old.end());
    out.value_old.insert(out.value_old.end(), wb.value_old.begin(), wb.value_old.end());
    out.reward.insert(out.reward.end(), wb.reward.begin(), wb.reward.end());
    out.done.insert(out.done.end(), wb.done.begin(), wb.done.end());
    for (Segment s : wb.segments) {
      s.begin += offset;
      s.end += offset;
      out.segments.push_back(s);
    }
    out.episodes += wb.episodes;
    out.wins += wb.wins;
    out.losses += wb.losses;
    out.draws += wb.draws;
  }
  return out;
}

void compute_advantages(RolloutBuffer& buf, const PpoConfig& ppo,
                        std::vector<double>* raw_advantage) {
  const int n = buf.size();
  std::vector<double> adv(static_cast<std::size_t>(n), 0.0);
  buf.ret.assign(static_cast<std::size_t>(n), 0.0f);

  for (const Segment& seg : buf.segments) {
    double carry = 0.0;
    for (int t = seg.end - 1; t >= seg.begin; --t) {
      const bool terminal = buf.done[static_cast<std::size_t>(t)] != 0;
      double next_v;
      if (t == seg.end - 1) {
        next_v = seg.bootstrap ? static_cast<double>(seg.bootstrap_value) : 0.0;
      } else {
        next_v = static_cast<double>(buf.value_old[static_cast<std::size_t>(t) + 1]);
      }
      const double mask = terminal ? 0.0 : 1.0;
      const double delta = static_cast<double>(buf.reward[static_cast<std::size_t>(t)]) +
                           ppo.gamma * next_v * mask -
                           static_cast<double>(buf.value_old[static_cast<std::size_t>(t)]);
      carry = delta + ppo.gamma * ppo.gae_lambda * mask * carry;
      adv[static_cast<std::size_t>(t)] = carry;
      buf.ret[static_cast<std::size_t>(t)] =
          static_cast<float>(carry + static_cast<double>(buf.value_old[static_cast<std::size_t>(t)]));
    }
  }

  if (raw_advantage) *raw_advantage = adv;

  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= std::max(1, n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= std::max(1, n);
  const double denom = std::sqrt(var) + 1e-8;

  buf.advantage.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    buf.advantage[static_cast<std::size_t>(i)] =
        static_cast<float>((adv[static_cast<std::size_t>(i)] - mean) / denom);
  }
}

template <class S>
void ppo_sample_terms(const PolicyParametersT<S>& params, const RolloutBuffer& buf, int i,
                      S clip_eps, S value_coef, S entropy_coef, LossAccum& acc,
                      MlpGradsT<S>* actor_g, VecX<S>* log_std_g, MlpGradsT<S>* critic_g,
                      PpoWorkspace<S>& ws) {
  const int od = buf.obs_dim;
  const int ad = buf.act_dim;
  VecX<S> x(od);
  for (int k = 0; k < od; ++k) {
    x(k) = static_cast<S>(buf.obs[static_cast<std::size_t>(i) * static_cast<std::size_t>(od) +
                                  static_cast<std::size_t>(k)]);
  }
  VecX<S> a(ad);
  for (int k = 0; k < ad; ++k) {
    a(k) = static_cast<S>(buf.actions[static_cast<std::size_t>(i) * static_cast<std::size_t>(ad) +
                                      static_cast<std::size_t>(k)]);
  }
  const S logp_old = static_cast<S>(buf.logp_old[static_cast<std::size_t>(i)]);
  const S adv = static_cast<S>(buf.advantage[static_cast<std::size_t>(i)]);
  const S ret = static_cast<S>(buf.ret[static_cast<std::size_t>(i)]);

  ActionDistT<S> dist = forward_actor(params, x, ws.actor);
  const S logp = log_prob(dist, a);
  const S ratio = std::exp(logp - logp_old);

  const S lo = S(1) - clip_eps;
  const S hi = S(1) + clip_eps;
  const S u = ratio * adv;
  const S c = (ratio < lo ? lo : (ratio > hi ? hi : ratio)) * adv;
  const S surr = u < c ? u : c;

  const S v = forward_critic(params, x, ws.critic);
  const S verr = v - ret;

  acc.surrogate += static_cast<double>(surr);
  acc.value += static_cast<double>(verr) * static_cast<double>(verr);
  acc.kl += static_cast<double>((ratio - S(1)) - (logp - logp_old));
  acc.clip_count += std::abs(ratio - S(1)) > clip_eps ? 1.0 : 0.0;
  acc.entropy += static_cast<double>(dist_entropy(dist));

  if (actor_g != nullptr) {
    // d(-surr)/dlogp; exactly zero when the clipped branch is active
    const S dsurr_dlogp = u <= c ? ratio * adv : S(0);
    const S dloss_dlogp = -dsurr_dlogp;
    VecX<S> dmean(ad);
    for (int k = 0; k < ad; ++k) {
      const S z = (a(k) - dist.mean(k)) / dist.std_dev(k);
      dmean(k) = dloss_dlogp * z / dist.std_dev(k);
      (*log_std_g)(k) += dloss_dlogp * (z * z - S(1)) - entropy_coef;
    }
    params.actor.backward(ws.actor, dmean, *actor_g);
  }
  if (critic_g != nullptr) {
    VecX<S> dv(1);
    dv(0) = S(2) * value_coef * verr;
    params.critic.backward(ws.critic, dv, *critic_g);
  }
}

template void ppo_sample_terms<float>(const PolicyParametersT<float>&, const RolloutBuffer&, int,
                                      float, float, float, LossAccum&, MlpGradsT<float>*,
                                      VecX<float>*, MlpGradsT<float>*, PpoWorkspace<float>&);
template void ppo_sample_terms<double>(const PolicyParametersT<double>&, const RolloutBuffer&, int,
                                       double, double, double, LossAccum&, MlpGradsT<double>*,
                                       VecX<double>*, MlpGradsT<double>*, PpoWorkspace<double>&);

TrainStats ppo_update(PolicyParameters& params, OptimizerState& opt, const RolloutBuffer& buf,
                      const PpoConfig& ppo, const AdamConfig& adam, std::uint64_t seed, Exec exec) {
  const int n = buf.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  if (static_cast<int>(buf.advantage.size()) != n || static_cast<int>(buf.ret.size()) != n) {
    throw std::invalid_argument("ppo_update: advantages not computed");
  }

  const PolicyParameters snapshot_params = params;
  const OptimizerState snapshot_opt = opt;

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);

  LossAccum total;
  long total_samples = 0;

  const float clip_eps = static_cast<float>(ppo.clip_eps);
  const float value_coef = static_cast<float>(ppo.value_coef);
  const float entropy_coef = static_cast<float>(ppo.entropy_coef);

  for (int epoch = 0; epoch < ppo.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(seed, Stream::Shuffle, epoch));
    shuffle_rng.shuffle(idx);

    for (int start = 0; start < n; start += ppo.minibatch) {
      const int batch = std::min(ppo.minibatch, n - start);
      const int nblocks = (batch + ppo.grad_block - 1) / ppo.grad_block;

      std::vector<MlpGradsT<float>> ag(static_cast<std::size_t>(nblocks));
      std::vector<MlpGradsT<float>> cg(static_cast<std::size_t>(nblocks));
      std::vector<VecX<float>> lg(static_cast<std::size_t>(nblocks));
      std::vector<LossAccum> accs(static_cast<std::size_t>(nblocks));

      parallel_for(static_cast<std::size_t>(nblocks), exec, [&](std::size_t blk) {
        MlpGradsT<float>& a = ag[blk];
        MlpGradsT<float>& c = cg[blk];
        a = params.actor.make_grads();
        c = params.critic.make_grads();
        lg[blk] = VecX<float>::Zero(params.log_std.size());
        PpoWorkspace<float> ws;
        const int b0 = start + static_cast<int>(blk) * ppo.grad_block;
        const int b1 = std::min(b0 + ppo.grad_block, start + batch);
        for (int j = b0; j < b1; ++j) {
          ppo_sample_terms<float>(params, buf, idx[static_cast<std::size_t>(j)], clip_eps,
                                  value_coef, entropy_coef, accs[blk], &a, &lg[blk], &c, ws);
        }
      });

      MlpGradsT<float> actor_g = std::move(ag[0]);
      MlpGradsT<float> critic_g = std::move(cg[0]);
      VecX<float> log_std_g = std::move(lg[0]);
      LossAccum acc = accs[0];
      for (int blk = 1; blk < nblocks; ++blk) {
        actor_g.add(ag[static_cast<std::size_t>(blk)]);
        critic_g.add(cg[static_cast<std::size_t>(blk)]);
        log_std_g += lg[static_cast<std::size_t>(blk)];
        acc.add(accs[static_cast<std::size_t>(blk)]);
      }

      const bool finite = actor_g.all_finite() && critic_g.all_finite() &&
                          log_std_g.allFinite() && std::isfinite(acc.surrogate) &&
                          std::isfinite(acc.value);
      if (!finite) {
        params = snapshot_params;
        opt = snapshot_opt;
        throw NonFiniteLoss("ppo_update: non-finite loss or gradient");
      }

      const float inv_b = 1.0f / static_cast<float>(batch);
      for (auto& dW : actor_g.dW) dW *= inv_b;
      for (auto& db : actor_g.db) db *= inv_b;
      for (auto& dW : critic_g.dW) dW *= inv_b;
      for (auto& db : critic_g.db) db *= inv_b;
      log_std_g *= inv_b;

      try {
        adam_update<float>(params.actor, &params.log_std, actor_g, &log_std_g, opt.actor,
                           ppo.actor_lr, adam);
        adam_update<float>(params.critic, nullptr, critic_g, nullptr, opt.critic, ppo.critic_lr,
                           adam);
      } catch (const std::runtime_error&) {
        params = snapshot_params;
        opt = snapshot_opt;
        throw NonFiniteLoss("ppo_update: non-finite loss or gradient");
      }

      total.add(acc);
      total_samples += batch;
    }
  }

  TrainStats st;
  const double inv = 1.0 / static_cast<double>(total_samples);
  st.surrogate_loss = -total.surrogate * inv;
  st.value_loss = ppo.value_coef * total.value * inv;
  st.approx_kl = total.kl * inv;
  st.clip_fraction = total.clip_count * inv;
  st.entropy = total.entropy * inv;
  return st;
}

}  // namespace acrl
