#include "acrl/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace acrl {

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

ProbeResult probe(const PolicyParameters& params, const SimConfig& sim,
                  const CurriculumConfig& cur, std::uint64_t seed, Exec exec) {
  const int n = cur.probe_sims;
  if (n <= 0) throw std::invalid_argument("probe: probe_sims must be positive");

  struct Slot {
    bool hit = false;
    double a = 0.0;
    double b = 0.0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n));
  const Intervals full{};

  parallel_for(static_cast<std::size_t>(n), exec, [&](std::size_t i) {
    Rng rng(derive_seed(seed, Stream::Probe, i));
    InitialConditions ic = sample_initial_conditions(full, sim, rng);
    EpisodeResult ep = run_episode(params, params, ic, sim, true, rng.bits());
    slots[i] = {ep.outcome.reason == Reason::Fuze, ic.a, ic.b};
  });

  ProbeResult res;
  res.n_sims = n;
  double a_lo = 1.0, a_hi = -1.0, b_lo = 1.0, b_hi = -1.0;
  for (const Slot& s : slots) {
    if (!s.hit) continue;
    res.hit_points.push_back({s.a, s.b});
    a_lo = std::min(a_lo, s.a);
    a_hi = std::max(a_hi, s.a);
    b_lo = std::min(b_lo, s.b);
    b_hi = std::max(b_hi, s.b);
  }

  if (res.hit_points.empty()) {
    res.fallback = true;
    a_lo = -cur.fallback_halfwidth;
    a_hi = cur.fallback_halfwidth;
    b_lo = -cur.fallback_halfwidth;
    b_hi = cur.fallback_halfwidth;
  } else {
    if (a_lo == a_hi) {
      a_lo -= cur.delta / 2.0;
      a_hi += cur.delta / 2.0;
    }
    if (b_lo == b_hi) {
      b_lo -= cur.delta / 2.0;
      b_hi += cur.delta / 2.0;
    }
  }
  res.intervals = {clamp_unit(a_lo), clamp_unit(a_hi), clamp_unit(b_lo), clamp_unit(b_hi)};
  return res;
}

TestRecord evaluate(const PolicyParameters& learner, const OpponentPool& pool, const Intervals& iv,
                    const SimConfig& sim, const CurriculumConfig& cur, std::uint64_t seed,
                    Exec exec) {
  if (pool.size() == 0) throw std::invalid_argument("evaluate: empty opponent pool");
  const std::size_t k = std::min(static_cast<std::size_t>(cur.n_opponents), pool.size());

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng select_rng(derive_seed(seed, Stream::Eval, 0));
  select_rng.shuffle(order);
  order.resize(k);

  const std::size_t epp = static_cast<std::size_t>(cur.episodes_per_opponent);
  const std::size_t n_episodes = k * epp;
  // 0 = learner win, 1 = loss, 2 = draw
  std::vector<std::uint8_t> verdict(n_episodes, 2);

  parallel_for(n_episodes, exec, [&](std::size_t s) {
    const std::size_t opp = s / epp;
    const std::size_t rep = s % epp;
    const Side learner_side = (s % 2 == 0) ? Side::Red : Side::Blue;

    Rng rng(derive_seed(seed, Stream::Eval, opp + 1, rep));
    InitialConditions ic = sample_initial_conditions(iv, sim, rng);

    const PolicyParameters& op = pool.members[order[opp]];
    const PolicyParameters& red = learner_side == Side::Red ? learner : op;
    const PolicyParameters& blue = learner_side == Side::Red ? op : learner;
    EpisodeResult ep = run_episode(red, blue, ic, sim, false, 0);

    const double r = learner_side == Side::Red ? ep.outcome.reward_red : ep.outcome.reward_blue;
    verdict[s] = r > 0.0 ? 0 : (r < 0.0 ? 1 : 2);
  });

  TestRecord rec;
  for (std::size_t j = 0; j < k; ++j) {
    rec.opponents_used.push_back(pool.members[order[j]].version);
  }
  for (std::uint8_t v : verdict) {
    if (v == 0) ++rec.wins;
    else if (v == 1) ++rec.losses;
    else ++rec.draws;
  }
  return rec;
}

bool advance(CurriculumState& st, const TestRecord& test, const CurriculumConfig& cur) {
  if (st.complete) return false;
  if (!(test.wins > cur.win_threshold && test.wins > test.losses)) return false;

  st.intervals.a_lo = clamp_unit(st.intervals.a_lo - cur.delta);
  st.intervals.a_hi = clamp_unit(st.intervals.a_hi + cur.delta);
  st.intervals.b_lo = clamp_unit(st.intervals.b_lo - cur.delta);
  st.intervals.b_hi = clamp_unit(st.intervals.b_hi + cur.delta);
  ++st.subtask_index;
  st.complete = st.intervals.a_lo == -1.0 && st.intervals.a_hi == 1.0 &&
                st.intervals.b_lo == -1.0 && st.intervals.b_hi == 1.0;
  return true;
}

IterationResult run_iteration(PolicyParameters& learner, OptimizerState& opt, OpponentPool& pool,
                              CurriculumState& cur, int iteration, const SimConfig& sim,
                              const PpoConfig& ppo, const CurriculumConfig& cur_cfg,
                              const AdamConfig& adam, int workers, std::uint64_t run_seed,
                              Exec exec) {
  if (iteration <= 0) throw std::invalid_argument("run_iteration: iterations are 1-based");
  if (pool.size() == 0) throw std::invalid_argument("run_iteration: empty opponent pool");

  const std::uint64_t iter_seed = derive_seed(run_seed, iteration);

  IterationResult res;
  res.intervals = cur.intervals;
  res.subtask_index = cur.subtask_index;

  Rng opp_rng(derive_seed(iter_seed, Stream::Opponent));
  res.opponent_index = opp_rng.uniform_index(pool.size());
  res.learner_side = (iteration % 2 == 1) ? Side::Red : Side::Blue;

  // The opponent is copied: collection must not alias the pool push below.
  const PolicyParameters opponent = pool.members[res.opponent_index];

  RolloutBuffer buf = collect_rollouts(learner, opponent, res.learner_side, cur.intervals, sim,
                                       ppo, workers, iter_seed, exec);
  compute_advantages(buf, ppo);
  res.train = ppo_update(learner, opt, buf, ppo, adam, iter_seed, exec);

  learner.version = static_cast<std::uint32_t>(iteration);
  pool.push(learner);

  res.test = evaluate(learner, pool, cur.intervals, sim, cur_cfg, iter_seed, exec);
  if (cur_cfg.enabled) {
    res.advanced = advance(cur, res.test, cur_cfg);
  }
  return res;
}

}  // namespace acrl
