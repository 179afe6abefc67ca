#include <cstdio>
#include <cstring>

#include "acrl/checkpoint.hpp"
#include "acrl/config.hpp"
#include "acrl/curriculum.hpp"

using namespace acrl;

namespace {

bool same_floats(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

bool same_buffers(const RolloutBuffer& a, const RolloutBuffer& b) {
  return same_floats(a.obs, b.obs) && same_floats(a.actions, b.actions) &&
         same_floats(a.logp_old, b.logp_old) && same_floats(a.value_old, b.value_old) &&
         same_floats(a.reward, b.reward) && a.done == b.done &&
         a.segments.size() == b.segments.size();
}

struct Timed {
  double serial = 0.0;
  double parallel = 0.0;
};

void report(const char* name, const Timed& t, bool identical) {
  std::printf("%-12s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name, t.serial,
              t.parallel, t.parallel > 0.0 ? t.serial / t.parallel : 0.0,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  ExperimentConfig cfg = default_config();
  cfg.net.hidden1 = 64;
  cfg.net.hidden2 = 64;
  cfg.ppo.n_steps = 2048;
  cfg.curriculum.probe_sims = 200;
  validate(cfg);

  const std::uint64_t seed = derive_seed(cfg.run.seed, 0);
  PolicyParameters learner = init_policy<float>(cfg.net, seed);
  PolicyParameters opponent = learner;
  const Intervals iv{-0.3, 0.3, -0.3, 0.3};

  bool all_ok = true;

  {
    Timed t;
    double t0 = wall_seconds();
    RolloutBuffer bs = collect_rollouts(learner, opponent, Side::Red, iv, cfg.sim, cfg.ppo,
                                        cfg.run.workers, seed, Exec::Serial);
    t.serial = wall_seconds() - t0;
    t0 = wall_seconds();
    RolloutBuffer bp = collect_rollouts(learner, opponent, Side::Red, iv, cfg.sim, cfg.ppo,
                                        cfg.run.workers, seed, Exec::Parallel);
    t.parallel = wall_seconds() - t0;
    const bool ok = same_buffers(bs, bp);
    all_ok = all_ok && ok;
    report("collect", t, ok);

    compute_advantages(bs, cfg.ppo);
    Timed tu;
    PolicyParameters ps = learner;
    OptimizerState os = make_optimizer(ps);
    t0 = wall_seconds();
    ppo_update(ps, os, bs, cfg.ppo, cfg.adam, seed, Exec::Serial);
    tu.serial = wall_seconds() - t0;
    PolicyParameters pp = learner;
    OptimizerState op = make_optimizer(pp);
    t0 = wall_seconds();
    ppo_update(pp, op, bs, cfg.ppo, cfg.adam, seed, Exec::Parallel);
    tu.parallel = wall_seconds() - t0;
    const bool uok = policy_crc(ps) == policy_crc(pp);
    all_ok = all_ok && uok;
    report("update", tu, uok);
  }

  {
    Timed t;
    double t0 = wall_seconds();
    ProbeResult rs = probe(learner, cfg.sim, cfg.curriculum, seed, Exec::Serial);
    t.serial = wall_seconds() - t0;
    t0 = wall_seconds();
    ProbeResult rp = probe(learner, cfg.sim, cfg.curriculum, seed, Exec::Parallel);
    t.parallel = wall_seconds() - t0;
    const bool ok = rs.hit_points == rp.hit_points && rs.intervals.a_lo == rp.intervals.a_lo &&
                    rs.intervals.a_hi == rp.intervals.a_hi &&
                    rs.intervals.b_lo == rp.intervals.b_lo &&
                    rs.intervals.b_hi == rp.intervals.b_hi;
    all_ok = all_ok && ok;
    report("probe", t, ok);
  }

  {
    OpponentPool pool;
    pool.push(learner);
    for (int i = 1; i <= 7; ++i) {
      PolicyParameters p = init_policy<float>(cfg.net, derive_seed(seed, Stream::Init, i));
      p.version = static_cast<std::uint32_t>(i);
      pool.push(p);
    }
    Timed t;
    double t0 = wall_seconds();
    TestRecord rs = evaluate(learner, pool, iv, cfg.sim, cfg.curriculum, seed, Exec::Serial);
    t.serial = wall_seconds() - t0;
    t0 = wall_seconds();
    TestRecord rp = evaluate(learner, pool, iv, cfg.sim, cfg.curriculum, seed, Exec::Parallel);
    t.parallel = wall_seconds() - t0;
    const bool ok =
        rs.wins == rp.wins && rs.losses == rp.losses && rs.draws == rp.draws &&
        rs.opponents_used == rp.opponents_used;
    all_ok = all_ok && ok;
    report("evaluate", t, ok);
  }

  if (!all_ok) {
    std::printf("parallel results diverge from serial\n");
    return 1;
  }
  return 0;
}
