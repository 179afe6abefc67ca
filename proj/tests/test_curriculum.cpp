#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acrl/checkpoint.hpp"
#include "acrl/curriculum.hpp"

using namespace acrl;

namespace {

PolicyParameters tiny_policy(std::uint64_t seed) {
  NetConfig net;
  net.hidden1 = 16;
  net.hidden2 = 16;
  return init_policy<float>(net, seed);
}

bool same_intervals(const Intervals& a, const Intervals& b) {
  return a.a_lo == b.a_lo && a.a_hi == b.a_hi && a.b_lo == b.b_lo && a.b_hi == b.b_hi;
}

bool contains(const Intervals& outer, const Intervals& inner) {
  return outer.a_lo <= inner.a_lo && outer.a_hi >= inner.a_hi && outer.b_lo <= inner.b_lo &&
         outer.b_hi >= inner.b_hi;
}

CurriculumConfig fast_cur() {
  CurriculumConfig c;
  c.probe_sims = 40;
  c.n_opponents = 6;
  return c;
}

}  // namespace

TEST_CASE("advance gate property over random records") {
  CurriculumConfig cur;
  Rng rng(2718);
  for (int trial = 0; trial < 10000; ++trial) {
    CurriculumState st;
    st.intervals.a_lo = -rng.uniform01();
    st.intervals.a_hi = rng.uniform01();
    st.intervals.b_lo = -rng.uniform01();
    st.intervals.b_hi = rng.uniform01();
    st.subtask_index = static_cast<int>(rng.uniform_index(10));
    CurriculumState before = st;

    TestRecord rec;
    rec.wins = static_cast<int>(rng.uniform_index(37));
    rec.losses = static_cast<int>(rng.uniform_index(37 - rec.wins + 1));
    rec.draws = 36 - rec.wins - rec.losses;

    bool advanced = advance(st, rec, cur);
    bool should = rec.wins > cur.win_threshold && rec.wins > rec.losses;
    REQUIRE(advanced == should);

    if (!advanced) {
      REQUIRE(same_intervals(st.intervals, before.intervals));
      REQUIRE(st.subtask_index == before.subtask_index);
    } else {
      REQUIRE(st.subtask_index == before.subtask_index + 1);
      REQUIRE(contains(st.intervals, before.intervals));
      REQUIRE(st.intervals.a_lo ==
              doctest::Approx(std::max(-1.0, before.intervals.a_lo - 0.1)).epsilon(1e-12));
      REQUIRE(st.intervals.a_hi ==
              doctest::Approx(std::min(1.0, before.intervals.a_hi + 0.1)).epsilon(1e-12));
      REQUIRE(st.intervals.b_lo ==
              doctest::Approx(std::max(-1.0, before.intervals.b_lo - 0.1)).epsilon(1e-12));
      REQUIRE(st.intervals.b_hi ==
              doctest::Approx(std::min(1.0, before.intervals.b_hi + 0.1)).epsilon(1e-12));
      bool full = st.intervals.a_lo == -1.0 && st.intervals.a_hi == 1.0 &&
                  st.intervals.b_lo == -1.0 && st.intervals.b_hi == 1.0;
      REQUIRE(st.complete == full);
    }
  }
}

TEST_CASE("gate boundaries are strict") {
  CurriculumConfig cur;
  CurriculumState st;
  st.intervals = {-0.2, 0.2, -0.2, 0.2};

  TestRecord rec;
  rec.wins = 20;  // exactly the threshold: not enough
  rec.losses = 0;
  rec.draws = 16;
  CHECK_FALSE(advance(st, rec, cur));

  rec.wins = 21;
  rec.losses = 21;  // ties don't advance
  rec.draws = 0;
  CHECK_FALSE(advance(st, rec, cur));

  rec.wins = 21;
  rec.losses = 20;
  CHECK(advance(st, rec, cur));
}

TEST_CASE("any start completes within twenty passing gates") {
  CurriculumConfig cur;
  TestRecord pass;
  pass.wins = 36;
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    CurriculumState st;
    st.intervals.a_lo = -rng.uniform01();
    st.intervals.a_hi = rng.uniform01();
    st.intervals.b_lo = -rng.uniform01();
    st.intervals.b_hi = rng.uniform01();
    int gates = 0;
    while (!st.complete && gates < 100) {
      advance(st, pass, cur);
      ++gates;
    }
    REQUIRE(st.complete);
    REQUIRE(gates <= 20);
  }
}

TEST_CASE("complete state is absorbing") {
  CurriculumConfig cur;
  CurriculumState st;
  st.intervals = {-0.95, 0.95, -0.95, 0.95};
  TestRecord pass;
  pass.wins = 36;
  CHECK(advance(st, pass, cur));
  CHECK(st.complete);
  CHECK(st.intervals.a_lo == -1.0);  // clamped exactly, no overshoot
  CHECK(st.intervals.a_hi == 1.0);
  CHECK(st.intervals.b_lo == -1.0);
  CHECK(st.intervals.b_hi == 1.0);

  CurriculumState frozen = st;
  CHECK_FALSE(advance(st, pass, cur));
  CHECK(same_intervals(st.intervals, frozen.intervals));
  CHECK(st.subtask_index == frozen.subtask_index);
}

TEST_CASE("probe is deterministic and execution-mode independent") {
  SimConfig sim;
  CurriculumConfig cur = fast_cur();
  PolicyParameters p = tiny_policy(5);

  ProbeResult a = probe(p, sim, cur, 77, Exec::Serial);
  ProbeResult b = probe(p, sim, cur, 77, Exec::Parallel);
  CHECK(same_intervals(a.intervals, b.intervals));
  CHECK(a.fallback == b.fallback);
  CHECK(a.n_sims == cur.probe_sims);
  REQUIRE(a.hit_points.size() == b.hit_points.size());
  for (std::size_t i = 0; i < a.hit_points.size(); ++i) {
    CHECK(a.hit_points[i][0] == b.hit_points[i][0]);
    CHECK(a.hit_points[i][1] == b.hit_points[i][1]);
  }

  ProbeResult c = probe(p, sim, cur, 78, Exec::Serial);
  bool differs = !same_intervals(a.intervals, c.intervals) ||
                 a.hit_points.size() != c.hit_points.size();
  CHECK(differs);
}

TEST_CASE("probe intervals bound the hit points") {
  SimConfig sim;
  CurriculumConfig cur;
  cur.probe_sims = 300;
  PolicyParameters p = tiny_policy(6);
  ProbeResult r = probe(p, sim, cur, 13, Exec::Serial);
  REQUIRE_FALSE(r.fallback);
  REQUIRE(r.hit_points.size() > 0);

  double a_min = 1e9, a_max = -1e9, b_min = 1e9, b_max = -1e9;
  for (const auto& h : r.hit_points) {
    a_min = std::min(a_min, h[0]);
    a_max = std::max(a_max, h[0]);
    b_min = std::min(b_min, h[1]);
    b_max = std::max(b_max, h[1]);
  }
  if (r.hit_points.size() > 1) {
    CHECK(r.intervals.a_lo == doctest::Approx(a_min));
    CHECK(r.intervals.a_hi == doctest::Approx(a_max));
    CHECK(r.intervals.b_lo == doctest::Approx(b_min));
    CHECK(r.intervals.b_hi == doctest::Approx(b_max));
  }
  CHECK(r.intervals.a_lo >= -1.0);
  CHECK(r.intervals.a_hi <= 1.0);
  CHECK(r.intervals.b_lo >= -1.0);
  CHECK(r.intervals.b_hi <= 1.0);
}

TEST_CASE("probe with no hits falls back to the centered interval") {
  SimConfig sim;
  sim.missile.fuze_radius = 0.0;  // nothing can ever fuze
  CurriculumConfig cur = fast_cur();
  PolicyParameters p = tiny_policy(7);
  ProbeResult r = probe(p, sim, cur, 21, Exec::Serial);
  CHECK(r.fallback);
  CHECK(r.hit_points.empty());
  CHECK(r.intervals.a_lo == -cur.fallback_halfwidth);
  CHECK(r.intervals.a_hi == cur.fallback_halfwidth);
  CHECK(r.intervals.b_lo == -cur.fallback_halfwidth);
  CHECK(r.intervals.b_hi == cur.fallback_halfwidth);
}

TEST_CASE("single hit widens the degenerate axis") {
  SimConfig sim;
  sim.missile.fuze_radius = 1e9;  // everything fuzes on the first substep
  CurriculumConfig cur;
  cur.probe_sims = 1;
  PolicyParameters p = tiny_policy(8);
  ProbeResult r = probe(p, sim, cur, 30, Exec::Serial);
  REQUIRE_FALSE(r.fallback);
  REQUIRE(r.hit_points.size() == 1);
  double a = r.hit_points[0][0];
  double b = r.hit_points[0][1];
  CHECK(r.intervals.a_lo == doctest::Approx(std::max(-1.0, a - 0.05)));
  CHECK(r.intervals.a_hi == doctest::Approx(std::min(1.0, a + 0.05)));
  CHECK(r.intervals.b_lo == doctest::Approx(std::max(-1.0, b - 0.05)));
  CHECK(r.intervals.b_hi == doctest::Approx(std::min(1.0, b + 0.05)));
}

TEST_CASE("evaluation samples opponents without replacement") {
  SimConfig sim;
  CurriculumConfig cur;
  cur.n_opponents = 4;
  PolicyParameters learner = tiny_policy(9);

  OpponentPool pool;
  for (std::uint32_t v = 0; v < 6; ++v) {
    PolicyParameters m = tiny_policy(20 + v);
    m.version = v;
    pool.push(m);
  }

  TestRecord rec = evaluate(learner, pool, Intervals{}, sim, cur, 55, Exec::Serial);
  CHECK(rec.opponents_used.size() == 4);
  CHECK(rec.total() == 4 * cur.episodes_per_opponent);
  // distinct members
  auto used = rec.opponents_used;
  std::sort(used.begin(), used.end());
  CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());

  // pool smaller than the quota: everyone plays
  cur.n_opponents = 36;
  TestRecord all = evaluate(learner, pool, Intervals{}, sim, cur, 55, Exec::Serial);
  CHECK(all.opponents_used.size() == 6);
  CHECK(all.total() == 6);

  OpponentPool empty;
  CHECK_THROWS_AS(evaluate(learner, empty, Intervals{}, sim, cur, 55, Exec::Serial),
                  std::invalid_argument);
}

TEST_CASE("evaluation is deterministic across execution modes") {
  SimConfig sim;
  CurriculumConfig cur;
  cur.n_opponents = 5;
  cur.episodes_per_opponent = 2;
  PolicyParameters learner = tiny_policy(11);
  OpponentPool pool;
  for (std::uint32_t v = 0; v < 5; ++v) {
    PolicyParameters m = tiny_policy(40 + v);
    m.version = v;
    pool.push(m);
  }
  Intervals iv{-0.3, 0.3, -0.5, 0.5};

  TestRecord a = evaluate(learner, pool, iv, sim, cur, 66, Exec::Serial);
  TestRecord b = evaluate(learner, pool, iv, sim, cur, 66, Exec::Parallel);
  CHECK(a.wins == b.wins);
  CHECK(a.losses == b.losses);
  CHECK(a.draws == b.draws);
  CHECK(a.opponents_used == b.opponents_used);
  CHECK(a.total() == 10);
}

TEST_CASE("iteration updates the learner, grows the pool, and tags versions") {
  SimConfig sim;
  PpoConfig ppo;
  ppo.n_steps = 64;
  ppo.minibatch = 64;
  ppo.epochs = 2;
  CurriculumConfig cur_cfg = fast_cur();
  AdamConfig adam;

  PolicyParameters learner = tiny_policy(12);
  OptimizerState opt = make_optimizer(learner);
  OpponentPool pool;
  pool.push(learner);

  CurriculumState st;
  st.intervals = {-0.2, 0.2, -0.2, 0.2};

  const std::uint32_t crc_snap0 = policy_crc(pool.members[0]);
  std::vector<Side> sides;
  for (int it = 1; it <= 3; ++it) {
    Intervals pre = st.intervals;
    int pre_subtask = st.subtask_index;
    std::size_t pre_pool = pool.size();

    IterationResult res = run_iteration(learner, opt, pool, st, it, sim, ppo, cur_cfg, adam, 2,
                                        4242, Exec::Serial);

    CHECK(same_intervals(res.intervals, pre));  // reported pre-advance
    CHECK(res.subtask_index == pre_subtask);
    CHECK(res.opponent_index < pre_pool);
    CHECK(res.learner_side == (it % 2 == 1 ? Side::Red : Side::Blue));
    CHECK(pool.size() == pre_pool + 1);
    CHECK(learner.version == static_cast<std::uint32_t>(it));
    CHECK(pool.members.back().version == static_cast<std::uint32_t>(it));
    CHECK(res.test.total() == static_cast<int>(std::min<std::size_t>(cur_cfg.n_opponents,
                                                                     pre_pool + 1)));
    bool gate = res.test.wins > cur_cfg.win_threshold && res.test.wins > res.test.losses;
    CHECK(res.advanced == gate);
    sides.push_back(res.learner_side);

    // the pushed snapshot really is the post-update learner
    CHECK(policy_crc(pool.members.back()) == policy_crc(learner));
  }
  // earlier snapshots are never touched by later training
  CHECK(policy_crc(pool.members[0]) == crc_snap0);
  CHECK(sides[0] == Side::Red);
  CHECK(sides[1] == Side::Blue);
  CHECK(sides[2] == Side::Red);

  CHECK_THROWS_AS(run_iteration(learner, opt, pool, st, 0, sim, ppo, cur_cfg, adam, 2, 4242,
                                Exec::Serial),
                  std::invalid_argument);
}

TEST_CASE("disabled curriculum never advances") {
  SimConfig sim;
  PpoConfig ppo;
  ppo.n_steps = 32;
  ppo.minibatch = 32;
  ppo.epochs = 1;
  CurriculumConfig cur_cfg = fast_cur();
  cur_cfg.enabled = false;
  AdamConfig adam;

  PolicyParameters learner = tiny_policy(13);
  OptimizerState opt = make_optimizer(learner);
  OpponentPool pool;
  pool.push(learner);
  CurriculumState st;  // full domain by default

  for (int it = 1; it <= 2; ++it) {
    IterationResult res = run_iteration(learner, opt, pool, st, it, sim, ppo, cur_cfg, adam, 1,
                                        777, Exec::Serial);
    CHECK_FALSE(res.advanced);
    CHECK(same_intervals(st.intervals, Intervals{}));
    CHECK(st.subtask_index == 0);
  }
}

TEST_CASE("iterations are reproducible from the same seed") {
  SimConfig sim;
  PpoConfig ppo;
  ppo.n_steps = 64;
  ppo.minibatch = 64;
  ppo.epochs = 1;
  CurriculumConfig cur_cfg = fast_cur();
  AdamConfig adam;

  auto run3 = [&](Exec exec) {
    PolicyParameters learner = tiny_policy(14);
    OptimizerState opt = make_optimizer(learner);
    OpponentPool pool;
    pool.push(learner);
    CurriculumState st;
    st.intervals = {-0.3, 0.3, -0.3, 0.3};
    std::vector<int> wld;
    for (int it = 1; it <= 3; ++it) {
      IterationResult r =
          run_iteration(learner, opt, pool, st, it, sim, ppo, cur_cfg, adam, 2, 31337, exec);
      wld.push_back(r.test.wins);
      wld.push_back(r.test.losses);
      wld.push_back(r.test.draws);
    }
    return std::make_pair(policy_crc(learner), wld);
  };

  auto a = run3(Exec::Serial);
  auto b = run3(Exec::Parallel);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
