#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "acrl/ppo.hpp"

namespace acrl {

struct CurriculumConfig {
  bool enabled = true;
  double delta = 0.1;             // per-advance widening of every interval bound
  int win_threshold = 20;         // advance needs wins > win_threshold and wins > losses
  int probe_sims = 1000;
  int n_opponents = 36;           // opponents sampled per evaluation, without replacement
  int episodes_per_opponent = 1;
  double fallback_halfwidth = 0.1;  // seed interval when the probe finds no hits
};

struct CurriculumState {
  Intervals intervals;     // current sampling sub-domain
  int subtask_index = 0;   // number of advances taken
  bool complete = false;   // intervals cover the full domain; absorbing
};

struct TestRecord {
  int wins = 0;
  int losses = 0;
  int draws = 0;
  std::vector<std::uint32_t> opponents_used;  // version tags, selection order
  int total() const { return wins + losses + draws; }
};

// Snapshots of past learner policies, append-only. Index order is creation
// order; entry 0 is the initial policy, version tags strictly increase.
struct OpponentPool {
  std::vector<PolicyParameters> members;
  std::size_t size() const { return members.size(); }
  void push(const PolicyParameters& p) { members.push_back(p); }
};

struct ProbeResult {
  Intervals intervals;
  std::vector<std::array<double, 2>> hit_points;  // (a, b) of fuze episodes, sim order
  bool fallback = false;  // no hits anywhere; centered fallback interval used
  int n_sims = 0;
};

// Capability scan: probe_sims self-play episodes with initial conditions
// uniform over the full domain, stochastic actions, sim i seeded from
// derive_seed(seed, Stream::Probe, i). An episode is a hit when it ends by
// fuze. The returned intervals are the min/max hit coordinates per axis; with
// no hits anywhere, +-fallback_halfwidth around 0; an axis whose min equals
// its max is widened by +-delta/2. Bounds are clamped to the domain.
ProbeResult probe(const PolicyParameters& params, const SimConfig& sim,
                  const CurriculumConfig& cur, std::uint64_t seed, Exec exec);

// Plays the learner against min(n_opponents, pool size) distinct pool members,
// episodes_per_opponent episodes each, with deterministic (mean) actions and
// initial conditions drawn from the current intervals. The learner's side
// alternates across episodes. Opponent selection and per-episode seeds derive
// from (seed, Stream::Eval, ...).
TestRecord evaluate(const PolicyParameters& learner, const OpponentPool& pool, const Intervals& iv,
                    const SimConfig& sim, const CurriculumConfig& cur, std::uint64_t seed,
                    Exec exec);

// Advance gate: wins > win_threshold and wins > losses. On advance every
// bound moves outward by delta (clamped to [-1,1]) and subtask_index
// increments; once the intervals cover the whole domain the state is complete
// and further calls change nothing. Returns whether an advance happened.
bool advance(CurriculumState& st, const TestRecord& test, const CurriculumConfig& cur);

struct IterationResult {
  Intervals intervals;  // sampling intervals this iteration trained on
  int subtask_index = 0;
  std::size_t opponent_index = 0;
  Side learner_side = Side::Red;
  TrainStats train;
  TestRecord test;
  bool advanced = false;
};

// One self-play iteration, 1-based:
//   opponent <- uniform pool draw; learner plays red on odd iterations;
//   collect -> advantages -> update -> version = iteration -> pool push ->
//   evaluate -> advance (when the curriculum is enabled).
// All randomness derives from iter_seed = derive_seed(run_seed, iteration).
IterationResult run_iteration(PolicyParameters& learner, OptimizerState& opt, OpponentPool& pool,
                              CurriculumState& cur, int iteration, const SimConfig& sim,
                              const PpoConfig& ppo, const CurriculumConfig& cur_cfg,
                              const AdamConfig& adam, int workers, std::uint64_t run_seed,
                              Exec exec);

}  // namespace acrl
