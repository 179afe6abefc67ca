#pragma once

#include <optional>
#include <string>

#include "acrl/config.hpp"
#include "acrl/curriculum.hpp"
#include "acrl/parallel.hpp"

namespace acrl {

struct MetricsRow {
  int run = 0;
  int iteration = 0;        // 1-based; row 0 of a run is never written
  int subtask = 0;          // curriculum state the iteration trained on
  Intervals intervals;
  int wins = 0;
  int losses = 0;
  int draws = 0;
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double wall_seconds = 0.0;  // goes to the timing sidecar; metrics.csv stays reproducible
};

extern const char* kMetricsHeader;  // includes the trailing newline
std::string format_metrics_row(const MetricsRow& r);

// Probe with the run-0 initial policy; writes <out>/probe_report.json with
// the intervals and the per-hit (a, b) log.
void cmd_probe(const ExperimentConfig& cfg, Exec exec);

// Sequential independent runs under <out>/run_<r>/, resumable per iteration;
// assembles <out>/metrics.csv, summary.csv (mean/std across runs per
// iteration) and the timing sidecar once every run is complete. A run
// directory with a different resolved config is an error.
void cmd_train(const ExperimentConfig& cfg, Exec exec);

// One seeded run, stopping after iteration_cap iterations. A capped run
// leaves the directory exactly as an interrupted cmd_train would; calling
// cmd_train afterwards picks it up at the next iteration.
void train_run(const ExperimentConfig& cfg, int run_index, Exec exec, int iteration_cap);

struct DuelOptions {
  std::string ckpt_a;
  std::string ckpt_b;
  int episodes = 100;  // consecutive pairs share the initial conditions and swap sides
  Intervals intervals;
  std::uint64_t seed = 1;
  std::string out_path;  // optional report copy
};

struct DuelReport {
  int episodes = 0;
  int wins_a = 0;
  int wins_b = 0;
  int draws = 0;
  double mean_decision_steps = 0.0;
};

DuelReport cmd_duel(const DuelOptions& opt, const ExperimentConfig& cfg, Exec exec);

struct ExportOptions {
  std::string ckpt;
  double angle_deg = 0.0;      // blue bearing off red's nose
  double distance = 10000.0;   // initial separation, m
  std::optional<double> v_red, v_blue, z_red, z_blue;  // sampled when not given
  std::uint64_t seed = 1;
  std::string out_path = "trajectory.jsonl";
};

// One deterministic self-play episode of the checkpointed policy, written as
// a trajectory file.
void cmd_export(const ExportOptions& opt, const ExperimentConfig& cfg);

}  // namespace acrl
