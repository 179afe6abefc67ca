#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "acrl/config.hpp"
#include "acrl/experiment.hpp"
#include "acrl/parallel.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int iterations = 0;
  int runs = 0;
  bool no_curriculum = false;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file; defaults fill missing keys");
  cmd->add_option("--seed", args.seed, "base seed")->each([&args](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--iterations", args.iterations, "training iterations per run");
  cmd->add_option("--runs", args.runs, "independent runs");
  cmd->add_flag("--no-curriculum", args.no_curriculum, "pin the intervals to the full domain");
  cmd->add_option("--out", args.out_dir, "output directory");
}

acrl::ExperimentConfig resolve(const CommonArgs& args) {
  acrl::ExperimentConfig cfg =
      args.config_path.empty() ? acrl::default_config() : acrl::load_config(args.config_path);
  if (args.seed_set) cfg.run.seed = args.seed;
  if (args.iterations > 0) cfg.run.iterations = args.iterations;
  if (args.runs > 0) cfg.run.runs = args.runs;
  if (args.no_curriculum) cfg.curriculum.enabled = false;
  if (!args.out_dir.empty()) cfg.run.out_dir = args.out_dir;
  return cfg;
}

acrl::Exec exec_mode(const acrl::ExperimentConfig& cfg) {
  if (cfg.run.threads > 0) acrl::set_threads(cfg.run.threads);
  return cfg.run.threads == 1 ? acrl::Exec::Serial : acrl::Exec::Parallel;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"air-combat maneuver trainer"};
  app.require_subcommand(1);

  CommonArgs probe_args;
  CLI::App* probe = app.add_subcommand("probe", "scan the initial-condition domain for hits");
  add_common(probe, probe_args);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run the training experiment");
  add_common(train, train_args);

  CommonArgs duel_args;
  acrl::DuelOptions duel_opt;
  CLI::App* duel = app.add_subcommand("eval", "pit two checkpoints against each other");
  duel->alias("duel");
  add_common(duel, duel_args);
  duel->add_option("ckpt_a", duel_opt.ckpt_a, "first checkpoint")->required();
  duel->add_option("ckpt_b", duel_opt.ckpt_b, "second checkpoint")->required();
  duel->add_option("--episodes", duel_opt.episodes, "episode count; consecutive pairs swap sides");
  duel->add_option("--a-lo", duel_opt.intervals.a_lo, "angle interval lower bound");
  duel->add_option("--a-hi", duel_opt.intervals.a_hi, "angle interval upper bound");
  duel->add_option("--b-lo", duel_opt.intervals.b_lo, "distance interval lower bound");
  duel->add_option("--b-hi", duel_opt.intervals.b_hi, "distance interval upper bound");
  duel->add_option("--report", duel_opt.out_path, "also write the report to this file");

  CommonArgs export_args;
  acrl::ExportOptions export_opt;
  double v_red = -1.0, v_blue = -1.0, z_red = -1.0, z_blue = -1.0;
  CLI::App* exp = app.add_subcommand("export", "write one deterministic episode as a trajectory");
  add_common(exp, export_args);
  exp->add_option("ckpt", export_opt.ckpt, "policy checkpoint")->required();
  exp->add_option("--angle-deg", export_opt.angle_deg, "initial bearing of blue, degrees");
  exp->add_option("--distance", export_opt.distance, "initial separation, meters");
  auto* vr = exp->add_option("--v-red", v_red, "initial red speed, m/s");
  auto* vb = exp->add_option("--v-blue", v_blue, "initial blue speed, m/s");
  auto* zr = exp->add_option("--z-red", z_red, "initial red altitude, m");
  auto* zb = exp->add_option("--z-blue", z_blue, "initial blue altitude, m");
  exp->add_option("--trajectory", export_opt.out_path, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (probe->parsed()) {
      acrl::ExperimentConfig cfg = resolve(probe_args);
      acrl::cmd_probe(cfg, exec_mode(cfg));
    } else if (train->parsed()) {
      acrl::ExperimentConfig cfg = resolve(train_args);
      acrl::cmd_train(cfg, exec_mode(cfg));
    } else if (duel->parsed()) {
      acrl::ExperimentConfig cfg = resolve(duel_args);
      duel_opt.seed = cfg.run.seed;
      acrl::cmd_duel(duel_opt, cfg, exec_mode(cfg));
    } else if (exp->parsed()) {
      acrl::ExperimentConfig cfg = resolve(export_args);
      export_opt.seed = cfg.run.seed;
      if (vr->count() > 0) export_opt.v_red = v_red;
      if (vb->count() > 0) export_opt.v_blue = v_blue;
      if (zr->count() > 0) export_opt.z_red = z_red;
      if (zb->count() > 0) export_opt.z_blue = z_blue;
      acrl::cmd_export(export_opt, cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
