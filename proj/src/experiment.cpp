#include "acrl/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "acrl/checkpoint.hpp"
#include "acrl/trajectory.hpp"

namespace acrl {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const char* kMetricsHeader =
    "run,iteration,subtask,a_lo,a_hi,b_lo,b_hi,wins,losses,draws,"
    "surrogate_loss,value_loss,clip_fraction,approx_kl\n";

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write: " + tmp.string());
    f << content;
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

void append_line(const fs::path& p, const std::string& line) {
  std::ofstream f(p, std::ios::binary | std::ios::app);
  if (!f) throw std::runtime_error("cannot append: " + p.string());
  f << line;
  if (!f) throw std::runtime_error("append failed: " + p.string());
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> lines;
  if (!fs::exists(p)) return lines;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

void save_params(const fs::path& p, const PolicyParameters& params, const OptimizerState& opt) {
  fs::path tmp = p;
  tmp += ".tmp";
  save_checkpoint(tmp.string(), params, opt);
  fs::rename(tmp, p);
}

fs::path snap_path(const fs::path& pool_dir, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "snap_%03d.ckpt", index);
  return pool_dir / name;
}

std::uint64_t run_base_seed(const ExperimentConfig& cfg, int run) {
  return derive_seed(cfg.run.seed, run);
}

Json intervals_json(const Intervals& iv) {
  Json j;
  j["a_lo"] = iv.a_lo;
  j["a_hi"] = iv.a_hi;
  j["b_lo"] = iv.b_lo;
  j["b_hi"] = iv.b_hi;
  return j;
}

Intervals intervals_from(const Json& j) {
  Intervals iv;
  j.at("a_lo").get_to(iv.a_lo);
  j.at("a_hi").get_to(iv.a_hi);
  j.at("b_lo").get_to(iv.b_lo);
  j.at("b_hi").get_to(iv.b_hi);
  return iv;
}

struct RunState {
  int next_iteration = 1;
  CurriculumState cur;
};

void save_run_state(const fs::path& run_dir, const RunState& st) {
  Json j;
  j["next_iteration"] = st.next_iteration;
  j["subtask_index"] = st.cur.subtask_index;
  j["complete"] = st.cur.complete;
  j["intervals"] = intervals_json(st.cur.intervals);
  write_file_atomic(run_dir / "state.json", j.dump(2) + "\n");
}

RunState load_run_state(const fs::path& run_dir) {
  Json j = Json::parse(read_file(run_dir / "state.json"));
  RunState st;
  j.at("next_iteration").get_to(st.next_iteration);
  j.at("subtask_index").get_to(st.cur.subtask_index);
  j.at("complete").get_to(st.cur.complete);
  st.cur.intervals = intervals_from(j.at("intervals"));
  return st;
}

// Keeps the first n lines of an append-only per-run file, dropping rows from
// an iteration that died before its state.json landed.
void truncate_lines(const fs::path& p, std::size_t n) {
  std::vector<std::string> lines = read_lines(p);
  if (lines.size() <= n) return;
  std::string content;
  for (std::size_t i = 0; i < n; ++i) content += lines[i] + "\n";
  write_file_atomic(p, content);
}

NetConfig net_config(const ExperimentConfig& cfg) { return cfg.net; }

}  // namespace

std::string format_metrics_row(const MetricsRow& r) {
  std::string s;
  s += std::to_string(r.run) + ",";
  s += std::to_string(r.iteration) + ",";
  s += std::to_string(r.subtask) + ",";
  s += fmt_g(r.intervals.a_lo) + ",";
  s += fmt_g(r.intervals.a_hi) + ",";
  s += fmt_g(r.intervals.b_lo) + ",";
  s += fmt_g(r.intervals.b_hi) + ",";
  s += std::to_string(r.wins) + ",";
  s += std::to_string(r.losses) + ",";
  s += std::to_string(r.draws) + ",";
  s += fmt_g(r.surrogate_loss) + ",";
  s += fmt_g(r.value_loss) + ",";
  s += fmt_g(r.clip_fraction) + ",";
  s += fmt_g(r.approx_kl) + "\n";
  return s;
}

void cmd_probe(const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  const std::uint64_t run_seed = run_base_seed(cfg, 0);
  PolicyParameters params = init_policy<float>(net_config(cfg), run_seed);
  ProbeResult res = probe(params, cfg.sim, cfg.curriculum, run_seed, exec);

  if (res.fallback) {
    std::cerr << "warning: no probe episode ended in a hit; using the fallback intervals\n";
  }

  Json j;
  j["n_sims"] = res.n_sims;
  j["hits"] = static_cast<int>(res.hit_points.size());
  j["fallback"] = res.fallback;
  j["intervals"] = intervals_json(res.intervals);
  Json pts = Json::array();
  for (const auto& hp : res.hit_points) pts.push_back({hp[0], hp[1]});
  j["hit_points"] = pts;

  fs::create_directories(cfg.run.out_dir);
  write_file_atomic(fs::path(cfg.run.out_dir) / "probe_report.json", j.dump(2) + "\n");

  std::cout << "probe: " << res.hit_points.size() << "/" << res.n_sims << " hits, intervals ["
            << fmt_g(res.intervals.a_lo) << "," << fmt_g(res.intervals.a_hi) << "] x ["
            << fmt_g(res.intervals.b_lo) << "," << fmt_g(res.intervals.b_hi) << "]\n";
}

namespace {

// Writes the resolved config on first contact with the directory; afterwards
// it must match exactly.
void bind_config(const ExperimentConfig& cfg) {
  const fs::path out_dir = cfg.run.out_dir;
  fs::create_directories(out_dir);
  const std::string echo = config_to_json(cfg);
  const fs::path config_path = out_dir / "config.json";
  if (fs::exists(config_path)) {
    if (read_file(config_path) != echo) {
      throw std::runtime_error("train: " + config_path.string() +
                               " does not match the requested config; use a fresh --out "
                               "directory or the original settings");
    }
  } else {
    write_file_atomic(config_path, echo);
  }
}

}  // namespace

void train_run(const ExperimentConfig& cfg, int run_index, Exec exec, int iteration_cap) {
  validate(cfg);
  bind_config(cfg);
  const int r = run_index;
  const std::uint64_t run_seed = run_base_seed(cfg, r);
  const fs::path run_dir = fs::path(cfg.run.out_dir) / ("run_" + std::to_string(r));
  const fs::path pool_dir = run_dir / "pool";
  fs::create_directories(pool_dir);

  PolicyParameters learner;
  OptimizerState opt;
  OpponentPool pool;
  RunState st;

  if (fs::exists(run_dir / "state.json")) {
    st = load_run_state(run_dir);
    const int done = st.next_iteration - 1;
    CheckpointData cd = load_checkpoint((run_dir / "learner.ckpt").string());
    learner = cd.params;
    opt = cd.opt;
    if (learner.version != static_cast<std::uint32_t>(done)) {
      throw std::runtime_error("train: learner checkpoint does not match state.json in " +
                               run_dir.string());
    }
    for (int i = 0; i <= done; ++i) {
      CheckpointData snap = load_checkpoint(snap_path(pool_dir, i).string());
      if (snap.params.version != static_cast<std::uint32_t>(i)) {
        throw std::runtime_error("train: pool snapshot out of order in " + pool_dir.string());
      }
      pool.push(snap.params);
    }
    truncate_lines(run_dir / "rows.csv", static_cast<std::size_t>(done));
    truncate_lines(run_dir / "timing_rows.csv", static_cast<std::size_t>(done) + 1);
  } else {
    learner = init_policy<float>(net_config(cfg), run_seed);
    opt = make_optimizer(learner);
    pool.push(learner);
    save_params(snap_path(pool_dir, 0), learner, make_optimizer(learner));
    save_params(run_dir / "learner.ckpt", learner, opt);

    const double t0 = wall_seconds();
    if (cfg.curriculum.enabled) {
      ProbeResult pr = probe(learner, cfg.sim, cfg.curriculum, run_seed, exec);
      if (pr.fallback) {
        std::cerr << "warning: run " << r
                  << ": no probe episode ended in a hit; using the fallback intervals\n";
      }
      st.cur.intervals = pr.intervals;
    } else {
      st.cur.intervals = Intervals{};
    }
    st.next_iteration = 1;
    write_file_atomic(run_dir / "rows.csv", "");
    write_file_atomic(run_dir / "timing_rows.csv",
                      std::to_string(r) + ",0," + fmt_g(wall_seconds() - t0) + "\n");
    save_run_state(run_dir, st);
  }

  const int last = std::min(iteration_cap, cfg.run.iterations);
  for (int it = st.next_iteration; it <= last; ++it) {
    const double t0 = wall_seconds();
    IterationResult res = run_iteration(learner, opt, pool, st.cur, it, cfg.sim, cfg.ppo,
                                        cfg.curriculum, cfg.adam, cfg.run.workers, run_seed, exec);
    const double dt = wall_seconds() - t0;

    MetricsRow row;
    row.run = r;
    row.iteration = it;
    row.subtask = res.subtask_index;
    row.intervals = res.intervals;
    row.wins = res.test.wins;
    row.losses = res.test.losses;
    row.draws = res.test.draws;
    row.surrogate_loss = res.train.surrogate_loss;
    row.value_loss = res.train.value_loss;
    row.clip_fraction = res.train.clip_fraction;
    row.approx_kl = res.train.approx_kl;
    row.wall_seconds = dt;

    append_line(run_dir / "rows.csv", format_metrics_row(row));
    append_line(run_dir / "timing_rows.csv",
                std::to_string(r) + "," + std::to_string(it) + "," + fmt_g(dt) + "\n");
    save_params(snap_path(pool_dir, it), learner, make_optimizer(learner));
    save_params(run_dir / "learner.ckpt", learner, opt);

    st.next_iteration = it + 1;
    save_run_state(run_dir, st);

    std::cout << "run " << r << " iteration " << it << ": subtask " << res.subtask_index
              << ", w/l/d " << res.test.wins << "/" << res.test.losses << "/" << res.test.draws
              << (res.advanced ? ", advanced" : "") << " (" << fmt_g(dt) << " s)\n";
  }
}

void cmd_train(const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  bind_config(cfg);
  const fs::path out_dir = cfg.run.out_dir;

  for (int r = 0; r < cfg.run.runs; ++r) {
    train_run(cfg, r, exec, cfg.run.iterations);
  }

  // Assembled outputs: per-run rows in run order under a single header.
  std::string metrics = kMetricsHeader;
  std::string timing = "run,iteration,wall_seconds\n";
  std::vector<std::vector<int>> wins(static_cast<std::size_t>(cfg.run.iterations));
  std::vector<std::vector<int>> losses(static_cast<std::size_t>(cfg.run.iterations));
  std::vector<std::vector<int>> draws(static_cast<std::size_t>(cfg.run.iterations));

  for (int r = 0; r < cfg.run.runs; ++r) {
    const fs::path run_dir = out_dir / ("run_" + std::to_string(r));
    const std::vector<std::string> rows = read_lines(run_dir / "rows.csv");
    if (rows.size() != static_cast<std::size_t>(cfg.run.iterations)) {
      throw std::runtime_error("train: unexpected row count in " + (run_dir / "rows.csv").string());
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      metrics += rows[i] + "\n";
      std::istringstream ss(rows[i]);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      wins[i].push_back(std::stoi(fields.at(7)));
      losses[i].push_back(std::stoi(fields.at(8)));
      draws[i].push_back(std::stoi(fields.at(9)));
    }
    for (const std::string& line : read_lines(run_dir / "timing_rows.csv")) {
      timing += line + "\n";
    }
  }

  auto mean_std = [](const std::vector<int>& xs) {
    double mean = 0.0;
    for (int x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (int x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  std::string summary =
      "iteration,wins_mean,wins_std,losses_mean,losses_std,draws_mean,draws_std\n";
  for (int it = 1; it <= cfg.run.iterations; ++it) {
    auto [wm, ws] = mean_std(wins[static_cast<std::size_t>(it - 1)]);
    auto [lm, ls] = mean_std(losses[static_cast<std::size_t>(it - 1)]);
    auto [dm, ds] = mean_std(draws[static_cast<std::size_t>(it - 1)]);
    summary += std::to_string(it) + "," + fmt_g(wm) + "," + fmt_g(ws) + "," + fmt_g(lm) + "," +
               fmt_g(ls) + "," + fmt_g(dm) + "," + fmt_g(ds) + "\n";
  }

  write_file_atomic(out_dir / "metrics.csv", metrics);
  write_file_atomic(out_dir / "summary.csv", summary);
  write_file_atomic(out_dir / "timing.csv", timing);
  std::cout << "wrote " << (out_dir / "metrics.csv").string() << "\n";
}

DuelReport cmd_duel(const DuelOptions& opt, const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  if (opt.episodes < 0) throw std::invalid_argument("duel: episodes must be non-negative");
  PolicyParameters a = load_checkpoint(opt.ckpt_a).params;
  PolicyParameters b = load_checkpoint(opt.ckpt_b).params;

  const std::size_t n = static_cast<std::size_t>(opt.episodes);
  std::vector<std::uint8_t> verdict(n, 2);  // 0 = A wins, 1 = B wins, 2 = draw
  std::vector<int> steps(n, 0);

  parallel_for(n, exec, [&](std::size_t e) {
    // Consecutive episodes share the pair seed: same initial conditions and
    // action stream, with A taking the opposite side.
    Rng rng(derive_seed(opt.seed, Stream::Duel, e / 2));
    InitialConditions ic = sample_initial_conditions(opt.intervals, cfg.sim, rng);
    const std::uint64_t action_seed = rng.bits();
    const bool a_is_red = e % 2 == 0;
    EpisodeResult ep = a_is_red ? run_episode(a, b, ic, cfg.sim, true, action_seed)
                                : run_episode(b, a, ic, cfg.sim, true, action_seed);
    const double ra = a_is_red ? ep.outcome.reward_red : ep.outcome.reward_blue;
    verdict[e] = ra > 0.0 ? 0 : (ra < 0.0 ? 1 : 2);
    steps[e] = ep.decision_steps;
  });

  DuelReport rep;
  rep.episodes = opt.episodes;
  long total_steps = 0;
  for (std::size_t e = 0; e < n; ++e) {
    if (verdict[e] == 0) ++rep.wins_a;
    else if (verdict[e] == 1) ++rep.wins_b;
    else ++rep.draws;
    total_steps += steps[e];
  }
  rep.mean_decision_steps = n == 0 ? 0.0 : static_cast<double>(total_steps) / static_cast<double>(n);

  Json j;
  j["episodes"] = rep.episodes;
  j["wins_a"] = rep.wins_a;
  j["wins_b"] = rep.wins_b;
  j["draws"] = rep.draws;
  j["mean_decision_steps"] = rep.mean_decision_steps;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!opt.out_path.empty()) write_file_atomic(opt.out_path, text);
  return rep;
}

void cmd_export(const ExportOptions& opt, const ExperimentConfig& cfg) {
  validate(cfg);
  PolicyParameters params = load_checkpoint(opt.ckpt).params;
  const EngagementConfig& e = cfg.sim.engagement;

  if (opt.angle_deg < -180.0 || opt.angle_deg > 180.0) {
    throw std::invalid_argument("export: angle must lie in [-180, 180] degrees");
  }
  if (opt.distance < e.dist_min || opt.distance > e.dist_max) {
    throw std::invalid_argument("export: distance must lie in the engagement band");
  }

  Rng rng(derive_seed(opt.seed, Stream::Export));
  InitialConditions ic;
  ic.a = opt.angle_deg / 180.0;
  ic.b = 2.0 * (opt.distance - e.dist_min) / (e.dist_max - e.dist_min) - 1.0;
  ic.v_red = opt.v_red ? *opt.v_red : rng.uniform(cfg.sim.physics.v_min, cfg.sim.physics.v_max);
  ic.v_blue = opt.v_blue ? *opt.v_blue : rng.uniform(cfg.sim.physics.v_min, cfg.sim.physics.v_max);
  ic.z_red = opt.z_red ? *opt.z_red : rng.uniform(e.alt_min, e.alt_max);
  ic.z_blue = opt.z_blue ? *opt.z_blue : rng.uniform(e.alt_min, e.alt_max);

  Trajectory tr;
  tr.header.ic = ic;

  EngagementState st = reset(ic, cfg.sim);
  Rng action_rng(0);  // unused: deterministic actions
  int step_index = 0;
  while (!st.outcome) {
    AgentAction act_red = policy_action(params, observe(st, Side::Red, cfg.sim), false, action_rng);
    AgentAction act_blue =
        policy_action(params, observe(st, Side::Blue, cfg.sim), false, action_rng);
    step(st, act_red, act_blue, cfg.sim);

    TrajectoryRecord rec;
    rec.step = step_index++;
    rec.t = st.t;
    rec.red = st.red;
    rec.blue = st.blue;
    rec.red_missile = st.red_missile;
    rec.blue_missile = st.blue_missile;
    rec.act_red = act_red;
    rec.act_blue = act_blue;
    if (st.outcome) rec.outcome = st.outcome;
    tr.records.push_back(rec);
  }

  std::ofstream f(opt.out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("export: cannot write: " + opt.out_path);
  write_trajectory(f, tr);
  std::cout << "wrote " << opt.out_path << " (" << tr.records.size() << " steps, "
            << to_string(tr.records.back().outcome->result) << " by "
            << to_string(tr.records.back().outcome->reason) << ")\n";
}

}  // namespace acrl
