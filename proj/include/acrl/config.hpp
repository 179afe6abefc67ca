#pragma once

#include <cstdint>
#include <string>

#include "acrl/curriculum.hpp"
#include "acrl/engagement.hpp"
#include "acrl/netpolicy.hpp"
#include "acrl/ppo.hpp"

namespace acrl {

struct RunConfig {
  std::uint64_t seed = 1;
  int iterations = 40;
  int runs = 5;
  int workers = 8;   // rollout contexts; n_steps must divide evenly
  int threads = 0;   // OpenMP thread cap; 0 keeps the library default
  std::string out_dir = "out";
};

struct ExperimentConfig {
  SimConfig sim;
  NetConfig net;
  PpoConfig ppo;
  CurriculumConfig curriculum;
  AdamConfig adam;
  RunConfig run;
};

ExperimentConfig default_config();

// JSON text with every key optional; unknown keys are rejected by full path,
// parse errors are reported with a line number. missile gravity follows
// physics.g and is not a key of its own.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical echo: fixed key order, every field present. parse_config on the
// result reproduces the config exactly.
std::string config_to_json(const ExperimentConfig& c);

// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig& c);

}  // namespace acrl
