#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "acrl/engagement.hpp"

namespace acrl {

// One line per decision step in the export file: the post-step state plus the
// actions that produced it. Line 0 is a header carrying the initial
// conditions, so a reader can re-integrate the whole episode from reset().
struct TrajectoryHeader {
  int schema = 1;
  InitialConditions ic;
};

struct TrajectoryRecord {
  int step = 0;
  double t = 0.0;
  AircraftState red;
  AircraftState blue;
  std::optional<MissileState> red_missile;
  std::optional<MissileState> blue_missile;
  AgentAction act_red;
  AgentAction act_blue;
  std::optional<Outcome> outcome;  // set on the final record only
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TrajectoryRecord> records;
};

// JSON-lines; doubles are emitted with round-trip precision.
void write_trajectory(std::ostream& os, const Trajectory& tr);
Trajectory read_trajectory(std::istream& is);

}  // namespace acrl
