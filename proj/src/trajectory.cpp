#include "acrl/trajectory.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace acrl {

namespace {

using nlohmann::json;

json to_json(const AircraftState& a) {
  return {{"x", a.x}, {"y", a.y}, {"z", a.z}, {"v", a.v}, {"gamma", a.gamma}, {"phi", a.phi}};
}

AircraftState aircraft_from(const json& j) {
  AircraftState a;
  a.x = j.at("x");
  a.y = j.at("y");
  a.z = j.at("z");
  a.v = j.at("v");
  a.gamma = j.at("gamma");
  a.phi = j.at("phi");
  return a;
}

json to_json(const MissileState& m) {
  return {{"x", m.x},           {"y", m.y},       {"z", m.z},
          {"v", m.v},           {"gamma", m.gamma}, {"phi", m.phi},
          {"t_flight", m.t_flight}, {"active", m.active}, {"min_approach", m.min_approach}};
}

MissileState missile_from(const json& j) {
  MissileState m;
  m.x = j.at("x");
  m.y = j.at("y");
  m.z = j.at("z");
  m.v = j.at("v");
  m.gamma = j.at("gamma");
  m.phi = j.at("phi");
  m.t_flight = j.at("t_flight");
  m.active = j.at("active");
  m.min_approach = j.at("min_approach");
  return m;
}

json to_json(const AgentAction& a) {
  return {{"controls", {a.controls_raw[0], a.controls_raw[1], a.controls_raw[2]}},
          {"fire", a.fire_raw}};
}

AgentAction action_from(const json& j) {
  AgentAction a;
  const auto& c = j.at("controls");
  a.controls_raw = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  a.fire_raw = j.at("fire");
  return a;
}

Result result_from(const std::string& s) {
  if (s == "red_win") return Result::RedWin;
  if (s == "blue_win") return Result::BlueWin;
  return Result::Draw;
}

Reason reason_from(const std::string& s) {
  if (s == "fuze") return Reason::Fuze;
  if (s == "both_missed") return Reason::BothMissed;
  if (s == "timeout") return Reason::Timeout;
  return Reason::GroundImpact;
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& tr) {
  json h = {{"schema", tr.header.schema},
            {"ic",
             {{"a", tr.header.ic.a},
              {"b", tr.header.ic.b},
              {"v_red", tr.header.ic.v_red},
              {"v_blue", tr.header.ic.v_blue},
              {"z_red", tr.header.ic.z_red},
              {"z_blue", tr.header.ic.z_blue}}}};
  os << h.dump() << '\n';

  for (const TrajectoryRecord& r : tr.records) {
    json j = {{"step", r.step},
              {"t", r.t},
              {"red", to_json(r.red)},
              {"blue", to_json(r.blue)},
              {"red_missile", r.red_missile ? to_json(*r.red_missile) : json(nullptr)},
              {"blue_missile", r.blue_missile ? to_json(*r.blue_missile) : json(nullptr)},
              {"act_red", to_json(r.act_red)},
              {"act_blue", to_json(r.act_blue)}};
    if (r.outcome) {
      j["outcome"] = {{"result", to_string(r.outcome->result)},
                      {"reason", to_string(r.outcome->reason)},
                      {"reward_red", r.outcome->reward_red},
                      {"reward_blue", r.outcome->reward_blue}};
    }
    os << j.dump() << '\n';
  }
}

Trajectory read_trajectory(std::istream& is) {
  Trajectory tr;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (!have_header) {
      tr.header.schema = j.at("schema");
      const json& ic = j.at("ic");
      tr.header.ic.a = ic.at("a");
      tr.header.ic.b = ic.at("b");
      tr.header.ic.v_red = ic.at("v_red");
      tr.header.ic.v_blue = ic.at("v_blue");
      tr.header.ic.z_red = ic.at("z_red");
      tr.header.ic.z_blue = ic.at("z_blue");
      have_header = true;
      continue;
    }
    TrajectoryRecord r;
    r.step = j.at("step");
    r.t = j.at("t");
    r.red = aircraft_from(j.at("red"));
    r.blue = aircraft_from(j.at("blue"));
    if (!j.at("red_missile").is_null()) r.red_missile = missile_from(j.at("red_missile"));
    if (!j.at("blue_missile").is_null()) r.blue_missile = missile_from(j.at("blue_missile"));
    r.act_red = action_from(j.at("act_red"));
    r.act_blue = action_from(j.at("act_blue"));
    if (j.contains("outcome")) {
      Outcome o;
      o.result = result_from(j.at("outcome").at("result").get<std::string>());
      o.reason = reason_from(j.at("outcome").at("reason").get<std::string>());
      o.reward_red = j.at("outcome").at("reward_red");
      o.reward_blue = j.at("outcome").at("reward_blue");
      r.outcome = o;
    }
    tr.records.push_back(r);
  }
  if (!have_header) {
    throw std::runtime_error("read_trajectory: missing header line");
  }
  return tr;
}

}  // namespace acrl
