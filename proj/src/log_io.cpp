// Copyright 2026 The AuthSim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "authsim/log_io.hpp"

#include "authsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace authsim {

using nlohmann::json;

void write_text_atomic(const std::string& path, std::string_view content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json contact_json(const ContactEvent& c) {
  return {{"a", c.a},
          {"b", c.b},
          {"overlap_area", c.overlap_area},
          {"relative_vx", c.relative_vx},
          {"relative_vy", c.relative_vy},
          {"lateral_v_a", c.lateral_v_a},
          {"lateral_v_b", c.lateral_v_b}};
}

ContactEvent contact_from(const json& j) {
  ContactEvent c;
  c.a = j.at("a").get<VehicleId>();
  c.b = j.at("b").get<VehicleId>();
  c.overlap_area = j.at("overlap_area").get<double>();
  c.relative_vx = j.at("relative_vx").get<double>();
  c.relative_vy = j.at("relative_vy").get<double>();
  c.lateral_v_a = j.at("lateral_v_a").get<double>();
  c.lateral_v_b = j.at("lateral_v_b").get<double>();
  return c;
}

}  // namespace

json step_to_json(const StepRecord& step) {
  json vehicles = json::array();
  for (const auto& v : step.world.vehicles) {
    json jv = {{"id", v.id},
               {"role", to_string(v.role)},
               {"x", v.x},
               {"y", v.y},
               {"lane", v.lane},
               {"v", v.v},
               {"lateral_v", v.lateral_v},
               {"length", v.length},
               {"width", v.width},
               {"desired_speed", v.desired_speed},
               {"last_lane_change_end", finite_or_null(v.last_lane_change_end)},
               {"target_lane", v.target_lane ? json(*v.target_lane) : json(nullptr)}};
    const auto it = step.actions.find(v.id);
    jv["action"] = it == step.actions.end() ? json(nullptr) : json(to_string(it->second));
    vehicles.push_back(std::move(jv));
  }
  json events = json::array();
  for (const auto& c : step.events) events.push_back(contact_json(c));
  json regions = nullptr;
  if (step.regions) {
    regions = {{"d_x_danger", step.regions->d_x_danger},
               {"d_x_boundary", step.regions->d_x_boundary},
               {"d_x_safety", step.regions->d_x_safety}};
  }
  return {{"t", step.world.t},
          {"step", step.world.step_index},
          {"rng_state", step.world.rng_state},
          {"attacker", step.attacker ? json(*step.attacker) : json(nullptr)},
          {"reward", step.reward},
          {"region_reward", step.region_reward},
          {"regions", regions},
          {"vehicles", vehicles},
          {"events", events},
          {"illegal", step.illegal}};
}

StepRecord step_from_json(const json& j, const LaneGeometry& geometry) {
  StepRecord step;
  step.world.t = j.at("t").get<double>();
  step.world.step_index = j.at("step").get<std::int64_t>();
  step.world.rng_state = j.at("rng_state").get<std::uint64_t>();
  step.world.geometry = geometry;
  if (!j.at("attacker").is_null()) step.attacker = j.at("attacker").get<VehicleId>();
  step.reward = j.at("reward").get<double>();
  step.region_reward = j.at("region_reward").get<double>();
  if (const auto& r = j.at("regions"); !r.is_null()) {
    step.regions = RegionDistances{r.at("d_x_danger").get<double>(), r.at("d_x_boundary").get<double>(),
                                   r.at("d_x_safety").get<double>()};
  }
  for (const auto& jv : j.at("vehicles")) {
    VehicleState v;
    v.id = jv.at("id").get<VehicleId>();
    v.role = role_from_string(jv.at("role").get<std::string>());
    v.x = jv.at("x").get<double>();
    v.y = jv.at("y").get<double>();
    v.lane = jv.at("lane").get<int>();
    v.v = jv.at("v").get<double>();
    v.lateral_v = jv.at("lateral_v").get<double>();
    v.length = jv.at("length").get<double>();
    v.width = jv.at("width").get<double>();
    v.desired_speed = jv.at("desired_speed").get<double>();
    const auto& end = jv.at("last_lane_change_end");
    v.last_lane_change_end = end.is_null() ? -std::numeric_limits<double>::infinity() : end.get<double>();
    if (const auto& tl = jv.at("target_lane"); !tl.is_null()) v.target_lane = tl.get<int>();
    if (const auto& a = jv.at("action"); !a.is_null()) {
      step.actions[v.id] = action_from_string(a.get<std::string>());
    }
    step.world.vehicles.push_back(v);
  }
  for (const auto& c : j.at("events")) step.events.push_back(contact_from(c));
  step.illegal = j.at("illegal").get<std::vector<VehicleId>>();
  return step;
}

std::string to_jsonl(const EpisodeLog& log) {
  const json header = {{"schema_version", log.schema_version},
                       {"kind", "authsim-episode"},
                       {"episode_id", log.episode_id},
                       {"seed", log.seed},
                       {"method", log.method},
                       {"termination", to_string(log.termination)},
                       {"steps", log.steps.size()},
                       {"config", serialize_config(log.config)},
                       {"config_digest", config_digest(log.config)}};
  std::string out = header.dump() + "\n";
  for (const auto& step : log.steps) out += step_to_json(step).dump() + "\n";
  return out;
}

EpisodeLog parse_jsonl(std::string_view text) {
  EpisodeLog log;
  bool have_header = false;
  std::size_t expected_steps = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (j.at("kind").get<std::string>() != "authsim-episode" || j.at("schema_version").get<int>() != 1) {
          throw LogFormatError("unsupported episode log header");
        }
        log.episode_id = j.at("episode_id").get<int>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.method = j.at("method").get<std::string>();
        log.termination = termination_from_string(j.at("termination").get<std::string>());
        log.config = parse_config(j.at("config").get<std::string>());
        expected_steps = j.at("steps").get<std::size_t>();
        have_header = true;
      } else {
        log.steps.push_back(step_from_json(j, log.config.scenario.geometry));
      }
    } catch (const LogFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw LogFormatError("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw LogFormatError("episode log is empty");
  if (log.steps.size() != expected_steps) throw LogFormatError("episode log is truncated");
  return log;
}

void write_episode_log(const EpisodeLog& log, const std::string& path) {
  write_text_atomic(path, to_jsonl(log));
}

EpisodeLog read_episode_log(const std::string& path) { return parse_jsonl(read_text(path)); }

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string compare_steps(const StepRecord& expected, const StepRecord& actual) {
  if (!(expected.world == actual.world)) return "world state differs";
  if (expected.events != actual.events) return "contact events differ";
  if (!same_bits(expected.reward, actual.reward)) return "reward differs";
  if (!same_bits(expected.region_reward, actual.region_reward)) return "region reward differs";
  if (expected.attacker != actual.attacker) return "attacker differs";
  if (expected.regions != actual.regions) return "region distances differ";
  if (expected.actions != actual.actions) return "actions differ";
  if (expected.illegal != actual.illegal) return "illegal lane changes differ";
  return {};
}

}  // namespace

ReplayResult replay_log(const EpisodeLog& log) {
  ReplayResult result;
  auto diverge = [&](std::size_t k, std::string message) {
    result.identical = false;
    result.divergent_step = k;
    result.message = std::move(message);
  };
  if (log.steps.empty()) {
    diverge(0, "log has no steps");
    return result;
  }
  AttackEnvironment env(log.config, true, true);
  env.reset(log.seed, log.episode_id, log.method);
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    const auto& replayed = env.log().steps;
    if (k >= replayed.size()) {
      diverge(k, "replay ended early");
      break;
    }
    // Actions of step k are filled in once step k is advanced; compare them afterwards.
    StepRecord current = replayed[k];
    current.actions = log.steps[k].actions;
    current.illegal = log.steps[k].illegal;
    if (auto why = compare_steps(log.steps[k], current); !why.empty()) {
      diverge(k, why);
      break;
    }
    if (env.done()) {
      if (k + 1 != log.steps.size()) diverge(k + 1, "logged episode continues past termination");
      break;
    }
    Action attacker_action = Action::keep_speed;
    if (const auto attacker = env.attacker()) {
      const auto it = log.steps[k].actions.find(*attacker);
      if (it == log.steps[k].actions.end()) {
        diverge(k, "no logged action for the attacker");
        break;
      }
      attacker_action = it->second;
    }
    env.step(attacker_action);
    const StepRecord& advanced = env.log().steps[k];
    if (advanced.actions != log.steps[k].actions) {
      diverge(k, "actions differ");
      break;
    }
    if (advanced.illegal != log.steps[k].illegal) {
      diverge(k, "illegal lane changes differ");
      break;
    }
  }
  if (result.identical && env.termination() != log.termination) {
    diverge(log.steps.size() - 1, "termination differs");
  }
  result.replayed = env.take_log();
  return result;
}

}  // namespace authsim
