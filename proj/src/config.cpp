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

#include "authsim/config.hpp"

#include "authsim/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace authsim {

namespace {

struct Field {
  std::string key;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number");
  return value;
}

std::string format_double(double v) { return format_number(v); }

class Registry {
 public:
  void number(const std::string& key, double& ref) {
    fields_.push_back({key, [&ref](std::string_view s) { ref = parse_number<double>(s); },
                       [&ref] { return format_double(ref); }});
  }
  void integer(const std::string& key, int& ref) {
    fields_.push_back({key, [&ref](std::string_view s) { ref = parse_number<int>(s); },
                       [&ref] { return std::to_string(ref); }});
  }
  void unsigned64(const std::string& key, std::uint64_t& ref) {
    fields_.push_back({key, [&ref](std::string_view s) { ref = parse_number<std::uint64_t>(s); },
                       [&ref] { return std::to_string(ref); }});
  }
  void custom(const std::string& key, std::function<void(std::string_view)> set,
              std::function<std::string()> get) {
    fields_.push_back({key, std::move(set), std::move(get)});
  }
  void idm(const std::string& prefix, IdmParams& p) {
    number(prefix + "max_accel", p.max_accel);
    number(prefix + "comfortable_decel", p.comfortable_decel);
    number(prefix + "time_headway", p.time_headway);
    number(prefix + "min_gap", p.min_gap);
    number(prefix + "delta", p.delta);
  }
  const std::vector<Field>& fields() const { return fields_; }

 private:
  std::vector<Field> fields_;
};

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(',');
    parts.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

Registry bind(ExperimentConfig& c) {
  Registry r;
  ScenarioConfig& s = c.scenario;
  r.integer("lane_count", s.geometry.lane_count);
  r.number("lane_width", s.geometry.lane_width);
  r.number("road_length", s.geometry.road_length);
  r.number("dt", s.dt);
  r.integer("episode_max_steps", s.episode_max_steps);
  r.integer("n_background", s.n_background);
  r.custom(
      "spawn_speed_range",
      [&s](std::string_view text) {
        const auto parts = split_commas(text);
        if (parts.size() != 2) throw std::invalid_argument("expected two comma-separated speeds");
        s.spawn_speed_min = parse_number<double>(parts[0]);
        s.spawn_speed_max = parse_number<double>(parts[1]);
      },
      [&s] { return format_double(s.spawn_speed_min) + "," + format_double(s.spawn_speed_max); });
  r.number("spawn_gap_min", s.spawn_gap_min);
  r.number("ego_start_x", s.ego_start_x);
  r.number("ego_route_length", s.ego_route_length);
  r.number("lane_change_duration", s.lane_change_duration);
  r.number("vehicle_length", s.vehicle_length);
  r.number("vehicle_width", s.vehicle_width);
  r.number("ego_accel_cap", s.ego_accel_cap);
  r.number("ego_decel_cap", s.ego_decel_cap);
  r.number("npc_accel_cap", s.npc_accel_cap);
  r.number("npc_decel_cap", s.npc_decel_cap);
  r.number("v_max", s.v_max);
  r.unsigned64("seed", s.seed);

  BackgroundParams& bg = s.background_params;
  r.idm("background_params.", bg.idm);
  r.number("background_params.politeness", bg.politeness);
  r.number("background_params.lane_change_threshold", bg.lane_change_threshold);
  r.number("background_params.safe_decel", bg.safe_decel);
  r.number("background_params.safety_gap", bg.safety_gap);
  r.number("background_params.hesitation_prob", bg.hesitation_prob);
  r.number("background_params.path_margin", bg.path_margin);

  EgoParams& ego = s.ego_params;
  r.idm("ego.", ego.idm);
  r.number("ego.desired_speed", ego.desired_speed);
  r.number("ego.ttc_evade", ego.ttc_evade);
  r.number("ego.side_gap", ego.side_gap);

  SafetyParams& sp = c.safety;
  r.number("safety.a_max_dece", sp.a_max_dece);
  r.number("safety.a_max_accel", sp.a_max_accel);
  r.number("safety.a_min_dece", sp.a_min_dece);
  r.number("safety.rho", sp.rho);
  r.number("safety.d_y_danger", sp.d_y_danger);
  r.number("safety.d_y_boundary", sp.d_y_boundary);
  r.number("safety.d_y_safety", sp.d_y_safety);
  r.custom(
      "safety.lateral_mode",
      [&sp](std::string_view text) {
        if (text == "fixed") sp.lateral_mode = LateralMode::fixed;
        else if (text == "dynamic") sp.lateral_mode = LateralMode::dynamic;
        else throw std::invalid_argument("expected fixed or dynamic");
      },
      [&sp] { return std::string(sp.lateral_mode == LateralMode::fixed ? "fixed" : "dynamic"); });
  r.number("safety.a_y_max_dece", sp.a_y_max_dece);
  r.number("safety.a_y_max_accel", sp.a_y_max_accel);
  r.number("safety.a_y_min_dece", sp.a_y_min_dece);

  CriticalityConfig& cc = c.criticality;
  r.number("criticality.p_danger", cc.probabilities.p_danger);
  r.number("criticality.p_boundary", cc.probabilities.p_boundary);
  r.number("criticality.p_safety", cc.probabilities.p_safety);
  r.custom(
      "criticality.reward_kind",
      [&cc](std::string_view text) {
        const auto kind = reward_kind_from_string(text);
        if (!kind) throw std::invalid_argument("expected one of region, ttc, ttb, drac");
        cc.reward_kind = *kind;
      },
      [&cc] { return std::string(to_string(cc.reward_kind)); });
  r.custom(
      "criticality.region_scope",
      [&cc](std::string_view text) {
        if (text == to_string(RegionScope::all_npcs)) cc.region_scope = RegionScope::all_npcs;
        else if (text == to_string(RegionScope::attacker_only)) cc.region_scope = RegionScope::attacker_only;
        else throw std::invalid_argument("expected all_npcs or attacker_only");
      },
      [&cc] { return std::string(to_string(cc.region_scope)); });
  r.number("criticality.ttc_threshold", cc.ttc_threshold);
  r.number("criticality.ttb_threshold", cc.ttb_threshold);
  r.custom(
      "criticality.drac_cap",
      [&cc](std::string_view text) {
        if (text == "auto") cc.drac_cap.reset();
        else cc.drac_cap = parse_number<double>(text);
      },
      [&cc] { return cc.drac_cap ? format_double(*cc.drac_cap) : std::string("auto"); });

  TrainConfig& t = c.train;
  r.integer("train.episodes", t.episodes);
  r.number("train.gamma", t.gamma);
  r.number("train.epsilon_start", t.epsilon_start);
  r.number("train.epsilon_end", t.epsilon_end);
  r.number("train.epsilon_decay_fraction", t.epsilon_decay_fraction);
  r.integer("train.buffer_capacity", t.buffer_capacity);
  r.integer("train.batch_size", t.batch_size);
  r.number("train.learn_rate", t.learn_rate);
  r.integer("train.target_sync_steps", t.target_sync_steps);
  r.custom(
      "train.hidden_layers",
      [&t](std::string_view text) {
        std::vector<int> layers;
        for (auto part : split_commas(text)) layers.push_back(parse_number<int>(part));
        t.hidden_layers = std::move(layers);
      },
      [&t] {
        std::string out;
        for (std::size_t i = 0; i < t.hidden_layers.size(); ++i) {
          if (i > 0) out += ",";
          out += std::to_string(t.hidden_layers[i]);
        }
        return out;
      });
  r.number("train.switch_interval", t.switch_interval);
  r.number("train.attacker_range", t.attacker_range);
  r.integer("train.learning_starts", t.learning_starts);
  r.integer("train.train_every", t.train_every);
  r.number("train.reward_scale", t.reward_scale);
  r.number("train.max_grad_norm", t.max_grad_norm);
  r.number("train.distance_scale", t.scales.distance);
  r.number("train.speed_scale", t.scales.speed);
  r.number("train.position_scale", t.scales.position);
  return r;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  ExperimentConfig config = std::move(base);
  const Registry registry = bind(config);
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& fields = registry.fields();
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.key == key; });
    if (it == fields.end()) throw ConfigError(key, "unknown key");
    try {
      it->set(value);
    } catch (const std::exception& e) {
      throw ConfigError(key, "invalid value '" + std::string(value) + "' (" + e.what() + ")");
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  const Registry registry = bind(copy);
  std::string out;
  for (const auto& f : registry.fields()) out += f.key + " = " + f.get() + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(config))));
  return buf;
}

}  // namespace authsim
