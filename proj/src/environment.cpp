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

#include "authsim/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace authsim {

void ExperimentConfig::validate() const {
  scenario.validate();
  safety.validate();
  criticality.validate();
  train.validate();
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::running: return "running";
    case Termination::collision: return "collision";
    case Termination::non_ego_collision: return "non_ego_collision";
    case Termination::route_complete: return "route_complete";
    case Termination::max_steps: return "max_steps";
  }
  return "running";
}

Termination termination_from_string(std::string_view text) {
  for (Termination t : {Termination::running, Termination::collision, Termination::non_ego_collision,
                        Termination::route_complete, Termination::max_steps}) {
    if (to_string(t) == text) return t;
  }
  throw std::invalid_argument("unknown termination: " + std::string(text));
}

double EpisodeLog::sum_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

double EpisodeLog::sum_region_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.region_reward;
  return total;
}

ActionMap joint_actions(const WorldState& world, std::optional<VehicleId> attacker,
                        Action attacker_action, const ScenarioConfig& config) {
  ActionMap actions;
  for (const auto& v : world.vehicles) {
    if (v.role == Role::ego) {
      actions.emplace(v.id, default_ego_policy(world, config));
    } else if (attacker && v.id == *attacker) {
      actions.emplace(v.id, attacker_action);
    } else {
      actions.emplace(v.id, background_policy(v, world, config));
    }
  }
  return actions;
}

RegionDistances region_distances(const WorldState& world, VehicleId npc, const SafetyParams& params) {
  const VehicleState* v = world.find(npc);
  if (v == nullptr) throw std::invalid_argument("vehicle not in world");
  const RegionLayers layers = build_region_layers(world.ego(), *v, params);
  return {layers.d_x_danger, layers.d_x_boundary, layers.d_x_safety};
}

double episode_criticality(const EpisodeLog& log, const CriticalityConfig& config,
                           const SafetyParams& params) {
  double total = 0.0;
  for (std::size_t k = 1; k < log.steps.size(); ++k) {
    total += region_reward(log.steps[k].world, log.steps[k - 1].attacker, config.region_scope,
                           config.probabilities, params);
  }
  return total;
}

AttackEnvironment::AttackEnvironment(ExperimentConfig config, bool attacker_enabled, bool record_log)
    : config_(std::move(config)), attacker_enabled_(attacker_enabled), record_log_(record_log) {
  config_.validate();
}

int AttackEnvironment::switch_period_steps() const {
  return std::max(1, static_cast<int>(std::lround(config_.train.switch_interval / config_.scenario.dt)));
}

void AttackEnvironment::assign_attacker(std::optional<VehicleId> id) {
  for (auto& v : world_.vehicles) {
    if (v.role == Role::ego) continue;
    v.role = (id && v.id == *id) ? Role::rl_attacker : Role::background;
  }
  attacker_ = id;
}

void AttackEnvironment::reset(std::uint64_t seed, int episode_id, std::string method) {
  config_.scenario.seed = seed;
  world_ = init_scenario(config_.scenario);
  termination_ = Termination::running;
  episode_reward_ = 0.0;
  episode_region_reward_ = 0.0;
  final_contacts_.clear();
  attacker_.reset();
  if (attacker_enabled_ && world_.vehicles.size() > 1) {
    assign_attacker(select_attacker(world_, std::nullopt, config_.train, true));
  }

  log_ = EpisodeLog{};
  if (record_log_) {
    log_.episode_id = episode_id;
    log_.seed = seed;
    log_.method = std::move(method);
    log_.config = config_;
    StepRecord first;
    first.world = world_;
    first.attacker = attacker_;
    if (attacker_) first.regions = region_distances(world_, *attacker_, config_.safety);
    log_.steps.push_back(std::move(first));
  }
}

MdpState AttackEnvironment::observe() const {
  if (!attacker_) return MdpState{};
  return extract_state(world_, *attacker_, config_.safety);
}

EnvStep AttackEnvironment::step(Action attacker_action) {
  if (done()) throw std::logic_error("step() called on a finished episode");
  const auto& sc = config_.scenario;
  const ActionMap actions = joint_actions(world_, attacker_, attacker_action, sc);
  StepOutcome outcome = step_world(world_, actions, sc);
  if (record_log_) {
    log_.steps.back().actions = actions;
    log_.steps.back().illegal = outcome.illegal;
  }
  world_ = std::move(outcome.world);

  EnvStep r;
  r.reward = step_reward(world_, attacker_, config_.criticality, config_.safety);
  r.region_reward = config_.criticality.reward_kind == RewardKind::region
                        ? r.reward
                        : region_reward(world_, attacker_, config_.criticality.region_scope,
                                        config_.criticality.probabilities, config_.safety);
  episode_reward_ += r.reward;
  episode_region_reward_ += r.region_reward;
  r.contacts = outcome.contacts;

  const VehicleState& ego = world_.ego();
  if (!r.contacts.empty()) {
    bool with_ego = false;
    for (const auto& c : r.contacts) with_ego = with_ego || c.a == ego.id || c.b == ego.id;
    termination_ = with_ego ? Termination::collision : Termination::non_ego_collision;
    final_contacts_ = r.contacts;
  } else if (ego.x >= sc.ego_start_x + sc.ego_route_length) {
    termination_ = Termination::route_complete;
  } else if (world_.step_index >= sc.episode_max_steps) {
    termination_ = Termination::max_steps;
  }
  r.done = done();

  const bool attacker_present = attacker_ && world_.find(*attacker_) != nullptr;
  if (attacker_present) r.next_state = extract_state(world_, *attacker_, config_.safety);

  if (!r.done && attacker_enabled_) {
    std::optional<VehicleId> next;
    if (world_.vehicles.size() > 1) {
      const bool boundary = world_.step_index % switch_period_steps() == 0;
      next = select_attacker(world_, attacker_, config_.train, boundary);
    }
    r.switched = next != attacker_;
    assign_attacker(next);
  }
  // The step budget is not part of the state, so running out of it bootstraps.
  const bool truncated = termination_ == Termination::max_steps;
  r.terminal = (r.done && !truncated) || r.switched || !attacker_present;

  if (record_log_) {
    StepRecord rec;
    rec.world = world_;
    rec.events = r.contacts;
    rec.reward = r.reward;
    rec.region_reward = r.region_reward;
    rec.attacker = attacker_;
    if (attacker_) rec.regions = region_distances(world_, *attacker_, config_.safety);
    log_.steps.push_back(std::move(rec));
    log_.termination = termination_;
  }
  return r;
}

}  // namespace authsim
