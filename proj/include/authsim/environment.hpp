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

#pragma once

#include "authsim/agent.hpp"
#include "authsim/criticality.hpp"
#include "authsim/safety_region.hpp"
#include "authsim/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace authsim {

/// Everything needed to reproduce an experiment.
struct ExperimentConfig {
  ScenarioConfig scenario;
  SafetyParams safety;
  CriticalityConfig criticality;
  TrainConfig train;

  void validate() const;
};

enum class Termination { running, collision, non_ego_collision, route_complete, max_steps };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view text);

/// Distances of the current attacker's regions, logged for inspection.
struct RegionDistances {
  double d_x_danger = 0.0;
  double d_x_boundary = 0.0;
  double d_x_safety = 0.0;

  bool operator==(const RegionDistances&) const = default;
};

/// One logged step. Record k holds the state at step k, the contacts found on
/// entering it, the rewards of the transition into it, and the actions taken
/// from it (empty on the final record).
struct StepRecord {
  WorldState world;
  std::vector<ContactEvent> events;
  double reward = 0.0;         // training reward kind
  double region_reward = 0.0;  // region-kind reward, for the criticality objective
  std::optional<VehicleId> attacker;
  std::optional<RegionDistances> regions;
  ActionMap actions;
  std::vector<VehicleId> illegal;
};

struct EpisodeLog {
  int schema_version = 1;
  int episode_id = 0;
  std::uint64_t seed = 0;
  std::string method;
  ExperimentConfig config;
  std::vector<StepRecord> steps;
  Termination termination = Termination::running;

  double sum_reward() const;
  double sum_region_reward() const;
};

struct EnvStep {
  double reward = 0.0;
  double region_reward = 0.0;
  MdpState next_state;
  bool terminal = false;  // no bootstrap from next_state (time-limit truncation bootstraps)
  bool done = false;      // end of the episode
  bool switched = false;
  std::vector<ContactEvent> contacts;
};

/// Episode executor: an ego, one RL-controlled attacker and background traffic.
/// The attacker is re-selected at switch boundaries; an attacker change ends
/// the current transition stream.
class AttackEnvironment {
 public:
  AttackEnvironment(ExperimentConfig config, bool attacker_enabled = true, bool record_log = false);

  void reset(std::uint64_t seed, int episode_id = 0, std::string method = {});

  bool done() const { return termination_ != Termination::running; }
  Termination termination() const { return termination_; }
  const WorldState& world() const { return world_; }
  std::optional<VehicleId> attacker() const { return attacker_; }
  MdpState observe() const;

  /// Advances one step with the given attacker action. The action is ignored
  /// when the attacker is disabled.
  EnvStep step(Action attacker_action);

  const EpisodeLog& log() const { return log_; }
  EpisodeLog take_log() { return std::move(log_); }
  int steps_taken() const { return static_cast<int>(world_.step_index); }
  double episode_reward() const { return episode_reward_; }
  double episode_criticality() const { return episode_region_reward_; }
  const std::vector<ContactEvent>& final_contacts() const { return final_contacts_; }
  const ExperimentConfig& config() const { return config_; }

 private:
  void assign_attacker(std::optional<VehicleId> id);
  int switch_period_steps() const;

  ExperimentConfig config_;
  bool attacker_enabled_;
  bool record_log_;
  WorldState world_;
  std::optional<VehicleId> attacker_;
  Termination termination_ = Termination::running;
  double episode_reward_ = 0.0;
  double episode_region_reward_ = 0.0;
  std::vector<ContactEvent> final_contacts_;
  EpisodeLog log_;
};

/// Builds the joint action map for one step.
ActionMap joint_actions(const WorldState& world, std::optional<VehicleId> attacker,
                        Action attacker_action, const ScenarioConfig& config);

RegionDistances region_distances(const WorldState& world, VehicleId npc, const SafetyParams& params);

/// Sum of region-kind step rewards over the logged steps, recomputed from the
/// logged states.
double episode_criticality(const EpisodeLog& log, const CriticalityConfig& config,
                           const SafetyParams& params);

}  // namespace authsim
