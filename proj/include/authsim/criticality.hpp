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

#include "authsim/safety_region.hpp"
#include "authsim/sim.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>

namespace authsim {

class DegenerateGap : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reward weights for presence in each region. Boundary-dominant by default;
/// the weights need not sum to one.
struct RegionProbabilities {
  double p_danger = 0.2;
  double p_boundary = 0.6;
  double p_safety = 0.2;

  void validate() const;
};

enum class RewardKind { region, ttc, ttb, drac };

/// Which NPCs enter the region reward sum.
enum class RegionScope { all_npcs, attacker_only };

std::string_view to_string(RewardKind kind);
std::optional<RewardKind> reward_kind_from_string(std::string_view text);
std::string_view to_string(RegionScope scope);

struct CriticalityConfig {
  RegionProbabilities probabilities;
  RewardKind reward_kind = RewardKind::region;
  RegionScope region_scope = RegionScope::all_npcs;
  double ttc_threshold = 4.0;
  double ttb_threshold = 5.0;
  std::optional<double> drac_cap;  // defaults to the ego's maximum deceleration

  void validate() const;
};

std::optional<double> ttc(double gap, double v_follow, double v_lead);
std::optional<double> ttb(double gap, double v_follow, double v_lead, double a_max_dece);
double drac(double gap, double v_follow, double v_lead);

/// Follower/leader pairing of two vehicles along the lane axis; empty when
/// they are not in the same or laterally overlapping lanes.
struct FollowingPair {
  const VehicleState* follower = nullptr;
  const VehicleState* leader = nullptr;
  double gap = 0.0;
};
std::optional<FollowingPair> following_pair(const VehicleState& a, const VehicleState& b);

/// Weighted region overlap of one NPC with the ego's regions.
double region_term(const VehicleState& ego, const VehicleState& npc,
                   const RegionProbabilities& probabilities, const SafetyParams& params);

/// Region-weighted reward summed over the NPCs selected by `scope`.
double region_reward(const WorldState& world, std::optional<VehicleId> attacker,
                     RegionScope scope, const RegionProbabilities& probabilities,
                     const SafetyParams& params);

/// Per-step reward for the configured reward kind. Returns 0 when the attacker
/// is absent (e.g. it left the road) for the attacker-based kinds.
double step_reward(const WorldState& world, std::optional<VehicleId> attacker,
                   const CriticalityConfig& config, const SafetyParams& params);

}  // namespace authsim
