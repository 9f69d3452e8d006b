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

#include "authsim/criticality.hpp"

#include <algorithm>
#include <cmath>

namespace authsim {

void RegionProbabilities::validate() const {
  for (double p : {p_danger, p_boundary, p_safety}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("region probabilities must lie in [0, 1]");
  }
  if (!(p_boundary >= p_danger && p_boundary >= p_safety))
    throw std::invalid_argument("p_boundary must be the largest region weight");
}

void CriticalityConfig::validate() const {
  probabilities.validate();
  if (!(ttc_threshold > 0.0 && ttb_threshold > 0.0))
    throw std::invalid_argument("thresholds must be > 0");
  if (drac_cap && !(*drac_cap > 0.0)) throw std::invalid_argument("drac_cap must be > 0");
}

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::region: return "region";
    case RewardKind::ttc: return "ttc";
    case RewardKind::ttb: return "ttb";
    case RewardKind::drac: return "drac";
  }
  return "region";
}

std::optional<RewardKind> reward_kind_from_string(std::string_view text) {
  for (RewardKind k : {RewardKind::region, RewardKind::ttc, RewardKind::ttb, RewardKind::drac}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(RegionScope scope) {
  return scope == RegionScope::all_npcs ? "all_npcs" : "attacker_only";
}

std::optional<double> ttc(double gap, double v_follow, double v_lead) {
  if (!(gap > 0.0)) throw DegenerateGap("bumper-to-bumper gap must be > 0");
  if (!(v_follow > v_lead)) return std::nullopt;
  return gap / (v_follow - v_lead);
}

std::optional<double> ttb(double gap, double v_follow, double v_lead, double a_max_dece) {
  if (!(a_max_dece > 0.0)) throw std::invalid_argument("a_max_dece must be > 0");
  const auto t = ttc(gap, v_follow, v_lead);
  if (!t) return std::nullopt;
  return *t + (v_follow - v_lead) / (2.0 * a_max_dece);
}

double drac(double gap, double v_follow, double v_lead) {
  if (!(gap > 0.0)) throw DegenerateGap("bumper-to-bumper gap must be > 0");
  if (!(v_follow > v_lead)) return 0.0;
  const double dv = v_follow - v_lead;
  return dv * dv / (2.0 * gap);
}

std::optional<FollowingPair> following_pair(const VehicleState& a, const VehicleState& b) {
  const bool same_lane = a.lane == b.lane || (a.target_lane && *a.target_lane == b.lane) ||
                         (b.target_lane && *b.target_lane == a.lane);
  const bool lateral_overlap = a.y_low() < b.y_high() && b.y_low() < a.y_high();
  if (!same_lane && !lateral_overlap) return std::nullopt;
  FollowingPair pair;
  if (a.x <= b.x) {
    pair.follower = &a;
    pair.leader = &b;
  } else {
    pair.follower = &b;
    pair.leader = &a;
  }
  pair.gap = pair.leader->x - pair.follower->front();
  return pair;
}

double region_term(const VehicleState& ego, const VehicleState& npc,
                   const RegionProbabilities& pr, const SafetyParams& params) {
  const RegionLayers layers = build_region_layers(ego, npc, params);
  const RegionOverlap s = overlap_areas(to_ego_frame(npc, ego), layers);
  return pr.p_danger * s.s_danger + pr.p_boundary * s.s_boundary + pr.p_safety * s.s_safety;
}

double region_reward(const WorldState& world, std::optional<VehicleId> attacker, RegionScope scope,
                     const RegionProbabilities& probabilities, const SafetyParams& params) {
  const VehicleState& ego = world.ego();
  double total = 0.0;
  for (const auto& npc : world.vehicles) {
    if (npc.role == Role::ego) continue;
    if (scope == RegionScope::attacker_only && (!attacker || npc.id != *attacker)) continue;
    // Regions only extend forward of the ego front bumper.
    if (npc.front() <= ego.front()) continue;
    total += region_term(ego, npc, probabilities, params);
  }
  return total;
}

double step_reward(const WorldState& world, std::optional<VehicleId> attacker,
                   const CriticalityConfig& config, const SafetyParams& params) {
  if (config.reward_kind == RewardKind::region) {
    return region_reward(world, attacker, config.region_scope, config.probabilities, params);
  }
  const VehicleState* npc = attacker ? world.find(*attacker) : nullptr;
  if (npc == nullptr) return 0.0;
  const auto pair = following_pair(world.ego(), *npc);
  if (!pair) return 0.0;
  const double v_f = pair->follower->v;
  const double v_l = pair->leader->v;
  // Bodies already touching: the most critical value of every metric.
  if (!(pair->gap > 0.0)) return 1.0;

  switch (config.reward_kind) {
    case RewardKind::ttc: {
      const auto t = ttc(pair->gap, v_f, v_l);
      if (!t) return 0.0;
      return std::max(0.0, (config.ttc_threshold - *t) / config.ttc_threshold);
    }
    case RewardKind::ttb: {
      const auto t = ttb(pair->gap, v_f, v_l, params.a_max_dece);
      if (!t) return 0.0;
      return std::max(0.0, (config.ttb_threshold - *t) / config.ttb_threshold);
    }
    case RewardKind::drac: {
      const double cap = config.drac_cap.value_or(params.a_max_dece);
      return std::min(drac(pair->gap, v_f, v_l), cap) / cap;
    }
    case RewardKind::region: break;
  }
  return 0.0;
}

}  // namespace authsim
