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

#include "authsim/geometry.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace authsim {

using VehicleId = std::uint32_t;

enum class Role { ego, rl_attacker, background };

/// The five-way action space shared by every vehicle. The integer values are
/// the network output indices.
enum class Action : int { lane_left = 0, lane_right = 1, decel_max = 2, keep_speed = 3, accel_max = 4 };

inline constexpr int kActionCount = 5;
inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::lane_left, Action::lane_right, Action::decel_max, Action::keep_speed,
    Action::accel_max};

std::string_view to_string(Role role);
std::string_view to_string(Action action);
Role role_from_string(std::string_view text);
Action action_from_string(std::string_view text);

class InfeasiblePlacement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LaneGeometry {
  int lane_count = 3;
  double lane_width = 4.0;
  double road_length = 1000.0;

  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  double lane_low(int lane) const { return lane * lane_width; }
  double lane_high(int lane) const { return (lane + 1) * lane_width; }
  int nearest_lane(double y) const;
  void validate() const;
};

struct VehicleState {
  VehicleId id = 0;
  Role role = Role::background;
  double x = 0.0;  // rear bumper
  double y = 0.0;  // lateral center
  double v = 0.0;
  double lateral_v = 0.0;
  int lane = 0;
  double length = 5.0;
  double width = 2.0;
  std::optional<int> target_lane;
  double desired_speed = 30.0;
  double last_lane_change_end = -std::numeric_limits<double>::infinity();

  double front() const { return x + length; }
  double y_low() const { return y - 0.5 * width; }
  double y_high() const { return y + 0.5 * width; }
  bool changing_lane() const { return target_lane.has_value(); }
  Box body() const { return make_box(x, y_low(), front(), y_high()); }

  bool operator==(const VehicleState&) const = default;
};

struct WorldState {
  double t = 0.0;
  std::int64_t step_index = 0;
  std::vector<VehicleState> vehicles;
  LaneGeometry geometry;
  std::uint64_t rng_state = 0;

  const VehicleState* find(VehicleId id) const;
  VehicleState* find(VehicleId id);
  const VehicleState& ego() const;
};

bool operator==(const LaneGeometry& a, const LaneGeometry& b);
bool operator==(const WorldState& a, const WorldState& b);

struct IdmParams {
  double max_accel = 2.0;          // a
  double comfortable_decel = 3.0;  // b
  double time_headway = 1.2;       // T
  double min_gap = 2.0;            // s0
  double delta = 4.0;
};

/// Parameters of the surrogate naturalistic traffic (IDM car following with an
/// incentive-based lane-change rule).
struct BackgroundParams {
  IdmParams idm;
  double politeness = 0.3;
  double lane_change_threshold = 0.3;
  double safe_decel = 3.0;
  double safety_gap = 8.0;
  double hesitation_prob = 0.5;
  double path_margin = 0.3;
};

struct EgoParams {
  IdmParams idm{2.0, 3.0, 1.0, 2.0, 4.0};
  double desired_speed = 30.0;
  double ttc_evade = 1.5;
  double side_gap = 8.0;
};

struct ScenarioConfig {
  LaneGeometry geometry;
  double dt = 0.1;
  int episode_max_steps = 200;
  int n_background = 24;
  double spawn_speed_min = 20.0;
  double spawn_speed_max = 28.0;
  double spawn_gap_min = 30.0;
  double ego_start_x = 150.0;
  double ego_route_length = 600.0;
  double lane_change_duration = 1.0;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  double ego_accel_cap = 2.0;
  double ego_decel_cap = 4.0;
  double npc_accel_cap = 2.0;
  double npc_decel_cap = 4.0;
  double v_max = 40.0;
  BackgroundParams background_params;
  EgoParams ego_params;
  std::uint64_t seed = 0;

  void validate() const;
  int lane_change_steps() const;
};

struct ContactEvent {
  VehicleId a = 0;  // lower id
  VehicleId b = 0;
  double overlap_area = 0.0;
  double relative_vx = 0.0;  // v_a - v_b
  double relative_vy = 0.0;  // lateral_v_a - lateral_v_b
  double lateral_v_a = 0.0;
  double lateral_v_b = 0.0;

  bool operator==(const ContactEvent&) const = default;
};

using ActionMap = std::map<VehicleId, Action>;

struct StepOutcome {
  WorldState world;
  std::vector<ContactEvent> contacts;
  /// Vehicles whose requested lane change was illegal and replaced by keep_speed.
  std::vector<VehicleId> illegal;
};

WorldState init_scenario(const ScenarioConfig& config);

/// Advances the world by one dt. Every vehicle must have an action.
StepOutcome step_world(const WorldState& world, const ActionMap& actions,
                       const ScenarioConfig& config);

std::vector<ContactEvent> detect_collisions(const WorldState& world);

/// Leader in the vehicle's path: closest vehicle ahead whose body overlaps the
/// vehicle's lateral band, or that is changing into / out of its lane.
struct Leader {
  const VehicleState* vehicle = nullptr;
  double gap = std::numeric_limits<double>::infinity();  // bumper to bumper
};

bool in_path(const VehicleState& self, const VehicleState& other, double margin);
Leader find_leader(const VehicleState& self, const WorldState& world, double margin);

/// Intelligent Driver Model acceleration. `leader_speed` is ignored when the
/// gap is infinite.
double idm_acceleration(double v, double desired_speed, double gap, double leader_speed,
                        const IdmParams& params);

/// Maps a continuous acceleration onto the discrete action set.
Action discretize_acceleration(double accel, double accel_cap);

Action background_policy(const VehicleState& vehicle, const WorldState& world,
                         const ScenarioConfig& config);

Action default_ego_policy(const WorldState& world, const ScenarioConfig& config);

}  // namespace authsim
