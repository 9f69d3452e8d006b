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

#include "authsim/sim.hpp"

#include "authsim/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace authsim {

namespace {

constexpr double kLateralSnapTolerance = 1e-6;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool in_lane(const VehicleState& v, int lane) {
  return v.lane == lane || (v.target_lane && *v.target_lane == lane);
}

struct LaneNeighbors {
  const VehicleState* leader = nullptr;
  const VehicleState* follower = nullptr;
  double front_gap = std::numeric_limits<double>::infinity();
  double rear_gap = std::numeric_limits<double>::infinity();
};

LaneNeighbors neighbors_in_lane(const VehicleState& self, const WorldState& world, int lane) {
  LaneNeighbors out;
  for (const auto& other : world.vehicles) {
    if (other.id == self.id || !in_lane(other, lane)) continue;
    if (other.x > self.x) {
      const double gap = other.x - self.front();
      if (gap < out.front_gap) {
        out.front_gap = gap;
        out.leader = &other;
      }
    } else {
      const double gap = self.x - other.front();
      if (gap < out.rear_gap) {
        out.rear_gap = gap;
        out.follower = &other;
      }
    }
  }
  return out;
}

double idm_towards(const VehicleState& self, const VehicleState* leader, double gap,
                   const IdmParams& params) {
  if (leader == nullptr) {
    return idm_acceleration(self.v, self.desired_speed,
                            std::numeric_limits<double>::infinity(), 0.0, params);
  }
  return idm_acceleration(self.v, self.desired_speed, gap, leader->v, params);
}

bool lane_exists(const LaneGeometry& geometry, int lane) {
  return lane >= 0 && lane < geometry.lane_count;
}

// A vehicle two lanes over may pick the same target lane in the same step.
// Both movers see the same snapshot, so both back off.
bool far_lane_conflict(const VehicleState& self, const WorldState& world, int target,
                       int direction, double base_gap, double duration) {
  const int far = target + direction;
  for (const auto& other : world.vehicles) {
    if (other.id == self.id || other.lane != far || other.changing_lane()) continue;
    const double separation = std::max(other.x - self.front(), self.x - other.front());
    if (separation < base_gap + std::abs(self.v - other.v) * duration) return true;
  }
  return false;
}

Action lane_action(int direction) { return direction > 0 ? Action::lane_left : Action::lane_right; }

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::ego: return "ego";
    case Role::rl_attacker: return "rl_attacker";
    case Role::background: return "background";
  }
  return "background";
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::lane_left: return "lane_left";
    case Action::lane_right: return "lane_right";
    case Action::decel_max: return "decel_max";
    case Action::keep_speed: return "keep_speed";
    case Action::accel_max: return "accel_max";
  }
  return "keep_speed";
}

Role role_from_string(std::string_view text) {
  const auto s = lower(text);
  if (s == "ego") return Role::ego;
  if (s == "rl_attacker") return Role::rl_attacker;
  if (s == "background") return Role::background;
  throw std::invalid_argument("unknown role: " + s);
}

Action action_from_string(std::string_view text) {
  const auto s = lower(text);
  for (Action a : kAllActions) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown action: " + s);
}

int LaneGeometry::nearest_lane(double y) const {
  const int lane = static_cast<int>(std::floor(y / lane_width));
  return std::clamp(lane, 0, lane_count - 1);
}

void LaneGeometry::validate() const {
  if (lane_count < 2) throw std::invalid_argument("lane_count must be >= 2");
  if (!(lane_width > 0.0)) throw std::invalid_argument("lane_width must be > 0");
  if (!(road_length > 0.0)) throw std::invalid_argument("road_length must be > 0");
}

bool operator==(const LaneGeometry& a, const LaneGeometry& b) {
  return a.lane_count == b.lane_count && a.lane_width == b.lane_width &&
         a.road_length == b.road_length;
}

bool operator==(const WorldState& a, const WorldState& b) {
  return a.t == b.t && a.step_index == b.step_index && a.vehicles == b.vehicles &&
         a.geometry == b.geometry && a.rng_state == b.rng_state;
}

const VehicleState* WorldState::find(VehicleId id) const {
  for (const auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

VehicleState* WorldState::find(VehicleId id) {
  for (auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const VehicleState& WorldState::ego() const {
  for (const auto& v : vehicles) {
    if (v.role == Role::ego) return v;
  }
  throw std::logic_error("world has no ego vehicle");
}

void ScenarioConfig::validate() const {
  geometry.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (episode_max_steps <= 0) throw std::invalid_argument("episode_max_steps must be > 0");
  if (n_background < 0) throw std::invalid_argument("n_background must be >= 0");
  if (!(spawn_speed_min >= 0.0 && spawn_speed_max >= spawn_speed_min))
    throw std::invalid_argument("spawn_speed_range must satisfy 0 <= min <= max");
  if (!(vehicle_length > 0.0 && vehicle_width > 0.0))
    throw std::invalid_argument("vehicle dimensions must be > 0");
  if (!(spawn_gap_min > vehicle_length))
    throw std::invalid_argument("spawn_gap_min must exceed the vehicle length");
  if (!(lane_change_duration > 0.0))
    throw std::invalid_argument("lane_change_duration must be > 0");
  if (!(ego_start_x >= 0.0 && ego_start_x + vehicle_length <= geometry.road_length))
    throw std::invalid_argument("ego_start_x must lie on the road");
  if (!(ego_route_length > 0.0)) throw std::invalid_argument("ego_route_length must be > 0");
  if (!(ego_accel_cap > 0.0 && ego_decel_cap > 0.0 && npc_accel_cap > 0.0 && npc_decel_cap > 0.0))
    throw std::invalid_argument("acceleration caps must be > 0");
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be > 0");
}

int ScenarioConfig::lane_change_steps() const {
  return static_cast<int>(std::ceil(lane_change_duration / dt - 1e-9));
}

WorldState init_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(splitmix64(config.seed));
  const auto& geo = config.geometry;

  WorldState world;
  world.geometry = geo;
  world.rng_state = splitmix64(config.seed ^ 0x5DEECE66DULL);

  VehicleState ego;
  ego.id = 0;
  ego.role = Role::ego;
  ego.lane = static_cast<int>(rng.index(static_cast<std::size_t>(geo.lane_count)));
  ego.x = config.ego_start_x;
  ego.y = geo.lane_center(ego.lane);
  ego.length = config.vehicle_length;
  ego.width = config.vehicle_width;
  ego.v = rng.uniform(config.spawn_speed_min, config.spawn_speed_max);
  ego.desired_speed = config.ego_params.desired_speed;
  world.vehicles.push_back(ego);

  // Each lane holds a lattice of slots spaced spawn_gap_min apart with a random
  // phase; background vehicles take a random subset of the free slots.
  const double usable = geo.road_length - config.vehicle_length;
  const int per_lane = static_cast<int>(std::floor(usable / config.spawn_gap_min)) + 1;
  struct Slot {
    int lane;
    double x;
  };
  std::vector<Slot> slots;
  for (int lane = 0; lane < geo.lane_count; ++lane) {
    const double slack = usable - (per_lane - 1) * config.spawn_gap_min;
    const double phase = rng.uniform(0.0, std::max(0.0, slack));
    for (int k = 0; k < per_lane; ++k) {
      const double x = phase + k * config.spawn_gap_min;
      if (lane == ego.lane && std::abs(x - ego.x) < config.spawn_gap_min) continue;
      slots.push_back({lane, x});
    }
  }
  if (static_cast<int>(slots.size()) < config.n_background) {
    throw InfeasiblePlacement("cannot place " + std::to_string(config.n_background) +
                              " background vehicles: only " + std::to_string(slots.size()) +
                              " slots respect spawn_gap_min");
  }
  for (int i = 0; i < config.n_background; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.index(slots.size() - i);
    std::swap(slots[static_cast<std::size_t>(i)], slots[j]);
  }
  slots.resize(static_cast<std::size_t>(config.n_background));
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.lane != b.lane ? a.lane < b.lane : a.x < b.x;
  });

  VehicleId next_id = 1;
  for (const auto& slot : slots) {
    VehicleState v;
    v.id = next_id++;
    v.role = Role::background;
    v.lane = slot.lane;
    v.x = slot.x;
    v.y = geo.lane_center(slot.lane);
    v.length = config.vehicle_length;
    v.width = config.vehicle_width;
    v.v = rng.uniform(config.spawn_speed_min, config.spawn_speed_max);
    v.desired_speed = v.v;
    world.vehicles.push_back(v);
  }
  return world;
}

StepOutcome step_world(const WorldState& world, const ActionMap& actions,
                       const ScenarioConfig& config) {
  StepOutcome out;
  out.world = world;
  const auto& geo = world.geometry;
  const double dt = config.dt;
  out.world.step_index = world.step_index + 1;
  out.world.t = static_cast<double>(out.world.step_index) * dt;

  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    const VehicleState& old = world.vehicles[i];
    VehicleState& next = out.world.vehicles[i];
    const auto it = actions.find(old.id);
    if (it == actions.end()) {
      throw std::invalid_argument("no action for vehicle " + std::to_string(old.id));
    }
    Action action = it->second;

    if (action == Action::lane_left || action == Action::lane_right) {
      const int direction = action == Action::lane_left ? 1 : -1;
      const int target = old.lane + direction;
      if (old.changing_lane() || !lane_exists(geo, target)) {
        out.illegal.push_back(old.id);
        action = Action::keep_speed;
      } else {
        next.target_lane = target;
        next.lateral_v = direction * geo.lane_width / config.lane_change_duration;
      }
    }

    const bool ego = old.role == Role::ego;
    const double accel_cap = ego ? config.ego_accel_cap : config.npc_accel_cap;
    const double decel_cap = ego ? config.ego_decel_cap : config.npc_decel_cap;
    double accel = 0.0;
    if (!next.changing_lane()) {
      if (action == Action::accel_max) accel = accel_cap;
      if (action == Action::decel_max) accel = -decel_cap;
    }
    next.v = std::clamp(old.v + accel * dt, 0.0, config.v_max);
    next.x = old.x + 0.5 * (old.v + next.v) * dt;

    if (next.changing_lane()) {
      const double center = geo.lane_center(*next.target_lane);
      const double y = old.y + next.lateral_v * dt;
      const bool overshoot = (center - y) * (center - old.y) < 0.0;
      if (overshoot || std::abs(center - y) < kLateralSnapTolerance) {
        next.y = center;
        next.lateral_v = 0.0;
        next.target_lane.reset();
        next.last_lane_change_end = out.world.t;
      } else {
        next.y = y;
      }
    }
    next.lane = geo.nearest_lane(next.y);
  }

  std::erase_if(out.world.vehicles, [&](const VehicleState& v) {
    return v.role != Role::ego && v.x > geo.road_length;
  });
  out.contacts = detect_collisions(out.world);
  return out;
}

std::vector<ContactEvent> detect_collisions(const WorldState& world) {
  std::vector<ContactEvent> events;
  const auto& vs = world.vehicles;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      const VehicleState* a = &vs[i];
      const VehicleState* b = &vs[j];
      if (a->front() <= b->x || b->front() <= a->x) continue;
      const double area = intersection_area(a->body(), b->body());
      if (!(area > 0.0)) continue;
      if (b->id < a->id) std::swap(a, b);
      events.push_back({a->id, b->id, area, a->v - b->v, a->lateral_v - b->lateral_v,
                        a->lateral_v, b->lateral_v});
    }
  }
  return events;
}

bool in_path(const VehicleState& self, const VehicleState& other, double margin) {
  if (other.y_low() < self.y_high() + margin && other.y_high() > self.y_low() - margin)
    return true;
  if (self.target_lane && in_lane(other, *self.target_lane)) return true;
  if (other.target_lane && *other.target_lane == self.lane) return true;
  return false;
}

Leader find_leader(const VehicleState& self, const WorldState& world, double margin) {
  Leader best;
  for (const auto& other : world.vehicles) {
    if (other.id == self.id || other.x < self.x) continue;
    if (other.x == self.x && other.id < self.id) continue;
    if (!in_path(self, other, margin)) continue;
    const double gap = other.x - self.front();
    if (gap < best.gap) {
      best.gap = gap;
      best.vehicle = &other;
    }
  }
  return best;
}

double idm_acceleration(double v, double desired_speed, double gap, double leader_speed,
                        const IdmParams& p) {
  const double free_term =
      desired_speed > 0.0 ? 1.0 - std::pow(v / desired_speed, p.delta) : -1.0;
  if (!std::isfinite(gap)) return p.max_accel * free_term;
  const double s = std::max(gap, 1e-2);
  const double dv = v - leader_speed;
  const double s_star =
      p.min_gap +
      std::max(0.0, v * p.time_headway + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel)));
  const double ratio = s_star / s;
  return p.max_accel * (free_term - ratio * ratio);
}

Action discretize_acceleration(double accel, double accel_cap) {
  if (accel > 0.5 * accel_cap) return Action::accel_max;
  if (accel < -0.5 * accel_cap) return Action::decel_max;
  return Action::keep_speed;
}

Action background_policy(const VehicleState& self, const WorldState& world,
                         const ScenarioConfig& config) {
  if (self.changing_lane()) return Action::keep_speed;
  const auto& params = config.background_params;
  const auto& geo = world.geometry;
  const Leader leader = find_leader(self, world, params.path_margin);
  const double a_current = idm_towards(self, leader.vehicle, leader.gap, params.idm);

  const LaneNeighbors own = neighbors_in_lane(self, world, self.lane);
  double best_incentive = params.lane_change_threshold;
  int best_direction = 0;
  for (int direction : {1, -1}) {
    const int target = self.lane + direction;
    if (!lane_exists(geo, target)) continue;
    const LaneNeighbors nb = neighbors_in_lane(self, world, target);
    const double dur = config.lane_change_duration;
    const double front_need =
        params.safety_gap + (nb.leader ? std::max(0.0, self.v - nb.leader->v) * dur : 0.0);
    const double rear_need =
        params.safety_gap + (nb.follower ? std::max(0.0, nb.follower->v - self.v) * dur : 0.0);
    if (nb.front_gap < front_need || nb.rear_gap < rear_need) continue;
    if (far_lane_conflict(self, world, target, direction, params.safety_gap, dur)) continue;

    const double a_new = idm_towards(self, nb.leader, nb.front_gap, params.idm);
    double follower_gain = 0.0;
    if (nb.follower != nullptr) {
      const double gap_to_leader =
          nb.leader ? nb.leader->x - nb.follower->front() : std::numeric_limits<double>::infinity();
      const double before = idm_towards(*nb.follower, nb.leader, gap_to_leader, params.idm);
      const double after = idm_towards(*nb.follower, &self, nb.rear_gap, params.idm);
      if (after < -params.safe_decel) continue;
      follower_gain += after - before;
    }
    if (own.follower != nullptr) {
      const double before = idm_towards(*own.follower, &self, own.rear_gap, params.idm);
      const double gap_after =
          own.leader ? own.leader->x - own.follower->front() : std::numeric_limits<double>::infinity();
      const double after = idm_towards(*own.follower, own.leader, gap_after, params.idm);
      follower_gain += after - before;
    }
    const double incentive = a_new - a_current + params.politeness * follower_gain;
    if (incentive > best_incentive) {
      best_incentive = incentive;
      best_direction = direction;
    }
  }

  if (best_direction != 0) {
    const double u = keyed_uniform(world.rng_state, static_cast<std::uint64_t>(world.step_index),
                                   self.id, 1);
    if (u >= params.hesitation_prob) return lane_action(best_direction);
  }
  return discretize_acceleration(a_current, config.npc_accel_cap);
}

Action default_ego_policy(const WorldState& world, const ScenarioConfig& config) {
  const VehicleState& ego = world.ego();
  if (ego.changing_lane()) return Action::keep_speed;
  const auto& params = config.ego_params;
  const auto& geo = world.geometry;
  const double margin = config.background_params.path_margin;
  const Leader leader = find_leader(ego, world, margin);

  if (leader.vehicle != nullptr && ego.v > leader.vehicle->v) {
    const double ttc = std::max(0.0, leader.gap) / (ego.v - leader.vehicle->v);
    if (ttc < params.ttc_evade) {
      for (int direction : {1, -1}) {
        const int target = ego.lane + direction;
        if (!lane_exists(geo, target)) continue;
        const LaneNeighbors nb = neighbors_in_lane(ego, world, target);
        if (!(nb.front_gap > leader.gap)) continue;
        bool blocked = false;
        for (const auto& other : world.vehicles) {
          if (other.id == ego.id || !in_lane(other, target)) continue;
          const double separation = std::max(other.x - ego.front(), ego.x - other.front());
          if (separation < params.side_gap) {
            blocked = true;
            break;
          }
        }
        if (!blocked && !far_lane_conflict(ego, world, target, direction, params.side_gap,
                                           config.lane_change_duration))
          return lane_action(direction);
      }
      return Action::decel_max;
    }
  }
  const double accel =
      leader.vehicle ? idm_acceleration(ego.v, ego.desired_speed, leader.gap, leader.vehicle->v,
                                        params.idm)
                     : idm_acceleration(ego.v, ego.desired_speed,
                                        std::numeric_limits<double>::infinity(), 0.0, params.idm);
  return discretize_acceleration(accel, config.ego_accel_cap);
}

}  // namespace authsim
