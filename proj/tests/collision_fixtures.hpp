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

// Hand-built contact snapshots, three per collision category.

#include "authsim/scenario_lab.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fixtures {

using authsim::CollisionType;
using authsim::Role;
using authsim::VehicleState;
using authsim::WorldState;

struct CollisionFixture {
  std::string name;
  WorldState world;
  CollisionType expected;
};

inline constexpr double kContactTime = 10.0;
inline constexpr double kNever = -std::numeric_limits<double>::infinity();

inline VehicleState vehicle(authsim::VehicleId id, Role role, double x, double y, double v,
                            double lateral_v = 0.0, std::optional<int> target = std::nullopt,
                            double last_change_end = kNever) {
  VehicleState s;
  s.id = id;
  s.role = role;
  s.x = x;
  s.y = y;
  s.v = v;
  s.lateral_v = lateral_v;
  s.lane = authsim::LaneGeometry{}.nearest_lane(y);
  s.target_lane = target;
  s.last_lane_change_end = last_change_end;
  return s;
}

inline WorldState world_of(std::vector<VehicleState> vehicles) {
  WorldState w;
  w.t = kContactTime;
  w.step_index = 100;
  w.vehicles = std::move(vehicles);
  return w;
}

/// Lane centers are at y = 2, 6, 10; the ego drives in the middle lane.
inline std::vector<CollisionFixture> collision_fixtures() {
  const Role rl = Role::rl_attacker;
  const Role bg = Role::background;
  const Role ego = Role::ego;
  std::vector<CollisionFixture> out;

  // Attacker or background vehicle at fault.
  out.push_back({"attacker merges from the left into the ego's flank",
                 world_of({vehicle(0, ego, 100.0, 6.0, 25.0), vehicle(1, rl, 101.0, 7.8, 25.0, -4.0, 1)}),
                 CollisionType::rl_to_ego});
  out.push_back({"attacker rear-ends the lane-keeping ego",
                 world_of({vehicle(0, ego, 100.0, 6.0, 20.0), vehicle(1, rl, 95.5, 6.0, 26.0)}),
                 CollisionType::rl_to_ego});
  out.push_back({"attacker finished a cut-in half a second ago and brakes in front",
                 world_of({vehicle(0, ego, 100.0, 6.0, 25.0), vehicle(1, rl, 104.6, 6.0, 18.0, 0.0, std::nullopt,
                                                                  kContactTime - 0.5)}),
                 CollisionType::rl_to_ego});
  out.push_back({"background vehicle merges from the right into the ego's flank",
                 world_of({vehicle(0, ego, 100.0, 6.0, 24.0), vehicle(3, bg, 98.0, 4.3, 24.0, 4.0, 1)}),
                 CollisionType::ndd_to_ego});
  out.push_back({"background vehicle rear-ends the ego",
                 world_of({vehicle(0, ego, 200.0, 6.0, 22.0), vehicle(5, bg, 195.3, 6.0, 27.0)}),
                 CollisionType::ndd_to_ego});
  out.push_back({"residual tie resolves against the background vehicle",
                 world_of({vehicle(0, ego, 150.0, 6.0, 22.0), vehicle(2, bg, 150.0, 7.5, 22.0)}),
                 CollisionType::ndd_to_ego});

  // Ego at fault.
  out.push_back({"ego rear-ends a lane-keeping attacker",
                 world_of({vehicle(0, ego, 100.0, 6.0, 25.0), vehicle(1, rl, 104.5, 6.0, 15.0)}),
                 CollisionType::ego_to_rl});
  out.push_back({"ego merges left into the attacker's flank",
                 world_of({vehicle(0, ego, 100.0, 8.2, 25.0, 4.0, 2), vehicle(1, rl, 102.0, 10.0, 25.0)}),
                 CollisionType::ego_to_rl});
  out.push_back({"ego completed a lane change and runs into the attacker",
                 world_of({vehicle(0, ego, 100.0, 10.0, 28.0, 0.0, std::nullopt, kContactTime - 0.6),
                           vehicle(1, rl, 104.7, 10.0, 20.0)}),
                 CollisionType::ego_to_rl});
  out.push_back({"ego rear-ends a slow background vehicle",
                 world_of({vehicle(0, ego, 300.0, 6.0, 30.0), vehicle(7, bg, 304.2, 6.0, 12.0)}),
                 CollisionType::ego_to_ndd});
  out.push_back({"ego merges right into a background vehicle's flank",
                 world_of({vehicle(0, ego, 100.0, 3.7, 25.0, -4.0, 0), vehicle(4, bg, 99.0, 2.0, 24.0)}),
                 CollisionType::ego_to_ndd});
  out.push_back({"both drift together, ego front inside the background vehicle's rear",
                 world_of({vehicle(0, ego, 100.0, 7.0, 26.0, 4.0, 2), vehicle(6, bg, 104.0, 8.5, 20.0, -4.0, 1)}),
                 CollisionType::ego_to_ndd});
  return out;
}

}  // namespace fixtures
