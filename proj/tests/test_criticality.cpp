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
#include "authsim/environment.hpp"

#include "collision_fixtures.hpp"

#include <doctest.h>

#include <random>

using namespace authsim;
using fixtures::vehicle;
using fixtures::world_of;

namespace {

// Ego at 30 m/s and an NPC at 10 m/s: danger depth 50 m, boundary depth
// 59.135 m, so a 5 m body fits entirely inside the boundary annulus.
WorldState boundary_world() {
  return world_of({vehicle(0, Role::ego, 0.0, 6.0, 30.0), vehicle(1, Role::rl_attacker, 56.0, 6.0, 10.0)});
}

WorldState safety_world() {
  return world_of({vehicle(0, Role::ego, 0.0, 6.0, 30.0), vehicle(1, Role::rl_attacker, 80.0, 6.0, 10.0)});
}

}  // namespace

TEST_CASE("time to collision") {
  CHECK(*ttc(20, 20, 10) == 2.0);
  CHECK_FALSE(ttc(20, 10, 20).has_value());
  CHECK_FALSE(ttc(20, 15, 15).has_value());
  CHECK_THROWS_AS(ttc(0, 20, 10), DegenerateGap);
  CHECK_THROWS_AS(ttc(-1, 20, 10), DegenerateGap);
}

TEST_CASE("time to brake") {
  CHECK(*ttb(20, 20, 10, 4) == 3.25);
  CHECK(*ttb(20, 30, 10, 4) == 3.5);
  CHECK_FALSE(ttb(20, 15, 15, 4).has_value());
  CHECK_THROWS_AS(ttb(0, 20, 10, 4), DegenerateGap);
}

TEST_CASE("deceleration rate to avoid a crash") {
  CHECK(drac(20, 20, 10) == 2.5);
  CHECK(drac(20, 10, 20) == 0.0);
  CHECK(drac(5, 20, 10) == 10.0);
  CHECK_THROWS_AS(drac(0, 20, 10), DegenerateGap);
}

TEST_CASE("region reward weights the layer overlaps") {
  const SafetyParams p;
  CriticalityConfig c;
  const WorldState w = boundary_world();
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(6.0));
  CHECK(step_reward(safety_world(), VehicleId{1}, c, p) == doctest::Approx(2.0));

  const WorldState far = world_of({vehicle(0, Role::ego, 0.0, 6.0, 30.0), vehicle(1, Role::rl_attacker, 5000.0, 6.0, 10.0)});
  CHECK(step_reward(far, VehicleId{1}, c, p) == 0.0);

  // A vehicle behind the ego never contributes.
  const WorldState behind = world_of({vehicle(0, Role::ego, 100.0, 6.0, 30.0), vehicle(1, Role::rl_attacker, 80.0, 6.0, 10.0)});
  CHECK(step_reward(behind, VehicleId{1}, c, p) == 0.0);
}

TEST_CASE("region scope selects the summed vehicles") {
  const SafetyParams p;
  CriticalityConfig c;
  WorldState w = boundary_world();
  w.vehicles.push_back(vehicle(2, Role::background, 80.0, 6.0, 10.0));
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(8.0));
  c.region_scope = RegionScope::attacker_only;
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(6.0));
  CHECK(step_reward(w, VehicleId{2}, c, p) == doctest::Approx(2.0));
}

TEST_CASE("baseline reward mappings") {
  const SafetyParams p;
  CriticalityConfig c;
  // Ego follows the attacker at a 20 m gap, closing at 10 m/s.
  const WorldState w = world_of({vehicle(0, Role::ego, 0.0, 6.0, 20.0), vehicle(1, Role::rl_attacker, 25.0, 6.0, 10.0)});
  c.reward_kind = RewardKind::ttc;
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(0.5));
  c.reward_kind = RewardKind::ttb;
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx((5.0 - 3.25) / 5.0));
  c.reward_kind = RewardKind::drac;
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(2.5 / 4.0));
  c.drac_cap = 2.0;
  CHECK(step_reward(w, VehicleId{1}, c, p) == doctest::Approx(1.0));

  // Different lanes: no car-following pair.
  const WorldState apart = world_of({vehicle(0, Role::ego, 0.0, 6.0, 20.0), vehicle(1, Role::rl_attacker, 25.0, 10.0, 10.0)});
  c.reward_kind = RewardKind::ttc;
  CHECK(step_reward(apart, VehicleId{1}, c, p) == 0.0);
  CHECK(step_reward(w, std::nullopt, c, p) == 0.0);
}

TEST_CASE("the boundary layer is the reward argmax for a single enclosed NPC") {
  const SafetyParams p;
  CriticalityConfig c;
  c.region_scope = RegionScope::attacker_only;
  const VehicleState ego = vehicle(0, Role::ego, 0.0, 6.0, 30.0);
  // Danger [5, 55), boundary [55, 64.135), safety beyond.
  const double in_danger = step_reward(world_of({ego, vehicle(1, Role::rl_attacker, 20.0, 6.0, 10.0)}), VehicleId{1}, c, p);
  const double in_boundary = step_reward(world_of({ego, vehicle(1, Role::rl_attacker, 57.0, 6.0, 10.0)}), VehicleId{1}, c, p);
  const double in_safety = step_reward(world_of({ego, vehicle(1, Role::rl_attacker, 120.0, 6.0, 10.0)}), VehicleId{1}, c, p);
  CHECK(in_danger == doctest::Approx(2.0));
  CHECK(in_boundary == doctest::Approx(6.0));
  CHECK(in_safety == doctest::Approx(2.0));
  CHECK(in_boundary > in_danger);
  CHECK(in_boundary > in_safety);
}

TEST_CASE("rewards are non-negative and bounded by the weighted vehicle area") {
  const SafetyParams p;
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> x(0.0, 400.0);
  std::uniform_real_distribution<double> v(0.0, 40.0);
  std::uniform_int_distribution<int> lane(0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<VehicleState> vs{vehicle(0, Role::ego, 100.0, 6.0, v(gen))};
    for (VehicleId id = 1; id <= 8; ++id) {
      vs.push_back(vehicle(id, id == 1 ? Role::rl_attacker : Role::background, x(gen), 2.0 + 4.0 * lane(gen), v(gen)));
    }
    const WorldState w = world_of(vs);
    for (RewardKind kind : {RewardKind::region, RewardKind::ttc, RewardKind::ttb, RewardKind::drac}) {
      CriticalityConfig c;
      c.reward_kind = kind;
      const double r = step_reward(w, VehicleId{1}, c, p);
      REQUIRE(r >= 0.0);
      if (kind == RewardKind::region) {
        REQUIRE(r <= 0.6 * 10.0 * 8 + 1e-9);
      } else {
        REQUIRE(r <= 1.0);
      }
    }
  }
}

TEST_CASE("episode criticality sums region rewards over the logged steps") {
  const SafetyParams p;
  CriticalityConfig c;
  c.reward_kind = RewardKind::ttc;  // the objective ignores the training kind

  EpisodeLog log;
  StepRecord first;
  first.world = boundary_world();
  first.attacker = VehicleId{1};
  log.steps.push_back(first);
  StepRecord second = first;
  log.steps.push_back(second);
  CHECK(episode_criticality(log, c, p) == doctest::Approx(6.0));

  StepRecord third;
  third.world = safety_world();
  third.attacker = VehicleId{1};
  log.steps.push_back(third);
  CHECK(episode_criticality(log, c, p) == doctest::Approx(8.0));

  EpisodeLog empty;
  StepRecord far;
  far.world = world_of({vehicle(0, Role::ego, 0.0, 6.0, 30.0), vehicle(1, Role::rl_attacker, 5000.0, 6.0, 10.0)});
  far.attacker = VehicleId{1};
  empty.steps = {far, far, far};
  CHECK(episode_criticality(empty, c, p) == 0.0);
}

TEST_CASE("region probabilities must favour the boundary layer") {
  RegionProbabilities probs{0.7, 0.2, 0.1};
  CHECK_THROWS_AS(probs.validate(), std::invalid_argument);
  probs = {0.2, 0.6, 0.2};
  CHECK_NOTHROW(probs.validate());
  CriticalityConfig c;
  c.ttc_threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("reward kind names round-trip") {
  for (RewardKind k : {RewardKind::region, RewardKind::ttc, RewardKind::ttb, RewardKind::drac}) {
    CHECK(reward_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(reward_kind_from_string("nope").has_value());
}
