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

#include <doctest.h>

#include <cmath>

using namespace authsim;

namespace {

EpisodeLog random_episode(ExperimentConfig config, std::uint64_t seed) {
  AttackEnvironment env(config, true, true);
  env.reset(seed);
  Rng rng(seed ^ 0x5eedULL);
  while (!env.done()) env.step(static_cast<Action>(rng.index(kActionCount)));
  return env.take_log();
}

}  // namespace

TEST_CASE("logged rewards recompute from the logged states") {
  for (auto kind : {RewardKind::region, RewardKind::ttc, RewardKind::ttb, RewardKind::drac}) {
    ExperimentConfig config;
    config.criticality.reward_kind = kind;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EpisodeLog log = random_episode(config, seed);
      REQUIRE(log.steps.size() >= 2);
      for (std::size_t k = 1; k < log.steps.size(); ++k) {
        // The reward of the transition into record k belongs to the attacker that acted in it.
        const auto& prev = log.steps[k - 1].attacker;
        const double expected = step_reward(log.steps[k].world, prev, config.criticality, config.safety);
        CHECK(std::abs(log.steps[k].reward - expected) <= 1e-9);
        const double region = region_reward(log.steps[k].world, prev, config.criticality.region_scope,
                                            config.criticality.probabilities, config.safety);
        CHECK(std::abs(log.steps[k].region_reward - region) <= 1e-9);
      }
    }
  }
}

TEST_CASE("the attacker only changes at switch boundaries or when it leaves the road") {
  ExperimentConfig config;
  const auto period = static_cast<std::uint64_t>(std::lround(config.train.switch_interval / config.scenario.dt));
  int switches = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EpisodeLog log = random_episode(config, seed);
    for (std::size_t k = 1; k < log.steps.size(); ++k) {
      const auto& before = log.steps[k - 1].attacker;
      const auto& after = log.steps[k].attacker;
      if (before == after) continue;
      ++switches;
      const bool boundary = log.steps[k].world.step_index % period == 0;
      const bool gone = before && log.steps[k].world.find(*before) == nullptr;
      CHECK((boundary || gone));
    }
    for (const auto& step : log.steps) {
      if (!step.attacker) continue;
      const VehicleState* a = step.world.find(*step.attacker);
      REQUIRE(a != nullptr);
      CHECK(a->role == Role::rl_attacker);
      int attackers = 0;
      for (const auto& v : step.world.vehicles) attackers += v.role == Role::rl_attacker;
      CHECK(attackers == 1);
    }
  }
  MESSAGE("attacker changes observed: " << switches);
}

TEST_CASE("episode criticality agrees with the per-step region rewards") {
  ExperimentConfig config;
  config.criticality.reward_kind = RewardKind::drac;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AttackEnvironment env(config, true, true);
    env.reset(seed);
    Rng rng(seed);
    double summed = 0.0;
    while (!env.done()) summed += env.step(static_cast<Action>(rng.index(kActionCount))).region_reward;
    CHECK(std::abs(env.episode_criticality() - summed) <= 1e-9);
    CHECK(std::abs(episode_criticality(env.log(), config.criticality, config.safety) - summed) <= 1e-9);
    CHECK(std::abs(env.log().sum_region_reward() - summed) <= 1e-9);
    CHECK(env.episode_criticality() >= 0.0);
  }
}

TEST_CASE("episodes end exactly once with a recorded reason") {
  ExperimentConfig config;
  config.scenario.episode_max_steps = 30;
  AttackEnvironment env(config, true, false);
  env.reset(5);
  int steps = 0;
  EnvStep last;
  while (!env.done()) {
    last = env.step(Action::keep_speed);
    ++steps;
    CHECK(last.done == env.done());
  }
  CHECK(steps <= 30);
  CHECK(last.terminal == (env.termination() != Termination::max_steps || !env.attacker().has_value()));
  CHECK(env.termination() != Termination::running);
  CHECK_THROWS_AS(env.step(Action::keep_speed), std::logic_error);
}
