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
#include "authsim/environment.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace authsim {

struct CurveRow {
  int episode = 0;
  double epsilon = 0.0;
  int steps = 0;
  double sum_reward = 0.0;
  double criticality = 0.0;  // region-kind objective J of the episode
  bool collided = false;
  std::string collision_type;  // empty unless an ego collision occurred
  std::optional<double> mean_loss;  // over the episode's updates
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::vector<CurveRow> curve;
  long updates = 0;
};

using ProgressCallback = std::function<void(const CurveRow&)>;

/// Seed of training episode `i` for a run seeded with `seed`.
std::uint64_t training_episode_seed(std::uint64_t seed, int i);

/// Trains a DQN attacker for `config.train.episodes` episodes. Single-threaded
/// and bit-reproducible for a given seed.
TrainingResult run_training(const ExperimentConfig& config, std::uint64_t seed,
                            const ProgressCallback& progress = {});

/// Mean undiscounted episode reward of a policy over seeds base_seed + i.
double evaluate_policy(const std::function<Action(const MdpState&, Rng&)>& policy,
                       const ExperimentConfig& config, std::uint64_t base_seed, int episodes);

}  // namespace authsim
