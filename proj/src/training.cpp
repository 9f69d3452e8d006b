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

#include "authsim/training.hpp"

#include "authsim/scenario_lab.hpp"

#include <algorithm>

namespace authsim {

std::uint64_t training_episode_seed(std::uint64_t seed, int i) {
  return splitmix64(seed ^ 0x747261696E000000ULL) + static_cast<std::uint64_t>(i);
}

TrainingResult run_training(const ExperimentConfig& config, std::uint64_t seed,
                            const ProgressCallback& progress) {
  config.validate();
  const TrainConfig& tc = config.train;
  DqnLearner learner(tc, splitmix64(seed ^ 0x6C6561726E6572ULL));
  Rng explore(splitmix64(seed ^ 0x6578706C6F7265ULL));
  ReplayBuffer buffer(static_cast<std::size_t>(tc.buffer_capacity));
  const std::size_t warmup =
      static_cast<std::size_t>(std::max(tc.batch_size, tc.learning_starts));

  TrainingResult result;
  AttackEnvironment env(config, true, false);
  long env_steps = 0;
  for (int episode = 0; episode < tc.episodes; ++episode) {
    env.reset(training_episode_seed(seed, episode), episode, "train");
    const double eps = tc.epsilon(episode);
    double loss_sum = 0.0;
    int loss_count = 0;
    while (!env.done()) {
      const auto attacker = env.attacker();
      if (!attacker) {
        env.step(Action::keep_speed);
        continue;
      }
      const MdpState s = env.observe();
      const Action a = act(s, eps, learner.online, explore, tc.scales);
      const EnvStep out = env.step(a);
      buffer.push({s, static_cast<int>(a), out.reward, out.next_state, out.terminal});
      ++env_steps;
      if (buffer.size() >= warmup && env_steps % tc.train_every == 0) {
        loss_sum += train_step(buffer, learner, tc);
        ++loss_count;
      }
    }

    CurveRow row;
    row.episode = episode;
    row.epsilon = eps;
    row.steps = env.steps_taken();
    row.sum_reward = env.episode_reward();
    row.criticality = env.episode_criticality();
    if (env.termination() == Termination::collision) {
      row.collided = true;
      if (const auto contact = ego_contact(env.final_contacts(), env.world().ego().id)) {
        row.collision_type = std::string(to_string(
            classify_collision(*contact, env.world(), config.scenario.lane_change_duration, episode)
                .type4));
      }
    }
    if (loss_count > 0) row.mean_loss = loss_sum / loss_count;
    if (progress) progress(row);
    result.curve.push_back(std::move(row));
  }

  result.checkpoint.network = learner.online;
  result.checkpoint.reward_kind = config.criticality.reward_kind;
  result.checkpoint.scales = tc.scales;
  result.checkpoint.episodes_trained = tc.episodes;
  result.updates = learner.updates;
  return result;
}

double evaluate_policy(const std::function<Action(const MdpState&, Rng&)>& policy,
                       const ExperimentConfig& config, std::uint64_t base_seed, int episodes) {
  if (episodes <= 0) return 0.0;
  AttackEnvironment env(config, true, false);
  double total = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    Rng rng(splitmix64(seed ^ 0x6576616CULL));
    env.reset(seed, i, "eval");
    while (!env.done()) {
      env.step(env.attacker() ? policy(env.observe(), rng) : Action::keep_speed);
    }
    total += env.episode_reward();
  }
  return total / episodes;
}

}  // namespace authsim
