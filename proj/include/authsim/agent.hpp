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

#include "authsim/criticality.hpp"
#include "authsim/mlp.hpp"
#include "authsim/rng.hpp"
#include "authsim/safety_region.hpp"
#include "authsim/sim.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace authsim {

class NoCandidates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BufferUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kStateSize = 10;
using FeatureVector = Eigen::Matrix<double, kStateSize, 1>;

/// Network input scaling. Absolute positions get their own scale so they stay
/// in [0, 1] on the road instead of growing along the episode.
struct FeatureScales {
  double distance = 100.0;   // m, relative distances and region depths
  double speed = 40.0;       // m/s
  double position = 1000.0;  // m, absolute road coordinates

  void validate() const;
  bool operator==(const FeatureScales&) const = default;
};

/// Attacker observation. Raw values in meters / m/s; `features` applies the
/// input scaling used by the network.
struct MdpState {
  double d_x_danger = 0.0;
  double d_x_boundary = 0.0;
  double d_x_safety = 0.0;
  double x_npc = 0.0;
  double y_npc = 0.0;
  double same_lane = 0.0;
  double d_x_ego_npc = 0.0;
  double d_y_ego_npc = 0.0;
  double d_rel = 0.0;
  double v_rel = 0.0;

  std::array<double, kStateSize> raw() const;
  FeatureVector features(const FeatureScales& scales) const;

  bool operator==(const MdpState&) const = default;
};

struct TransitionRecord {
  MdpState s_t;
  int a_t = 0;
  double r_t = 0.0;
  MdpState s_next;
  bool terminal = false;
};

struct TrainConfig {
  int episodes = 20000;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  int buffer_capacity = 100000;
  int batch_size = 64;
  double learn_rate = 1e-3;
  int target_sync_steps = 1000;
  std::vector<int> hidden_layers{128, 128};
  double switch_interval = 5.0;
  double attacker_range = 75.0;
  int learning_starts = 1000;
  int train_every = 1;
  double reward_scale = 0.1;
  double max_grad_norm = 10.0;
  FeatureScales scales;

  void validate() const;
  double epsilon(int episode) const;
};

MdpState extract_state(const WorldState& world, VehicleId attacker, const SafetyParams& params);

/// Attacker choice. Between switch boundaries the previous attacker is kept as
/// long as it is still on the road.
VehicleId select_attacker(const WorldState& world, std::optional<VehicleId> previous,
                          const TrainConfig& config, bool at_switch_boundary = true);

/// FIFO replay memory of fixed capacity.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const TransitionRecord& record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TransitionRecord& at(std::size_t i) const;  // 0 = oldest
  std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest slot once full
  std::vector<TransitionRecord> records_;
};

using QNetwork = Mlp<float>;

/// Epsilon-greedy over the network outputs; ties resolve to the lowest index.
Action act(const MdpState& state, double epsilon, const QNetwork& qnet, Rng& rng,
           const FeatureScales& scales);

Action greedy_action(const Eigen::VectorXf& q_values);

struct DqnLearner {
  QNetwork online;
  QNetwork target;
  Adam<float> optimizer;
  Rng rng;
  long updates = 0;

  DqnLearner(const TrainConfig& config, std::uint64_t seed);
};

/// Regression target of one transition: scaled reward plus the discounted
/// best next value unless the transition is terminal.
double td_target(const TransitionRecord& record, double next_max_q, const TrainConfig& config);

/// One minibatch update of the online network on the squared TD error.
/// Hard-syncs the target network every `target_sync_steps` updates.
double train_step(const ReplayBuffer& buffer, DqnLearner& learner, const TrainConfig& config);

/// Serialized network with enough metadata to reproduce its inputs.
struct Checkpoint {
  QNetwork network;
  RewardKind reward_kind = RewardKind::region;
  FeatureScales scales;
  int episodes_trained = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace authsim
