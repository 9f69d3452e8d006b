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

#include "authsim/agent.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace authsim {

std::array<double, kStateSize> MdpState::raw() const {
  return {d_x_danger, d_x_boundary, d_x_safety, x_npc,       y_npc,
          same_lane,  d_x_ego_npc,  d_y_ego_npc, d_rel, v_rel};
}

void FeatureScales::validate() const {
  if (!(distance > 0.0 && speed > 0.0 && position > 0.0))
    throw std::invalid_argument("feature scales must be > 0");
}

FeatureVector MdpState::features(const FeatureScales& s) const {
  const double ds = s.distance;
  const double ps = s.position;
  FeatureVector f;
  f << d_x_danger / ds, d_x_boundary / ds, d_x_safety / ds, x_npc / ps, y_npc / ps, same_lane,
      d_x_ego_npc / ds, d_y_ego_npc / ds, d_rel / ds, v_rel / s.speed;
  return f;
}

void TrainConfig::validate() const {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(epsilon_end <= epsilon_start && epsilon_end >= 0.0 && epsilon_start <= 1.0))
    throw std::invalid_argument("require 0 <= epsilon_end <= epsilon_start <= 1");
  if (buffer_capacity <= 0 || batch_size <= 0 || target_sync_steps <= 0 || train_every <= 0)
    throw std::invalid_argument("buffer, batch, sync and train intervals must be > 0");
  if (!(learn_rate > 0.0)) throw std::invalid_argument("learn_rate must be > 0");
  if (hidden_layers.empty()) throw std::invalid_argument("hidden_layers must not be empty");
  if (!(switch_interval > 0.0 && attacker_range > 0.0))
    throw std::invalid_argument("switch_interval and attacker_range must be > 0");
  scales.validate();
  if (!(reward_scale > 0.0))
    throw std::invalid_argument("scales must be > 0");
}

double TrainConfig::epsilon(int episode) const {
  const double decay_episodes = epsilon_decay_fraction * episodes;
  if (decay_episodes <= 0.0) return epsilon_end;
  const double frac = std::min(1.0, episode / decay_episodes);
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

MdpState extract_state(const WorldState& world, VehicleId attacker, const SafetyParams& params) {
  const VehicleState& ego = world.ego();
  const VehicleState* npc = world.find(attacker);
  if (npc == nullptr) throw std::invalid_argument("attacker not in world");
  const RegionLayers layers = build_region_layers(ego, *npc, params);
  MdpState s;
  s.d_x_danger = layers.d_x_danger;
  s.d_x_boundary = layers.d_x_boundary;
  s.d_x_safety = layers.d_x_safety;
  s.x_npc = npc->x;
  s.y_npc = npc->y;
  s.same_lane = npc->lane == ego.lane ? 1.0 : 0.0;
  s.d_x_ego_npc = npc->x - ego.x;
  s.d_y_ego_npc = npc->y - ego.y;
  s.d_rel = std::hypot(s.d_x_ego_npc, s.d_y_ego_npc);
  s.v_rel = npc->v - ego.v;
  return s;
}

VehicleId select_attacker(const WorldState& world, std::optional<VehicleId> previous,
                          const TrainConfig& config, bool at_switch_boundary) {
  if (!at_switch_boundary && previous && world.find(*previous) != nullptr) return *previous;
  const VehicleState& ego = world.ego();
  const VehicleState* threat = nullptr;
  double threat_dx = std::numeric_limits<double>::infinity();
  const VehicleState* nearest = nullptr;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (const auto& v : world.vehicles) {
    if (v.role == Role::ego) continue;
    const double dx = v.x - ego.x;
    if (dx > 0.0 && dx <= config.attacker_range && v.v < ego.v) {
      if (dx < threat_dx || (dx == threat_dx && v.id < threat->id)) {
        threat_dx = dx;
        threat = &v;
      }
    }
    const double d = std::hypot(dx, v.y - ego.y);
    if (d < nearest_d || (d == nearest_d && v.id < nearest->id)) {
      nearest_d = d;
      nearest = &v;
    }
  }
  if (threat != nullptr) return threat->id;
  if (nearest != nullptr) return nearest->id;
  throw NoCandidates("world has no non-ego vehicles");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
  records_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayBuffer::push(const TransitionRecord& record) {
  if (records_.size() < capacity_) {
    records_.push_back(record);
    return;
  }
  records_[head_] = record;
  head_ = (head_ + 1) % capacity_;
}

const TransitionRecord& ReplayBuffer::at(std::size_t i) const {
  if (i >= records_.size()) throw std::out_of_range("replay index out of range");
  return records_[(head_ + i) % records_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (records_.size() < batch) throw BufferUnderflow("replay buffer smaller than the batch");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(records_.size());
  return idx;
}

Action greedy_action(const Eigen::VectorXf& q) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return static_cast<Action>(best);
}

Action act(const MdpState& state, double epsilon, const QNetwork& qnet, Rng& rng,
           const FeatureScales& scales) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<Action>(rng.index(kActionCount));
  }
  const Eigen::MatrixXf x = state.features(scales).cast<float>();
  return greedy_action(qnet.forward(x).col(0));
}

namespace {

std::vector<int> network_shape(const TrainConfig& config) {
  std::vector<int> sizes{kStateSize};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(kActionCount);
  return sizes;
}

}  // namespace

DqnLearner::DqnLearner(const TrainConfig& config, std::uint64_t seed)
    : optimizer(static_cast<float>(config.learn_rate)), rng(splitmix64(seed ^ 0xD0F1ULL)) {
  Rng init(splitmix64(seed ^ 0x1417ULL));
  online = QNetwork(network_shape(config), init);
  target = online;
}

double td_target(const TransitionRecord& record, double next_max_q, const TrainConfig& config) {
  const double r = record.r_t * config.reward_scale;
  return record.terminal ? r : r + config.gamma * next_max_q;
}

double train_step(const ReplayBuffer& buffer, DqnLearner& learner, const TrainConfig& config) {
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::vector<std::size_t> idx = buffer.sample(batch, learner.rng);
  const auto n = static_cast<Eigen::Index>(batch);

  Eigen::MatrixXf states(kStateSize, n);
  Eigen::MatrixXf next_states(kStateSize, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const TransitionRecord& tr = buffer.at(idx[static_cast<std::size_t>(j)]);
    states.col(j) = tr.s_t.features(config.scales).cast<float>();
    next_states.col(j) = tr.s_next.features(config.scales).cast<float>();
  }
  const Eigen::MatrixXf next_q = learner.target.forward(next_states);

  QNetwork::Cache cache;
  const Eigen::MatrixXf q = learner.online.forward(states, cache);
  Eigen::MatrixXf d_out = Eigen::MatrixXf::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const TransitionRecord& tr = buffer.at(idx[static_cast<std::size_t>(j)]);
    const auto y = static_cast<float>(td_target(tr, next_q.col(j).maxCoeff(), config));
    const float err = q(tr.a_t, j) - y;
    loss += static_cast<double>(err) * err;
    d_out(tr.a_t, j) = 2.0f * err / static_cast<float>(n);
  }
  loss /= static_cast<double>(n);

  MlpGradients<float> grads = learner.online.backward(cache, d_out);
  if (config.max_grad_norm > 0.0) {
    const double norm = std::sqrt(static_cast<double>(grads.squared_norm()));
    if (norm > config.max_grad_norm) grads.scale(static_cast<float>(config.max_grad_norm / norm));
  }
  learner.optimizer.step(learner.online, grads);
  ++learner.updates;
  if (learner.updates % config.target_sync_steps == 0) learner.target = learner.online;
  return loss;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json j;
  j["format"] = "authsim-qnet";
  j["version"] = 1;
  j["reward_kind"] = std::string(to_string(ckpt.reward_kind));
  j["episodes_trained"] = ckpt.episodes_trained;
  j["distance_scale"] = ckpt.scales.distance;
  j["speed_scale"] = ckpt.scales.speed;
  j["position_scale"] = ckpt.scales.position;
  j["layers"] = ckpt.network.layer_sizes();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < ckpt.network.layer_count(); ++l) {
    const auto& w = ckpt.network.weights()[l];
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) rows.push_back(w(r, c));
    weights.push_back(rows);
    const auto& b = ckpt.network.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << j.dump() << '\n';
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move checkpoint into place: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "authsim-qnet" || j.value("version", 0) != 1)
    throw std::runtime_error("unsupported checkpoint format in " + path);
  Checkpoint ckpt;
  const auto kind = reward_kind_from_string(j.at("reward_kind").get<std::string>());
  if (!kind) throw std::runtime_error("checkpoint has unknown reward kind");
  ckpt.reward_kind = *kind;
  ckpt.episodes_trained = j.at("episodes_trained").get<int>();
  ckpt.scales.distance = j.at("distance_scale").get<double>();
  ckpt.scales.speed = j.at("speed_scale").get<double>();
  ckpt.scales.position = j.at("position_scale").get<double>();
  const auto sizes = j.at("layers").get<std::vector<int>>();
  std::vector<Eigen::MatrixXf> weights;
  std::vector<Eigen::VectorXf> biases;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto w = j.at("weights").at(l).get<std::vector<double>>();
    const auto b = j.at("biases").at(l).get<std::vector<double>>();
    const auto rows = sizes[l + 1];
    const auto cols = sizes[l];
    if (w.size() != static_cast<std::size_t>(rows) * cols || b.size() != static_cast<std::size_t>(rows))
      throw std::runtime_error("checkpoint layer " + std::to_string(l) + " has the wrong size");
    Eigen::MatrixXf m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = static_cast<float>(w[static_cast<std::size_t>(r) * cols + c]);
    Eigen::VectorXf bv(rows);
    for (int r = 0; r < rows; ++r) bv(r) = static_cast<float>(b[static_cast<std::size_t>(r)]);
    weights.push_back(std::move(m));
    biases.push_back(std::move(bv));
  }
  ckpt.network = QNetwork::from_parameters(sizes, std::move(weights), std::move(biases));
  return ckpt;
}

}  // namespace authsim
