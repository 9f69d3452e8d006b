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

#include "authsim/scenario_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

namespace authsim {

std::string_view to_string(CollisionType type) {
  switch (type) {
    case CollisionType::rl_to_ego: return "RL->ego";
    case CollisionType::ndd_to_ego: return "NDD->ego";
    case CollisionType::ego_to_rl: return "ego->RL";
    case CollisionType::ego_to_ndd: return "ego->NDD";
  }
  return "NDD->ego";
}

CollisionType collision_type_from_string(std::string_view text) {
  for (CollisionType t : {CollisionType::rl_to_ego, CollisionType::ndd_to_ego,
                          CollisionType::ego_to_rl, CollisionType::ego_to_ndd}) {
    if (to_string(t) == text) return t;
  }
  throw std::invalid_argument("unknown collision type: " + std::string(text));
}

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

bool moving_toward(const VehicleState& self, const VehicleState& other) {
  return self.lateral_v != 0.0 && sign(self.lateral_v) == sign(other.y - self.y);
}

bool lane_change_fault(const VehicleState& self, const VehicleState& other, double t,
                       double lane_change_duration) {
  if (moving_toward(self, other)) return true;
  return self.lane == other.lane && self.last_lane_change_end >= t - lane_change_duration - 1e-9;
}

bool rear_end_overlap(const VehicleState& self, const VehicleState& other) {
  return self.x < other.x && self.front() > other.x && self.front() <= other.front();
}

}  // namespace

CollisionRecord classify_collision(const ContactEvent& contact, const WorldState& world,
                                   double lane_change_duration, int episode_id) {
  const VehicleState* a = world.find(contact.a);
  const VehicleState* b = world.find(contact.b);
  if (a == nullptr || b == nullptr) throw std::invalid_argument("contact party missing from world");
  if (a->role != Role::ego && b->role != Role::ego) {
    throw NonEgoCollision("contact between vehicles " + std::to_string(a->id) + " and " +
                          std::to_string(b->id) + " does not involve the ego");
  }
  const VehicleState& ego = a->role == Role::ego ? *a : *b;
  const VehicleState& npc = a->role == Role::ego ? *b : *a;

  const VehicleState* striker = nullptr;
  const bool ego_lc = lane_change_fault(ego, npc, world.t, lane_change_duration);
  const bool npc_lc = lane_change_fault(npc, ego, world.t, lane_change_duration);
  if (ego_lc != npc_lc) striker = ego_lc ? &ego : &npc;

  if (striker == nullptr) {
    const bool ego_rear = rear_end_overlap(ego, npc);
    const bool npc_rear = rear_end_overlap(npc, ego);
    if (ego_rear != npc_rear) striker = ego_rear ? &ego : &npc;
  }
  if (striker == nullptr) {
    const VehicleState& rear = ego.x <= npc.x ? ego : npc;
    const VehicleState& front = ego.x <= npc.x ? npc : ego;
    if (ego.x != npc.x && rear.v > front.v) {
      striker = &rear;
    } else {
      const bool ego_toward = moving_toward(ego, npc);
      const bool npc_toward = moving_toward(npc, ego);
      if (ego_toward != npc_toward) striker = ego_toward ? &ego : &npc;
    }
  }
  if (striker == nullptr) striker = &npc;

  const VehicleState& struck = striker == &ego ? npc : ego;
  CollisionRecord rec;
  rec.episode_id = episode_id;
  rec.t_collision = world.t;
  rec.striker_id = striker->id;
  rec.struck_id = struck.id;
  rec.striker_role = striker->role;
  rec.struck_role = struck.role;
  if (striker == &ego) {
    rec.type4 = npc.role == Role::rl_attacker ? CollisionType::ego_to_rl : CollisionType::ego_to_ndd;
  } else {
    rec.type4 = npc.role == Role::rl_attacker ? CollisionType::rl_to_ego : CollisionType::ndd_to_ego;
  }
  rec.valid = striker == &ego;
  rec.striker_mid_lane_change =
      striker->changing_lane() ||
      striker->last_lane_change_end >= world.t - lane_change_duration - 1e-9;
  return rec;
}

std::optional<ContactEvent> ego_contact(const std::vector<ContactEvent>& contacts, VehicleId ego) {
  std::optional<ContactEvent> best;
  for (const auto& c : contacts) {
    if (c.a != ego && c.b != ego) continue;
    if (!best || c.overlap_area > best->overlap_area) best = c;
  }
  return best;
}

std::optional<AuthenticityRecord> detect_cut_in(const EpisodeLog& log, VehicleId npc_id) {
  std::size_t collision_step = 0;
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    const auto& events = log.steps[k].events;
    const bool hit = std::any_of(events.begin(), events.end(), [&](const ContactEvent& c) {
      return c.a == npc_id || c.b == npc_id;
    });
    if (hit) {
      collision_step = k;
      break;
    }
  }
  if (collision_step == 0) return std::nullopt;

  std::optional<std::size_t> crossing;
  for (std::size_t k = 1; k <= collision_step; ++k) {
    const WorldState& now = log.steps[k].world;
    const VehicleState* before = log.steps[k - 1].world.find(npc_id);
    const VehicleState* after = now.find(npc_id);
    if (before == nullptr || after == nullptr) continue;
    const VehicleState& ego = now.ego();
    const double lo = now.geometry.lane_low(ego.lane);
    const double hi = now.geometry.lane_high(ego.lane);
    auto overlaps_lane = [&](const VehicleState& v) { return v.y_low() < hi && v.y_high() > lo; };
    if (!overlaps_lane(*before) && overlaps_lane(*after) && after->x > ego.front()) crossing = k;
  }
  if (!crossing) return std::nullopt;

  const WorldState& at = log.steps[*crossing].world;
  AuthenticityRecord rec;
  rec.episode_id = log.episode_id;
  rec.npc_id = npc_id;
  rec.t_cut_in = at.t;
  rec.d_cut_in = at.find(npc_id)->x - at.ego().front();
  rec.t_collision = log.steps[collision_step].world.t;
  rec.t_interval = rec.t_collision - rec.t_cut_in;
  return rec;
}

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, double width, int bins) {
  std::vector<HistogramBin> out;
  for (int i = 0; i < bins; ++i) out.push_back({i * width, (i + 1) * width, 0});
  out.push_back({bins * width, std::numeric_limits<double>::infinity(), 0});
  for (double v : values) {
    const int idx = std::clamp(static_cast<int>(std::floor(v / width)), 0, bins);
    ++out[static_cast<std::size_t>(idx)].count;
  }
  return out;
}

EpisodeOutcome summarize_episode(const EpisodeLog& log) {
  EpisodeOutcome out;
  out.episode_id = log.episode_id;
  out.seed = log.seed;
  out.termination = log.termination;
  out.steps = log.steps.empty() ? 0 : static_cast<int>(log.steps.back().world.step_index);
  out.sum_reward = log.sum_reward();
  out.criticality = log.sum_region_reward();
  if (log.termination != Termination::collision || log.steps.empty()) return out;

  const StepRecord& last = log.steps.back();
  const auto contact = ego_contact(last.events, last.world.ego().id);
  if (!contact) return out;
  out.collision = classify_collision(*contact, last.world,
                                     log.config.scenario.lane_change_duration, log.episode_id);
  if (out.collision->valid) out.cut_in = detect_cut_in(log, out.collision->struck_id);
  return out;
}

namespace {

double percent(int num, int den) { return den > 0 ? 100.0 * num / den : 0.0; }

void finalize(SummaryReport& r) {
  r.rl_to_ego = r.ndd_to_ego = r.ego_to_rl = r.ego_to_ndd = 0;
  for (const auto& c : r.collisions) {
    switch (c.type4) {
      case CollisionType::rl_to_ego: ++r.rl_to_ego; break;
      case CollisionType::ndd_to_ego: ++r.ndd_to_ego; break;
      case CollisionType::ego_to_rl: ++r.ego_to_rl; break;
      case CollisionType::ego_to_ndd: ++r.ego_to_ndd; break;
    }
  }
  r.invalid_collisions = r.rl_to_ego + r.ndd_to_ego;
  r.valid_collisions = r.ego_to_rl + r.ego_to_ndd;
  r.all_collisions = r.invalid_collisions + r.valid_collisions;
  r.valid_over_all = percent(r.valid_collisions, r.all_collisions);
  r.valid_over_tests = percent(r.valid_collisions, r.tests);
  r.lane_change_scenarios = static_cast<int>(r.cut_ins.size());
  r.lane_change_ratio = percent(r.lane_change_scenarios, r.valid_collisions);
  std::vector<double> d;
  std::vector<double> t;
  for (const auto& c : r.cut_ins) {
    d.push_back(c.d_cut_in);
    t.push_back(c.t_interval);
  }
  auto mean = [](const std::vector<double>& xs) -> std::optional<double> {
    if (xs.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  r.mean_d_cut_in = mean(d);
  r.mean_t_interval = mean(t);
  r.hist_d_cut_in = make_histogram(d, kCutInBinWidth, kCutInBins);
  r.hist_t_interval = make_histogram(t, kIntervalBinWidth, kIntervalBins);
}

}  // namespace

SummaryReport build_report(const std::string& method, const std::vector<EpisodeOutcome>& outcomes) {
  SummaryReport r;
  r.method = method;
  r.tests = static_cast<int>(outcomes.size());
  double reward = 0.0;
  double crit = 0.0;
  for (const auto& o : outcomes) {
    reward += o.sum_reward;
    crit += o.criticality;
    if (o.termination == Termination::non_ego_collision) ++r.non_ego_collisions;
    if (o.collision) r.collisions.push_back(*o.collision);
    if (o.cut_in) r.cut_ins.push_back(*o.cut_in);
  }
  if (r.tests > 0) {
    r.mean_episode_reward = reward / r.tests;
    r.mean_criticality = crit / r.tests;
  }
  finalize(r);
  return r;
}

SummaryReport merge_reports(const std::string& method, const std::vector<SummaryReport>& reports) {
  SummaryReport r;
  r.method = method;
  double reward = 0.0;
  double crit = 0.0;
  for (const auto& part : reports) {
    r.tests += part.tests;
    r.non_ego_collisions += part.non_ego_collisions;
    reward += part.mean_episode_reward * part.tests;
    crit += part.mean_criticality * part.tests;
    r.collisions.insert(r.collisions.end(), part.collisions.begin(), part.collisions.end());
    r.cut_ins.insert(r.cut_ins.end(), part.cut_ins.begin(), part.cut_ins.end());
  }
  if (r.tests > 0) {
    r.mean_episode_reward = reward / r.tests;
    r.mean_criticality = crit / r.tests;
  }
  finalize(r);
  return r;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json bins_json(const std::vector<HistogramBin>& bins) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : bins) {
    arr.push_back({{"bin_left", b.left},
                   {"bin_right", std::isinf(b.right) ? nlohmann::json(nullptr) : nlohmann::json(b.right)},
                   {"count", b.count}});
  }
  return arr;
}

}  // namespace

nlohmann::json to_json(const SummaryReport& r) {
  nlohmann::json j;
  j["schema_version"] = r.schema_version;
  j["method"] = r.method;
  j["tests"] = r.tests;
  j["rl_to_ego"] = r.rl_to_ego;
  j["ndd_to_ego"] = r.ndd_to_ego;
  j["ego_to_rl"] = r.ego_to_rl;
  j["ego_to_ndd"] = r.ego_to_ndd;
  j["invalid_collisions"] = r.invalid_collisions;
  j["valid_collisions"] = r.valid_collisions;
  j["all_collisions"] = r.all_collisions;
  j["non_ego_collisions"] = r.non_ego_collisions;
  j["valid_over_all_pct"] = r.valid_over_all;
  j["valid_over_tests_pct"] = r.valid_over_tests;
  j["lane_change_scenarios"] = r.lane_change_scenarios;
  j["lane_change_ratio_pct"] = r.lane_change_ratio;
  j["mean_d_cut_in"] = optional_json(r.mean_d_cut_in);
  j["mean_t_interval"] = optional_json(r.mean_t_interval);
  j["mean_episode_reward"] = r.mean_episode_reward;
  j["mean_criticality"] = r.mean_criticality;
  j["hist_d_cut_in"] = bins_json(r.hist_d_cut_in);
  j["hist_t_interval"] = bins_json(r.hist_t_interval);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : r.collisions) {
    cols.push_back({{"episode_id", c.episode_id},
                    {"t_collision", c.t_collision},
                    {"striker_id", c.striker_id},
                    {"struck_id", c.struck_id},
                    {"striker_role", to_string(c.striker_role)},
                    {"struck_role", to_string(c.struck_role)},
                    {"type4", to_string(c.type4)},
                    {"valid", c.valid},
                    {"striker_mid_lane_change", c.striker_mid_lane_change}});
  }
  j["collisions"] = std::move(cols);
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& c : r.cut_ins) {
    cuts.push_back({{"episode_id", c.episode_id},
                    {"npc_id", c.npc_id},
                    {"t_cut_in", c.t_cut_in},
                    {"d_cut_in", c.d_cut_in},
                    {"t_collision", c.t_collision},
                    {"t_interval", c.t_interval}});
  }
  j["cut_ins"] = std::move(cuts);
  return j;
}

SummaryReport report_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("unsupported report schema_version");
  SummaryReport r;
  r.method = j.at("method").get<std::string>();
  r.tests = j.at("tests").get<int>();
  r.non_ego_collisions = j.value("non_ego_collisions", 0);
  r.mean_episode_reward = j.value("mean_episode_reward", 0.0);
  r.mean_criticality = j.value("mean_criticality", 0.0);
  for (const auto& c : j.at("collisions")) {
    CollisionRecord rec;
    rec.episode_id = c.at("episode_id").get<int>();
    rec.t_collision = c.at("t_collision").get<double>();
    rec.striker_id = c.at("striker_id").get<VehicleId>();
    rec.struck_id = c.at("struck_id").get<VehicleId>();
    rec.striker_role = role_from_string(c.at("striker_role").get<std::string>());
    rec.struck_role = role_from_string(c.at("struck_role").get<std::string>());
    rec.type4 = collision_type_from_string(c.at("type4").get<std::string>());
    rec.valid = c.at("valid").get<bool>();
    rec.striker_mid_lane_change = c.at("striker_mid_lane_change").get<bool>();
    r.collisions.push_back(rec);
  }
  for (const auto& c : j.at("cut_ins")) {
    AuthenticityRecord rec;
    rec.episode_id = c.at("episode_id").get<int>();
    rec.npc_id = c.at("npc_id").get<VehicleId>();
    rec.t_cut_in = c.at("t_cut_in").get<double>();
    rec.d_cut_in = c.at("d_cut_in").get<double>();
    rec.t_collision = c.at("t_collision").get<double>();
    rec.t_interval = c.at("t_interval").get<double>();
    r.cut_ins.push_back(rec);
  }
  finalize(r);
  // Stored means are authoritative only when records are absent; recomputed otherwise.
  if (r.cut_ins.empty()) {
    r.mean_d_cut_in = optional_from(j.at("mean_d_cut_in"));
    r.mean_t_interval = optional_from(j.at("mean_t_interval"));
  }
  return r;
}

PolicyFactory greedy_policy(const Checkpoint& checkpoint) {
  auto shared = std::make_shared<const Checkpoint>(checkpoint);
  return [shared](int) -> AttackerPolicy {
    return [shared, rng = Rng(0)](const MdpState& s, const WorldState&, VehicleId) mutable {
      return act(s, 0.0, shared->network, rng, shared->scales);
    };
  };
}

PolicyFactory random_policy(std::uint64_t base_seed) {
  return [base_seed](int episode) -> AttackerPolicy {
    return [rng = Rng(splitmix64(base_seed ^ (0x52414E44ULL + static_cast<std::uint64_t>(episode))))](
               const MdpState&, const WorldState&, VehicleId) mutable {
      return static_cast<Action>(rng.index(kActionCount));
    };
  };
}

PolicyFactory scripted_policy(const ScenarioConfig& scenario) {
  return [scenario](int) -> AttackerPolicy {
    return [scenario](const MdpState&, const WorldState& world, VehicleId id) {
      return background_policy(*world.find(id), world, scenario);
    };
  };
}

EpisodeLog run_episode(const AttackerPolicy& policy, const ExperimentConfig& config,
                       std::uint64_t seed, int episode_id, const std::string& method) {
  AttackEnvironment env(config, true, true);
  env.reset(seed, episode_id, method);
  while (!env.done()) {
    Action a = Action::keep_speed;
    if (const auto attacker = env.attacker()) a = policy(env.observe(), env.world(), *attacker);
    env.step(a);
  }
  return env.take_log();
}

BatchResult run_batch(const PolicyFactory& policy, const ExperimentConfig& config,
                      const BatchOptions& options) {
  const int n = std::max(0, options.n_scenarios);
  BatchResult result;
  result.outcomes.resize(static_cast<std::size_t>(n));
  if (options.keep_logs) result.logs.resize(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      const auto idx = static_cast<std::size_t>(i);
      EpisodeLog log = run_episode(policy(i), config, options.base_seed + static_cast<std::uint64_t>(i), i,
                                   options.method);
      result.outcomes[idx] = summarize_episode(log);
      if (options.keep_logs) result.logs[idx] = std::move(log);
    }
  };
  const int jobs = std::clamp(options.jobs, 1, std::max(1, n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  result.report = build_report(options.method, result.outcomes);
  return result;
}

double improvement_pct(double value, double baseline) { return 100.0 * (value - baseline) / baseline; }

std::vector<ComparisonRow> compare_methods(const std::map<std::string, SummaryReport>& reports) {
  const auto base_it = reports.find("ttc");
  if (base_it == reports.end()) throw MissingBaseline("comparison needs a report for the ttc baseline");
  const SummaryReport& base = base_it->second;
  std::vector<ComparisonRow> rows;
  for (const auto& [method, rep] : reports) {
    ComparisonRow row;
    row.method = method;
    row.d_cut_in = rep.mean_d_cut_in;
    row.t_interval = rep.mean_t_interval;
    if (method != "ttc") {
      if (rep.mean_d_cut_in && base.mean_d_cut_in && *base.mean_d_cut_in != 0.0)
        row.d_improvement_pct = improvement_pct(*rep.mean_d_cut_in, *base.mean_d_cut_in);
      if (rep.mean_t_interval && base.mean_t_interval && *base.mean_t_interval != 0.0)
        row.t_improvement_pct = improvement_pct(*rep.mean_t_interval, *base.mean_t_interval);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace authsim
