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
#include "authsim/sim.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace authsim {

class NonEgoCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingBaseline : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CollisionType { rl_to_ego, ndd_to_ego, ego_to_rl, ego_to_ndd };

std::string_view to_string(CollisionType type);
CollisionType collision_type_from_string(std::string_view text);

struct CollisionRecord {
  int episode_id = 0;
  double t_collision = 0.0;
  VehicleId striker_id = 0;
  VehicleId struck_id = 0;
  Role striker_role = Role::background;
  Role struck_role = Role::background;
  CollisionType type4 = CollisionType::ndd_to_ego;
  bool valid = false;
  bool striker_mid_lane_change = false;
};

/// Striker attribution for an ego-involved contact, read off the world at the
/// moment of contact. Priority: lane-change fault, rear-end geometry, closing
/// speed, and finally the non-ego party.
CollisionRecord classify_collision(const ContactEvent& contact, const WorldState& world,
                                   double lane_change_duration, int episode_id = 0);

/// The contact that involves the ego (largest overlap if several).
std::optional<ContactEvent> ego_contact(const std::vector<ContactEvent>& contacts, VehicleId ego);

struct AuthenticityRecord {
  int episode_id = 0;
  VehicleId npc_id = 0;
  double t_cut_in = 0.0;
  double d_cut_in = 0.0;
  double t_collision = 0.0;
  double t_interval = 0.0;
};

/// Cut-in of `npc_id` into the ego's lane preceding the first logged collision:
/// the last step at which the NPC body goes from outside the ego's lane to
/// overlapping it while the NPC rear bumper is ahead of the ego front bumper.
std::optional<AuthenticityRecord> detect_cut_in(const EpisodeLog& log, VehicleId npc_id);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;  // +inf for the overflow bin
  int count = 0;
};

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, double width, int bins);

struct EpisodeOutcome {
  int episode_id = 0;
  std::uint64_t seed = 0;
  Termination termination = Termination::running;
  int steps = 0;
  double sum_reward = 0.0;
  double criticality = 0.0;
  std::optional<CollisionRecord> collision;
  std::optional<AuthenticityRecord> cut_in;
};

EpisodeOutcome summarize_episode(const EpisodeLog& log);

struct SummaryReport {
  int schema_version = 1;
  std::string method;
  int tests = 0;
  int rl_to_ego = 0;
  int ndd_to_ego = 0;
  int ego_to_rl = 0;
  int ego_to_ndd = 0;
  int invalid_collisions = 0;
  int valid_collisions = 0;
  int all_collisions = 0;
  int non_ego_collisions = 0;
  double valid_over_all = 0.0;    // percent
  double valid_over_tests = 0.0;  // percent
  int lane_change_scenarios = 0;
  double lane_change_ratio = 0.0;  // percent of valid collisions
  std::optional<double> mean_d_cut_in;
  std::optional<double> mean_t_interval;
  double mean_episode_reward = 0.0;
  double mean_criticality = 0.0;
  std::vector<HistogramBin> hist_d_cut_in;
  std::vector<HistogramBin> hist_t_interval;
  std::vector<CollisionRecord> collisions;
  std::vector<AuthenticityRecord> cut_ins;
};

inline constexpr double kCutInBinWidth = 2.0;  // m
inline constexpr int kCutInBins = 20;
inline constexpr double kIntervalBinWidth = 0.25;  // s
inline constexpr int kIntervalBins = 20;

SummaryReport build_report(const std::string& method, const std::vector<EpisodeOutcome>& outcomes);

/// Pools reports of one method (e.g. several training seeds).
SummaryReport merge_reports(const std::string& method, const std::vector<SummaryReport>& reports);

nlohmann::json to_json(const SummaryReport& report);
SummaryReport report_from_json(const nlohmann::json& j);

/// Attacker controller used during batch generation.
using AttackerPolicy = std::function<Action(const MdpState&, const WorldState&, VehicleId)>;
/// Builds an independent policy instance for each episode index.
using PolicyFactory = std::function<AttackerPolicy(int episode)>;

PolicyFactory greedy_policy(const Checkpoint& checkpoint);
PolicyFactory random_policy(std::uint64_t base_seed);
/// Attacker driven by the background surrogate (no learned attack).
PolicyFactory scripted_policy(const ScenarioConfig& scenario);

struct BatchOptions {
  int n_scenarios = 0;
  std::uint64_t base_seed = 0;
  std::string method;
  int jobs = 1;
  bool keep_logs = false;
};

struct BatchResult {
  SummaryReport report;
  std::vector<EpisodeOutcome> outcomes;
  std::vector<EpisodeLog> logs;  // filled when keep_logs
};

/// Runs seeded episodes (seed_i = base_seed + i) with the given attacker policy.
BatchResult run_batch(const PolicyFactory& policy, const ExperimentConfig& config,
                      const BatchOptions& options);

EpisodeLog run_episode(const AttackerPolicy& policy, const ExperimentConfig& config,
                       std::uint64_t seed, int episode_id, const std::string& method);

struct ComparisonRow {
  std::string method;
  std::optional<double> d_cut_in;
  std::optional<double> d_improvement_pct;
  std::optional<double> t_interval;
  std::optional<double> t_improvement_pct;
};

double improvement_pct(double value, double baseline);

/// Per-method means with the percentage change over the "ttc" baseline.
std::vector<ComparisonRow> compare_methods(const std::map<std::string, SummaryReport>& reports);

}  // namespace authsim
