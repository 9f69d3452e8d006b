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

#include "authsim/cli.hpp"

#include "authsim/config.hpp"
#include "authsim/log_io.hpp"
#include "authsim/scenario_lab.hpp"
#include "authsim/text.hpp"
#include "authsim/training.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace authsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Divergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> logger() {
  static const auto instance = [] {
    auto l = spdlog::stderr_logger_mt("authsim");
    l->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::info;
    if (const char* env = std::getenv("AUTHSIM_LOG_LEVEL")) {
      const std::string name(env);
      if (name == "error" || name == "warn" || name == "info" || name == "debug") {
        level = spdlog::level::from_str(name == "warn" ? "warning" : name);
      }
    }
    l->set_level(level);
    return l;
  }();
  return instance;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "n/a"; }

struct Manifest {
  std::string command;
  std::string config_digest;
  std::uint64_t base_seed = 0;
  std::vector<std::string> artifacts;
  double wall_clock_s = 0.0;
};

void write_manifest(const Manifest& m, const fs::path& dir) {
  const json j = {{"schema_version", 1},
                  {"command", m.command},
                  {"config_digest", m.config_digest},
                  {"base_seed", m.base_seed},
                  {"artifacts", m.artifacts},
                  {"tool_version", AUTHSIM_VERSION},
                  {"wall_clock_s", m.wall_clock_s}};
  write_text_atomic((dir / "manifest.json").string(), j.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig config_from(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

const std::vector<std::string> kRewardKinds{"region", "ttc", "ttb", "drac"};

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string reward;
  std::optional<int> episodes;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = config_from(a.config);
  if (!a.reward.empty()) config.criticality.reward_kind = *reward_kind_from_string(a.reward);
  if (a.episodes) config.train.episodes = *a.episodes;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  const int every = std::max(1, config.train.episodes / 20);
  const TrainingResult result = run_training(config, a.seed, [&](const CurveRow& row) {
    if ((row.episode + 1) % every == 0) {
      logger()->info("episode {}/{} eps={:.3f} reward={:.3f} J={:.3f}", row.episode + 1,
                     config.train.episodes, row.epsilon, row.sum_reward, row.criticality);
    }
  });

  save_checkpoint(result.checkpoint, (dir / "model.json").string());
  std::string curve = "episode,epsilon,steps,sum_reward,J,collided,collision_type\n";
  std::string loss = "episode,mean_td_loss\n";
  for (const auto& row : result.curve) {
    curve += std::to_string(row.episode) + "," + format_number(row.epsilon) + "," +
             std::to_string(row.steps) + "," + format_number(row.sum_reward) + "," +
             format_number(row.criticality) + "," + (row.collided ? "1" : "0") + "," +
             row.collision_type + "\n";
    loss += std::to_string(row.episode) + "," + opt_number(row.mean_loss) + "\n";
  }
  write_text_atomic((dir / "training_curve.csv").string(), curve);
  write_text_atomic((dir / "loss.csv").string(), loss);
  write_text_atomic((dir / "config.cfg").string(), serialize_config(config));

  write_manifest({"train", config_digest(config), a.seed,
                  {"model.json", "training_curve.csv", "loss.csv", "config.cfg"},
                  seconds_since(start)},
                 dir);
  out << "trained " << config.train.episodes << " episodes (" << result.updates
      << " updates) -> " << dir.string() << "\n";
  return kSuccess;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::string model;
  std::string policy;
  int scenarios = 200;
  std::uint64_t seed = 0;
  std::string out;
  std::string method;
  int jobs = 0;
  bool no_logs = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = config_from(a.config);
  PolicyFactory factory;
  std::string method = a.method;
  if (!a.model.empty()) {
    if (!fs::exists(a.model)) throw UsageError("checkpoint not found: " + a.model);
    Checkpoint ckpt = load_checkpoint(a.model);
    config.criticality.reward_kind = ckpt.reward_kind;
    config.train.scales = ckpt.scales;
    if (method.empty()) method = std::string(to_string(ckpt.reward_kind));
    factory = greedy_policy(ckpt);
  } else if (a.policy == "scripted-baseline") {
    factory = scripted_policy(config.scenario);
  } else if (a.policy == "random") {
    factory = random_policy(a.seed);
  } else {
    throw UsageError("generate needs --model or --policy");
  }
  if (method.empty()) method = a.policy;

  BatchOptions options;
  options.n_scenarios = a.scenarios;
  options.base_seed = a.seed;
  options.method = method;
  options.jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  options.keep_logs = !a.no_logs;
  const BatchResult batch = run_batch(factory, config, options);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::vector<std::string> artifacts{"summary.json"};
  if (options.keep_logs) {
    fs::create_directories(dir / "logs");
    for (const auto& log : batch.logs) {
      char name[32];
      std::snprintf(name, sizeof name, "episode_%05d.jsonl", log.episode_id);
      write_episode_log(log, (dir / "logs" / name).string());
    }
    artifacts.emplace_back("logs/");
  }
  write_text_atomic((dir / "summary.json").string(), to_json(batch.report).dump(2) + "\n");
  write_manifest({"generate", config_digest(config), a.seed, artifacts, seconds_since(start)}, dir);

  const SummaryReport& r = batch.report;
  out << method << ": tests=" << r.tests << " collisions=" << r.all_collisions
      << " valid=" << r.valid_collisions << " valid/all=" << format_number(r.valid_over_all)
      << "% cut-ins=" << r.lane_change_scenarios << "\n";
  return kSuccess;
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string csv = "bin_left,bin_right,count\n";
  for (const auto& b : bins) {
    csv += format_number(b.left) + "," + (std::isinf(b.right) ? std::string("inf") : format_number(b.right)) +
           "," + std::to_string(b.count) + "\n";
  }
  return csv;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, std::vector<SummaryReport>> by_method;
  for (const auto& input : a.inputs) {
    const fs::path path = fs::is_directory(input) ? fs::path(input) / "summary.json" : fs::path(input);
    if (!fs::exists(path)) throw UsageError("no summary report at " + path.string());
    SummaryReport rep = report_from_json(json::parse(read_text(path.string())));
    by_method[rep.method].push_back(std::move(rep));
  }
  std::map<std::string, SummaryReport> merged;
  for (const auto& [method, reps] : by_method) merged[method] = merge_reports(method, reps);
  std::vector<ComparisonRow> rows;
  try {
    rows = compare_methods(merged);
  } catch (const MissingBaseline& e) {
    throw UsageError(e.what());
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::string csv = "method,d_cut_in_m,d_improvement_pct,t_interval_s,t_improvement_pct\n";
  for (const auto& row : rows) {
    csv += row.method + "," + opt_number(row.d_cut_in) + "," + opt_number(row.d_improvement_pct) + "," +
           opt_number(row.t_interval) + "," + opt_number(row.t_improvement_pct) + "\n";
  }
  std::vector<std::string> artifacts{"comparison.csv"};
  write_text_atomic((dir / "comparison.csv").string(), csv);
  for (const auto& [method, rep] : merged) {
    write_text_atomic((dir / ("hist_d_cut_in_" + method + ".csv")).string(), histogram_csv(rep.hist_d_cut_in));
    write_text_atomic((dir / ("hist_t_interval_" + method + ".csv")).string(),
                      histogram_csv(rep.hist_t_interval));
    artifacts.push_back("hist_d_cut_in_" + method + ".csv");
    artifacts.push_back("hist_t_interval_" + method + ".csv");
  }
  write_manifest({"report", "", 0, artifacts, seconds_since(start)}, dir);
  out << csv;
  return kSuccess;
}

// --- replay -----------------------------------------------------------------

struct ReplayArgs {
  std::string log;
  std::optional<int> step;
  bool print_regions = false;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  if (!fs::exists(a.log)) throw UsageError("episode log not found: " + a.log);
  EpisodeLog log;
  try {
    log = read_episode_log(a.log);
  } catch (const std::exception& e) {
    throw Divergence(std::string("unreadable episode log: ") + e.what());
  }
  const ReplayResult result = replay_log(log);
  if (!result.identical) {
    throw Divergence("replay diverges at step " + std::to_string(result.divergent_step.value_or(0)) + ": " +
                     result.message);
  }

  auto print_step = [&](const StepRecord& s) {
    out << "step " << s.world.step_index << " t=" << format_number(s.world.t) << " attacker="
        << (s.attacker ? std::to_string(*s.attacker) : std::string("none"))
        << " reward=" << format_number(s.reward) << " contacts=" << s.events.size() << "\n";
    if (a.print_regions) {
      if (s.regions) {
        out << "  d_x_danger=" << format_number(s.regions->d_x_danger)
            << " d_x_boundary=" << format_number(s.regions->d_x_boundary)
            << " d_x_safety=" << format_number(s.regions->d_x_safety) << "\n";
      } else {
        out << "  no attacker regions\n";
      }
    }
  };
  if (a.step) {
    if (*a.step < 0 || static_cast<std::size_t>(*a.step) >= log.steps.size()) {
      throw UsageError("--step out of range (log has " + std::to_string(log.steps.size()) + " steps)");
    }
    print_step(log.steps[static_cast<std::size_t>(*a.step)]);
  } else {
    for (const auto& s : log.steps) print_step(s);
  }
  const EpisodeOutcome outcome = summarize_episode(log);
  out << "termination=" << to_string(log.termination);
  if (outcome.collision) out << " collision=" << to_string(outcome.collision->type4);
  out << "\nreplay identical over " << log.steps.size() << " steps\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safety-critical scenario generation with a region-reward attacker", "authsim"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train an attacker policy");
  train_cmd->add_option("--config", train.config, "Config file (key = value)")->check(CLI::ExistingFile);
  train_cmd->add_option("--reward", train.reward, "Reward kind")
      ->check(CLI::IsMember(kRewardKinds));
  train_cmd->add_option("--episodes", train.episodes, "Training episodes")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", train.seed, "Base seed");
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate scenarios with a trained or scripted attacker");
  gen_cmd->add_option("--config", gen.config, "Config file (key = value)")->check(CLI::ExistingFile);
  auto* model_opt = gen_cmd->add_option("--model", gen.model, "Checkpoint written by train");
  auto* policy_opt = gen_cmd->add_option("--policy", gen.policy, "Built-in attacker policy")
                         ->check(CLI::IsMember({"scripted-baseline", "random"}));
  model_opt->excludes(policy_opt);
  gen_cmd->add_option("--scenarios", gen.scenarios, "Number of episodes")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "Base seed");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--method", gen.method, "Method tag in the report");
  gen_cmd->add_option("--jobs", gen.jobs, "Parallel episode workers (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_flag("--no-logs", gen.no_logs, "Skip per-episode logs");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Compare summary reports against the ttc baseline");
  report_cmd->add_option("--input", report.inputs, "Generate output directories or summary files")
      ->required();
  report_cmd->add_option("--out", report.out, "Output directory")->required();

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-simulate an episode log and verify it");
  replay_cmd->add_option("--log", replay.log, "Episode log (.jsonl)")->required();
  replay_cmd->add_option("--step", replay.step, "Print only this step");
  replay_cmd->add_flag("--print-regions", replay.print_regions, "Print attacker region distances");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*gen_cmd) return cmd_generate(gen, out);
    if (*report_cmd) return cmd_report(report, out);
    if (*replay_cmd) return cmd_replay(replay, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Divergence& e) {
    err << "replay: " << e.what() << "\n";
    return kReplayDivergence;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace authsim::cli
