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

#include "authsim/log_io.hpp"
#include "authsim/scenario_lab.hpp"

#include <doctest.h>

#include <filesystem>

using namespace authsim;

namespace {

EpisodeLog generated_log(std::uint64_t seed) {
  ExperimentConfig config;
  config.scenario.episode_max_steps = 80;
  const auto factory = random_policy(9);
  return run_episode(factory(0), config, seed, 0, "random");
}

}  // namespace

TEST_CASE("episode logs round-trip through JSONL") {
  const EpisodeLog log = generated_log(21);
  const std::string text = to_jsonl(log);
  const EpisodeLog back = parse_jsonl(text);
  CHECK(to_jsonl(back) == text);
  REQUIRE(back.steps.size() == log.steps.size());
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    CHECK(back.steps[k].world == log.steps[k].world);
    CHECK(back.steps[k].reward == log.steps[k].reward);
    CHECK(back.steps[k].actions == log.steps[k].actions);
  }
  CHECK(back.termination == log.termination);
  CHECK(back.seed == 21);
}

TEST_CASE("replay reproduces a fresh log and flags tampering") {
  const EpisodeLog log = generated_log(33);
  CHECK(replay_log(log).identical);

  EpisodeLog moved = log;
  moved.steps[5].world.vehicles[1].x += 1e-9;
  const ReplayResult r = replay_log(moved);
  CHECK_FALSE(r.identical);
  REQUIRE(r.divergent_step.has_value());
  CHECK(*r.divergent_step == 5);

  EpisodeLog reward = log;
  reward.steps.back().reward += 0.5;
  CHECK_FALSE(replay_log(reward).identical);

  EpisodeLog rng = log;
  rng.steps[3].world.rng_state ^= 1;
  CHECK_FALSE(replay_log(rng).identical);
}

TEST_CASE("malformed logs are rejected") {
  const std::string text = to_jsonl(generated_log(2));
  CHECK_THROWS_AS(parse_jsonl(""), LogFormatError);
  CHECK_THROWS_AS(parse_jsonl("{not json}\n"), LogFormatError);
  // Dropping the last step breaks the declared step count.
  const std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  CHECK_THROWS_AS(parse_jsonl(truncated), LogFormatError);
}

TEST_CASE("atomic writes create directories and replace content") {
  const auto dir = std::filesystem::temp_directory_path() / "authsim_log_io_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "nested" / "file.txt").string();
  write_text_atomic(path, "first");
  write_text_atomic(path, "second");
  CHECK(read_text(path) == "second");
  const EpisodeLog log = generated_log(4);
  write_episode_log(log, (dir / "ep.jsonl").string());
  CHECK(to_jsonl(read_episode_log((dir / "ep.jsonl").string())) == to_jsonl(log));
  std::filesystem::remove_all(dir);
}
