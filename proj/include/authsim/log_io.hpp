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

#include "authsim/environment.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace authsim {

class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::string& path, std::string_view content);
std::string read_text(const std::string& path);

nlohmann::json step_to_json(const StepRecord& step);
StepRecord step_from_json(const nlohmann::json& j, const LaneGeometry& geometry);

/// One JSON object per line: a header (schema, ids, seed, config), then one
/// line per step. Doubles round-trip exactly; -inf is written as null.
std::string to_jsonl(const EpisodeLog& log);
EpisodeLog parse_jsonl(std::string_view text);

void write_episode_log(const EpisodeLog& log, const std::string& path);
EpisodeLog read_episode_log(const std::string& path);

struct ReplayResult {
  bool identical = true;
  std::optional<std::size_t> divergent_step;
  std::string message;
  EpisodeLog replayed;
};

/// Re-simulates from the logged seed and attacker actions and compares every
/// step record field by field.
ReplayResult replay_log(const EpisodeLog& log);

}  // namespace authsim
