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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace authsim {

/// Parse or validation failure; `key()` names the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat `key = value` text, `#` starts a comment. Keys not present keep their
/// defaults; unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

/// Every key in canonical order, one per line, values round-trip exactly.
std::string serialize_config(const ExperimentConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);
/// Digest of the canonical serialization, as 16 lowercase hex digits.
std::string config_digest(const ExperimentConfig& config);

}  // namespace authsim
