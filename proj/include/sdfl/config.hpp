// Copyright 2026 The SDFL Authors. All Rights Reserved.
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
// =============================================================================
#pragma once

// Line-oriented experiment configuration:
//
//   # comment
//   algorithm = ceps
//   seed = 7
//   [problem]
//   m = 32
//   n = 1000
//
// Keys before the first section header belong to the run itself. Unknown keys
// are rejected; a repeated key keeps its last value and produces a warning.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdfl/simulator.hpp"

namespace sdfl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

/// `base_dir` resolves relative data/snapshot/edge-list paths.
ParsedConfig parse_config_text(std::string_view text, const std::string& base_dir = "");
ParsedConfig parse_config(const std::string& path);

/// Every key as "section.key = value", sorted; the run keys have no section.
std::string canonical_config(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of canonical_config().
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

/// Sets one key ("problem.m", "seed", ...) from text. Throws ConfigError.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

const char* to_string(ClipMode mode);

}  // namespace sdfl
