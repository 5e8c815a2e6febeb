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
#include "sdfl/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace sdfl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void type_error(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) type_error(key, value, "an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) type_error(key, value, "a real number");
  return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  type_error(key, value, "a boolean");
}

std::string format_real(double v) { return fmt::format("{}", v); }

struct KeySpec {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T, typename Access>
KeySpec integer_key(Access access) {
  return {[access](ExperimentConfig& c, const std::string& k, const std::string& v) {
            access(c) = parse_integer<T>(k, v);
          },
          [access](const ExperimentConfig& c) {
            ExperimentConfig copy = c;
            return std::to_string(access(copy));
          }};
}

template <typename Access>
KeySpec real_key(Access access) {
  return {[access](ExperimentConfig& c, const std::string& k, const std::string& v) { access(c) = parse_real(k, v); },
          [access](const ExperimentConfig& c) {
            ExperimentConfig copy = c;
            return format_real(access(copy));
          }};
}

template <typename Access>
KeySpec flag_key(Access access) {
  return {[access](ExperimentConfig& c, const std::string& k, const std::string& v) { access(c) = parse_flag(k, v); },
          [access](const ExperimentConfig& c) {
            ExperimentConfig copy = c;
            return std::string(access(copy) ? "true" : "false");
          }};
}

template <typename Access>
KeySpec text_key(Access access) {
  return {[access](ExperimentConfig& c, const std::string&, const std::string& v) { access(c) = v; },
          [access](const ExperimentConfig& c) {
            ExperimentConfig copy = c;
            return access(copy);
          }};
}

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    t["algorithm"] = text_key([](ExperimentConfig& c) -> std::string& { return c.algorithm; });
    t["seed"] = integer_key<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.seed; });

    t["problem.kind"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "linear_regression" || v == "linreg") {
                             c.problem.kind = ObjectiveKind::kLinearRegression;
                           } else if (v == "logistic_regression" || v == "logreg") {
                             c.problem.kind = ObjectiveKind::kLogisticRegression;
                           } else {
                             type_error(k, v, "linear_regression or logistic_regression");
                           }
                         },
                         [](const ExperimentConfig& c) { return std::string(to_string(c.problem.kind)); }};
    t["problem.n"] = integer_key<Index>([](ExperimentConfig& c) -> Index& { return c.problem.n; });
    t["problem.s"] = integer_key<Index>([](ExperimentConfig& c) -> Index& { return c.problem.s; });
    t["problem.m"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.problem.m; });
    t["problem.samples_min"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.problem.samples_min; });
    t["problem.samples_max"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.problem.samples_max; });
    t["problem.noise_scale"] = real_key([](ExperimentConfig& c) -> double& { return c.problem.noise_scale; });
    t["problem.lambda"] = real_key([](ExperimentConfig& c) -> double& { return c.problem.lambda; });
    t["problem.data"] = text_key([](ExperimentConfig& c) -> std::string& { return c.problem.data_path; });
    t["problem.snapshot"] = text_key([](ExperimentConfig& c) -> std::string& { return c.problem.snapshot_path; });

    t["topology.edge_prob"] = real_key([](ExperimentConfig& c) -> double& { return c.topology.edge_prob; });
    t["topology.rate"] = real_key([](ExperimentConfig& c) -> double& { return c.topology.rate; });
    t["topology.min_participants"] =
        integer_key<int>([](ExperimentConfig& c) -> int& { return c.topology.min_participants; });
    t["topology.straggler_rate"] = real_key([](ExperimentConfig& c) -> double& { return c.topology.straggler_rate; });
    t["topology.edge_list"] = text_key([](ExperimentConfig& c) -> std::string& { return c.topology.edge_list_path; });

    t["ceps.mu"] = real_key([](ExperimentConfig& c) -> double& { return c.ceps.mu; });
    t["ceps.gamma"] = real_key([](ExperimentConfig& c) -> double& { return c.ceps.gamma; });
    t["ceps.kappa_min"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.ceps.kappa_min; });
    t["ceps.kappa_max"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.ceps.kappa_max; });
    t["ceps.c_knob"] = real_key([](ExperimentConfig& c) -> double& { return c.ceps.c_knob; });

    t["codec.d"] = integer_key<Index>([](ExperimentConfig& c) -> Index& { return c.codec.d; });
    t["codec.density"] = real_key([](ExperimentConfig& c) -> double& { return c.codec.density; });
    t["codec.perfect"] = flag_key([](ExperimentConfig& c) -> bool& { return c.codec.perfect; });
    t["codec.max_iterations"] =
        integer_key<int>([](ExperimentConfig& c) -> int& { return c.codec.decoder.max_iterations; });
    t["codec.step_scale"] = real_key([](ExperimentConfig& c) -> double& { return c.codec.decoder.step_scale; });
    t["codec.stall_iterations"] =
        integer_key<int>([](ExperimentConfig& c) -> int& { return c.codec.decoder.stall_iterations; });

    t["privacy.enabled"] = flag_key([](ExperimentConfig& c) -> bool& { return c.privacy.params.enabled; });
    t["privacy.epsilon"] = real_key([](ExperimentConfig& c) -> double& { return c.privacy.params.epsilon; });
    t["privacy.delta"] = real_key([](ExperimentConfig& c) -> double& { return c.privacy.params.delta; });
    t["privacy.sensitivity"] = real_key([](ExperimentConfig& c) -> double& { return c.privacy.params.sensitivity; });
    t["privacy.clip"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "off") {
                             c.privacy.clip = ClipMode::kOff;
                           } else if (v == "report") {
                             c.privacy.clip = ClipMode::kReport;
                           } else if (v == "clip") {
                             c.privacy.clip = ClipMode::kClip;
                           } else {
                             type_error(k, v, "off, report or clip");
                           }
                         },
                         [](const ExperimentConfig& c) { return std::string(to_string(c.privacy.clip)); }};

    t["termination.tol"] = real_key([](ExperimentConfig& c) -> double& { return c.termination.tol; });
    t["termination.max_ticks"] =
        integer_key<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.termination.max_ticks; });
    t["termination.min_sweeps"] =
        integer_key<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.termination.min_sweeps; });

    t["baseline.step"] = real_key([](ExperimentConfig& c) -> double& { return c.baseline.step; });
    t["baseline.momentum"] = real_key([](ExperimentConfig& c) -> double& { return c.baseline.momentum; });
    t["baseline.local_steps"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.baseline.local_steps; });
    t["baseline.dynamic_edge_keep"] =
        real_key([](ExperimentConfig& c) -> double& { return c.baseline.dynamic_edge_keep; });

    t["diagnostics.window"] = integer_key<int>([](ExperimentConfig& c) -> int& { return c.diagnostics_window; });
    return t;
  }();
  return table;
}

bool is_path_key(const std::string& key) {
  return key == "problem.data" || key == "problem.snapshot" || key == "topology.edge_list";
}

}  // namespace

const char* to_string(ClipMode mode) {
  switch (mode) {
    case ClipMode::kOff: return "off";
    case ClipMode::kReport: return "report";
    case ClipMode::kClip: return "clip";
  }
  return "unknown";
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key: " + key);
  it->second.set(cfg, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : key_table()) keys.push_back(k);
  return keys;
}

ParsedConfig parse_config_text(std::string_view text, const std::string& base_dir) {
  ParsedConfig out;
  std::map<std::string, std::string> values;
  std::vector<std::string> order;
  std::set<std::string> sections;
  std::vector<std::string> unknown;
  std::string section;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header", line_no));
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(fmt::format("line {}: empty section name", line_no));
      sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!key_table().contains(full)) {
      unknown.push_back(full);
      continue;
    }
    if (values.contains(full)) {
      out.warnings.push_back(fmt::format("line {}: duplicate key '{}', last value wins", line_no, full));
    } else {
      order.push_back(full);
    }
    values[full] = value;
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  if (!sections.contains("problem")) throw ConfigError("missing required section [problem]");
  if (!values.contains("problem.m")) throw ConfigError("missing required key problem.m");
  if (!values.contains("problem.n") && !values.contains("problem.data") && !values.contains("problem.snapshot"))
    throw ConfigError("missing required key: problem.n or problem.data");

  for (const auto& key : order) {
    std::string value = values[key];
    if (is_path_key(key) && !value.empty() && !base_dir.empty()) {
      std::filesystem::path p(value);
      if (p.is_relative()) value = (std::filesystem::path(base_dir) / p).lexically_normal().string();
    }
    set_config_value(out.config, key, value);
  }

  try {
    out.config.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return out;
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(buf.str(), dir);
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [key, spec] : key_table()) out += key + " = " + spec.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace sdfl
