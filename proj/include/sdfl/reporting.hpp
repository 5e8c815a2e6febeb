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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdfl/config.hpp"
#include "sdfl/simulator.hpp"

namespace sdfl {

inline constexpr const char* kArtifactVersion = "sdfl-0.1.0";

struct RunManifest {
  std::string config_path;
  ExperimentConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string version = kArtifactVersion;
  std::vector<std::string> algorithms;  // empty -> config.algorithm
  bool allow_divergence = false;
};

RunManifest make_manifest(const std::string& config_path, const ExperimentConfig& cfg, const std::string& out_dir);

/// Trace CSV: algorithm, tick, comm_round, rounds_a, objective, ... (no wall time).
void write_trace_csv(const MetricsTrace& trace, std::ostream& os);
/// tick, wall_ms.
void write_timing_csv(const MetricsTrace& trace, std::ostream& os);
std::string summary_json(const MetricsTrace& trace, const DiagnosticsReport& diag, const RunManifest& manifest);
std::string manifest_json(const RunManifest& manifest);

/// File-name stem for a trace, e.g. "dp-1bcs".
std::string trace_stem(const MetricsTrace& trace);

struct RunOutcome {
  std::vector<MetricsTrace> traces;
  std::vector<std::string> errors;
  int exit_code = 0;
};

/// Runs every configured algorithm and writes traces, summaries and the manifest.
RunOutcome run_experiment(const RunManifest& manifest);

enum class SweepAxis { kM, kEpsilon, kRate };
SweepAxis parse_sweep_axis(const std::string& name);
const char* to_string(SweepAxis axis);
/// Copy of `cfg` with the axis set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepAxis axis, double value);

struct SweepCell {
  double value = 0.0;
  std::string algorithm;
  std::string status;  // converged | diverged | max_ticks | error
  std::string error;
  double objective = 0.0;
  std::uint64_t ticks = 0;
  std::uint64_t comm_rounds = 0;
  std::uint64_t rounds_a = 0;
  std::uint64_t dtv_bits = 0;
  double time_ms = 0.0;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::kM;
  std::vector<SweepCell> cells;
};

/// Runs each (value, algorithm) cell; a failing cell is recorded and the sweep continues.
/// With a non-empty manifest.out_dir, cell traces and the aggregate table are written there.
SweepTable sweep(const RunManifest& manifest, SweepAxis axis, const std::vector<double>& values);

/// Objective, Iterations, Rounds, DTV (bytes), status. No timing column.
void write_sweep_csv(const SweepTable& table, std::ostream& os);
void write_sweep_timing_csv(const SweepTable& table, std::ostream& os);

/// Long-format rows: algorithm,x_metric,x,y_metric,y.
void write_objective_vs_round(const std::vector<MetricsTrace>& traces, std::ostream& os);
void write_sweep_metric(const SweepTable& table, const std::string& y_metric, std::ostream& os);

/// objective_vs_round.csv, and for sweeps cr_vs_<axis>.csv, dtv_vs_<axis>.csv, time_vs_<axis>.csv.
void export_plot_data(const std::vector<MetricsTrace>& traces, const SweepTable* table, const std::string& dir);

}  // namespace sdfl
