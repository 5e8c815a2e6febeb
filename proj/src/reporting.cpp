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
#include "sdfl/reporting.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"

namespace sdfl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string real(double v) { return fmt::format("{}", v); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  fn(os);
}

std::vector<std::string> algorithms_of(const RunManifest& manifest) {
  if (!manifest.algorithms.empty()) return manifest.algorithms;
  return {manifest.config.algorithm};
}

json config_echo(const ExperimentConfig& cfg) {
  json echo = json::object();
  const std::string text = canonical_config(cfg);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    const auto eq = line.find(" = ");
    echo[line.substr(0, eq)] = line.substr(eq + 3);
    pos = end + 1;
  }
  return echo;
}

}  // namespace

RunManifest make_manifest(const std::string& config_path, const ExperimentConfig& cfg, const std::string& out_dir) {
  RunManifest m;
  m.config_path = config_path;
  m.config = cfg;
  m.config_hash = hash_hex(config_hash(cfg));
  m.seed = cfg.seed;
  m.out_dir = out_dir;
  return m;
}

std::string trace_stem(const MetricsTrace& trace) {
  std::string stem;
  for (char c : trace.algorithm) {
    const auto uc = static_cast<unsigned char>(c);
    stem += std::isalnum(uc) ? static_cast<char>(std::tolower(uc)) : '-';
  }
  return stem;
}

void write_trace_csv(const MetricsTrace& trace, std::ostream& os) {
  os << "algorithm,tick,comm_round,rounds_a,objective,consensus_residual,dtv_bits_ideal,dtv_bits_framed,"
        "eps_total,delta_total_raw,delta_total_capped,decode_failures,clip_count,e_inf_proxy\n";
  for (const auto& r : trace.rows) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", trace.algorithm, r.tick, r.comm_round, r.rounds_a,
               real(r.objective), real(r.consensus_residual), r.dtv_bits_ideal, r.dtv_bits_framed, real(r.eps_total),
               real(r.delta_total_raw), real(r.delta_total_capped), r.decode_failures, r.clip_count,
               real(r.e_inf_proxy));
  }
}

void write_timing_csv(const MetricsTrace& trace, std::ostream& os) {
  os << "algorithm,tick,wall_ms\n";
  for (const auto& r : trace.rows) fmt::print(os, "{},{},{:.3f}\n", trace.algorithm, r.tick, r.wall_ms);
}

std::string summary_json(const MetricsTrace& trace, const DiagnosticsReport& diag, const RunManifest& manifest) {
  json j;
  j["algorithm"] = trace.algorithm;
  j["status"] = to_string(trace.status);
  j["tolerance"] = trace.tolerance;
  if (!trace.rows.empty()) {
    const MetricsRow& r = trace.last();
    j["ticks"] = r.tick;
    j["comm_rounds"] = r.comm_round;
    j["rounds_a"] = r.rounds_a;
    j["objective"] = finite_or_null(r.objective);
    j["consensus_residual"] = finite_or_null(r.consensus_residual);
    j["dtv_bits_ideal"] = r.dtv_bits_ideal;
    j["dtv_bytes_ideal"] = r.dtv_bits_ideal / 8;
    j["dtv_bits_framed"] = r.dtv_bits_framed;
    j["eps_total"] = finite_or_null(r.eps_total);
    j["delta_total_raw"] = r.delta_total_raw;
    j["delta_total_capped"] = r.delta_total_capped;
    j["decode_failures"] = r.decode_failures;
    j["clip_count"] = r.clip_count;
  }
  j["sigma_power_iteration_warnings"] = trace.sigma_warnings;
  j["diagnostics"] = {
      {"grad_norm_sq_mean", finite_or_null(diag.grad_norm_sq_mean)},
      {"grad_norm_sq_first_quarter", finite_or_null(diag.grad_norm_sq_first_window)},
      {"grad_norm_sq_last_quarter", finite_or_null(diag.grad_norm_sq_last_window)},
      {"e_inf_proxy", finite_or_null(diag.e_inf_proxy)},
      {"zeta_sq", finite_or_null(diag.zeta_sq)},
      {"lipschitz", finite_or_null(diag.lipschitz)},
      {"tau", finite_or_null(diag.theory.tau)},
      {"log_one_minus_tau", finite_or_null(diag.theory.log_one_minus_tau)},
      {"log_c0", finite_or_null(diag.theory.log_c0)},
  };
  j["config_hash"] = manifest.config_hash;
  j["config"] = config_echo(manifest.config);
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& manifest) {
  json j;
  j["config_path"] = manifest.config_path;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["out_dir"] = manifest.out_dir;
  j["version"] = manifest.version;
  j["algorithms"] = algorithms_of(manifest);
  j["allow_divergence"] = manifest.allow_divergence;
  return j.dump(2) + "\n";
}

RunOutcome run_experiment(const RunManifest& manifest) {
  RunOutcome out;
  const fs::path dir(manifest.out_dir);
  if (!manifest.out_dir.empty()) {
    fs::create_directories(dir);
    write_file(dir / "manifest.json", manifest_json(manifest));
  }

  std::optional<ExperimentData> data;
  try {
    data.emplace(build_experiment_data(manifest.config));
  } catch (const std::exception& e) {
    out.errors.push_back(std::string("data: ") + e.what());
    out.exit_code = 2;
    return out;
  }

  for (const auto& tag : algorithms_of(manifest)) {
    ExperimentConfig cfg = manifest.config;
    cfg.algorithm = tag;
    try {
      MetricsTrace trace = run_algorithm(cfg, *data);
      if (!manifest.out_dir.empty()) {
        const DiagnosticsReport diag = diagnostics(trace, *data, cfg.diagnostics_window);
        const std::string stem = trace_stem(trace);
        write_stream(dir / ("trace_" + stem + ".csv"), [&](std::ostream& os) { write_trace_csv(trace, os); });
        write_stream(dir / ("timing_" + stem + ".csv"), [&](std::ostream& os) { write_timing_csv(trace, os); });
        write_file(dir / ("summary_" + stem + ".json"), summary_json(trace, diag, manifest));
      }
      if (trace.diverged() && !manifest.allow_divergence) out.exit_code = 1;
      out.traces.push_back(std::move(trace));
    } catch (const std::exception& e) {
      out.errors.push_back(tag + ": " + e.what());
      out.exit_code = 2;
    }
  }
  if (!manifest.out_dir.empty()) export_plot_data(out.traces, nullptr, manifest.out_dir);
  return out;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "m") return SweepAxis::kM;
  if (name == "epsilon" || name == "eps") return SweepAxis::kEpsilon;
  if (name == "r" || name == "rate") return SweepAxis::kRate;
  throw ConfigError("unknown sweep axis '" + name + "' (expected m, epsilon or r)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kM: return "m";
    case SweepAxis::kEpsilon: return "epsilon";
    case SweepAxis::kRate: return "r";
  }
  return "unknown";
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig out = cfg;
  switch (axis) {
    case SweepAxis::kM:
      if (value != std::floor(value) || value < 1) throw ConfigError("sweep m values must be positive integers");
      out.problem.m = static_cast<int>(value);
      break;
    case SweepAxis::kEpsilon:
      out.privacy.params.epsilon = value;
      break;
    case SweepAxis::kRate:
      out.topology.rate = value;
      break;
  }
  return out;
}

SweepTable sweep(const RunManifest& manifest, SweepAxis axis, const std::vector<double>& values) {
  SweepTable table;
  table.axis = axis;
  std::vector<MetricsTrace> plotted;
  const bool write = !manifest.out_dir.empty();
  const fs::path dir(manifest.out_dir);
  if (write) {
    fs::create_directories(dir);
    write_file(dir / "manifest.json", manifest_json(manifest));
  }

  // Only m changes the data; other axes reuse one build.
  std::optional<ExperimentData> shared;
  std::string shared_error;
  if (axis != SweepAxis::kM) {
    try {
      shared.emplace(build_experiment_data(manifest.config));
    } catch (const std::exception& e) {
      shared_error = e.what();
    }
  }

  for (double value : values) {
    std::optional<ExperimentData> own;
    std::string data_error = shared_error;
    ExperimentConfig cell_cfg;
    try {
      cell_cfg = apply_sweep_value(manifest.config, axis, value);
      cell_cfg.validate();
      if (axis == SweepAxis::kM) own.emplace(build_experiment_data(cell_cfg));
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    const ExperimentData* data = own ? &*own : (shared ? &*shared : nullptr);
    const std::string cell_name = fmt::format("{}_{}", to_string(axis), real(value));

    for (const auto& tag : algorithms_of(manifest)) {
      SweepCell cell;
      cell.value = value;
      cell.algorithm = tag;
      if (!data_error.empty() || data == nullptr) {
        cell.status = "error";
        cell.error = data_error;
        table.cells.push_back(cell);
        continue;
      }
      try {
        ExperimentConfig cfg = cell_cfg;
        cfg.algorithm = tag;
        const auto t0 = std::chrono::steady_clock::now();
        MetricsTrace trace = run_algorithm(cfg, *data);
        cell.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        cell.algorithm = trace.algorithm;
        cell.status = to_string(trace.status);
        if (!trace.rows.empty()) {
          const MetricsRow& r = trace.last();
          cell.objective = r.objective;
          cell.ticks = r.tick;
          cell.comm_rounds = r.comm_round;
          cell.rounds_a = r.rounds_a;
          cell.dtv_bits = r.dtv_bits_ideal;
        }
        if (write) {
          const fs::path cell_dir = dir / cell_name;
          fs::create_directories(cell_dir);
          const std::string stem = trace_stem(trace);
          write_stream(cell_dir / ("trace_" + stem + ".csv"), [&](std::ostream& os) { write_trace_csv(trace, os); });
          write_stream(cell_dir / ("timing_" + stem + ".csv"), [&](std::ostream& os) { write_timing_csv(trace, os); });
          RunManifest cell_manifest = manifest;
          cell_manifest.config = cfg;
          cell_manifest.config_hash = hash_hex(config_hash(cfg));
          write_file(cell_dir / ("summary_" + stem + ".json"),
                     summary_json(trace, diagnostics(trace, *data, cfg.diagnostics_window), cell_manifest));
        }
        trace.algorithm = fmt::format("{}@{}={}", trace.algorithm, to_string(axis), real(value));
        trace.final_models.clear();
        plotted.push_back(std::move(trace));
      } catch (const std::exception& e) {
        cell.status = "error";
        cell.error = e.what();
      }
      table.cells.push_back(cell);
    }
  }

  if (write) {
    write_stream(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(table, os); });
    write_stream(dir / "sweep_timing.csv", [&](std::ostream& os) { write_sweep_timing_csv(table, os); });
    export_plot_data(plotted, &table, manifest.out_dir);
  }
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& os) {
  fmt::print(os, "{},algorithm,objective,iterations,comm_rounds,rounds_a,dtv_bytes,status,error\n",
             to_string(table.axis));
  for (const auto& c : table.cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    fmt::print(os, "{},{},{},{},{},{},{},{},{}\n", real(c.value), c.algorithm, real(c.objective), c.ticks,
               c.comm_rounds, c.rounds_a, c.dtv_bits / 8, c.status, err);
  }
}

void write_sweep_timing_csv(const SweepTable& table, std::ostream& os) {
  fmt::print(os, "{},algorithm,time_ms\n", to_string(table.axis));
  for (const auto& c : table.cells) fmt::print(os, "{},{},{:.3f}\n", real(c.value), c.algorithm, c.time_ms);
}

void write_objective_vs_round(const std::vector<MetricsTrace>& traces, std::ostream& os) {
  os << "algorithm,x_metric,x,y_metric,y\n";
  for (const auto& t : traces)
    for (const auto& r : t.rows) fmt::print(os, "{},tick,{},objective,{}\n", t.algorithm, r.tick, real(r.objective));
}

void write_sweep_metric(const SweepTable& table, const std::string& y_metric, std::ostream& os) {
  os << "algorithm,x_metric,x,y_metric,y\n";
  for (const auto& c : table.cells) {
    if (c.status == "error") continue;
    std::string y;
    if (y_metric == "comm_rounds") {
      y = std::to_string(c.comm_rounds);
    } else if (y_metric == "iterations") {
      y = std::to_string(c.ticks);
    } else if (y_metric == "dtv_bytes") {
      y = std::to_string(c.dtv_bits / 8);
    } else if (y_metric == "time_ms") {
      y = fmt::format("{:.3f}", c.time_ms);
    } else if (y_metric == "objective") {
      y = real(c.objective);
    } else {
      throw std::invalid_argument("unknown sweep metric " + y_metric);
    }
    fmt::print(os, "{},{},{},{},{}\n", c.algorithm, to_string(table.axis), real(c.value), y_metric, y);
  }
}

void export_plot_data(const std::vector<MetricsTrace>& traces, const SweepTable* table, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  write_stream(root / "objective_vs_round.csv", [&](std::ostream& os) { write_objective_vs_round(traces, os); });
  if (table == nullptr) return;
  const std::string axis = to_string(table->axis);
  write_stream(root / ("cr_vs_" + axis + ".csv"), [&](std::ostream& os) { write_sweep_metric(*table, "comm_rounds", os); });
  write_stream(root / ("iterations_vs_" + axis + ".csv"),
               [&](std::ostream& os) { write_sweep_metric(*table, "iterations", os); });
  write_stream(root / ("dtv_vs_" + axis + ".csv"), [&](std::ostream& os) { write_sweep_metric(*table, "dtv_bytes", os); });
  write_stream(root / ("objective_vs_" + axis + ".csv"),
               [&](std::ostream& os) { write_sweep_metric(*table, "objective", os); });
  write_stream(root / ("time_vs_" + axis + ".csv"), [&](std::ostream& os) { write_sweep_metric(*table, "time_ms", os); });
}

}  // namespace sdfl
