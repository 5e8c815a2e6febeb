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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdfl/node_engine.hpp"
#include "sdfl/objectives.hpp"
#include "sdfl/onebit_codec.hpp"
#include "sdfl/privacy.hpp"
#include "sdfl/topology.hpp"

namespace sdfl {

struct ProblemConfig {
  ObjectiveKind kind = ObjectiveKind::kLinearRegression;
  Index n = 1000;
  Index s = 10;
  int m = 32;
  int samples_min = 250;
  int samples_max = 750;
  double noise_scale = 0.5;
  double lambda = 0.001;
  std::string data_path;      // LibSVM file (logistic); empty -> synthetic linear regression
  std::string snapshot_path;  // optional synthetic snapshot to load instead of generating
};

struct TopologyConfig {
  double edge_prob = 0.5;
  double rate = 0.2;            // participation rate r
  int min_participants = 2;     // lower bound on t_i, the node itself included
  double straggler_rate = 0.0;  // > 0: first-responder selection with Exp(rate) latencies
  std::string edge_list_path;   // optional fixed graph
};

struct CepsParams {
  double mu = 0.1;
  double gamma = 5.0;
  int kappa_min = 10;
  int kappa_max = 15;
  double c_knob = 1.0;
};

struct CodecParams {
  Index d = 0;  // 0 -> n / 2
  double density = 1.0;
  DecoderOptions decoder;
  bool perfect = false;  // exchange exact models instead of one-bit messages
};

enum class ClipMode { kOff, kReport, kClip };

struct PrivacyConfig {
  PrivacyParams params;
  ClipMode clip = ClipMode::kReport;
};

struct TerminationConfig {
  double tol = 0.0;  // 0 -> 0.005 without noise, 0.0025 / epsilon with noise
  std::uint64_t max_ticks = 10000;
  std::uint64_t min_sweeps = 1;  // completed communication sweeps before the check arms
};

struct BaselineParams {
  double step = 0.0;  // 0 -> 1 / (2 ell)
  double momentum = 0.5;
  int local_steps = 10;
  double dynamic_edge_keep = 0.5;  // D-PSGD-DN edge activation probability
};

struct ExperimentConfig {
  std::string algorithm = "ceps";  // ceps | dpsgd | dpsgd-dn | dpsgd-pc | dfedavgm
  std::uint64_t seed = 1;
  ProblemConfig problem;
  TopologyConfig topology;
  CepsParams ceps;
  CodecParams codec;
  PrivacyConfig privacy;
  TerminationConfig termination;
  BaselineParams baseline;
  int diagnostics_window = 20;  // B for the theory constants

  Index encoding_rows() const;
  double noise_variance() const;
  double tolerance() const;
  /// Throws InvalidParameter on inconsistent settings.
  void validate() const;
};

/// Data, objective and graph shared by every algorithm run from one config.
struct ExperimentData {
  ObjectiveSpec spec;
  std::vector<NodeDataset> nodes;
  std::optional<ModelVector> truth;
  TopologyGraph graph;
  std::vector<EigenEstimate> gram;  // lambda_max(A_i^T A_i) per node

  Index dimension() const { return nodes.front().dimension(); }
  int size() const { return static_cast<int>(nodes.size()); }
};

ExperimentData build_experiment_data(const ExperimentConfig& cfg);

/// sigma_i = c_knob lambda_max / (m (2r + 0.1) d_i) from the cached eigenvalues.
std::vector<double> node_sigmas(const ExperimentConfig& cfg, const ExperimentData& data);
/// Lipschitz constant of grad f_i, max over nodes, from the cached eigenvalues.
double lipschitz_constant(const ExperimentData& data);

/// (1/m) sum_i f_i(w).
double mean_objective(const ExperimentData& data, const ModelVector& w);
/// sum_i grad f_i(w).
ModelVector total_gradient(const ExperimentData& data, const ModelVector& w);

enum class RunStatus { kConverged, kDiverged, kMaxTicks };
const char* to_string(RunStatus status);

struct MetricsRow {
  std::uint64_t tick = 0;        // iterations completed
  std::uint64_t comm_round = 0;  // ticks in which at least one node communicated
  std::uint64_t rounds_a = 0;    // completed communication sweeps
  double objective = 0.0;
  double consensus_residual = 0.0;
  std::uint64_t dtv_bits_ideal = 0;
  std::uint64_t dtv_bits_framed = 0;
  double eps_total = 0.0;
  double delta_total_raw = 0.0;
  double delta_total_capped = 0.0;
  std::uint64_t decode_failures = 0;
  std::uint64_t clip_count = 0;
  double e_inf_proxy = 0.0;
  double wall_ms = 0.0;  // compute time; kept out of the trace CSV
};

/// Cumulative data transmission volume.
struct DtvCounter {
  std::uint64_t ideal_bits = 0;
  std::uint64_t framed_bits = 0;
  std::uint64_t transfers = 0;
  void record(const EncodedMessage& msg);
  void record_dense(Index n);
};

struct MetricsTrace {
  std::string algorithm;
  std::vector<MetricsRow> rows;
  RunStatus status = RunStatus::kMaxTicks;
  std::vector<double> sweep_grad_norm_sq;  // ||grad f(avg)||^2 at each completed sweep
  std::vector<ModelVector> final_models;
  double tolerance = 0.0;
  std::uint64_t sigma_warnings = 0;  // power iterations that hit the cap

  bool diverged() const { return status != RunStatus::kConverged; }
  const MetricsRow& last() const { return rows.back(); }
};

/// Adds one neighbour-to-node transfer.
void record_dtv(DtvCounter& counter, const EncodedMessage& msg);

MetricsTrace run_ceps(const ExperimentConfig& cfg);
MetricsTrace run_ceps(const ExperimentConfig& cfg, const ExperimentData& data);

/// Display name, e.g. "DP-1BCS" or "NoDP-Perf".
std::string ceps_variant_name(const ExperimentConfig& cfg);

struct DiagnosticsReport {
  double grad_norm_sq_mean = 0.0;
  double grad_norm_sq_first_window = 0.0;  // first quarter of sweeps
  double grad_norm_sq_last_window = 0.0;   // last quarter of sweeps
  double e_inf_proxy = 0.0;
  double zeta_sq = 0.0;  // gradient dispersion across nodes at the final average point
  double lipschitz = 0.0;
  TheoryConstants theory;
};

DiagnosticsReport diagnostics(const MetricsTrace& trace, const ExperimentData& data, int window_B);

/// Dispatches on cfg.algorithm.
MetricsTrace run_algorithm(const ExperimentConfig& cfg, const ExperimentData& data);

}  // namespace sdfl
