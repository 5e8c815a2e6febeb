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
#include "sdfl/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include "sdfl/baselines.hpp"

namespace sdfl {

namespace {

constexpr double kDivergenceObjective = 1e12;

bool known_algorithm(const std::string& tag) {
  return tag == "ceps" || tag == "dpsgd" || tag == "dpsgd-dn" || tag == "dpsgd-pc" || tag == "dfedavgm";
}

}  // namespace

Index ExperimentConfig::encoding_rows() const {
  if (codec.d > 0) return codec.d;
  return std::max<Index>(1, problem.n / 2);
}

double ExperimentConfig::noise_variance() const { return gaussian_variance(privacy.params); }

double ExperimentConfig::tolerance() const {
  if (termination.tol > 0.0) return termination.tol;
  return noise_variance() > 0.0 ? 0.0025 / privacy.params.epsilon : 0.005;
}

void ExperimentConfig::validate() const {
  if (!known_algorithm(algorithm)) throw InvalidParameter("unknown algorithm '" + algorithm + "'");
  if (problem.m < 1) throw InvalidParameter("problem.m must be >= 1");
  if (problem.s < 1) throw InvalidParameter("problem.s must be >= 1");
  if (problem.data_path.empty()) {
    if (problem.n < 1) throw InvalidParameter("problem.n must be >= 1");
    if (problem.s > problem.n) throw InvalidParameter("problem.s must not exceed problem.n");
    if (problem.kind != ObjectiveKind::kLinearRegression && problem.snapshot_path.empty())
      throw InvalidParameter("logistic regression requires problem.data");
  }
  if (problem.samples_min < 1 || problem.samples_max < problem.samples_min)
    throw InvalidParameter("problem sample range must satisfy 1 <= min <= max");
  if (!(problem.noise_scale >= 0.0)) throw InvalidParameter("problem.noise_scale must be >= 0");
  if (!(problem.lambda >= 0.0)) throw InvalidParameter("problem.lambda must be >= 0");
  if (!(topology.edge_prob > 0.0 && topology.edge_prob <= 1.0))
    throw InvalidParameter("topology.edge_prob must lie in (0, 1]");
  if (!(topology.rate > 0.0 && topology.rate <= 1.0)) throw InvalidParameter("topology.rate must lie in (0, 1]");
  if (topology.min_participants < 1) throw InvalidParameter("topology.min_participants must be >= 1");
  if (!(topology.straggler_rate >= 0.0)) throw InvalidParameter("topology.straggler_rate must be >= 0");
  if (!(ceps.mu > 0.0)) throw InvalidParameter("ceps.mu must be > 0");
  if (!(ceps.gamma > 1.0)) throw InvalidParameter("ceps.gamma must be > 1");
  if (ceps.kappa_min < 1 || ceps.kappa_max < ceps.kappa_min)
    throw InvalidParameter("ceps kappa range must satisfy 1 <= min <= max");
  if (!(ceps.c_knob > 0.0)) throw InvalidParameter("ceps.c_knob must be > 0");
  if (codec.d < 0) throw InvalidParameter("codec.d must be >= 0");
  if (!(codec.density > 0.0 && codec.density <= 1.0)) throw InvalidParameter("codec.density must lie in (0, 1]");
  if (codec.decoder.max_iterations < 1) throw InvalidParameter("codec.max_iterations must be >= 1");
  if (!(codec.decoder.step_scale > 0.0)) throw InvalidParameter("codec.step_scale must be > 0");
  if (privacy.params.enabled) privacy.params.validate();
  if (!(privacy.params.sensitivity >= 0.0)) throw InvalidParameter("privacy.sensitivity must be >= 0");
  if (!(termination.tol >= 0.0)) throw InvalidParameter("termination.tol must be >= 0");
  if (termination.max_ticks < 1) throw InvalidParameter("termination.max_ticks must be >= 1");
  if (!(baseline.step >= 0.0)) throw InvalidParameter("baseline.step must be >= 0");
  if (!(baseline.momentum >= 0.0 && baseline.momentum < 1.0))
    throw InvalidParameter("baseline.momentum must lie in [0, 1)");
  if (baseline.local_steps < 1) throw InvalidParameter("baseline.local_steps must be >= 1");
  if (!(baseline.dynamic_edge_keep > 0.0 && baseline.dynamic_edge_keep <= 1.0))
    throw InvalidParameter("baseline.dynamic_edge_keep must lie in (0, 1]");
  if (diagnostics_window < 1) throw InvalidParameter("diagnostics.window must be >= 1");
}

ExperimentData build_experiment_data(const ExperimentConfig& cfg) {
  cfg.validate();
  ObjectiveSpec spec{cfg.problem.kind,
                     cfg.problem.kind == ObjectiveKind::kLogisticRegression ? cfg.problem.lambda : 0.0};
  std::vector<NodeDataset> nodes;
  std::optional<ModelVector> truth;
  const int m = cfg.problem.m;

  if (!cfg.problem.data_path.empty()) {
    const LabeledData raw = load_libsvm(cfg.problem.data_path);
    if (raw.features.rows() < m) throw InvalidParameter("fewer samples than nodes in " + cfg.problem.data_path);
    if (cfg.problem.s > raw.features.cols())
      throw InvalidParameter("problem.s exceeds the feature dimension of " + cfg.problem.data_path);
    Rng rng = make_stream(cfg.seed, Stream::kPartition);
    nodes = partition(raw, m, rng);
  } else if (!cfg.problem.snapshot_path.empty()) {
    std::ifstream is(cfg.problem.snapshot_path, std::ios::binary);
    if (!is) throw InvalidParameter("cannot open snapshot " + cfg.problem.snapshot_path);
    SyntheticProblem p = read_snapshot(is);
    if (static_cast<int>(p.nodes.size()) != m) throw InvalidParameter("snapshot node count differs from problem.m");
    nodes = std::move(p.nodes);
    truth = std::move(p.truth);
  } else {
    Rng rng = make_stream(cfg.seed, Stream::kTruth);
    SyntheticProblem p = generate_linreg_problem(cfg.problem.n, cfg.problem.s, m,
                                                 {cfg.problem.samples_min, cfg.problem.samples_max},
                                                 cfg.problem.noise_scale, rng);
    nodes = std::move(p.nodes);
    truth = std::move(p.truth);
  }
  if (spec.kind == ObjectiveKind::kLogisticRegression)
    for (const auto& node : nodes) require_binary_labels(node);

  std::optional<TopologyGraph> graph;
  if (!cfg.topology.edge_list_path.empty()) {
    std::ifstream is(cfg.topology.edge_list_path);
    if (!is) throw InvalidParameter("cannot open edge list " + cfg.topology.edge_list_path);
    graph.emplace(TopologyGraph::read_edge_list(m, is));
  } else if (m == 1) {
    graph.emplace(1, std::vector<Edge>{});
  } else {
    Rng rng = make_stream(cfg.seed, Stream::kGraph);
    graph.emplace(generate_random_graph(m, cfg.topology.edge_prob, rng));
  }

  std::vector<EigenEstimate> gram;
  gram.reserve(nodes.size());
  for (const auto& node : nodes) gram.push_back(largest_gram_eigenvalue(node.features));

  return ExperimentData{spec, std::move(nodes), std::move(truth), std::move(*graph), std::move(gram)};
}

std::vector<double> node_sigmas(const ExperimentConfig& cfg, const ExperimentData& data) {
  const double denom = static_cast<double>(data.size()) * (2.0 * cfg.topology.rate + 0.1) *
                       static_cast<double>(cfg.encoding_rows());
  std::vector<double> out;
  out.reserve(data.gram.size());
  for (const auto& eig : data.gram) {
    const double sigma = cfg.ceps.c_knob * eig.value / denom;
    // Degenerate data (all-zero features) would give sigma = 0.
    out.push_back(sigma > 0.0 ? sigma : cfg.ceps.c_knob / denom);
  }
  return out;
}

double lipschitz_constant(const ExperimentData& data) {
  double ell = 0.0;
  for (std::size_t i = 0; i < data.nodes.size(); ++i) {
    const double mi = static_cast<double>(data.nodes[i].samples());
    const double li = data.spec.kind == ObjectiveKind::kLinearRegression
                          ? data.gram[i].value / mi
                          : data.gram[i].value / (4.0 * mi) + data.spec.lambda;
    ell = std::max(ell, li);
  }
  return ell;
}

double mean_objective(const ExperimentData& data, const ModelVector& w) {
  double acc = 0.0;
  for (const auto& node : data.nodes) acc += objective_value(data.spec, w, node);
  return acc / static_cast<double>(data.nodes.size());
}

ModelVector total_gradient(const ExperimentData& data, const ModelVector& w) {
  ModelVector g = ModelVector::Zero(w.size());
  for (const auto& node : data.nodes) g += objective_gradient(data.spec, w, node);
  return g;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kMaxTicks: return "max_ticks";
  }
  return "unknown";
}

void DtvCounter::record(const EncodedMessage& msg) {
  ideal_bits += message_size_bits(msg);
  framed_bits += framed_size_bits(msg);
  ++transfers;
}

void DtvCounter::record_dense(Index n) {
  ideal_bits += dense_size_bits(n);
  framed_bits += dense_framed_size_bits(n);
  ++transfers;
}

void record_dtv(DtvCounter& counter, const EncodedMessage& msg) { counter.record(msg); }

std::string ceps_variant_name(const ExperimentConfig& cfg) {
  std::string name = cfg.noise_variance() > 0.0 ? "DP-" : "NoDP-";
  name += cfg.codec.perfect ? "Perf" : "1BCS";
  return name;
}

MetricsTrace run_ceps(const ExperimentConfig& cfg) { return run_ceps(cfg, build_experiment_data(cfg)); }

MetricsTrace run_ceps(const ExperimentConfig& cfg, const ExperimentData& data) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();

  const int m = data.size();
  const Index n = data.dimension();
  if (cfg.problem.s > n) throw InvalidParameter("problem.s exceeds the model dimension");
  const SparsityBudget s(cfg.problem.s);
  const Index d = cfg.encoding_rows();
  const double variance = cfg.noise_variance();
  const double tol = cfg.tolerance();
  const bool dp_on = variance > 0.0;

  GradientPolicy policy;
  policy.sensitivity = cfg.privacy.params.sensitivity;
  if (dp_on) {
    policy.clip = cfg.privacy.clip == ClipMode::kClip;
    policy.count_violations = cfg.privacy.clip == ClipMode::kReport;
  }

  const std::vector<double> sigma = node_sigmas(cfg, data);
  Rng schedule = make_stream(cfg.seed, Stream::kNodeSchedule);
  std::uniform_int_distribution<int> kappa_dist(cfg.ceps.kappa_min, cfg.ceps.kappa_max);

  std::vector<NodeState> nodes;
  nodes.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    NodeSetup setup;
    setup.sigma = sigma[static_cast<std::size_t>(i)];
    setup.kappa = kappa_dist(schedule);
    setup.gamma = cfg.ceps.gamma;
    setup.phi_seed = derive_seed(cfg.seed, Stream::kEncoding, static_cast<std::uint64_t>(i));
    setup.stream_seed = cfg.seed;
    nodes.push_back(init_node(i, data.spec, data.nodes[static_cast<std::size_t>(i)], data.graph, setup));
  }

  std::vector<std::unique_ptr<EncodingMatrix>> phi(static_cast<std::size_t>(m));
  if (!cfg.codec.perfect)
    for (int i = 0; i < m; ++i)
      phi[static_cast<std::size_t>(i)] =
          std::make_unique<EncodingMatrix>(d, n, nodes[static_cast<std::size_t>(i)].phi_seed, cfg.codec.density);

  std::vector<int> t_count(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    t_count[static_cast<std::size_t>(i)] =
        participation_count(static_cast<int>(data.graph.neighborhood(i).size()), cfg.topology.rate,
                            cfg.topology.min_participants);

  PrivacyAccountant accountant(cfg.privacy.params);

  MetricsTrace trace;
  trace.algorithm = ceps_variant_name(cfg);
  trace.tolerance = tol;
  for (const auto& eig : data.gram)
    if (!eig.converged) ++trace.sigma_warnings;

  DtvCounter dtv;
  std::uint64_t comm_round = 0;
  std::uint64_t decode_failures = 0;
  std::uint64_t clip_count = 0;
  std::uint64_t rounds_a = 0;
  double e_inf = 0.0;

  std::vector<ModelVector> snapshot(static_cast<std::size_t>(m));
  std::vector<ModelVector> current(static_cast<std::size_t>(m));

  for (std::uint64_t tick = 0; tick < cfg.termination.max_ticks; ++tick) {
    for (int i = 0; i < m; ++i) snapshot[static_cast<std::size_t>(i)] = nodes[static_cast<std::size_t>(i)].w;

    // Each sender encodes once per tick; decoding is deterministic, so every
    // receiver of the same message obtains the same estimate.
    std::map<int, std::pair<EncodedMessage, std::optional<ModelVector>>> outbox;
    auto estimate_from = [&](int j) -> const std::optional<ModelVector>& {
      auto it = outbox.find(j);
      if (it != outbox.end()) return it->second.second;
      const auto& phi_j = *phi[static_cast<std::size_t>(j)];
      const ModelVector& wj = snapshot[static_cast<std::size_t>(j)];
      EncodedMessage msg = wj.isZero(0.0) ? EncodedMessage::zero() : encode(wj, phi_j, cfg.ceps.gamma);
      std::optional<ModelVector> z;
      try {
        z = decode(msg, phi_j, nodes[static_cast<std::size_t>(j)].gamma, s, cfg.codec.decoder);
      } catch (const DecodeFailure&) {
        z.reset();
      }
      return outbox.emplace(j, std::make_pair(std::move(msg), std::move(z))).first->second.second;
    };

    bool any_comm = false;
    double tick_error = 0.0;
    for (int i = 0; i < m; ++i) {
      NodeState& st = nodes[static_cast<std::size_t>(i)];
      const NodeDataset& local = data.nodes[static_cast<std::size_t>(i)];
      if (!st.communicates_at(tick)) {
        tick_error += local_step(st, cfg.ceps.mu, s);
        continue;
      }
      any_comm = true;
      std::vector<int> chosen;
      if (cfg.topology.straggler_rate > 0.0) {
        const Vector latency = sample_latency_row(data.graph, i, cfg.topology.straggler_rate, st.selection_rng);
        chosen = select_node_responders(data.graph, i, latency, t_count[static_cast<std::size_t>(i)]);
      } else {
        chosen = select_node_neighbors(data.graph, i, t_count[static_cast<std::size_t>(i)], st.selection_rng);
      }

      std::vector<NeighborEstimate> estimates;
      estimates.reserve(chosen.size());
      for (int j : chosen) {
        NeighborEstimate est{j, std::nullopt};
        if (j != i) {
          if (cfg.codec.perfect) {
            est.z = snapshot[static_cast<std::size_t>(j)];
            dtv.record_dense(n);
          } else {
            est.z = estimate_from(j);
            dtv.record(outbox.at(j).first);
            if (!est.z) ++decode_failures;
          }
        }
        estimates.push_back(std::move(est));
      }

      const ModelVector noise = dp_on ? sample_noise(variance, n, st.noise_rng) : ModelVector();
      const CommunicationReport rep = communication_step(st, estimates, noise, s, data.spec, local, policy);
      clip_count += rep.gradient_violations;
      tick_error += rep.projection_error_sq;
    }
    if (any_comm) ++comm_round;
    e_inf = std::max(e_inf, tick_error);

    for (int i = 0; i < m; ++i) current[static_cast<std::size_t>(i)] = nodes[static_cast<std::size_t>(i)].w;
    const ModelVector avg = average_point(current);

    std::uint64_t sweeps = std::numeric_limits<std::uint64_t>::max();
    for (const auto& st : nodes) sweeps = std::min(sweeps, st.comm_steps);
    if (sweeps > rounds_a) {
      rounds_a = sweeps;
      trace.sweep_grad_norm_sq.push_back(total_gradient(data, avg).squaredNorm());
    }
    accountant.set_rounds(rounds_a);
    const PrivacySpend spend = accountant.spend();

    MetricsRow row;
    row.tick = tick + 1;
    row.comm_round = comm_round;
    row.rounds_a = rounds_a;
    row.objective = mean_objective(data, avg);
    row.consensus_residual = consensus_residual(current, s);
    row.dtv_bits_ideal = dtv.ideal_bits;
    row.dtv_bits_framed = dtv.framed_bits;
    row.eps_total = spend.epsilon_total;
    row.delta_total_raw = spend.delta_total_raw;
    row.delta_total_capped = spend.delta_total_capped;
    row.decode_failures = decode_failures;
    row.clip_count = clip_count;
    row.e_inf_proxy = e_inf;
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
    trace.rows.push_back(row);

    if (!std::isfinite(row.objective) || !std::isfinite(row.consensus_residual) ||
        row.objective > kDivergenceObjective) {
      trace.status = RunStatus::kDiverged;
      break;
    }
    if (rounds_a >= cfg.termination.min_sweeps && row.consensus_residual <= tol) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }

  trace.final_models = std::move(current);
  return trace;
}

DiagnosticsReport diagnostics(const MetricsTrace& trace, const ExperimentData& data, int window_B) {
  DiagnosticsReport rep;
  const auto& g = trace.sweep_grad_norm_sq;
  if (!g.empty()) {
    double sum = 0.0;
    for (double x : g) sum += x;
    rep.grad_norm_sq_mean = sum / static_cast<double>(g.size());
    const std::size_t q = std::max<std::size_t>(1, g.size() / 4);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
      first += g[k];
      last += g[g.size() - 1 - k];
    }
    rep.grad_norm_sq_first_window = first / static_cast<double>(q);
    rep.grad_norm_sq_last_window = last / static_cast<double>(q);
  }
  if (!trace.rows.empty()) rep.e_inf_proxy = trace.last().e_inf_proxy;

  if (!trace.final_models.empty()) {
    const ModelVector avg = average_point(trace.final_models);
    std::vector<ModelVector> grads;
    grads.reserve(data.nodes.size());
    ModelVector mean = ModelVector::Zero(avg.size());
    for (const auto& node : data.nodes) {
      grads.push_back(objective_gradient(data.spec, avg, node));
      mean += grads.back();
    }
    mean /= static_cast<double>(grads.size());
    double disp = 0.0;
    for (const auto& gi : grads) disp += (gi - mean).squaredNorm();
    rep.zeta_sq = disp / static_cast<double>(grads.size());
  }

  rep.lipschitz = lipschitz_constant(data);
  if (data.size() >= 2 && rep.lipschitz > 0.0) rep.theory = theory_constants(data.size(), window_B, rep.lipschitz);
  return rep;
}

MetricsTrace run_algorithm(const ExperimentConfig& cfg, const ExperimentData& data) {
  if (cfg.algorithm == "ceps") return run_ceps(cfg, data);
  if (cfg.algorithm == "dpsgd") return run_dpsgd(cfg, data, DpsgdVariant::kStatic);
  if (cfg.algorithm == "dpsgd-dn") return run_dpsgd(cfg, data, DpsgdVariant::kDynamic);
  if (cfg.algorithm == "dpsgd-pc") return run_dpsgd(cfg, data, DpsgdVariant::kPartial);
  if (cfg.algorithm == "dfedavgm") return run_dfedavgm(cfg, data);
  throw InvalidParameter("unknown algorithm '" + cfg.algorithm + "'");
}

}  // namespace sdfl
