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
#include "sdfl/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace sdfl {

namespace {

constexpr double kDivergenceObjective = 1e12;

enum class MixingMode { kStatic, kDynamic, kPartial };

MetricsTrace run_decentralized_sgd(const ExperimentConfig& cfg, const ExperimentData& data, const std::string& name,
                                   MixingMode mode, double beta) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();

  const int m = data.size();
  const Index n = data.dimension();
  const SparsityBudget s(std::min<Index>(cfg.problem.s, n));
  const double eta = baseline_step(cfg, data);
  const double variance = cfg.noise_variance();
  const bool dp_on = variance > 0.0;
  const double tol = cfg.tolerance();
  const auto local_steps = static_cast<std::uint64_t>(cfg.baseline.local_steps);

  const Matrix base = metropolis_mixing(data.graph);
  const std::vector<Edge> edges = data.graph.edges();
  Rng mixing_rng = make_stream(cfg.seed, Stream::kBaseline);
  std::vector<Rng> noise_rng;
  noise_rng.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) noise_rng.push_back(make_stream(cfg.seed, Stream::kNodeNoise, static_cast<std::uint64_t>(i)));

  std::vector<ModelVector> W(static_cast<std::size_t>(m), ModelVector::Zero(n));
  std::vector<ModelVector> V(static_cast<std::size_t>(m), ModelVector::Zero(n));

  PrivacyAccountant accountant(cfg.privacy.params);
  MetricsTrace trace;
  trace.algorithm = name;
  trace.tolerance = tol;
  DtvCounter dtv;
  std::uint64_t comm_round = 0;
  std::uint64_t clip_count = 0;

  for (std::uint64_t tick = 0; tick < cfg.termination.max_ticks; ++tick) {
    for (int i = 0; i < m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      ModelVector g = objective_gradient(data.spec, W[ui], data.nodes[ui]);
      if (dp_on) {
        if (cfg.privacy.clip == ClipMode::kClip) {
          g = clip_gradient(g, cfg.privacy.params.sensitivity, clip_count);
        } else if (cfg.privacy.clip == ClipMode::kReport && g.norm() > 0.5 * cfg.privacy.params.sensitivity) {
          ++clip_count;
        }
        g += sample_noise(variance, n, noise_rng[ui]);
      }
      V[ui] = beta * V[ui] + g;
      W[ui] -= eta * V[ui];
    }

    if ((tick + 1) % local_steps == 0) {
      Matrix M;
      if (mode == MixingMode::kPartial) {
        const RoundSelection sel = select_neighbors(data.graph, cfg.topology.rate, mixing_rng, cfg.topology.min_participants);
        M = restrict_mixing(base, sel);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < sel.t(i) - 1; ++j) dtv.record_dense(n);
      } else {
        if (mode == MixingMode::kDynamic) {
          std::bernoulli_distribution keep(cfg.baseline.dynamic_edge_keep);
          std::vector<Edge> active;
          for (const auto& e : edges)
            if (keep(mixing_rng)) active.push_back(e);
          M = metropolis_mixing(m, active);
        } else {
          M = base;
        }
        for (const auto& e : edges)
          if (M(e.first, e.second) > 0.0) {
            dtv.record_dense(n);
            dtv.record_dense(n);
          }
      }
      std::vector<ModelVector> mixed(static_cast<std::size_t>(m), ModelVector::Zero(n));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (M(i, j) != 0.0) mixed[static_cast<std::size_t>(i)] += M(i, j) * W[static_cast<std::size_t>(j)];
      W = std::move(mixed);
      for (auto& v : V) v.setZero();
      ++comm_round;
      trace.sweep_grad_norm_sq.push_back(total_gradient(data, average_point(W)).squaredNorm());
    }

    accountant.set_rounds(tick + 1);
    const PrivacySpend spend = accountant.spend();
    const ModelVector avg = average_point(W);

    MetricsRow row;
    row.tick = tick + 1;
    row.comm_round = comm_round;
    row.rounds_a = spend.rounds_a;
    row.objective = mean_objective(data, avg);
    row.consensus_residual = consensus_residual(W, s);
    row.dtv_bits_ideal = dtv.ideal_bits;
    row.dtv_bits_framed = dtv.framed_bits;
    row.eps_total = spend.epsilon_total;
    row.delta_total_raw = spend.delta_total_raw;
    row.delta_total_capped = spend.delta_total_capped;
    row.clip_count = clip_count;
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
    trace.rows.push_back(row);

    if (!std::isfinite(row.objective) || !std::isfinite(row.consensus_residual) ||
        row.objective > kDivergenceObjective) {
      trace.status = RunStatus::kDiverged;
      break;
    }
    if (comm_round >= cfg.termination.min_sweeps && row.consensus_residual <= tol) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }
  trace.final_models = std::move(W);
  return trace;
}

}  // namespace

Matrix metropolis_mixing(int m, const std::vector<Edge>& edges) {
  if (m < 1) throw InvalidParameter("metropolis_mixing: m must be >= 1");
  std::vector<int> deg(static_cast<std::size_t>(m), 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m || a == b) throw InvalidParameter("metropolis_mixing: invalid edge");
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  Matrix M = Matrix::Zero(m, m);
  for (const auto& [a, b] : edges) {
    const double w = 1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(a)], deg[static_cast<std::size_t>(b)]));
    M(a, b) = w;
    M(b, a) = w;
  }
  for (int i = 0; i < m; ++i) M(i, i) = 1.0 - (M.row(i).sum() - M(i, i));
  return M;
}

Matrix metropolis_mixing(const TopologyGraph& graph) { return metropolis_mixing(graph.size(), graph.edges()); }

Matrix restrict_mixing(const Matrix& M, const RoundSelection& selection) {
  if (M.rows() != selection.size() || M.cols() != selection.size())
    throw InvalidParameter("restrict_mixing: dimension mismatch");
  Matrix R = Matrix::Zero(M.rows(), M.cols());
  for (int i = 0; i < selection.size(); ++i) {
    double total = 0.0;
    for (int j : selection.members[static_cast<std::size_t>(i)]) total += M(i, j);
    if (!(total > 0.0)) {
      R(i, i) = 1.0;
      continue;
    }
    for (int j : selection.members[static_cast<std::size_t>(i)]) R(i, j) = M(i, j) / total;
  }
  return R;
}

const char* to_string(DpsgdVariant v) {
  switch (v) {
    case DpsgdVariant::kStatic: return "D-PSGD";
    case DpsgdVariant::kDynamic: return "D-PSGD-DN";
    case DpsgdVariant::kPartial: return "D-PSGD-PC";
  }
  return "unknown";
}

double baseline_step(const ExperimentConfig& cfg, const ExperimentData& data) {
  if (cfg.baseline.step > 0.0) return cfg.baseline.step;
  const double ell = lipschitz_constant(data);
  if (!(ell > 0.0)) throw InvalidParameter("baseline_step: Lipschitz constant is zero; set baseline.step");
  return 1.0 / (2.0 * ell);
}

MetricsTrace run_dpsgd(const ExperimentConfig& cfg, const ExperimentData& data, DpsgdVariant variant) {
  const MixingMode mode = variant == DpsgdVariant::kStatic    ? MixingMode::kStatic
                          : variant == DpsgdVariant::kDynamic ? MixingMode::kDynamic
                                                              : MixingMode::kPartial;
  return run_decentralized_sgd(cfg, data, to_string(variant), mode, 0.0);
}

MetricsTrace run_dfedavgm(const ExperimentConfig& cfg, const ExperimentData& data) {
  return run_decentralized_sgd(cfg, data, "DFedAvgM", MixingMode::kPartial, cfg.baseline.momentum);
}

}  // namespace sdfl
