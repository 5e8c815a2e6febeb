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

// Per-node state machine of the sparse inexact-ADM method.
//
// At a communication step node i averages the (decoded) models of the chosen
// neighbours, refreshes its linearised surrogate
//     u_i = sigma_i m_i w_bar - grad f_i(w_bar)
// and sets w_i <- P_s((u_i + xi_i) / (sigma_i m_i)).
// Between communication steps u_i and m_i stay fixed and the node runs the
// cheap proximal update w_i <- P_s((u_i + mu w_i) / (sigma_i m_i + mu)).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sdfl/objectives.hpp"
#include "sdfl/onebit_codec.hpp"
#include "sdfl/rng.hpp"
#include "sdfl/sparse_core.hpp"
#include "sdfl/topology.hpp"

namespace sdfl {

struct HyperParams {
  double mu = 0.1;
  SparsityBudget s{1};
};

/// Constants fixed when a node is created.
struct NodeSetup {
  double sigma = 1.0;
  int kappa = 10;
  double gamma = 5.0;
  std::uint64_t phi_seed = 0;
  std::uint64_t stream_seed = 0;  // drives selection and noise substreams
};

struct NodeState {
  int id = 0;
  ModelVector w;
  ModelVector u;
  int mk = 1;  // |N_i^k| of the last communication step
  double sigma = 1.0;
  int kappa = 10;
  double gamma = 5.0;
  std::uint64_t phi_seed = 0;
  std::map<int, ModelVector> cache;  // last successful decode per neighbour
  Rng selection_rng;
  Rng noise_rng;
  std::uint64_t comm_steps = 0;

  bool communicates_at(std::uint64_t tick) const {
    return tick > 0 && tick % static_cast<std::uint64_t>(kappa) == 0;
  }
};

/// w = 0, u = -grad f_i(0), m_i = |N_i|.
NodeState init_node(int i, const ObjectiveSpec& spec, const NodeDataset& data,
                    const TopologyGraph& graph, const NodeSetup& setup);

/// A neighbour's recovered model; nullopt marks a failed decode.
struct NeighborEstimate {
  int id = 0;
  std::optional<ModelVector> z;
};

/// Gradient treatment inside a communication step.
struct GradientPolicy {
  bool clip = false;           // rescale onto ||g|| <= u/2
  bool count_violations = false;
  double sensitivity = 0.1;
};

struct CommunicationReport {
  int used = 0;        // m_i^k
  int fallbacks = 0;   // cached estimate substituted for a failed decode
  int dropped = 0;     // failed with no cache entry
  std::uint64_t gradient_violations = 0;
  double projection_error_sq = 0.0;  // ||P_s(u + xi) - u||^2
  double gradient_norm = 0.0;
};

/// `estimates` must contain an entry for the node itself; its z is ignored and
/// the exact local w_i is used instead. `noise` may be empty (no perturbation).
CommunicationReport communication_step(NodeState& state, std::span<const NeighborEstimate> estimates,
                                       const ModelVector& noise, SparsityBudget s,
                                       const ObjectiveSpec& spec, const NodeDataset& data,
                                       const GradientPolicy& policy = {});

/// Proximal local update. Returns ||P_s(u + mu w) - (u + mu w)||^2.
double local_step(NodeState& state, double mu, SparsityBudget s);

/// Encoded current model; the ZERO message when w_i == 0.
EncodedMessage build_outgoing(const NodeState& state, const EncodingMatrix& phi);

/// (1/m) sum_i w_i.
ModelVector average_point(std::span<const ModelVector> models);

/// (1/(s m)) sum_i ||w_i - average||^2.
double consensus_residual(std::span<const ModelVector> models, SparsityBudget s);

}  // namespace sdfl
