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
#include "sdfl/node_engine.hpp"

#include <string>

#include "sdfl/privacy.hpp"

namespace sdfl {

NodeState init_node(int i, const ObjectiveSpec& spec, const NodeDataset& data,
                    const TopologyGraph& graph, const NodeSetup& setup) {
  if (i < 0 || i >= graph.size()) throw InvalidParameter("init_node: node id out of range");
  if (!(setup.sigma > 0.0)) throw InvalidParameter("init_node: sigma must be > 0");
  if (setup.kappa < 1) throw InvalidParameter("init_node: kappa must be >= 1");
  if (!(setup.gamma > 1.0)) throw InvalidParameter("init_node: gamma must be > 1");

  NodeState st;
  st.id = i;
  st.w = ModelVector::Zero(data.dimension());
  st.u = -objective_gradient(spec, st.w, data);
  st.mk = static_cast<int>(graph.neighborhood(i).size());
  st.sigma = setup.sigma;
  st.kappa = setup.kappa;
  st.gamma = setup.gamma;
  st.phi_seed = setup.phi_seed;
  st.selection_rng = make_stream(setup.stream_seed, Stream::kNodeSelection, static_cast<std::uint64_t>(i));
  st.noise_rng = make_stream(setup.stream_seed, Stream::kNodeNoise, static_cast<std::uint64_t>(i));
  return st;
}

CommunicationReport communication_step(NodeState& state, std::span<const NeighborEstimate> estimates,
                                       const ModelVector& noise, SparsityBudget s,
                                       const ObjectiveSpec& spec, const NodeDataset& data,
                                       const GradientPolicy& policy) {
  CommunicationReport report;
  bool has_self = false;
  ModelVector sum = ModelVector::Zero(state.w.size());
  for (const auto& est : estimates) {
    if (est.id == state.id) {
      has_self = true;
      sum += state.w;
      ++report.used;
      continue;
    }
    if (est.z) {
      if (est.z->size() != state.w.size())
        throw InvalidParameter("communication_step: estimate from node " + std::to_string(est.id) +
                               " has wrong dimension");
      sum += *est.z;
      state.cache[est.id] = *est.z;
      ++report.used;
    } else if (auto hit = state.cache.find(est.id); hit != state.cache.end()) {
      sum += hit->second;
      ++report.used;
      ++report.fallbacks;
    } else {
      ++report.dropped;
    }
  }
  if (!has_self) throw InvalidParameter("communication_step: estimates must include the node itself");

  state.mk = report.used;
  const ModelVector w_bar = sum / static_cast<double>(report.used);
  ModelVector g = objective_gradient(spec, w_bar, data);
  report.gradient_norm = g.norm();
  if (policy.clip) {
    g = clip_gradient(g, policy.sensitivity, report.gradient_violations);
  } else if (policy.count_violations && report.gradient_norm > 0.5 * policy.sensitivity) {
    ++report.gradient_violations;
  }

  const double scale = state.sigma * static_cast<double>(state.mk);
  state.u = scale * w_bar - g;
  ModelVector target = state.u;
  if (noise.size() != 0) {
    if (noise.size() != state.u.size()) throw InvalidParameter("communication_step: noise has wrong dimension");
    target += noise;
  }
  const ModelVector projected = hard_threshold(target, s);
  report.projection_error_sq = (projected - state.u).squaredNorm();
  state.w = projected / scale;
  ++state.comm_steps;
  return report;
}

double local_step(NodeState& state, double mu, SparsityBudget s) {
  if (!(mu > 0.0)) throw InvalidParameter("local_step: mu must be > 0");
  const ModelVector target = state.u + mu * state.w;
  const ModelVector projected = hard_threshold(target, s);
  const double err = (projected - target).squaredNorm();
  state.w = projected / (state.sigma * static_cast<double>(state.mk) + mu);
  return err;
}

EncodedMessage build_outgoing(const NodeState& state, const EncodingMatrix& phi) {
  if (state.w.isZero(0.0)) return EncodedMessage::zero();
  return encode(state.w, phi, state.gamma);
}

ModelVector average_point(std::span<const ModelVector> models) {
  if (models.empty()) throw InvalidParameter("average_point: no models");
  ModelVector avg = ModelVector::Zero(models.front().size());
  for (const auto& w : models) {
    if (w.size() != avg.size()) throw InvalidParameter("average_point: dimension mismatch");
    avg += w;
  }
  return avg / static_cast<double>(models.size());
}

double consensus_residual(std::span<const ModelVector> models, SparsityBudget s) {
  const ModelVector avg = average_point(models);
  double acc = 0.0;
  for (const auto& w : models) acc += (w - avg).squaredNorm();
  return acc / (static_cast<double>(s.value()) * static_cast<double>(models.size()));
}

}  // namespace sdfl
