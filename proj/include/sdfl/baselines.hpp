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

// Decentralized SGD baselines run under the same harness as CEPS. All of them
// exchange dense models, so a transfer costs 64 n bits.

#include <vector>

#include "sdfl/simulator.hpp"

namespace sdfl {

/// M_ij = 1 / (1 + max(deg_i, deg_j)) on edges, M_ii = 1 - sum_{j != i} M_ij.
/// The edge set need not be connected.
Matrix metropolis_mixing(int m, const std::vector<Edge>& edges);
Matrix metropolis_mixing(const TopologyGraph& graph);

/// Row i keeps M_ij for j in `members[i]` and is rescaled to sum to 1.
Matrix restrict_mixing(const Matrix& M, const RoundSelection& selection);

enum class DpsgdVariant { kStatic, kDynamic, kPartial };
const char* to_string(DpsgdVariant v);

/// Per tick: w_i <- w_i - eta (grad f_i(w_i) + xi_i). Every `local_steps`
/// ticks: W <- M W with the variant's mixing matrix.
MetricsTrace run_dpsgd(const ExperimentConfig& cfg, const ExperimentData& data, DpsgdVariant variant);

/// Local momentum SGD (v <- beta v + g, w <- w - eta v, v reset after each
/// mixing) followed by partial-participation mixing.
MetricsTrace run_dfedavgm(const ExperimentConfig& cfg, const ExperimentData& data);

/// 1 / (2 ell) unless cfg.baseline.step is set.
double baseline_step(const ExperimentConfig& cfg, const ExperimentData& data);

}  // namespace sdfl
