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

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "sdfl/rng.hpp"
#include "sdfl/sparse_core.hpp"

namespace sdfl {

using Edge = std::pair<int, int>;

/// Connected undirected graph over nodes 0..m-1. Neighbourhoods are closed
/// (node i is in its own neighbourhood) and sorted.
class TopologyGraph {
 public:
  /// Throws InvalidParameter on out-of-range/self edges or a disconnected graph.
  TopologyGraph(int m, const std::vector<Edge>& edges);

  int size() const { return m_; }
  const std::vector<int>& neighborhood(int i) const { return closed_[static_cast<std::size_t>(i)]; }
  /// Number of neighbours excluding i itself.
  int degree(int i) const { return static_cast<int>(neighborhood(i).size()) - 1; }
  bool adjacent(int i, int j) const;
  /// Each undirected edge once, as (i, j) with i < j, sorted.
  std::vector<Edge> edges() const;

  /// One "i j" pair per line, 0-based.
  void write_edge_list(std::ostream& os) const;
  static TopologyGraph read_edge_list(int m, std::istream& is);

 private:
  int m_;
  std::vector<std::vector<int>> closed_;
};

bool is_connected(int m, const std::vector<Edge>& edges);

/// Erdos-Renyi G(m, p), resampled until connected (at most 1000 attempts).
TopologyGraph generate_random_graph(int m, double edge_prob, Rng& rng);

/// Per node i the chosen subset N_i^k, always containing i, sorted.
struct RoundSelection {
  std::vector<std::vector<int>> members;

  int size() const { return static_cast<int>(members.size()); }
  int t(int i) const { return static_cast<int>(members[static_cast<std::size_t>(i)].size()); }
};

/// max(floor, round(r * neighbourhood_size)), never above neighbourhood_size.
int participation_count(int neighborhood_size, double rate, int floor = 1);

/// Uniform draw of t - 1 neighbours of i plus i itself.
std::vector<int> select_node_neighbors(const TopologyGraph& g, int i, int t, Rng& rng);

/// Uniform selection for every node with t_i = participation_count(|N_i|, rate, floor).
RoundSelection select_neighbors(const TopologyGraph& g, double rate, Rng& rng, int floor = 1);

/// i plus the t - 1 neighbours with smallest latency; ties go to the lower index.
/// latency(i, j) is the response latency of j as seen by i.
std::vector<int> select_node_responders(const TopologyGraph& g, int i, const Vector& latency_row,
                                        int t);
RoundSelection select_responders(const TopologyGraph& g, const Matrix& latency,
                                 const std::vector<int>& t);

/// Exponential(rate) latency for every directed link of the graph; +inf off the graph.
Vector sample_latency_row(const TopologyGraph& g, int i, double rate, Rng& rng);

/// A_{ji} = 1/t_i for j in N_i^k, zero otherwise. Column-stochastic.
Matrix mixing_matrix(const RoundSelection& sel);

/// True iff the union of the selected edges over all rounds connects every node.
bool check_window_connectivity(int m, std::span<const RoundSelection> rounds);

struct TheoryConstants {
  double tau = 0.0;
  double log_one_minus_tau = 0.0;
  double c0 = 0.0;  // may be +inf; see log_c0
  double log_c0 = 0.0;
};

/// tau = (1 - m^{-mB})^{1/B} and c0 = (80 m sqrt(ell) / (1 - tau))^2, evaluated in log space.
TheoryConstants theory_constants(int m, int B, double lipschitz);

/// Lower bound prod_i [1 - (1 - (t_i - 1)/(m - 1))^B]^{m-1} on the probability that
/// every pair communicates within B rounds.
double window_connectivity_probability_bound(int m, int B, const std::vector<int>& t);

}  // namespace sdfl
