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
#include "sdfl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace sdfl {

TopologyGraph::TopologyGraph(int m, const std::vector<Edge>& edges) : m_(m) {
  if (m < 1) throw InvalidParameter("graph needs at least one node");
  closed_.assign(static_cast<std::size_t>(m), {});
  for (int i = 0; i < m; ++i) closed_[static_cast<std::size_t>(i)].push_back(i);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m)
      throw InvalidParameter("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                             ") out of range");
    if (a == b) throw InvalidParameter("self loops are implicit; got edge on node " + std::to_string(a));
    closed_[static_cast<std::size_t>(a)].push_back(b);
    closed_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& nb : closed_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  if (!is_connected(m, edges)) throw InvalidParameter("graph is not connected");
}

bool TopologyGraph::adjacent(int i, int j) const {
  const auto& nb = neighborhood(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> TopologyGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < m_; ++i)
    for (int j : neighborhood(i))
      if (j > i) out.emplace_back(i, j);
  return out;
}

void TopologyGraph::write_edge_list(std::ostream& os) const {
  for (auto [i, j] : edges()) os << i << ' ' << j << '\n';
}

TopologyGraph TopologyGraph::read_edge_list(int m, std::istream& is) {
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int a = 0;
    int b = 0;
    if (!(ls >> a >> b)) throw InvalidParameter("edge list line " + std::to_string(line_no) + ": expected \"i j\"");
    edges.emplace_back(a, b);
  }
  return TopologyGraph(m, edges);
}

bool is_connected(int m, const std::vector<Edge>& edges) {
  if (m <= 1) return true;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int y : adj[static_cast<std::size_t>(x)]) {
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        ++visited;
        stack.push_back(y);
      }
    }
  }
  return visited == m;
}

TopologyGraph generate_random_graph(int m, double edge_prob, Rng& rng) {
  if (m < 2) throw InvalidParameter("generate_random_graph: m must be >= 2");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0))
    throw InvalidParameter("generate_random_graph: edge_prob must lie in (0, 1]");
  std::bernoulli_distribution coin(edge_prob);
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Edge> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    if (is_connected(m, edges)) return TopologyGraph(m, edges);
  }
  throw InvalidParameter("generate_random_graph: no connected graph after 1000 draws; increase edge_prob (was " +
                         std::to_string(edge_prob) + ")");
}

int participation_count(int neighborhood_size, double rate, int floor) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidParameter("participation rate must lie in (0, 1]");
  if (floor < 1) throw InvalidParameter("participation floor must be >= 1");
  const long t = std::max<long>(std::lround(rate * neighborhood_size), floor);
  return static_cast<int>(std::clamp<long>(t, 1, neighborhood_size));
}

std::vector<int> select_node_neighbors(const TopologyGraph& g, int i, int t, Rng& rng) {
  std::vector<int> others;
  for (int j : g.neighborhood(i))
    if (j != i) others.push_back(j);
  const int want = std::clamp(t - 1, 0, static_cast<int>(others.size()));
  // Partial Fisher-Yates: the first `want` slots are a uniform sample.
  for (int k = 0; k < want; ++k) {
    std::uniform_int_distribution<int> pick(k, static_cast<int>(others.size()) - 1);
    std::swap(others[static_cast<std::size_t>(k)], others[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> chosen(others.begin(), others.begin() + want);
  chosen.push_back(i);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

RoundSelection select_neighbors(const TopologyGraph& g, double rate, Rng& rng, int floor) {
  RoundSelection sel;
  sel.members.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const int t = participation_count(static_cast<int>(g.neighborhood(i).size()), rate, floor);
    sel.members.push_back(select_node_neighbors(g, i, t, rng));
  }
  return sel;
}

std::vector<int> select_node_responders(const TopologyGraph& g, int i, const Vector& latency_row,
                                        int t) {
  std::vector<int> others;
  for (int j : g.neighborhood(i))
    if (j != i) others.push_back(j);
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
    return latency_row[a] < latency_row[b] || (latency_row[a] == latency_row[b] && a < b);
  });
  const int want = std::clamp(t - 1, 0, static_cast<int>(others.size()));
  std::vector<int> chosen(others.begin(), others.begin() + want);
  chosen.push_back(i);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

RoundSelection select_responders(const TopologyGraph& g, const Matrix& latency,
                                 const std::vector<int>& t) {
  if (latency.rows() != g.size() || latency.cols() != g.size() ||
      static_cast<int>(t.size()) != g.size())
    throw InvalidParameter("select_responders: dimension mismatch");
  if ((latency.array() < 0.0).any()) throw InvalidParameter("select_responders: negative latency");
  RoundSelection sel;
  for (int i = 0; i < g.size(); ++i)
    sel.members.push_back(select_node_responders(g, i, latency.row(i).transpose(), t[static_cast<std::size_t>(i)]));
  return sel;
}

Vector sample_latency_row(const TopologyGraph& g, int i, double rate, Rng& rng) {
  if (!(rate > 0.0)) throw InvalidParameter("straggler latency rate must be > 0");
  Vector row = Vector::Constant(g.size(), std::numeric_limits<double>::infinity());
  std::exponential_distribution<double> expo(rate);
  for (int j : g.neighborhood(i)) row[j] = (j == i) ? 0.0 : expo(rng);
  return row;
}

Matrix mixing_matrix(const RoundSelection& sel) {
  const int m = sel.size();
  Matrix A = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double w = 1.0 / sel.t(i);
    for (int j : sel.members[static_cast<std::size_t>(i)]) A(j, i) = w;
  }
  return A;
}

bool check_window_connectivity(int m, std::span<const RoundSelection> rounds) {
  std::vector<Edge> edges;
  for (const auto& sel : rounds)
    for (int i = 0; i < sel.size(); ++i)
      for (int j : sel.members[static_cast<std::size_t>(i)])
        if (j != i) edges.emplace_back(i, j);
  return is_connected(m, edges);
}

TheoryConstants theory_constants(int m, int B, double lipschitz) {
  if (m < 2 || B < 1 || !(lipschitz > 0.0))
    throw InvalidParameter("theory_constants: need m >= 2, B >= 1, lipschitz > 0");
  const double log_x = -static_cast<double>(m) * B * std::log(static_cast<double>(m));  // log m^{-mB}
  TheoryConstants out;
  if (log_x > -700.0) {
    const double l = std::log1p(-std::exp(log_x)) / B;
    out.tau = std::exp(l);
    out.log_one_minus_tau = std::log(-std::expm1(l));
  } else {
    // 1 - (1 - x)^{1/B} = x / B + O(x^2) once x underflows.
    out.tau = 1.0;
    out.log_one_minus_tau = log_x - std::log(static_cast<double>(B));
  }
  const double log_numer = std::log(80.0 * m) + 0.5 * std::log(lipschitz);
  out.log_c0 = 2.0 * (log_numer - out.log_one_minus_tau);
  out.c0 = std::exp(out.log_c0);
  return out;
}

double window_connectivity_probability_bound(int m, int B, const std::vector<int>& t) {
  if (m < 2 || B < 1) throw InvalidParameter("probability bound: need m >= 2, B >= 1");
  double log_p = 0.0;
  for (int ti : t) {
    const double miss = std::pow(1.0 - static_cast<double>(ti - 1) / (m - 1), B);
    log_p += (m - 1) * std::log1p(-miss);
  }
  return std::exp(log_p);
}

}  // namespace sdfl
