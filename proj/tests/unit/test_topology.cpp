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
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"
#include "sdfl/topology.hpp"

using namespace sdfl;

namespace {

TopologyGraph complete_graph(int m) {
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  return TopologyGraph(m, edges);
}

TopologyGraph cycle_graph(int m) {
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
  return TopologyGraph(m, edges);
}

// All size-k subsets of `items`.
void subsets(const std::vector<int>& items, int k, std::size_t start, std::vector<int>& cur,
             std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t p = start; p < items.size(); ++p) {
    cur.push_back(items[p]);
    subsets(items, k, p + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("graph construction") {
    const TopologyGraph two = complete_graph(2);
    CHECK(two.neighborhood(0) == std::vector<int>{0, 1});
    CHECK(two.neighborhood(1) == std::vector<int>{0, 1});
    CHECK(two.degree(0) == 1);
    CHECK_THROWS_AS(TopologyGraph(3, {{0, 1}}), InvalidParameter);
    CHECK_THROWS_AS(TopologyGraph(3, {{0, 3}, {1, 2}}), InvalidParameter);
    CHECK_THROWS_AS(TopologyGraph(2, {{1, 1}}), InvalidParameter);

    std::stringstream ss;
    cycle_graph(5).write_edge_list(ss);
    const TopologyGraph back = TopologyGraph::read_edge_list(5, ss);
    CHECK(back.edges() == cycle_graph(5).edges());
  }

  TEST_CASE("random graphs") {
    Rng rng = make_stream(3, Stream::kGraph);
    const TopologyGraph g2 = generate_random_graph(2, 1.0, rng);
    CHECK(g2.edges() == std::vector<Edge>{{0, 1}});
    const TopologyGraph g5 = generate_random_graph(5, 1.0, rng);
    CHECK(g5.edges().size() == 10u);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng r = make_stream(seed, Stream::kGraph);
      const TopologyGraph g = generate_random_graph(32, 0.3, r);
      CHECK(is_connected(32, g.edges()));
      for (int i = 0; i < 32; ++i) {
        CHECK(g.neighborhood(i).size() >= 2u);
        for (int j : g.neighborhood(i)) CHECK(g.adjacent(j, i));
      }
    }
    CHECK_THROWS_AS(generate_random_graph(1, 0.5, rng), InvalidParameter);
    CHECK_THROWS_AS(generate_random_graph(4, 0.0, rng), InvalidParameter);
    CHECK_THROWS_AS(generate_random_graph(200, 1e-6, rng), InvalidParameter);

    Rng a = make_stream(9, Stream::kGraph);
    Rng b = make_stream(9, Stream::kGraph);
    CHECK(generate_random_graph(16, 0.4, a).edges() == generate_random_graph(16, 0.4, b).edges());
  }

  TEST_CASE("participation_count") {
    CHECK(participation_count(5, 0.2) == 1);
    CHECK(participation_count(5, 0.2, 2) == 2);
    CHECK(participation_count(10, 0.5) == 5);
    CHECK(participation_count(3, 1.0) == 3);
    CHECK(participation_count(1, 0.2, 2) == 1);
    CHECK_THROWS_AS(participation_count(4, 0.0), InvalidParameter);
    CHECK_THROWS_AS(participation_count(4, 1.5), InvalidParameter);
  }

  TEST_CASE("select_neighbors") {
    Rng rng = make_stream(1, Stream::kNodeSelection, 0);
    const TopologyGraph g = complete_graph(6);
    const RoundSelection full = select_neighbors(g, 1.0, rng);
    for (int i = 0; i < 6; ++i) CHECK(full.members[static_cast<std::size_t>(i)] == g.neighborhood(i));

    // |N_i| = 5 at r = 0.2 keeps only the node itself.
    const RoundSelection lone = select_neighbors(complete_graph(5), 0.2, rng);
    for (int i = 0; i < 5; ++i) CHECK(lone.members[static_cast<std::size_t>(i)] == std::vector<int>{i});

    const TopologyGraph ring = cycle_graph(7);
    for (int trial = 0; trial < 50; ++trial) {
      const RoundSelection sel = select_neighbors(ring, 0.6, rng);
      for (int i = 0; i < 7; ++i) {
        const auto& mem = sel.members[static_cast<std::size_t>(i)];
        CHECK(sel.t(i) == 2);
        CHECK(std::is_sorted(mem.begin(), mem.end()));
        CHECK(std::find(mem.begin(), mem.end(), i) != mem.end());
        for (int j : mem) CHECK(ring.adjacent(i, j));
      }
    }
  }

  TEST_CASE("neighbour choice is uniform") {
    const TopologyGraph g = complete_graph(10);
    Rng rng = make_stream(5, Stream::kNodeSelection, 0);
    const int draws = 10000;
    std::vector<int> counts(10, 0);
    for (int k = 0; k < draws; ++k)
      for (int j : select_node_neighbors(g, 0, participation_count(10, 0.5), rng)) ++counts[static_cast<std::size_t>(j)];
    CHECK(counts[0] == draws);
    const double expected = draws * 4.0 / 9.0;
    double chi2 = 0.0;
    for (int j = 1; j < 10; ++j) chi2 += std::pow(counts[static_cast<std::size_t>(j)] - expected, 2) / expected;
    const boost::math::chi_squared dist(8.0);
    CHECK(chi2 < boost::math::quantile(dist, 0.999));
  }

  TEST_CASE("select_responders") {
    const TopologyGraph g = complete_graph(6);
    const Vector flat = Vector::Constant(6, 1.0);
    CHECK(select_node_responders(g, 3, flat, 3) == std::vector<int>{0, 1, 3});

    Vector row = Vector::Constant(6, 1.0);
    row[0] = std::numeric_limits<double>::infinity();
    CHECK(select_node_responders(g, 3, row, 5) == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(select_node_responders(g, 3, row, 6) == std::vector<int>{0, 1, 2, 3, 4, 5});

    Rng rng = make_stream(11, Stream::kNodeSelection, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector lat = sample_latency_row(g, 2, 1.0, rng);
      CHECK(lat[2] == 0.0);
      std::vector<int> order = {0, 1, 3, 4, 5};
      std::sort(order.begin(), order.end(), [&](int a, int b) { return lat[a] < lat[b]; });
      std::vector<int> want(order.begin(), order.begin() + 2);
      want.push_back(2);
      std::sort(want.begin(), want.end());
      CHECK(select_node_responders(g, 2, lat, 3) == want);
    }

    Matrix neg = Matrix::Zero(6, 6);
    neg(1, 2) = -1.0;
    CHECK_THROWS_AS(select_responders(g, neg, std::vector<int>(6, 2)), InvalidParameter);
  }

  TEST_CASE("mixing_matrix") {
    RoundSelection pair{{{0, 1}, {0, 1}}};
    CHECK(mixing_matrix(pair) == Matrix::Constant(2, 2, 0.5));

    RoundSelection solo{{{0}, {1}, {2}}};
    CHECK(mixing_matrix(solo) == Matrix::Identity(3, 3));

    RoundSelection mixed{{{0, 2}, {0, 1, 2}, {2}}};
    const Matrix A = mixing_matrix(mixed);
    for (int c = 0; c < 3; ++c) CHECK(A.col(c).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(A(2, 0) == 0.5);
    CHECK(A(1, 0) == 0.0);

    Rng rng = make_stream(2, Stream::kGraph);
    const TopologyGraph g = generate_random_graph(20, 0.3, rng);
    for (double r : {0.1, 0.3, 0.7, 1.0}) {
      const Matrix M = mixing_matrix(select_neighbors(g, r, rng));
      for (int c = 0; c < 20; ++c) CHECK(std::abs(M.col(c).sum() - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("expected mixing is doubly stochastic") {
    // Symmetric topologies with equal t_i; the expectation over every subset is exact.
    for (int m : {3, 4}) {
      const TopologyGraph g = cycle_graph(m);
      const int t = 2;
      Matrix expected = Matrix::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        std::vector<int> others;
        for (int j : g.neighborhood(i))
          if (j != i) others.push_back(j);
        std::vector<std::vector<int>> picks;
        std::vector<int> cur;
        subsets(others, t - 1, 0, cur, picks);
        for (const auto& p : picks) {
          expected(i, i) += 1.0 / t;
          for (int j : p) expected(j, i) += 1.0 / t;
        }
        expected.col(i) /= static_cast<double>(picks.size());
      }
      for (int k = 0; k < m; ++k) {
        CHECK(expected.col(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(expected.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("window connectivity") {
    const TopologyGraph g = complete_graph(8);
    std::vector<RoundSelection> rounds;
    Rng rng = make_stream(0, Stream::kNodeSelection, 0);
    rounds.push_back(select_neighbors(g, 1.0, rng));
    CHECK(check_window_connectivity(8, rounds));

    RoundSelection solo;
    for (int i = 0; i < 8; ++i) solo.members.push_back({i});
    std::vector<RoundSelection> lonely(5, solo);
    CHECK_FALSE(check_window_connectivity(8, lonely));

    int connected = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng r = make_stream(seed, Stream::kNodeSelection, 0);
      std::vector<RoundSelection> window;
      for (int b = 0; b < 20; ++b) window.push_back(select_neighbors(g, 0.5, r));
      if (check_window_connectivity(8, window)) ++connected;
    }
    CHECK(connected >= 99);

    const double bound = window_connectivity_probability_bound(8, 20, std::vector<int>(8, 4));
    CHECK(bound > 0.99);
    CHECK(bound <= 1.0);
  }

  TEST_CASE("theory constants") {
    const TheoryConstants small = theory_constants(2, 1, 1.0);
    CHECK(small.tau == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(small.c0 == doctest::Approx(409600.0).epsilon(1e-12));

    // 50-digit reference at sizes where double still resolves 1 - tau.
    using Big = boost::multiprecision::cpp_bin_float_50;
    for (int m : {2, 3, 4}) {
      for (int B : {1, 2, 3}) {
        for (double ell : {0.5, 1.0, 7.0}) {
          const TheoryConstants tc = theory_constants(m, B, ell);
          const Big x = boost::multiprecision::pow(Big(m), -Big(m) * B);
          const Big tau = boost::multiprecision::pow(Big(1) - x, Big(1) / B);
          const Big ratio = Big(80) * m * boost::multiprecision::sqrt(Big(ell)) / (Big(1) - tau);
          const double c0 = static_cast<double>(ratio * ratio);
          CHECK(tc.tau == doctest::Approx(static_cast<double>(tau)).epsilon(1e-12));
          CHECK(tc.c0 == doctest::Approx(c0).epsilon(1e-9));
          CHECK(tc.log_c0 == doctest::Approx(static_cast<double>(boost::multiprecision::log(ratio * ratio))).epsilon(1e-12));
          CHECK(tc.tau > 0.0);
          CHECK(tc.tau < 1.0);
        }
      }
    }

    // m^{mB} is far beyond double range; 1 - tau survives only in log space.
    const TheoryConstants big = theory_constants(32, 20, 1.0);
    using std::log;
    const double want_log_gap = -32.0 * 20.0 * log(32.0) - log(20.0);
    CHECK(std::isfinite(big.log_one_minus_tau));
    CHECK(big.log_one_minus_tau == doctest::Approx(want_log_gap).epsilon(1e-12));
    CHECK(big.tau > 0.0);
    CHECK(big.tau <= 1.0);
    CHECK(std::isfinite(big.log_c0));
    CHECK_THROWS_AS(theory_constants(1, 1, 1.0), InvalidParameter);
    CHECK_THROWS_AS(theory_constants(4, 0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(theory_constants(4, 2, 0.0), InvalidParameter);
  }
}
