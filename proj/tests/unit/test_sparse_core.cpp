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
#include <random>
#include <vector>

#include "doctest.h"
#include "sdfl/sparse_core.hpp"

using namespace sdfl;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

// Exhaustive best s-term approximation; lowest-index support wins ties.
Vector brute_force_projection(const Vector& v, Index s) {
  const Index n = v.size();
  double best = -1.0;
  Vector best_z = Vector::Zero(n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != static_cast<int>(std::min(s, n))) continue;
    double kept = 0.0;
    for (Index t = 0; t < n; ++t)
      if (mask & (1u << t)) kept += v[t] * v[t];
    if (kept > best) {
      best = kept;
      best_z.setZero();
      for (Index t = 0; t < n; ++t)
        if (mask & (1u << t)) best_z[t] = v[t];
    }
  }
  return best_z;
}

}  // namespace

TEST_SUITE("sparse_core") {
  TEST_CASE("hard_threshold examples") {
    CHECK(hard_threshold(vec({3.0, -1.0, 2.0}), SparsityBudget(2)) == vec({3.0, 0.0, 2.0}));
    CHECK(hard_threshold(vec({0.0, 0.0, 0.0}), SparsityBudget(1)) == vec({0.0, 0.0, 0.0}));
    CHECK(hard_threshold(vec({1.0, 1.0, 1.0}), SparsityBudget(2)) == vec({1.0, 1.0, 0.0}));
    CHECK(hard_threshold(vec({-5.0, 2.0}), SparsityBudget(5)) == vec({-5.0, 2.0}));
  }

  TEST_CASE("sparsity budget rejects zero") { CHECK_THROWS_AS(SparsityBudget(0), InvalidParameter); }

  TEST_CASE("hard_threshold is the exhaustive best s-term approximation") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> dim(1, 10);
    std::uniform_int_distribution<int> level(-3, 3);
    for (int trial = 0; trial < 400; ++trial) {
      const Index n = dim(rng);
      Vector v(n);
      // Small integer entries force many magnitude ties.
      for (Index t = 0; t < n; ++t) v[t] = level(rng);
      const Index s = std::uniform_int_distribution<Index>(1, n)(rng);
      const Vector z = hard_threshold(v, SparsityBudget(s));
      const Vector oracle = brute_force_projection(v, s);
      CHECK(count_nonzeros(z) <= s);
      CHECK((z - v).squaredNorm() == doctest::Approx((oracle - v).squaredNorm()));
      CHECK(z == oracle);
    }
  }

  TEST_CASE("hard_threshold properties") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
      Vector v(50);
      for (Index t = 0; t < v.size(); ++t) v[t] = normal(rng);
      const SparsityBudget s(7);
      const Vector z = hard_threshold(v, s);
      CHECK(hard_threshold(z, s) == z);
      CHECK(hard_threshold(2.5 * v, s) == 2.5 * z);
      for (Index t : support(z)) CHECK(z[t] == v[t]);
    }
  }

  TEST_CASE("project_columns") {
    CHECK(project_columns(Matrix::Identity(3, 3), SparsityBudget(1)) == Matrix::Identity(3, 3));
    Matrix ones = Matrix::Ones(2, 2);
    Matrix expect(2, 2);
    expect << 1, 1, 0, 0;
    CHECK(project_columns(ones, SparsityBudget(1)) == expect);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Matrix W(5, 3);
    for (Index r = 0; r < 5; ++r)
      for (Index c = 0; c < 3; ++c) W(r, c) = normal(rng);
    const Matrix P = project_columns(W, SparsityBudget(2));
    for (Index c = 0; c < 3; ++c) CHECK(P.col(c) == hard_threshold(W.col(c), SparsityBudget(2)));
  }

  TEST_CASE("norms") {
    CHECK(euclidean_norm(vec({3.0, 4.0})) == 5.0);
    CHECK(euclidean_norm(Vector::Zero(4)) == 0.0);
    Matrix M(2, 2);
    M << 1, 2, 2, 4;
    CHECK(frobenius_norm(M) == doctest::Approx(5.0).epsilon(1e-15));
  }

  TEST_CASE("sparse view and helpers") {
    const Vector v = vec({0.0, 1.5, 0.0, -2.0});
    const SparseView view = sparse_view(v);
    CHECK(view.indices == std::vector<Index>{1, 3});
    CHECK(view.values == std::vector<double>{1.5, -2.0});
    CHECK(count_nonzeros(v) == 2);
    CHECK(all_finite(v));
    Vector bad = v;
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(bad));
    CHECK_THROWS_AS(require_finite(bad, "w"), InvalidParameter);
  }

  TEST_CASE("multiply_sparse matches dense product") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    Matrix A(6, 40);
    for (Index r = 0; r < A.rows(); ++r)
      for (Index c = 0; c < A.cols(); ++c) A(r, c) = normal(rng);
    Vector w = Vector::Zero(40);
    w[3] = 1.0;
    w[17] = -2.0;
    CHECK((multiply_sparse(A, w) - A * w).norm() < 1e-12);
    Vector dense(40);
    for (Index t = 0; t < 40; ++t) dense[t] = normal(rng);
    CHECK((multiply_sparse(A, dense) - A * dense).norm() < 1e-12);
  }
}
