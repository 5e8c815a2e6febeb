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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdfl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense model parameters w_i. Length is fixed once built; entries must stay finite.
using ModelVector = Vector;

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Maximum number of nonzeros s allowed in a model (1 <= s).
class SparsityBudget {
 public:
  explicit SparsityBudget(Index s) : s_(s) {
    if (s < 1) throw InvalidParameter("sparsity budget must be >= 1, got " + std::to_string(s));
  }
  Index value() const { return s_; }

 private:
  Index s_;
};

/// Index/value read-out of the nonzero entries of a dense vector.
struct SparseView {
  std::vector<Index> indices;
  std::vector<double> values;
};

/// Keeps the s largest-magnitude entries of v and zeroes the rest.
///
/// Among equal magnitudes the lowest indices are kept, so the result is a
/// deterministic element of the (set-valued) Euclidean projection onto
/// {z : ||z||_0 <= s}. If s >= v.size() v is returned unchanged.
ModelVector hard_threshold(const ModelVector& v, SparsityBudget s);

/// Column-wise hard_threshold.
Matrix project_columns(const Matrix& W, SparsityBudget s);

double euclidean_norm(const Vector& v);
double frobenius_norm(const Matrix& W);

Index count_nonzeros(const Vector& v);
std::vector<Index> support(const Vector& v);
SparseView sparse_view(const Vector& v);

bool all_finite(const Vector& v);
/// Throws InvalidParameter naming `what` if v holds NaN or Inf.
void require_finite(const Vector& v, const std::string& what);

/// A * w, touching only the columns of A where w is nonzero.
Vector multiply_sparse(const Matrix& A, const Vector& w);

}  // namespace sdfl
