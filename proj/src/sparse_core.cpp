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
#include "sdfl/sparse_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdfl {

ModelVector hard_threshold(const ModelVector& v, SparsityBudget s) {
  const Index n = v.size();
  const Index keep = s.value();
  if (keep >= n) return v;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Strict total order: larger magnitude first, then lower index.
  auto ranks_before = [&v](Index a, Index b) {
    const double fa = std::abs(v[a]);
    const double fb = std::abs(v[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + keep, order.end(), ranks_before);

  ModelVector out = ModelVector::Zero(n);
  for (Index k = 0; k < keep; ++k) {
    const Index idx = order[static_cast<std::size_t>(k)];
    out[idx] = v[idx];
  }
  return out;
}

Matrix project_columns(const Matrix& W, SparsityBudget s) {
  Matrix out(W.rows(), W.cols());
  for (Index j = 0; j < W.cols(); ++j) out.col(j) = hard_threshold(W.col(j), s);
  return out;
}

double euclidean_norm(const Vector& v) { return v.norm(); }

double frobenius_norm(const Matrix& W) { return W.norm(); }

Index count_nonzeros(const Vector& v) {
  Index nnz = 0;
  for (Index i = 0; i < v.size(); ++i) nnz += (v[i] != 0.0);
  return nnz;
}

std::vector<Index> support(const Vector& v) {
  std::vector<Index> idx;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) idx.push_back(i);
  return idx;
}

SparseView sparse_view(const Vector& v) {
  SparseView view;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      view.indices.push_back(i);
      view.values.push_back(v[i]);
    }
  }
  return view;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw InvalidParameter(what + " contains non-finite entries");
}

Vector multiply_sparse(const Matrix& A, const Vector& w) {
  if (A.cols() != w.size()) throw InvalidParameter("multiply_sparse: dimension mismatch");
  const std::vector<Index> idx = support(w);
  // Dense product is cheaper once most columns are touched anyway.
  if (static_cast<Index>(idx.size()) * 4 > w.size()) return A * w;
  Vector out = Vector::Zero(A.rows());
  for (Index j : idx) out.noalias() += w[j] * A.col(j);
  return out;
}

}  // namespace sdfl
