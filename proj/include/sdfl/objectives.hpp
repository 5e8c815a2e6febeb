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

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdfl/rng.hpp"
#include "sdfl/sparse_core.hpp"

namespace sdfl {

/// Private data of one node: m_i samples of dimension n.
struct NodeDataset {
  Matrix features;  // m_i x n
  Vector labels;    // m_i

  Index samples() const { return features.rows(); }
  Index dimension() const { return features.cols(); }
};

enum class ObjectiveKind { kLinearRegression, kLogisticRegression };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kLinearRegression;
  double lambda = 0.0;  // ridge weight, logistic only
};

const char* to_string(ObjectiveKind kind);

// ||A w - b||^2 / (2 m_i)
double linreg_value(const ModelVector& w, const NodeDataset& data);
// A^T (A w - b) / m_i
ModelVector linreg_grad(const ModelVector& w, const NodeDataset& data);

// (1/m_i) sum_t [ln(1 + e^{<a_t,w>}) - b_t <a_t,w>] + (lambda/2) ||w||^2
double logreg_value(const ModelVector& w, const NodeDataset& data, double lambda);
// (1/m_i) sum_t [sigmoid(<a_t,w>) - b_t] a_t + lambda w
ModelVector logreg_grad(const ModelVector& w, const NodeDataset& data, double lambda);

double objective_value(const ObjectiveSpec& spec, const ModelVector& w, const NodeDataset& data);
ModelVector objective_gradient(const ObjectiveSpec& spec, const ModelVector& w,
                               const NodeDataset& data);

/// Throws InvalidParameter unless every label is 0 or 1.
void require_binary_labels(const NodeDataset& data);

// --- synthetic sparse linear regression -------------------------------------

struct SyntheticProblem {
  std::vector<NodeDataset> nodes;
  ModelVector truth;  // exactly s nonzeros, magnitudes in [0.5, 2]
  Index sparsity = 0;
};

/// Gaussian A_i with m_i uniform in [range.first, range.second],
/// b_i = A_i w* + noise_scale * e_i. Per-node data comes from substreams
/// seeded by draws from `rng`.
SyntheticProblem generate_linreg_problem(Index n, Index s, int m, std::pair<int, int> sample_range,
                                         double noise_scale, Rng& rng);

/// Binary snapshot: "SDFLSNP1", u64 n, u64 s, u64 m, w*, then per node u64 m_i,
/// row-major features and labels (all f64, little-endian).
void write_snapshot(const SyntheticProblem& problem, std::ostream& os);
SyntheticProblem read_snapshot(std::istream& is);

// --- LibSVM ------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledData {
  Matrix features;
  Vector labels;  // mapped to {0, 1}
};

/// "label idx:val idx:val ..." with 1-based indices. Labels {-1,+1} and {1,2}
/// map to {0,1}; {0,1} is kept. Dimension = max index seen unless
/// `dimension` > 0 is given.
LabeledData parse_libsvm(std::istream& is, Index dimension = 0);
LabeledData load_libsvm(const std::string& path, Index dimension = 0);

/// Random balanced split: every sample lands in exactly one node, sizes differ by <= 1.
std::vector<NodeDataset> partition(const LabeledData& data, int m, Rng& rng);

// --- curvature constants -----------------------------------------------------

struct EigenEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest eigenvalue of A^T A by Lanczos iteration from a fixed-seed start.
EigenEstimate largest_gram_eigenvalue(const Matrix& A, double rel_tol = 1e-6, int max_iter = 500);

struct SigmaEstimate {
  double sigma = 0.0;
  bool converged = false;
};

/// c_knob * lambda_max(A_i^T A_i) / (m (2r + 0.1) d_i).
SigmaEstimate compute_sigma_i(const NodeDataset& data, int m, double rate, Index d_i,
                              double c_knob = 1.0);

struct LipschitzEstimate {
  double ell = 0.0;  // max over nodes
  std::vector<double> per_node;
  bool converged = true;
};

/// linreg: lambda_max(A^T A)/m_i;  logistic: lambda_max(A^T A)/(4 m_i) + lambda.
LipschitzEstimate estimate_lipschitz(const ObjectiveSpec& spec,
                                     const std::vector<NodeDataset>& nodes);

}  // namespace sdfl
