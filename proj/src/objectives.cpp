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
#include "sdfl/objectives.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace sdfl {

namespace {

void check_dims(const ModelVector& w, const NodeDataset& data) {
  if (w.size() != data.dimension())
    throw InvalidParameter("objective: model dimension " + std::to_string(w.size()) +
                           " does not match data dimension " + std::to_string(data.dimension()));
  if (data.labels.size() != data.samples())
    throw InvalidParameter("objective: label count does not match sample count");
  if (data.samples() == 0) throw InvalidParameter("objective: empty dataset");
}

// ln(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("snapshot: truncated stream");
  return value;
}

constexpr char kSnapshotMagic[8] = {'S', 'D', 'F', 'L', 'S', 'N', 'P', '1'};

}  // namespace

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kLinearRegression:
      return "linear_regression";
    case ObjectiveKind::kLogisticRegression:
      return "logistic_regression";
  }
  return "unknown";
}

double linreg_value(const ModelVector& w, const NodeDataset& data) {
  check_dims(w, data);
  const Vector r = multiply_sparse(data.features, w) - data.labels;
  return r.squaredNorm() / (2.0 * static_cast<double>(data.samples()));
}

ModelVector linreg_grad(const ModelVector& w, const NodeDataset& data) {
  check_dims(w, data);
  const Vector r = multiply_sparse(data.features, w) - data.labels;
  return data.features.transpose() * r / static_cast<double>(data.samples());
}

double logreg_value(const ModelVector& w, const NodeDataset& data, double lambda) {
  check_dims(w, data);
  const Vector z = multiply_sparse(data.features, w);
  double acc = 0.0;
  for (Index t = 0; t < z.size(); ++t) acc += softplus(z[t]) - data.labels[t] * z[t];
  return acc / static_cast<double>(data.samples()) + 0.5 * lambda * w.squaredNorm();
}

ModelVector logreg_grad(const ModelVector& w, const NodeDataset& data, double lambda) {
  check_dims(w, data);
  Vector z = multiply_sparse(data.features, w);
  for (Index t = 0; t < z.size(); ++t) z[t] = sigmoid(z[t]) - data.labels[t];
  ModelVector g = data.features.transpose() * z / static_cast<double>(data.samples());
  if (lambda != 0.0) g += lambda * w;
  return g;
}

double objective_value(const ObjectiveSpec& spec, const ModelVector& w, const NodeDataset& data) {
  return spec.kind == ObjectiveKind::kLinearRegression ? linreg_value(w, data)
                                                       : logreg_value(w, data, spec.lambda);
}

ModelVector objective_gradient(const ObjectiveSpec& spec, const ModelVector& w,
                               const NodeDataset& data) {
  return spec.kind == ObjectiveKind::kLinearRegression ? linreg_grad(w, data)
                                                       : logreg_grad(w, data, spec.lambda);
}

void require_binary_labels(const NodeDataset& data) {
  for (Index t = 0; t < data.labels.size(); ++t)
    if (data.labels[t] != 0.0 && data.labels[t] != 1.0)
      throw InvalidParameter("logistic regression needs labels in {0, 1}; sample " + std::to_string(t) +
                             " has " + std::to_string(data.labels[t]));
}

// ---------------------------------------------------------------------------

SyntheticProblem generate_linreg_problem(Index n, Index s, int m, std::pair<int, int> sample_range,
                                         double noise_scale, Rng& rng) {
  if (n < 1 || s < 1 || s > n) throw InvalidParameter("generate_linreg_problem: need 1 <= s <= n");
  if (m < 1) throw InvalidParameter("generate_linreg_problem: need m >= 1");
  if (sample_range.first < 1 || sample_range.second < sample_range.first)
    throw InvalidParameter("generate_linreg_problem: bad sample range");
  if (!(noise_scale >= 0.0)) throw InvalidParameter("generate_linreg_problem: noise_scale must be >= 0");

  SyntheticProblem problem;
  problem.sparsity = s;
  problem.truth = ModelVector::Zero(n);

  // Uniform support via partial shuffle, magnitudes uniform on [0.5, 2] with random sign.
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution positive(0.5);
  for (Index k = 0; k < s; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
    const double mag = magnitude(rng);
    problem.truth[idx[static_cast<std::size_t>(k)]] = positive(rng) ? mag : -mag;
  }

  std::vector<std::uint64_t> node_seeds(static_cast<std::size_t>(m));
  for (auto& seed : node_seeds) seed = rng();

  problem.nodes.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Rng node_rng = make_stream(node_seeds[static_cast<std::size_t>(i)], Stream::kNodeData,
                               static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<int> count(sample_range.first, sample_range.second);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int mi = count(node_rng);
    NodeDataset data;
    data.features.resize(mi, n);
    for (Index r = 0; r < mi; ++r)
      for (Index c = 0; c < n; ++c) data.features(r, c) = normal(node_rng);
    data.labels = multiply_sparse(data.features, problem.truth);
    for (Index r = 0; r < mi; ++r) data.labels[r] += noise_scale * normal(node_rng);
    problem.nodes.push_back(std::move(data));
  }
  return problem;
}

void write_snapshot(const SyntheticProblem& problem, std::ostream& os) {
  os.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  const auto n = static_cast<std::uint64_t>(problem.truth.size());
  write_raw<std::uint64_t>(os, n);
  write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(problem.sparsity));
  write_raw<std::uint64_t>(os, problem.nodes.size());
  for (Index t = 0; t < problem.truth.size(); ++t) write_raw<double>(os, problem.truth[t]);
  for (const auto& node : problem.nodes) {
    write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(node.samples()));
    for (Index r = 0; r < node.samples(); ++r)
      for (Index c = 0; c < node.dimension(); ++c) write_raw<double>(os, node.features(r, c));
    for (Index r = 0; r < node.samples(); ++r) write_raw<double>(os, node.labels[r]);
  }
  if (!os) throw ParseError("snapshot: write failed");
}

SyntheticProblem read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0)
    throw ParseError("snapshot: bad magic");
  const auto n = static_cast<Index>(read_raw<std::uint64_t>(is));
  const auto s = static_cast<Index>(read_raw<std::uint64_t>(is));
  const auto m = read_raw<std::uint64_t>(is);
  SyntheticProblem problem;
  problem.sparsity = s;
  problem.truth.resize(n);
  for (Index t = 0; t < n; ++t) problem.truth[t] = read_raw<double>(is);
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto mi = static_cast<Index>(read_raw<std::uint64_t>(is));
    NodeDataset node;
    node.features.resize(mi, n);
    node.labels.resize(mi);
    for (Index r = 0; r < mi; ++r)
      for (Index c = 0; c < n; ++c) node.features(r, c) = read_raw<double>(is);
    for (Index r = 0; r < mi; ++r) node.labels[r] = read_raw<double>(is);
    problem.nodes.push_back(std::move(node));
  }
  return problem;
}

// ---------------------------------------------------------------------------

LabeledData parse_libsvm(std::istream& is, Index dimension) {
  struct Row {
    double label;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  Index max_index = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return ParseError("libsvm line " + std::to_string(line_no) + ": " + why);
    };
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(token, &used);
      if (used != token.size()) throw fail("bad label '" + token + "'");
    } catch (const std::logic_error&) {
      throw fail("bad label '" + token + "'");
    }
    Index last = 0;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
        throw fail("expected idx:value, got '" + token + "'");
      long long idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoll(token.substr(0, colon), &used);
        if (used != colon) throw fail("bad index in '" + token + "'");
        const std::string vs = token.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) throw fail("bad value in '" + token + "'");
      } catch (const std::logic_error&) {
        throw fail("bad entry '" + token + "'");
      }
      if (idx < 1) throw fail("indices are 1-based, got " + std::to_string(idx));
      if (idx <= last) throw fail("indices must be increasing");
      if (!std::isfinite(val)) throw fail("non-finite value");
      last = static_cast<Index>(idx);
      max_index = std::max(max_index, last);
      row.entries.emplace_back(last - 1, val);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("libsvm: no samples");
  if (dimension > 0 && max_index > dimension)
    throw ParseError("libsvm: index " + std::to_string(max_index) + " exceeds dimension " +
                     std::to_string(dimension));
  const Index n = dimension > 0 ? dimension : max_index;
  if (n == 0) throw ParseError("libsvm: no features");

  std::set<double> distinct;
  for (const auto& r : rows) distinct.insert(r.label);
  auto within = [&](std::initializer_list<double> allowed) {
    return std::all_of(distinct.begin(), distinct.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  double offset = 0.0;
  double scale = 1.0;
  if (within({0.0, 1.0})) {
  } else if (within({-1.0, 1.0})) {
    offset = 1.0;
    scale = 0.5;
  } else if (within({1.0, 2.0})) {
    offset = -1.0;
  } else {
    throw ParseError("libsvm: labels must be {0,1}, {-1,+1} or {1,2}");
  }

  LabeledData out;
  out.features = Matrix::Zero(static_cast<Index>(rows.size()), n);
  out.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto ri = static_cast<Index>(r);
    out.labels[ri] = (rows[r].label + offset) * scale;
    for (auto [c, v] : rows[r].entries) out.features(ri, c) = v;
  }
  return out;
}

LabeledData load_libsvm(const std::string& path, Index dimension) {
  std::ifstream in(path);
  if (!in) throw ParseError("libsvm: cannot open " + path);
  return parse_libsvm(in, dimension);
}

std::vector<NodeDataset> partition(const LabeledData& data, int m, Rng& rng) {
  const Index total = data.features.rows();
  if (m < 1) throw InvalidParameter("partition: m must be >= 1");
  if (total < m) throw InvalidParameter("partition: fewer samples than nodes");
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  const Index base = total / m;
  const Index extra = total % m;
  std::vector<NodeDataset> nodes;
  nodes.reserve(static_cast<std::size_t>(m));
  Index cursor = 0;
  for (int i = 0; i < m; ++i) {
    const Index size = base + (i < extra ? 1 : 0);
    NodeDataset node;
    node.features.resize(size, data.features.cols());
    node.labels.resize(size);
    for (Index r = 0; r < size; ++r) {
      const Index src = order[static_cast<std::size_t>(cursor + r)];
      node.features.row(r) = data.features.row(src);
      node.labels[r] = data.labels[src];
    }
    cursor += size;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

// ---------------------------------------------------------------------------

EigenEstimate largest_gram_eigenvalue(const Matrix& A, double rel_tol, int max_iter) {
  EigenEstimate est;
  const Index n = A.cols();
  if (n == 0 || A.rows() == 0) {
    est.converged = true;
    return est;
  }
  Rng rng = make_stream(0x5D1F, Stream::kPowerIteration, static_cast<std::uint64_t>(n));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index t = 0; t < n; ++t) v[t] = normal(rng);
  v.normalize();

  // Lanczos on A^T A with full reorthogonalisation: the Krylov space of the
  // power method, but the top Ritz value converges even when the leading
  // eigenvalues cluster. Stops once the Ritz residual is below rel_tol * theta.
  const Index k_max = std::min<Index>(n, max_iter);
  Matrix Q(n, k_max);
  std::vector<double> alpha;
  std::vector<double> beta;
  Q.col(0) = v;
  for (Index k = 0; k < k_max; ++k) {
    Vector w = A.transpose() * (A * Q.col(k));
    alpha.push_back(Q.col(k).dot(w));
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    const double b = w.norm();
    est.iterations = static_cast<int>(k + 1);

    const Index size = k + 1;
    Vector diag = Eigen::Map<const Vector>(alpha.data(), size);
    Vector sub = Vector::Zero(std::max<Index>(size - 1, 1));
    for (Index t = 0; t + 1 < size; ++t) sub[t] = beta[static_cast<std::size_t>(t)];
    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    tri.computeFromTridiagonal(diag, sub.head(size - 1), Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()[size - 1];
    const double residual = b * std::abs(tri.eigenvectors()(size - 1, size - 1));
    est.value = std::max(theta, 0.0);
    if (theta <= 0.0 || residual <= rel_tol * theta || b <= 1e-14 * std::max(theta, 1.0) || size == n) {
      est.converged = true;
      return est;
    }
    if (k + 1 < k_max) Q.col(k + 1) = w / b;
    beta.push_back(b);
  }
  return est;
}

SigmaEstimate compute_sigma_i(const NodeDataset& data, int m, double rate, Index d_i, double c_knob) {
  if (data.samples() == 0) throw InvalidParameter("compute_sigma_i: empty dataset");
  if (m < 1 || d_i < 1 || !(rate > 0.0) || !(c_knob > 0.0))
    throw InvalidParameter("compute_sigma_i: invalid parameters");
  const EigenEstimate eig = largest_gram_eigenvalue(data.features);
  SigmaEstimate out;
  out.sigma = c_knob * eig.value / (static_cast<double>(m) * (2.0 * rate + 0.1) * static_cast<double>(d_i));
  out.converged = eig.converged;
  return out;
}

LipschitzEstimate estimate_lipschitz(const ObjectiveSpec& spec, const std::vector<NodeDataset>& nodes) {
  LipschitzEstimate out;
  for (const auto& node : nodes) {
    if (node.samples() == 0) throw InvalidParameter("estimate_lipschitz: empty dataset");
    const EigenEstimate eig = largest_gram_eigenvalue(node.features);
    out.converged = out.converged && eig.converged;
    const double mi = static_cast<double>(node.samples());
    const double li = spec.kind == ObjectiveKind::kLinearRegression ? eig.value / mi
                                                                    : eig.value / (4.0 * mi) + spec.lambda;
    out.per_node.push_back(li);
    out.ell = std::max(out.ell, li);
  }
  return out;
}

}  // namespace sdfl
