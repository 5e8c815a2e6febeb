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

// One-bit compressed model exchange.
//
// A sender log-rescales its sparse model, projects the unit-normalised result
// through a Gaussian encoding matrix and ships only the signs of the
// measurements together with the model norm. The receiver recovers a sparse
// direction consistent with the signs, undoes the log rescaling and restores
// the transmitted norm.
//
// Wire format (little-endian):
//   u8  magic 0xB1
//   u32 d
//   f64 norm
//   ceil(d/8) bytes of signs, MSB-first, 1 -> +1, 0 -> -1
// A ZERO message (model identically zero) has d = 0 and no sign bytes.

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdfl/sparse_core.hpp"

namespace sdfl {

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the solver ends on the zero vector; callers fall back to a cached estimate.
class DecodeFailure : public CodecError {
 public:
  using CodecError::CodecError;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// d x n matrix of i.i.d. standard normal entries, a `density` fraction of them nonzero.
/// Fully determined by (d, n, seed, density) so both ends can rebuild it.
class EncodingMatrix {
 public:
  EncodingMatrix(Index d, Index n, std::uint64_t seed, double density = 1.0);

  /// Wraps an explicit matrix (tests, identity encoders). seed() is 0.
  static EncodingMatrix from_matrix(const Matrix& phi);

  Index rows() const { return phi_.rows(); }
  Index cols() const { return phi_.cols(); }
  std::uint64_t seed() const { return seed_; }
  double density() const { return density_; }
  const RowMajorMatrix& matrix() const { return phi_; }

  /// phi * v for sparse v.
  Vector apply(const Vector& v) const;

 private:
  EncodingMatrix() = default;
  RowMajorMatrix phi_;
  std::uint64_t seed_ = 0;
  double density_ = 1.0;
};

struct EncodedMessage {
  double norm = 0.0;
  std::uint32_t d = 0;
  std::vector<std::uint8_t> packed;  // ceil(d/8) bytes

  static EncodedMessage zero();
  bool is_zero() const { return d == 0; }
  /// +1 or -1.
  int bit(std::size_t i) const;
  void set_bit(std::size_t i, bool positive);

  bool operator==(const EncodedMessage&) const = default;
};

struct DecoderOptions {
  int max_iterations = 100;
  /// Gradient step is step_scale / d.
  double step_scale = 2.0;
  /// Stop after this many iterations without an improvement in sign agreement.
  int stall_iterations = 10;
};

struct DecodeResult {
  ModelVector z;      // final estimate, ||z|| == msg.norm
  ModelVector unit;   // solver output before inverse rescaling, unit norm
  Index agreement = 0;  // #rows with sign(phi * unit) == bit
  int iterations = 0;
};

ModelVector log_rescale(const ModelVector& w, double gamma);
ModelVector inverse_rescale(const ModelVector& v, double gamma);

/// Throws InvalidParameter on zero w or dimension mismatch.
EncodedMessage encode(const ModelVector& w, const EncodingMatrix& phi, double gamma);

ModelVector decode(const EncodedMessage& msg, const EncodingMatrix& phi, double gamma,
                   SparsityBudget s, const DecoderOptions& opts = {});
DecodeResult decode_detailed(const EncodedMessage& msg, const EncodingMatrix& phi, double gamma,
                             SparsityBudget s, const DecoderOptions& opts = {});

/// Number of rows where sign(phi * v) matches the message bits.
Index sign_agreement(const EncodedMessage& msg, const EncodingMatrix& phi, const Vector& v);

struct BruteForceResult {
  ModelVector z;
  ModelVector unit;
  Index agreement = 0;
};

/// Exhaustive search over supports of size <= s (s <= 2, n <= 12) and a grid of
/// `angle_steps` directions per 2-support. Test oracle only.
BruteForceResult brute_force_decode(const EncodedMessage& msg, const EncodingMatrix& phi,
                                    double gamma, SparsityBudget s, int angle_steps = 720);

/// Idealised cost: 64-bit norm plus d sign bits.
std::uint64_t message_size_bits(const EncodedMessage& msg);
/// Cost of a dense double-precision vector.
std::uint64_t dense_size_bits(Index n);
/// Size of the serialised frame, in bits.
std::uint64_t framed_size_bits(const EncodedMessage& msg);
/// Frame for a dense exchange: u8 tag, u32 n, n f64.
std::uint64_t dense_framed_size_bits(Index n);

std::vector<std::uint8_t> serialize(const EncodedMessage& msg);
EncodedMessage deserialize(std::span<const std::uint8_t> bytes);

}  // namespace sdfl
