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
#include "sdfl/onebit_codec.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sdfl/rng.hpp"

namespace sdfl {

namespace {

constexpr std::uint8_t kMagic = 0xB1;
constexpr std::size_t kHeaderBytes = 1 + 4 + 8;

void check_gamma(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw InvalidParameter("gamma must be a finite value > 1, got " + std::to_string(gamma));
}

std::size_t packed_bytes(std::uint32_t d) { return (static_cast<std::size_t>(d) + 7) / 8; }

// Agreement of sign(y) with the message bits; sign(0) counts as -1.
Index count_agreement(const EncodedMessage& msg, const Vector& y) {
  Index agree = 0;
  for (Index r = 0; r < y.size(); ++r) {
    const int predicted = y[r] > 0.0 ? 1 : -1;
    agree += (predicted == msg.bit(static_cast<std::size_t>(r)));
  }
  return agree;
}

ModelVector restore_norm(const ModelVector& unit, double gamma, double norm) {
  ModelVector v = inverse_rescale(unit, gamma);
  const double vn = v.norm();
  if (!(vn > 0.0)) throw DecodeFailure("decoder produced the zero vector");
  return v * (norm / vn);
}

}  // namespace

// ---------------------------------------------------------------------------
// EncodingMatrix

EncodingMatrix::EncodingMatrix(Index d, Index n, std::uint64_t seed, double density)
    : seed_(seed), density_(density) {
  if (d < 1 || n < 1) throw InvalidParameter("encoding matrix needs d >= 1 and n >= 1");
  if (!(density > 0.0 && density <= 1.0))
    throw InvalidParameter("encoding matrix density must lie in (0, 1]");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(n)};
  Rng rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  phi_.resize(d, n);
  const bool dense = density >= 1.0;
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < n; ++c) {
      if (dense || unit(rng) < density) {
        phi_(r, c) = normal(rng);
      } else {
        phi_(r, c) = 0.0;
      }
    }
  }
}

EncodingMatrix EncodingMatrix::from_matrix(const Matrix& phi) {
  if (phi.rows() < 1 || phi.cols() < 1) throw InvalidParameter("empty encoding matrix");
  EncodingMatrix out;
  out.phi_ = phi;
  out.seed_ = 0;
  out.density_ = 1.0;
  return out;
}

Vector EncodingMatrix::apply(const Vector& v) const {
  if (v.size() != phi_.cols()) throw InvalidParameter("encoding matrix: dimension mismatch");
  const std::vector<Index> idx = support(v);
  Vector y = Vector::Zero(phi_.rows());
  for (Index r = 0; r < phi_.rows(); ++r) {
    double acc = 0.0;
    for (Index j : idx) acc += phi_(r, j) * v[j];
    y[r] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// EncodedMessage

EncodedMessage EncodedMessage::zero() { return EncodedMessage{}; }

int EncodedMessage::bit(std::size_t i) const {
  const std::uint8_t byte = packed[i / 8];
  return ((byte >> (7 - i % 8)) & 1u) ? 1 : -1;
}

void EncodedMessage::set_bit(std::size_t i, bool positive) {
  const auto mask = static_cast<std::uint8_t>(1u << (7 - i % 8));
  if (positive) {
    packed[i / 8] |= mask;
  } else {
    packed[i / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

// ---------------------------------------------------------------------------
// Rescaling

ModelVector log_rescale(const ModelVector& w, double gamma) {
  check_gamma(gamma);
  const double inv_log_gamma = 1.0 / std::log(gamma);
  ModelVector x(w.size());
  for (Index t = 0; t < w.size(); ++t) {
    const double a = w[t];
    if (a == 0.0) {
      x[t] = 0.0;
    } else {
      const double mag = std::log1p(std::abs(a)) * inv_log_gamma;
      x[t] = a > 0.0 ? mag : -mag;
    }
  }
  return x;
}

ModelVector inverse_rescale(const ModelVector& v, double gamma) {
  check_gamma(gamma);
  const double log_gamma = std::log(gamma);
  ModelVector w(v.size());
  for (Index t = 0; t < v.size(); ++t) {
    const double a = v[t];
    if (a == 0.0) {
      w[t] = 0.0;
    } else {
      const double mag = std::expm1(std::abs(a) * log_gamma);
      w[t] = a > 0.0 ? mag : -mag;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Encode / decode

EncodedMessage encode(const ModelVector& w, const EncodingMatrix& phi, double gamma) {
  check_gamma(gamma);
  if (w.size() != phi.cols())
    throw InvalidParameter("encode: model has dimension " + std::to_string(w.size()) +
                           " but encoding matrix has " + std::to_string(phi.cols()) + " columns");
  require_finite(w, "encode: model");
  const double norm = w.norm();
  if (!(norm > 0.0)) throw InvalidParameter("encode: cannot normalise the zero vector");

  const ModelVector x = log_rescale(w, gamma);
  const Vector y = phi.apply(x / x.norm());

  EncodedMessage msg;
  msg.norm = norm;
  msg.d = static_cast<std::uint32_t>(phi.rows());
  msg.packed.assign(packed_bytes(msg.d), 0);
  for (Index r = 0; r < y.size(); ++r) msg.set_bit(static_cast<std::size_t>(r), y[r] > 0.0);
  return msg;
}

Index sign_agreement(const EncodedMessage& msg, const EncodingMatrix& phi, const Vector& v) {
  if (msg.d != phi.rows()) throw InvalidParameter("sign_agreement: message/matrix size mismatch");
  return count_agreement(msg, phi.apply(v));
}

// Normalised binary iterative hard thresholding. Each step moves along
// phi^T (c - sign(phi v)) / 2, which is nonzero only on rows whose sign
// disagrees, keeps the s largest entries and rescales to unit norm. The
// iterate with the best sign agreement seen is returned.
DecodeResult decode_detailed(const EncodedMessage& msg, const EncodingMatrix& phi, double gamma,
                             SparsityBudget s, const DecoderOptions& opts) {
  check_gamma(gamma);
  DecodeResult result;
  const Index n = phi.cols();
  if (msg.is_zero()) {
    result.z = ModelVector::Zero(n);
    result.unit = ModelVector::Zero(n);
    return result;
  }
  if (msg.d != phi.rows())
    throw InvalidParameter("decode: message carries " + std::to_string(msg.d) +
                           " bits but encoding matrix has " + std::to_string(phi.rows()) + " rows");
  if (opts.max_iterations < 0 || !(opts.step_scale > 0.0))
    throw InvalidParameter("decode: invalid decoder options");

  const RowMajorMatrix& A = phi.matrix();
  const Index d = A.rows();

  Vector c(d);
  for (Index r = 0; r < d; ++r) c[r] = msg.bit(static_cast<std::size_t>(r));

  ModelVector v = hard_threshold(A.transpose() * c, s);
  double vn = v.norm();
  if (!(vn > 0.0)) throw DecodeFailure("decoder initialisation is the zero vector");
  v /= vn;

  Vector y = phi.apply(v);
  Index agree = count_agreement(msg, y);
  ModelVector best = v;
  Index best_agree = agree;

  const double step = opts.step_scale / static_cast<double>(d);
  int stall = 0;
  int it = 0;
  for (; it < opts.max_iterations && agree < d; ++it) {
    Vector grad = Vector::Zero(n);
    for (Index r = 0; r < d; ++r) {
      const int predicted = y[r] > 0.0 ? 1 : -1;
      if (predicted != static_cast<int>(c[r])) grad.noalias() += c[r] * A.row(r).transpose();
    }
    ModelVector next = hard_threshold(v + step * grad, s);
    vn = next.norm();
    if (!(vn > 0.0)) break;
    v = next / vn;
    y = phi.apply(v);
    agree = count_agreement(msg, y);
    if (agree > best_agree) {
      best = v;
      best_agree = agree;
      stall = 0;
    } else if (++stall >= opts.stall_iterations) {
      ++it;
      break;
    }
  }

  result.unit = best;
  result.agreement = best_agree;
  result.iterations = it;
  result.z = restore_norm(best, gamma, msg.norm);
  return result;
}

ModelVector decode(const EncodedMessage& msg, const EncodingMatrix& phi, double gamma,
                   SparsityBudget s, const DecoderOptions& opts) {
  return decode_detailed(msg, phi, gamma, s, opts).z;
}

BruteForceResult brute_force_decode(const EncodedMessage& msg, const EncodingMatrix& phi,
                                    double gamma, SparsityBudget s, int angle_steps) {
  check_gamma(gamma);
  const Index n = phi.cols();
  if (n > 12 || s.value() > 2)
    throw InvalidParameter("brute_force_decode is limited to n <= 12 and s <= 2");
  if (msg.is_zero()) {
    return {ModelVector::Zero(n), ModelVector::Zero(n), 0};
  }
  if (msg.d != phi.rows()) throw InvalidParameter("brute_force_decode: size mismatch");
  if (angle_steps < 4) throw InvalidParameter("brute_force_decode: angle_steps must be >= 4");

  BruteForceResult best;
  best.agreement = -1;
  auto consider = [&](const ModelVector& v) {
    const Index a = sign_agreement(msg, phi, v);
    if (a > best.agreement) {
      best.agreement = a;
      best.unit = v;
    }
  };

  for (Index j = 0; j < n; ++j) {
    for (double sgn : {1.0, -1.0}) {
      ModelVector v = ModelVector::Zero(n);
      v[j] = sgn;
      consider(v);
    }
  }
  if (s.value() >= 2) {
    for (Index j = 0; j < n; ++j) {
      for (Index k = j + 1; k < n; ++k) {
        for (int step = 0; step < angle_steps; ++step) {
          const double theta = 2.0 * std::numbers::pi * step / angle_steps;
          ModelVector v = ModelVector::Zero(n);
          v[j] = std::cos(theta);
          v[k] = std::sin(theta);
          consider(v);
        }
      }
    }
  }
  best.z = restore_norm(best.unit, gamma, msg.norm);
  return best;
}

// ---------------------------------------------------------------------------
// Sizes and wire format

std::uint64_t message_size_bits(const EncodedMessage& msg) { return 64 + msg.d; }

std::uint64_t dense_size_bits(Index n) { return 64 * static_cast<std::uint64_t>(n); }

std::uint64_t framed_size_bits(const EncodedMessage& msg) {
  return 8 * (kHeaderBytes + packed_bytes(msg.d));
}

std::uint64_t dense_framed_size_bits(Index n) {
  return 8 * (1 + 4) + 64 * static_cast<std::uint64_t>(n);
}

std::vector<std::uint8_t> serialize(const EncodedMessage& msg) {
  if (msg.packed.size() != packed_bytes(msg.d))
    throw CodecError("serialize: packed sign buffer does not match d");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + msg.packed.size());
  out.push_back(kMagic);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(msg.d >> (8 * b)));
  const auto bits = std::bit_cast<std::uint64_t>(msg.norm);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  out.insert(out.end(), msg.packed.begin(), msg.packed.end());
  return out;
}

EncodedMessage deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw CodecError("deserialize: truncated header");
  if (bytes[0] != kMagic) throw CodecError("deserialize: bad magic byte");
  EncodedMessage msg;
  for (int b = 0; b < 4; ++b) msg.d |= static_cast<std::uint32_t>(bytes[1 + b]) << (8 * b);
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[5 + b]) << (8 * b);
  msg.norm = std::bit_cast<double>(bits);
  if (!std::isfinite(msg.norm) || msg.norm < 0.0) throw CodecError("deserialize: invalid norm");
  const std::size_t body = packed_bytes(msg.d);
  if (bytes.size() != kHeaderBytes + body)
    throw CodecError("deserialize: expected " + std::to_string(kHeaderBytes + body) +
                     " bytes, got " + std::to_string(bytes.size()));
  msg.packed.assign(bytes.begin() + kHeaderBytes, bytes.end());
  return msg;
}

}  // namespace sdfl
