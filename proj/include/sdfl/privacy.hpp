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

#include "sdfl/rng.hpp"
#include "sdfl/sparse_core.hpp"

namespace sdfl {

/// Gaussian-mechanism parameters for one node.
struct PrivacyParams {
  double epsilon = 0.5;
  double delta = 0.5;
  double sensitivity = 0.1;  // u_i; gradients are assumed bounded by u_i / 2
  bool enabled = true;

  /// Throws InvalidParameter unless epsilon > 0, 0 < delta < 1, sensitivity >= 0.
  void validate() const;
};

/// 2 ln(1.25 / delta) u^2 / epsilon^2, or 0 when disabled.
double gaussian_variance(const PrivacyParams& p);

/// n i.i.d. N(0, variance) draws. variance == 0 returns zeros without consuming rng.
ModelVector sample_noise(double variance, Index n, Rng& rng);

/// Rescales g onto the ball of radius u/2 if it lies outside; `violations` is
/// incremented whenever that happens.
ModelVector clip_gradient(const ModelVector& g, double sensitivity, std::uint64_t& violations);

struct StepGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  bool guaranteed = false;
};

/// Per communication step. Noise is added independently per node, so the
/// guarantee does not grow with the number of nodes.
StepGuarantee per_step_guarantee(const PrivacyParams& p);

struct PrivacySpend {
  std::uint64_t rounds_a = 0;
  double epsilon_total = 0.0;
  double delta_total_raw = 0.0;
  double delta_total_capped = 0.0;
};

/// Advanced composition over `a` noised communication rounds:
///   eps_total   = sqrt(2 a ln(1/delta)) eps + a eps (e^eps - 1)
///   delta_total = (a + 1) delta   (also reported capped at 1)
PrivacySpend compose_privacy(std::uint64_t a, const PrivacyParams& p);

/// Tracks completed noised rounds. Without noise no guarantee exists and
/// epsilon_total is reported as +inf.
class PrivacyAccountant {
 public:
  explicit PrivacyAccountant(PrivacyParams p);
  void set_rounds(std::uint64_t a);
  bool active() const { return active_; }
  PrivacySpend spend() const;

 private:
  PrivacyParams params_;
  bool active_;
  std::uint64_t rounds_ = 0;
};

}  // namespace sdfl
