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
#include "sdfl/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sdfl {

void PrivacyParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidParameter("privacy: epsilon must be > 0, got " + std::to_string(epsilon));
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParameter("privacy: delta must lie in (0, 1), got " + std::to_string(delta));
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity))
    throw InvalidParameter("privacy: sensitivity must be >= 0");
}

double gaussian_variance(const PrivacyParams& p) {
  p.validate();
  if (!p.enabled) return 0.0;
  return 2.0 * std::log(1.25 / p.delta) * p.sensitivity * p.sensitivity / (p.epsilon * p.epsilon);
}

ModelVector sample_noise(double variance, Index n, Rng& rng) {
  if (!(variance >= 0.0)) throw InvalidParameter("sample_noise: variance must be >= 0");
  ModelVector xi = ModelVector::Zero(n);
  if (variance == 0.0) return xi;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (Index t = 0; t < n; ++t) xi[t] = normal(rng);
  return xi;
}

ModelVector clip_gradient(const ModelVector& g, double sensitivity, std::uint64_t& violations) {
  if (!(sensitivity > 0.0)) throw InvalidParameter("clip_gradient: sensitivity must be > 0");
  const double bound = 0.5 * sensitivity;
  const double norm = g.norm();
  if (norm <= bound) return g;
  ++violations;
  return g * (bound / norm);
}

StepGuarantee per_step_guarantee(const PrivacyParams& p) {
  p.validate();
  if (!p.enabled || gaussian_variance(p) == 0.0) return {};
  return {p.epsilon, p.delta, true};
}

PrivacySpend compose_privacy(std::uint64_t a, const PrivacyParams& p) {
  p.validate();
  const double ad = static_cast<double>(a);
  const double eps = p.epsilon;
  PrivacySpend spend;
  spend.rounds_a = a;
  spend.epsilon_total = std::sqrt(2.0 * ad * std::log(1.0 / p.delta)) * eps + ad * eps * std::expm1(eps);
  spend.delta_total_raw = (ad + 1.0) * p.delta;
  spend.delta_total_capped = std::min(spend.delta_total_raw, 1.0);
  return spend;
}

PrivacyAccountant::PrivacyAccountant(PrivacyParams p)
    : params_(p), active_(gaussian_variance(p) > 0.0) {}

void PrivacyAccountant::set_rounds(std::uint64_t a) { rounds_ = std::max(rounds_, a); }

PrivacySpend PrivacyAccountant::spend() const {
  if (!active_) {
    PrivacySpend none;
    none.rounds_a = rounds_;
    none.epsilon_total = std::numeric_limits<double>::infinity();
    none.delta_total_raw = 0.0;
    none.delta_total_capped = 0.0;
    return none;
  }
  return compose_privacy(rounds_, params_);
}

}  // namespace sdfl
