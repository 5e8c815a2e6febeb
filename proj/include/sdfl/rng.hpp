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
#include <random>

namespace sdfl {

using Rng = std::mt19937_64;

/// Named purposes for independent random substreams derived from one run seed.
enum class Stream : std::uint64_t {
  kTruth = 1,
  kNodeData = 2,
  kGraph = 3,
  kNodeSchedule = 4,   // kappa draws
  kNodeSelection = 5,  // neighbour sampling, straggler latencies
  kNodeNoise = 6,      // Gaussian privacy noise
  kEncoding = 7,       // encoding matrix seeds
  kPartition = 8,
  kBaseline = 9,
  kPowerIteration = 10,
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Seed for substream (purpose, index) of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t index = 0);

Rng make_stream(std::uint64_t seed, Stream purpose, std::uint64_t index = 0);

}  // namespace sdfl
