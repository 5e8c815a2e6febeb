#!/usr/bin/env python3
# Copyright 2026 The SDFL Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Writes the bundled 200-sample logistic-regression fixture in LibSVM format.

Labels are -1/+1, drawn from a logistic model with a 4-sparse weight vector
over 24 features; roughly 40% of the feature entries are zero so the file
exercises the sparse grammar. Output is byte-stable for a given seed.
"""

import argparse
import math
import random

SAMPLES = 200
FEATURES = 24
SUPPORT = {2: 1.8, 7: -1.4, 11: 1.1, 19: -0.9}


def main():
  parser = argparse.ArgumentParser(description=__doc__)
  parser.add_argument("--out", default="tests/data/fixture200.svm")
  parser.add_argument("--seed", type=int, default=20240611)
  args = parser.parse_args()

  rng = random.Random(args.seed)
  lines = []
  for _ in range(SAMPLES):
    x = [0.0 if rng.random() < 0.4 else round(rng.gauss(0.0, 1.0), 4) for _ in range(FEATURES)]
    margin = sum(w * x[j] for j, w in SUPPORT.items())
    label = 1 if rng.random() < 1.0 / (1.0 + math.exp(-margin)) else -1
    pairs = " ".join(f"{j + 1}:{v:g}" for j, v in enumerate(x) if v != 0.0)
    lines.append(f"{label:+d} {pairs}".rstrip())
  with open(args.out, "w", encoding="ascii") as f:
    f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
  main()
