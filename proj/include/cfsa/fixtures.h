// Copyright 2026 The CFSA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic biased datasets with recorded ground truth, and brute-force
// oracles. Used by the test suites and the gen-fixture command.

#ifndef CFSA_FIXTURES_H_
#define CFSA_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cfsa/dataset.h"

namespace cfsa::fixtures {

struct FixtureSpec {
  std::size_t n = 2000;
  // Non-sensitive features.
  std::size_t features = 2;
  // Number of binary sensitive attributes (columns "sex", "race", then
  // "attr2", ...).
  std::size_t sensitive_attrs = 1;
  // Probability of the favored value, per attribute.
  double favored_share = 0.5;
  // Prior of the positive feature blob for a row favored on every attribute
  // and for a row deprived on every attribute; mixed rows interpolate.
  double favored_grant_rate = 0.6;
  double deprived_grant_rate = 0.4;
  // Fraction of deprived granted rows relabelled as rejected. They are drawn
  // uniformly from the borderline band: the `band` fraction of deprived
  // granted rows with the lowest feature score (raised to beta if smaller).
  double beta = 0.3;
  double band = 0.3;
  // Class blob means sit at 0.5 -/+ separation/2; per-feature noise sd.
  double separation = 0.3;
  double noise = 0.15;
  // Sd of Gaussian noise added to the score before the ground-truth
  // threshold, so labels are not a deterministic function of the features.
  double label_noise = 0.0;
  std::uint64_t seed = 7;

  void Validate() const;
};

struct Fixture {
  Dataset data;
  std::vector<int> true_labels;
  std::vector<std::uint8_t> bias_injected;
  // Per attribute: deprived rows granted before injection, and rows flipped.
  std::vector<std::size_t> deprived_granted_before;
  std::vector<std::size_t> injected_per_attr;
};

// Gaussian class blobs clipped to [0,1], labelled by the linear rule
// mean(x) > 0.5, then label bias injected into the deprived groups.
// Throws Error(kGeneration) for infeasible specs.
Fixture GenBiased(const FixtureSpec& spec);

std::string SensitiveName(std::size_t attr);

// row_id,true_label,bias_injected
void WriteTruthCsv(const Fixture& fixture, std::ostream& out);

// Exhaustive search over FG removals a <= FG and DR removals b <= DR that
// leave both groups non-empty. Objectives in order: smallest grant-rate gap,
// smallest |a*(DG+DR) - b*(FG+FR)|, fewest removals.
std::pair<std::size_t, std::size_t> OracleRemovals(std::size_t fg, std::size_t fr,
                                                   std::size_t dg, std::size_t dr);

// Grant-rate gap after removing a FG and b DR rows.
double GapAfter(std::size_t fg, std::size_t fr, std::size_t dg, std::size_t dr, std::size_t a,
                std::size_t b);

// Two well-separated 2-D blobs of deprived granted rows (schema: x0, x1,
// sex, label), blob 0 around (0.2, 0.2), blob 1 around (0.8, 0.8).
Dataset TwoBlobSubgroup(std::size_t per_blob, std::uint64_t seed);

}  // namespace cfsa::fixtures

#endif  // CFSA_FIXTURES_H_
