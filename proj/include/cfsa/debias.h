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

#ifndef CFSA_DEBIAS_H_
#define CFSA_DEBIAS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/cblist.h"
#include "cfsa/dataset.h"
#include "cfsa/synth.h"

namespace cfsa {

struct SubgroupCounts {
  std::size_t fg = 0;
  std::size_t fr = 0;
  std::size_t dg = 0;
  std::size_t dr = 0;

  static SubgroupCounts Of(const Dataset& d, std::string_view sensitive);
  std::size_t favored() const { return fg + fr; }
  std::size_t deprived() const { return dg + dr; }
  // |P(grant | favored) - P(grant | deprived)|; a group with no rows
  // contributes a rate of 0.
  double GrantRateGap() const;

  bool operator==(const SubgroupCounts&) const = default;
};

struct RemovalPlan {
  std::size_t fg_remove = 0;
  std::size_t dr_remove = 0;
  SubgroupCounts counts_before;
  // The real root x of the ratio-preserving quadratic (DR removals) before
  // integer rounding; 0 for the zero plan.
  double real_dr_remove = 0.0;
  // Set when the deprived grant rate already exceeds the favored one.
  bool inverted = false;

  SubgroupCounts CountsAfter() const {
    return {counts_before.fg - fg_remove, counts_before.fr, counts_before.dg,
            counts_before.dr - dr_remove};
  }
};

// Number of FG and DR rows to undersample so that both groups have equal
// grant rates while removals keep the favored:deprived size ratio. Solves
// the quadratic in the DR removal count, then settles on the integer pair
// with the smallest grant-rate gap; among equal gaps the smaller ratio
// residual |fg_remove*(DG+DR) - dr_remove*(FG+FR)| wins, then fewer removals.
// Returns the zero plan (inverted=true) when the deprived rate is higher.
RemovalPlan ComputeRemovals(const SubgroupCounts& counts);

struct RebalanceResult {
  Dataset data;
  // Removed DR rows, in CBList rank order.
  Dataset removed_dr;
  std::vector<RowId> removed_fg;
};

// Drops the plan.fg_remove highest-ranked FG rows and plan.dr_remove
// highest-ranked DR rows.
RebalanceResult Rebalance(const Dataset& train, std::string_view sensitive,
                          const CBList& cblist, const RemovalPlan& plan);

using Synthesizer =
    std::function<Dataset(const Dataset& subgroup, std::string_view sensitive,
                          std::size_t n_new, std::uint64_t seed, RowId first_id)>;

// Synthesize() with `base` and the per-call seed.
Synthesizer MakeSynthesizer(SynthConfig base);

struct DebiasReport {
  RemovalPlan removal_plan;
  std::size_t fr_removed = 0;
  std::size_t dg_removed = 0;
  std::size_t dr_flipped_to_dg = 0;
  std::size_t synthesized_dg = 0;
  std::size_t synthesized_fr = 0;
  SubgroupCounts final_counts;

  nlohmann::json ToJson() const;
};

struct CorrectionResult {
  Dataset data;
  DebiasReport report;
  std::vector<RowId> flipped;
};

// Removes FR and DG rows with cbtest > 1, re-inserts removed DR rows with
// cftest = 1 as DG (highest cbtest first, at most as many as DG rows
// removed), and synthesizes the remaining DG shortfall and every removed FR
// row. Synthetic rows get ids from first_id upward.
CorrectionResult CorrectLabels(const Dataset& rebalanced, std::string_view sensitive,
                               const CBList& cblist, const Dataset& removed_dr,
                               const Synthesizer& synth, std::uint64_t seed,
                               RowId first_id);

struct DebiasResult {
  Dataset data;
  DebiasReport report;
  std::vector<RowId> removed_fg;
  std::vector<RowId> removed_dr;
  std::vector<RowId> flipped;
};

// ComputeRemovals -> Rebalance -> CorrectLabels.
DebiasResult Debias(const Dataset& train, std::string_view sensitive, const CBList& cblist,
                    const Synthesizer& synth, std::uint64_t seed);

nlohmann::json ToJson(const SubgroupCounts& c);

}  // namespace cfsa

#endif  // CFSA_DEBIAS_H_
