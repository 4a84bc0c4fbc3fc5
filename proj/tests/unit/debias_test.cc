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

#include "cfsa/debias.h"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "cfsa/cblist.h"
#include "cfsa/error.h"
#include "cfsa/fixtures.h"
#include "test_util.h"

namespace cfsa {
namespace {

using testing::MakeDataset;
using testing::ToyRow;

TEST(Removals, WorkedTuple) {
  const RemovalPlan p = ComputeRemovals({200, 300, 50, 450});
  EXPECT_EQ(p.fg_remove, 150u);
  EXPECT_EQ(p.dr_remove, 150u);
  const SubgroupCounts after = p.CountsAfter();
  // Both grant rates are exactly 1/7.
  EXPECT_EQ(after.fg * 7, after.favored());
  EXPECT_EQ(after.dg * 7, after.deprived());
  EXPECT_NEAR(p.real_dr_remove, 150.0, 1e-9);
}

TEST(Removals, AlreadyBalanced) {
  const RemovalPlan p = ComputeRemovals({100, 100, 50, 50});
  EXPECT_EQ(p.fg_remove, 0u);
  EXPECT_EQ(p.dr_remove, 0u);
  EXPECT_FALSE(p.inverted);
}

TEST(Removals, InvertedGivesZeroPlan) {
  const RemovalPlan p = ComputeRemovals({10, 90, 60, 40});
  EXPECT_TRUE(p.inverted);
  EXPECT_EQ(p.fg_remove + p.dr_remove, 0u);
}

TEST(Removals, EmptyGroupRejected) {
  EXPECT_THROW(ComputeRemovals({0, 0, 5, 5}), Error);
}

TEST(Removals, MatchesBruteForceOnRandomTuples) {
  Rng rng(101);
  int checked = 0;
  while (checked < 100) {
    const SubgroupCounts c{rng.Index(300) + 1, rng.Index(300), rng.Index(300), rng.Index(300) + 1};
    if (c.dg * c.favored() > c.fg * c.deprived()) continue;
    const RemovalPlan p = ComputeRemovals(c);
    const auto [a, b] = fixtures::OracleRemovals(c.fg, c.fr, c.dg, c.dr);
    const double solver = fixtures::GapAfter(c.fg, c.fr, c.dg, c.dr, p.fg_remove, p.dr_remove);
    const double oracle = fixtures::GapAfter(c.fg, c.fr, c.dg, c.dr, a, b);
    EXPECT_NEAR(solver, oracle, 1e-12)
        << c.fg << "," << c.fr << "," << c.dg << "," << c.dr << " solver (" << p.fg_remove
        << "," << p.dr_remove << ") oracle (" << a << "," << b << ")";
    ++checked;
  }
}

TEST(Counts, GapDefinition) {
  const SubgroupCounts c{30, 70, 10, 90};
  EXPECT_NEAR(c.GrantRateGap(), 0.2, 1e-15);
  EXPECT_EQ(SubgroupCounts({0, 0, 1, 1}).GrantRateGap(), 0.5);
}

// Hand-built rows: ids 0..n-1 with subgroup and cbtest given per row.
struct Scored {
  int s;
  int y;
  double cbtest;
  int cftest;
};

struct Built {
  Dataset data;
  CBList list;
};

Built Build(const std::vector<Scored>& spec, RowId id_offset = 0) {
  std::vector<ToyRow> rows;
  std::vector<BiasScore> scores;
  Rng rng(9);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    rows.push_back({{rng.Uniform(), rng.Uniform()}, spec[i].s, spec[i].y});
    BiasScore b;
    b.row_id = static_cast<RowId>(i) + id_offset;
    b.cbtest = spec[i].cbtest;
    b.cftest = spec[i].cftest;
    b.subgroup = SubgroupOf(spec[i].s, spec[i].y);
    scores.push_back(b);
  }
  Dataset d = MakeDataset(rows);
  if (id_offset != 0) {
    std::vector<RowId> ids = d.row_ids();
    for (auto& id : ids) id += id_offset;
    std::vector<double> f(d.values().begin(), d.values().end());
    d = Dataset(d.schema(), std::move(f), d.labels(), std::move(ids));
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.cbtest != b.cbtest ? a.cbtest > b.cbtest : a.row_id < b.row_id;
  });
  return {std::move(d), CBList(std::move(scores), 5, 0)};
}

CBList Merge(const CBList& a, const CBList& b) {
  std::vector<BiasScore> all = a.entries();
  all.insert(all.end(), b.entries().begin(), b.entries().end());
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.cbtest != y.cbtest ? x.cbtest > y.cbtest : x.row_id < y.row_id;
  });
  return CBList(std::move(all), 5, 0);
}

TEST(RebalanceTest, ZeroPlanIsIdentity) {
  const Built b = Build({{1, 1, 0.2, 0}, {1, 0, 0.1, 0}, {0, 1, 0.3, 0}, {0, 0, 0.4, 0}});
  RemovalPlan plan;
  plan.counts_before = SubgroupCounts::Of(b.data, "sex");
  const RebalanceResult r = Rebalance(b.data, "sex", b.list, plan);
  EXPECT_EQ(r.data, b.data);
  EXPECT_TRUE(r.removed_fg.empty());
  EXPECT_EQ(r.removed_dr.rows(), 0u);
}

TEST(RebalanceTest, RemovesTopRankedFg) {
  const Built b = Build({{1, 1, 0.9, 0}, {1, 1, 1.4, 1}, {1, 1, 0.2, 0}, {0, 0, 0.5, 0}});
  RemovalPlan plan;
  plan.fg_remove = 1;
  const RebalanceResult r = Rebalance(b.data, "sex", b.list, plan);
  EXPECT_EQ(r.removed_fg, std::vector<RowId>{1});
  EXPECT_EQ(r.data.rows(), 3u);
}

TEST(RebalanceTest, PlanExceedingGroupsIsRejected) {
  const Built b = Build({{1, 1, 0.9, 0}, {0, 0, 0.5, 0}});
  RemovalPlan plan;
  plan.fg_remove = 2;
  EXPECT_THROW(Rebalance(b.data, "sex", b.list, plan), Error);
}

TEST(RebalanceTest, RecountHitsPlannedCounts) {
  fixtures::FixtureSpec spec;
  spec.n = 1000;
  const Dataset d = fixtures::GenBiased(spec).data;
  const CBList list = BuildCBList(d, "sex", {});
  const SubgroupCounts before = SubgroupCounts::Of(d, "sex");
  const RemovalPlan plan = ComputeRemovals(before);
  const RebalanceResult r = Rebalance(d, "sex", list, plan);
  const SubgroupCounts after = SubgroupCounts::Of(r.data, "sex");
  EXPECT_EQ(after, plan.CountsAfter());
  EXPECT_EQ(r.removed_dr.rows(), plan.dr_remove);
  // Equal rates up to integer rounding of the removal counts.
  EXPECT_LE(after.GrantRateGap(), 1.0 / static_cast<double>(std::min(after.favored(),
                                                                     after.deprived())));
  for (std::size_t i = 0; i < r.removed_dr.rows(); ++i) EXPECT_EQ(r.removed_dr.label(i), 0);
}

Synthesizer Synth() { return MakeSynthesizer({}); }

TEST(Correct, NothingAboveOneLeavesDataUnchanged) {
  const Built b = Build({{1, 1, 0.9, 0}, {1, 0, 0.5, 0}, {0, 1, 0.3, 0}, {0, 0, 0.2, 0}});
  const CorrectionResult r =
      CorrectLabels(b.data, "sex", b.list, b.data.Subset(std::vector<std::size_t>{}), Synth(), 1,
                    100);
  EXPECT_EQ(r.data, b.data);
  EXPECT_EQ(r.report.synthesized_dg + r.report.synthesized_fr, 0u);
  EXPECT_TRUE(r.flipped.empty());
}

TEST(Correct, ThreeRemovedFiveCandidates) {
  // Eight DG rows (three with cbtest > 1), one row of each other group.
  std::vector<Scored> kept = {{1, 1, 0.1, 0}, {1, 0, 0.2, 0}, {0, 0, 0.3, 0}};
  for (int i = 0; i < 8; ++i) kept.push_back({0, 1, i < 3 ? 1.5 : 0.4, i < 3});
  const Built b = Build(kept);
  const Built removed = Build({{0, 0, 1.2, 1}, {0, 0, 1.3, 1}, {0, 0, 1.4, 1},
                               {0, 0, 1.1, 1}, {0, 0, 1.05, 1}},
                              100);
  const CorrectionResult r =
      CorrectLabels(b.data, "sex", Merge(b.list, removed.list), removed.data, Synth(), 1, 200);
  EXPECT_EQ(r.report.dg_removed, 3u);
  EXPECT_EQ(r.report.dr_flipped_to_dg, 3u);
  EXPECT_EQ(r.report.synthesized_dg, 0u);
  EXPECT_EQ(r.flipped, (std::vector<RowId>{102, 101, 100}));
  EXPECT_EQ(SubgroupCounts::Of(r.data, "sex").dg, 8u);
}

TEST(Correct, FourRemovedOneCandidate) {
  std::vector<Scored> kept = {{1, 1, 0.1, 0}, {1, 0, 0.2, 0}, {0, 0, 0.3, 0}};
  for (int i = 0; i < 10; ++i) kept.push_back({0, 1, i < 4 ? 1.5 : 0.4, i < 4});
  const Built b = Build(kept);
  const Built removed = Build({{0, 0, 1.2, 1}, {0, 0, 0.4, 0}}, 100);
  const SubgroupCounts before = SubgroupCounts::Of(b.data, "sex");
  const CorrectionResult r =
      CorrectLabels(b.data, "sex", Merge(b.list, removed.list), removed.data, Synth(), 1, 200);
  EXPECT_EQ(r.report.dr_flipped_to_dg, 1u);
  EXPECT_EQ(r.report.synthesized_dg, 3u);
  const SubgroupCounts after = SubgroupCounts::Of(r.data, "sex");
  EXPECT_EQ(after.dg, before.dg);
  EXPECT_EQ(after.fg, before.fg);
  EXPECT_EQ(after.fr, before.fr);
  EXPECT_EQ(after.dr, before.dr);
  std::size_t synthetic = 0;
  for (std::size_t i = 0; i < r.data.rows(); ++i) {
    if (r.data.synthetic(i)) {
      ++synthetic;
      EXPECT_GE(r.data.row_id(i), 200);
    }
  }
  EXPECT_EQ(synthetic, 3u);
}

TEST(Correct, RemovedFrIsSynthesized) {
  std::vector<Scored> kept = {{1, 1, 0.1, 0}, {0, 1, 0.2, 0}, {0, 0, 0.3, 0}};
  for (int i = 0; i < 6; ++i) kept.push_back({1, 0, i < 2 ? 1.7 : 0.4, i < 2});
  const Built b = Build(kept);
  const CorrectionResult r = CorrectLabels(
      b.data, "sex", b.list, b.data.Subset(std::vector<std::size_t>{}), Synth(), 1, 50);
  EXPECT_EQ(r.report.fr_removed, 2u);
  EXPECT_EQ(r.report.synthesized_fr, 2u);
  EXPECT_EQ(SubgroupCounts::Of(r.data, "sex").fr, 6u);
}

TEST(Pipeline, ReferenceFixtureRestoresEqualRates) {
  const Dataset d = fixtures::GenBiased({}).data;
  const CBList list = BuildCBList(d, "sex", {});
  const DebiasResult r = Debias(d, "sex", list, Synth(), 5);
  const SubgroupCounts c = r.report.final_counts;
  EXPECT_LE(c.GrantRateGap(), 1.0 / static_cast<double>(std::min(c.favored(), c.deprived())));
  EXPECT_GT(r.report.removal_plan.dr_remove, 0u);
  std::set<RowId> ids(r.data.row_ids().begin(), r.data.row_ids().end());
  EXPECT_EQ(ids.size(), r.data.rows());
  // Same inputs, same output.
  EXPECT_EQ(Debias(d, "sex", list, Synth(), 5).data, r.data);
}

}  // namespace
}  // namespace cfsa
