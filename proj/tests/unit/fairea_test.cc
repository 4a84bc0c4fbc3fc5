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

#include "cfsa/fairea.h"

#include <sstream>

#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include "../common/region_cases.h"
#include "cfsa/error.h"
#include "cfsa/fixtures.h"
#include "test_util.h"

namespace cfsa {
namespace {

class Quiet : public ::testing::Environment {
 public:
  void SetUp() override { spdlog::set_level(spdlog::level::err); }
};
const auto* const kQuiet = ::testing::AddGlobalTestEnvironment(new Quiet);

TEST(Majority, TiesToZero) {
  EXPECT_EQ(MajorityLabel(std::vector<int>{1, 0}), 0);
  EXPECT_EQ(MajorityLabel(std::vector<int>{1, 1, 0}), 1);
  EXPECT_EQ(MajorityLabel(std::vector<int>{}), 0);
}

TEST(Mutate, DegreeZeroIsIdentity) {
  Rng rng(1);
  const auto p = testing::RandomBits(100, rng);
  EXPECT_EQ(MutatePredictions(p, 0.0, 1, 5), p);
}

TEST(Mutate, DegreeOneIsAllMajority) {
  Rng rng(2);
  const auto p = testing::RandomBits(100, rng);
  EXPECT_EQ(MutatePredictions(p, 1.0, 1, 5), std::vector<int>(100, 1));
  EXPECT_EQ(MutatePredictions(p, 1.0, 0, 5), std::vector<int>(100, 0));
}

TEST(Mutate, PartialDegreeChangesAtMostQuota) {
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = testing::RandomBits(100, rng);
    const auto m = MutatePredictions(p, 0.3, 1, seed);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (m[i] != p[i]) {
        ++changed;
        EXPECT_EQ(m[i], 1);
      }
    }
    EXPECT_LE(changed, 30u);
    // On an all-minority input every selected position shows.
    const auto all = MutatePredictions(std::vector<int>(100, 0), 0.3, 1, seed);
    EXPECT_EQ(std::count(all.begin(), all.end(), 1), 30);
  }
}

TEST(Mutate, DegreeOutsideRange) {
  EXPECT_THROW(MutatePredictions(std::vector<int>{0, 1}, 1.5, 0, 1), Error);
}

struct Batch {
  std::vector<int> preds, labels, sens;
};

Batch MakeBatch(std::size_t n, std::uint64_t seed) {
  fixtures::FixtureSpec spec;
  spec.n = n;
  spec.seed = seed;
  const Dataset d = fixtures::GenBiased(spec).data;
  const TrainedModel m = FitLogistic(d, {});
  return {m.Predict(d), d.labels(), d.SensitiveValues("sex")};
}

TEST(Baseline, FullMutationIsDegenerate) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Batch b = MakeBatch(300, seed);
    BaselineOptions o;
    o.degrees = {1.0};
    o.repeats = 3;
    o.seed = seed;
    const double ones = std::count(b.labels.begin(), b.labels.end(), 1);
    const double majority_share =
        std::max(ones, static_cast<double>(b.labels.size()) - ones) / b.labels.size();
    for (auto f : kAllFairnessMetrics) {
      const auto base =
          BuildBaseline(b.preds, b.labels, b.sens, f, PerformanceMetric::kAccuracy, o);
      ASSERT_EQ(base.points.size(), 2u);
      EXPECT_EQ(base.points[1].bias, 0.0);
      EXPECT_EQ(base.points[1].performance, majority_share);
    }
  }
}

TEST(Baseline, OriginIgnoresRepeats) {
  const Batch b = MakeBatch(300, 4);
  BaselineOptions one, many;
  one.repeats = 1;
  many.repeats = 50;
  const auto a = BuildBaseline(b.preds, b.labels, b.sens, FairnessMetric::kSpd,
                               PerformanceMetric::kAccuracy, one);
  const auto c = BuildBaseline(b.preds, b.labels, b.sens, FairnessMetric::kSpd,
                               PerformanceMetric::kAccuracy, many);
  EXPECT_EQ(a.origin(), c.origin());
  EXPECT_EQ(a.degrees.front(), 0.0);
}

TEST(Baseline, PointsReplayFromStoredSeeds) {
  const Batch b = MakeBatch(300, 5);
  BaselineOptions o;
  o.repeats = 7;
  o.seed = 1234;
  o.threads = 3;
  const auto base = BuildBaseline(b.preds, b.labels, b.sens, FairnessMetric::kSpd,
                                  PerformanceMetric::kMcc, o);
  const int majority = MajorityLabel(b.labels);
  ASSERT_EQ(base.samples.size(), o.degrees.size() * o.repeats);
  ASSERT_EQ(base.points.size(), o.degrees.size() + 1);
  for (std::size_t d = 0; d < o.degrees.size(); ++d) {
    double bias = 0, perf = 0;
    for (std::size_t r = 0; r < o.repeats; ++r) {
      const auto& s = base.samples[d * o.repeats + r];
      EXPECT_EQ(s.seed, MutationSeed(o.seed, d, r));
      const auto m = MutatePredictions(b.preds, o.degrees[d], majority, s.seed);
      const double spd = Spd(m, b.labels, b.sens);
      const double mcc = *Performance(m, b.labels).mcc;
      EXPECT_EQ(*s.bias, spd);
      EXPECT_EQ(*s.performance, mcc);
      bias += spd;
      perf += mcc;
    }
    EXPECT_NEAR(base.points[d + 1].bias, bias / o.repeats, 1e-15);
    EXPECT_NEAR(base.points[d + 1].performance, perf / o.repeats, 1e-15);
  }
}

TEST(Baseline, UndefinedSamplesAreDroppedWithWarning) {
  const Batch b = MakeBatch(300, 6);
  BaselineOptions o;
  o.degrees = {0.5, 1.0};
  o.repeats = 2;
  const auto base = BuildBaseline(b.preds, b.labels, b.sens, FairnessMetric::kSpd,
                                  PerformanceMetric::kPrecision, o);
  // Precision is undefined once every prediction is the majority label 0.
  if (MajorityLabel(b.labels) == 0) {
    EXPECT_EQ(base.points.size(), 2u);
    EXPECT_FALSE(base.warnings.empty());
  }
  std::ostringstream csv;
  WriteSamplesCsv(base, csv);
  EXPECT_NE(csv.str().find("spd,precision,1,0,"), std::string::npos);
}

TEST(Options, Validation) {
  BaselineOptions o;
  o.repeats = 0;
  EXPECT_THROW(o.Validate(), Error);
  o = {};
  o.degrees = {0.5, 0.2};
  EXPECT_THROW(o.Validate(), Error);
  o.degrees = {0.0};
  EXPECT_THROW(o.Validate(), Error);
}

TEST(Regions, HandConstructedCases) {
  for (const auto& c : testing::RegionCases()) {
    const MitigationOutcome o = Classify(c.point, c.baseline);
    EXPECT_EQ(o.region, c.expected) << c.name;
    if (c.expected_hat >= 0) {
      ASSERT_TRUE(o.baseline_performance.has_value()) << c.name;
      EXPECT_EQ(*o.baseline_performance, c.expected_hat) << c.name;
      EXPECT_EQ(InterpolatePerformance(c.baseline, c.point.bias), c.expected_hat) << c.name;
    } else {
      EXPECT_FALSE(o.baseline_performance.has_value()) << c.name;
    }
  }
}

TEST(Regions, WorkedInterpolation) {
  const std::vector<TradeoffPoint> base = {{0.2, 0.9}, {0.1, 0.8}, {0.0, 0.7}};
  const MitigationOutcome o = Classify({0.05, 0.78}, base);
  EXPECT_EQ(o.region, Region::kGood);
  EXPECT_NEAR(*o.baseline_performance, 0.75, 1e-12);
  EXPECT_EQ(Classify({0.1, 0.92}, base).region, Region::kWinWin);
  EXPECT_EQ(Classify({0.25, 0.91}, base).region, Region::kInverted);
}

TEST(Regions, DegenerateBaseline) {
  const std::vector<TradeoffPoint> same = {{0.2, 0.8}, {0.2, 0.8}};
  const std::vector<TradeoffPoint> single = {{0.2, 0.8}};
  for (const auto& b : {same, single}) {
    try {
      Classify({0.1, 0.7}, b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kClassification);
    }
  }
}

TEST(Regions, BeatsBaseline) {
  EXPECT_TRUE(BeatsBaseline(Region::kWinWin));
  EXPECT_TRUE(BeatsBaseline(Region::kGood));
  EXPECT_FALSE(BeatsBaseline(Region::kInverted));
  EXPECT_FALSE(BeatsBaseline(Region::kPoor));
  EXPECT_FALSE(BeatsBaseline(Region::kLoseLose));
}

}  // namespace
}  // namespace cfsa
