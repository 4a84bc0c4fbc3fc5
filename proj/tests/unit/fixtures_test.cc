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

#include "cfsa/fixtures.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cfsa/debias.h"
#include "cfsa/error.h"

namespace cfsa::fixtures {
namespace {

TEST(Gen, UnbiasedEqualRatesWithinThreeSigma) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FixtureSpec spec;
    spec.beta = 0.0;
    spec.favored_grant_rate = spec.deprived_grant_rate = 0.5;
    spec.seed = seed;
    const Fixture fx = GenBiased(spec);
    const SubgroupCounts c = SubgroupCounts::Of(fx.data, "sex");
    const double p = static_cast<double>(c.fg + c.dg) / static_cast<double>(fx.data.rows());
    const double sigma = std::sqrt(p * (1 - p) * (1.0 / c.favored() + 1.0 / c.deprived()));
    EXPECT_LT(c.GrantRateGap(), 3 * sigma) << seed;
    EXPECT_EQ(fx.injected_per_attr[0], 0u);
  }
}

TEST(Gen, FlipCountMatchesBeta) {
  const Fixture fx = GenBiased({});
  ASSERT_EQ(fx.data.rows(), 2000u);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < fx.data.rows(); ++i) {
    if (fx.bias_injected[i]) {
      ++flipped;
      EXPECT_EQ(fx.true_labels[i], 1);
      EXPECT_EQ(fx.data.label(i), 0);
    } else {
      EXPECT_EQ(fx.true_labels[i], fx.data.label(i));
    }
  }
  const double target = 0.3 * static_cast<double>(fx.deprived_granted_before[0]);
  EXPECT_LE(std::abs(static_cast<double>(flipped) - target), 1.0);
  EXPECT_EQ(flipped, fx.injected_per_attr[0]);
}

TEST(Gen, InjectedRowsAreDeprived) {
  const Fixture fx = GenBiased({});
  const auto s = fx.data.SensitiveValues("sex");
  for (std::size_t i = 0; i < fx.data.rows(); ++i) {
    if (fx.bias_injected[i]) EXPECT_EQ(s[i], 0);
  }
}

TEST(Gen, Deterministic) {
  FixtureSpec spec;
  spec.sensitive_attrs = 2;
  const Fixture a = GenBiased(spec), b = GenBiased(spec);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.bias_injected, b.bias_injected);
  spec.seed = 8;
  EXPECT_NE(GenBiased(spec).data, a.data);
}

TEST(Gen, Schema) {
  FixtureSpec spec;
  spec.sensitive_attrs = 3;
  spec.features = 4;
  const Fixture fx = GenBiased(spec);
  EXPECT_EQ(fx.data.feature_names(),
            (std::vector<std::string>{"x0", "x1", "x2", "x3", "sex", "race", "attr2"}));
  EXPECT_EQ(SensitiveName(0), "sex");
  EXPECT_EQ(SensitiveName(1), "race");
}

TEST(Gen, InfeasibleSpecs) {
  FixtureSpec spec;
  spec.beta = 1.5;
  EXPECT_THROW(GenBiased(spec), Error);
  spec = {};
  spec.n = 1;
  try {
    GenBiased(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGeneration);
  }
  spec = {};
  spec.favored_share = 1.0;
  EXPECT_THROW(GenBiased(spec), Error);
}

TEST(Gen, TruthCsv) {
  FixtureSpec spec;
  spec.n = 50;
  const Fixture fx = GenBiased(spec);
  std::ostringstream out;
  WriteTruthCsv(fx, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "row_id,true_label,bias_injected");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 50u);
}

TEST(Oracle, WorkedTuple) {
  const auto [a, b] = OracleRemovals(200, 300, 50, 450);
  EXPECT_EQ(a, 150u);
  EXPECT_EQ(b, 150u);
  // Both sides of the ratio condition equal 1/7.
  EXPECT_EQ((200 - a) * 7, 200 - a + 300);
  EXPECT_EQ(50 * 7, 50 + 450 - b);
  EXPECT_EQ(GapAfter(200, 300, 50, 450, a, b), 0.0);
}

TEST(Oracle, BalancedIsZero) {
  EXPECT_EQ(OracleRemovals(100, 100, 50, 50), (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(Oracle, AgreesWithSolver) {
  for (const SubgroupCounts c : {SubgroupCounts{40, 60, 10, 90}, SubgroupCounts{7, 3, 2, 9},
                                 SubgroupCounts{120, 80, 30, 170}}) {
    const RemovalPlan p = ComputeRemovals(c);
    const auto [a, b] = OracleRemovals(c.fg, c.fr, c.dg, c.dr);
    EXPECT_NEAR(GapAfter(c.fg, c.fr, c.dg, c.dr, p.fg_remove, p.dr_remove),
                GapAfter(c.fg, c.fr, c.dg, c.dr, a, b), 1e-12);
  }
}

TEST(TwoBlob, Layout) {
  const Dataset d = TwoBlobSubgroup(20, 1);
  ASSERT_EQ(d.rows(), 40u);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(d.label(i), 1);
    EXPECT_EQ(d.at(i, 2), 0.0);
    const double centre = i < 20 ? 0.2 : 0.8;
    EXPECT_LT(std::abs(d.at(i, 0) - centre), 0.3);
  }
}

}  // namespace
}  // namespace cfsa::fixtures
