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

#include "cfsa/synth.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cfsa/error.h"
#include "cfsa/fixtures.h"
#include "test_util.h"

namespace cfsa {
namespace {

struct Pt {
  double x, y;
};

double Cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain, counter-clockwise.
std::vector<Pt> Hull(std::vector<Pt> p) {
  std::sort(p.begin(), p.end(), [](const Pt& a, const Pt& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<Pt> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && Cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && Cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

bool InHull(const std::vector<Pt>& h, const Pt& q) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (Cross(h[i], h[(i + 1) % h.size()], q) < -1e-12) return false;
  }
  return true;
}

TEST(Allocation, LargestRemainderWithinOne) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> w(1 + rng.Index(8));
    for (auto& v : w) v = rng.Index(50);
    w[0] += 1;
    const std::size_t total = rng.Index(200);
    const auto alloc = LargestRemainder(w, total);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    ASSERT_EQ(alloc.size(), w.size());
    EXPECT_EQ(std::accumulate(alloc.begin(), alloc.end(), std::size_t{0}), total);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double quota = total * static_cast<double>(w[i]) / sum;
      EXPECT_GE(static_cast<double>(alloc[i]), std::floor(quota));
      EXPECT_LE(static_cast<double>(alloc[i]), std::floor(quota) + 1);
    }
  }
}

TEST(Allocation, TiesGoToLowerIndex) {
  const std::vector<std::size_t> w = {1, 1, 1};
  EXPECT_EQ(LargestRemainder(w, 2), (std::vector<std::size_t>{1, 1, 0}));
  EXPECT_EQ(LargestRemainder(w, 4), (std::vector<std::size_t>{2, 1, 1}));
}

TEST(KMeansTest, SeparatesTwoBlobs) {
  const Dataset d = fixtures::TwoBlobSubgroup(50, 3);
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < d.rows(); ++i) pts.push_back({d.at(i, 0), d.at(i, 1)});
  const KMeansResult r = KMeans(pts, 2, 5);
  for (std::size_t i = 1; i < 50; ++i) EXPECT_EQ(r.assignment[i], r.assignment[0]);
  for (std::size_t i = 51; i < 100; ++i) EXPECT_EQ(r.assignment[i], r.assignment[50]);
  EXPECT_NE(r.assignment[0], r.assignment[50]);
  const KMeansResult again = KMeans(pts, 2, 5);
  EXPECT_EQ(again.assignment, r.assignment);
  EXPECT_EQ(again.centroids, r.centroids);
}

TEST(ClusterCount, Default) {
  EXPECT_EQ(DefaultClusterCount(1), 1u);
  EXPECT_EQ(DefaultClusterCount(2), 1u);
  EXPECT_EQ(DefaultClusterCount(100), 8u);
  EXPECT_EQ(DefaultClusterCount(200), 10u);
}

TEST(Synthesize, ZeroRequested) {
  const Dataset d = fixtures::TwoBlobSubgroup(5, 1);
  EXPECT_EQ(Synthesize(d, "sex", 0, {}, 1000).rows(), 0u);
  EXPECT_EQ(Synthesize(d.Subset(std::vector<std::size_t>{0}), "sex", 0, {}, 1000).rows(), 0u);
}

TEST(Synthesize, TooFewRows) {
  const Dataset d = fixtures::TwoBlobSubgroup(5, 1);
  try {
    Synthesize(d.Subset(std::vector<std::size_t>{0}), "sex", 3, {}, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSynthesisInfeasible);
  }
}

TEST(Synthesize, IdenticalRowsAreCopied) {
  const Dataset d = testing::MakeDataset({{{0.3, 0.6}, 0, 1}, {{0.3, 0.6}, 0, 1}});
  const Dataset s = Synthesize(d, "sex", 5, {}, 10);
  ASSERT_EQ(s.rows(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s.at(i, 0), 0.3);
    EXPECT_EQ(s.at(i, 1), 0.6);
    EXPECT_EQ(s.at(i, 2), 0.0);
    EXPECT_EQ(s.label(i), 1);
    EXPECT_TRUE(s.synthetic(i));
    EXPECT_EQ(s.row_id(i), static_cast<RowId>(10 + i));
  }
}

TEST(Synthesize, MixedSubgroupRejected) {
  const Dataset d = testing::MakeDataset({{{0.3}, 0, 1}, {{0.4}, 1, 1}});
  EXPECT_THROW(Synthesize(d, "sex", 1, {}, 10), Error);
}

TEST(Synthesize, TwoBlobHullAndAllocation) {
  const Dataset d = fixtures::TwoBlobSubgroup(50, 3);
  std::vector<Pt> blob[2];
  for (std::size_t i = 0; i < d.rows(); ++i) blob[i < 50 ? 0 : 1].push_back({d.at(i, 0), d.at(i, 1)});
  const std::vector<Pt> hull[2] = {Hull(blob[0]), Hull(blob[1])};

  SynthConfig cfg;
  cfg.k_clusters = 2;
  cfg.seed = 17;
  SynthesisTrace trace;
  const Dataset s = Synthesize(d, "sex", 10, cfg, 1000, &trace);
  ASSERT_EQ(s.rows(), 10u);
  std::size_t per_blob[2] = {0, 0};
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const Pt q{s.at(i, 0), s.at(i, 1)};
    const bool in0 = InHull(hull[0], q), in1 = InHull(hull[1], q);
    EXPECT_NE(in0, in1) << i;
    ++per_blob[in0 ? 0 : 1];
    EXPECT_EQ(s.at(i, 2), 0.0);
    EXPECT_EQ(s.label(i), 1);
  }
  EXPECT_LE(std::abs(static_cast<int>(per_blob[0]) - 5), 1);
  EXPECT_LE(std::abs(static_cast<int>(per_blob[1]) - 5), 1);

  // The trace agrees with the largest-remainder split of retained sizes.
  std::vector<std::size_t> retained;
  for (const auto& r : trace.retained) retained.push_back(r.size());
  EXPECT_EQ(trace.allocation, LargestRemainder(retained, 10));
  for (const auto& smp : trace.samples) {
    EXPECT_EQ(trace.cluster_of[smp.base], smp.cluster);
    EXPECT_EQ(trace.cluster_of[smp.partner], smp.cluster);
    EXPECT_GE(smp.u, 0.0);
    EXPECT_LT(smp.u, 1.0);
  }
}

TEST(Synthesize, FilterDropsFarthestFifth) {
  const Dataset d = fixtures::TwoBlobSubgroup(50, 3);
  SynthConfig cfg;
  cfg.k_clusters = 2;
  SynthesisTrace trace;
  Synthesize(d, "sex", 4, cfg, 1000, &trace);
  for (const auto& r : trace.retained) EXPECT_EQ(r.size(), 40u);
}

TEST(Synthesize, Deterministic) {
  const Dataset d = fixtures::TwoBlobSubgroup(50, 3);
  SynthConfig cfg;
  cfg.seed = 99;
  EXPECT_EQ(Synthesize(d, "sex", 25, cfg, 500), Synthesize(d, "sex", 25, cfg, 500));
  cfg.seed = 100;
  const Dataset other = Synthesize(d, "sex", 25, cfg, 500);
  cfg.seed = 99;
  EXPECT_NE(other, Synthesize(d, "sex", 25, cfg, 500));
}

TEST(Config, Validation) {
  SynthConfig c;
  c.filter_fraction = 1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.neighbors = 0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace cfsa
