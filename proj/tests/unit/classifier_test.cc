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

#include "cfsa/classifier.h"

#include <cmath>

#include <gtest/gtest.h>

#include "cfsa/error.h"
#include "test_util.h"

namespace cfsa {
namespace {

using testing::MakeDataset;
using testing::ToyRow;

Dataset Separable() {
  std::vector<ToyRow> rows;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const int y = i % 2;
    const double c = y ? 0.8 : 0.2;
    rows.push_back({{c + 0.1 * (rng.Uniform() - 0.5), c + 0.1 * (rng.Uniform() - 0.5)}, 0, y});
  }
  return MakeDataset(rows);
}

double HandSigmoid(const std::vector<double>& w, double b, std::span<const double> x) {
  double z = b;
  for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
  return 1.0 / (1.0 + std::exp(-z));
}

TEST(Logistic, SeparableToyFitsPerfectly) {
  const Dataset d = Separable();
  const TrainedModel m = FitLogistic(d, {});
  const auto preds = m.Predict(d);
  for (std::size_t i = 0; i < d.rows(); ++i) EXPECT_EQ(preds[i], d.label(i)) << i;
}

TEST(Logistic, IdenticalFeaturesGiveHalf) {
  std::vector<ToyRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({{0.4, 0.4}, 0, i % 2});
  const TrainedModel m = FitLogistic(MakeDataset(rows), {});
  for (double a : {0.0, 0.4, 1.0}) {
    const std::vector<double> x = {a, 1.0 - a, 0.0};
    EXPECT_NEAR(m.PredictProba(x)[1], 0.5, 0.05);
  }
}

TEST(Logistic, SingleClassIsDegenerate) {
  std::vector<ToyRow> rows;
  for (int i = 0; i < 5; ++i) rows.push_back({{0.1 * i}, 0, 1});
  try {
    FitLogistic(MakeDataset(rows), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateTraining);
  }
}

TEST(Logistic, GradientMatchesFiniteDifference) {
  const Dataset d = testing::RandomDataset(60, 3, 17);
  const std::vector<double> w = {0.3, -0.7, 0.2, 0.5};
  const double b = -0.1, l2 = 0.01, h = 1e-6;
  const auto g = LogisticGradient(d, w, b, l2);
  ASSERT_EQ(g.size(), w.size() + 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    auto wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd = (LogisticLoss(d, wp, b, l2) - LogisticLoss(d, wm, b, l2)) / (2 * h);
    EXPECT_NEAR(g[j], fd, 1e-6) << j;
  }
  const double fd =
      (LogisticLoss(d, w, b + h, l2) - LogisticLoss(d, w, b - h, l2)) / (2 * h);
  EXPECT_NEAR(g.back(), fd, 1e-6);
}

TEST(Logistic, LossIsMonotoneAtSmallStep) {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 300;
  std::vector<double> trace;
  FitLogistic(testing::RandomDataset(200, 4, 19), cfg, &trace);
  ASSERT_EQ(trace.size(), 301u);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-15);
}

TEST(Logistic, DeterministicRefit) {
  const Dataset d = testing::RandomDataset(100, 3, 23);
  EXPECT_EQ(FitLogistic(d, {}), FitLogistic(d, {}));
}

TEST(Predict, ZeroWeightsGiveHalf) {
  const TrainedModel m("logistic", {0.0, 0.0}, 0.0);
  const std::vector<double> x = {0.3, 0.9};
  const ProbPair p = m.PredictProba(x);
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
  EXPECT_EQ(m.Predict(x), 0);
}

TEST(Predict, Definition) {
  const TrainedModel m("logistic", {1.5, -2.0}, 0.25);
  const std::vector<double> x = {0.4, 0.1};
  const double z = 1.5 * 0.4 - 2.0 * 0.1 + 0.25;
  const double s = 1.0 / (1.0 + std::exp(-z));
  EXPECT_NEAR(m.PredictProba(x)[1], s, 1e-15);
  EXPECT_NEAR(m.PredictProba(x)[0], 1.0 - s, 1e-15);
}

TEST(Predict, HeldOutMatchesHandRolledSigmoid) {
  const TrainedModel m = FitLogistic(Separable(), {});
  const Dataset held = testing::RandomDataset(50, 2, 29);
  for (std::size_t i = 0; i < held.rows(); ++i) {
    EXPECT_NEAR(m.PredictProba(held.row(i))[1], HandSigmoid(m.weights(), m.bias(), held.row(i)),
                1e-12);
  }
}

TEST(Predict, WidthMismatch) {
  const TrainedModel m("logistic", {1.0, 1.0}, 0.0);
  const std::vector<double> x = {0.1};
  try {
    m.PredictProba(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Predict, JsonRoundTrip) {
  const TrainedModel m = FitLogistic(Separable(), {});
  EXPECT_EQ(TrainedModel::FromJson(m.ToJson()), m);
}

TEST(Config, RejectsNonPositive) {
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.l2_penalty = -1.0;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(Dispatch, UnknownKind) {
  try {
    Fit("forest", Separable(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

TEST(Svm, SeparatesToy) {
  const Dataset d = Separable();
  const TrainedModel m = Fit(kLinearSvm, d, {});
  EXPECT_EQ(m.kind(), kLinearSvm);
  EXPECT_EQ(m.Predict(d), d.labels());
}

}  // namespace
}  // namespace cfsa
