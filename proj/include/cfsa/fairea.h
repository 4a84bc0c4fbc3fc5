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

#ifndef CFSA_FAIREA_H_
#define CFSA_FAIREA_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/classifier.h"
#include "cfsa/dataset.h"
#include "cfsa/metrics.h"

namespace cfsa {

enum class Region { kWinWin, kGood, kInverted, kPoor, kLoseLose };

std::string_view ToString(Region r);
// win-win and good beat the trade-off baseline.
inline bool BeatsBaseline(Region r) { return r == Region::kWinWin || r == Region::kGood; }

struct TradeoffPoint {
  double bias = 0.0;         // lower is better
  double performance = 0.0;  // higher is better

  bool operator==(const TradeoffPoint&) const = default;
};

// Most frequent label; ties resolve to 0.
int MajorityLabel(std::span<const int> labels);

// Overwrites floor(degree * n) positions, sampled uniformly without
// replacement, with `majority`. Positions that already hold the majority
// label still count toward the quota.
std::vector<int> MutatePredictions(std::span<const int> preds, double degree, int majority,
                                   std::uint64_t seed);

// Seed of the mutation for (degree index, repeat index).
std::uint64_t MutationSeed(std::uint64_t seed, std::size_t degree_index, std::size_t repeat);

struct BaselineOptions {
  std::vector<double> degrees = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t repeats = 50;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void Validate() const;
};

struct BaselineSample {
  double degree = 0.0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  MetricValue bias;
  MetricValue performance;
};

// Polyline from the original model's point (degree 0) through the averaged
// pseudo-model points. Degrees whose samples were all undefined are left out
// and noted in `warnings`.
struct TradeoffBaseline {
  FairnessMetric fairness_metric = FairnessMetric::kSpd;
  PerformanceMetric performance_metric = PerformanceMetric::kAccuracy;
  std::vector<double> degrees;
  std::vector<TradeoffPoint> points;
  std::vector<std::size_t> sample_counts;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  int majority = 0;
  std::vector<BaselineSample> samples;
  std::vector<std::string> warnings;

  const TradeoffPoint& origin() const { return points.front(); }
  nlohmann::json ToJson() const;
};

// One baseline per (fairness, performance) pair, all sharing the same
// mutated prediction sets. Result is indexed [fairness][performance].
std::vector<std::vector<TradeoffBaseline>> BuildBaselines(
    std::span<const int> preds, std::span<const int> labels, std::span<const int> sensitive,
    std::span<const FairnessMetric> fairness, std::span<const PerformanceMetric> performance,
    const BaselineOptions& options);

TradeoffBaseline BuildBaseline(std::span<const int> preds, std::span<const int> labels,
                               std::span<const int> sensitive, FairnessMetric fairness,
                               PerformanceMetric performance, const BaselineOptions& options);

TradeoffBaseline BuildBaseline(const TrainedModel& model, const Dataset& test,
                               std::string_view sensitive, FairnessMetric fairness,
                               PerformanceMetric performance, const BaselineOptions& options);

// Baseline performance at `bias`: linear along the polyline, the highest
// value where several segments cover `bias`, clamped to the nearest endpoint
// outside the covered bias span.
double InterpolatePerformance(std::span<const TradeoffPoint> polyline, double bias);

struct MitigationOutcome {
  TradeoffPoint point;
  Region region = Region::kPoor;
  // Baseline performance at point.bias when the good/poor test applied.
  std::optional<double> baseline_performance;
};

// Throws Error(kClassification) for a baseline with fewer than two points or
// with all points identical.
MitigationOutcome Classify(const TradeoffPoint& point, std::span<const TradeoffPoint> polyline);
MitigationOutcome Classify(const TradeoffPoint& point, const TradeoffBaseline& baseline);

// Rows fairness,performance_metric,degree,repeat,seed,bias,performance with
// blank cells for undefined values. No header line.
void WriteSamplesCsv(const TradeoffBaseline& baseline, std::ostream& out);

}  // namespace cfsa

#endif  // CFSA_FAIREA_H_
