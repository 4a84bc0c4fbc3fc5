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

#ifndef CFSA_METRICS_H_
#define CFSA_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cfsa {

// Predictions, labels and sensitive values are 0/1 vectors of equal length.
// Sensitive 1 is the favored group.

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  static Confusion Of(std::span<const int> preds, std::span<const int> labels);

  bool operator==(const Confusion&) const = default;
};

// A metric that is either a number or undefined with a reason.
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  static MetricValue Of(double v) { return {v, {}}; }
  static MetricValue Undefined(std::string why) { return {std::nullopt, std::move(why)}; }
  bool defined() const { return value.has_value(); }
  double operator*() const { return *value; }
};

enum class FairnessMetric { kSpd, kAod, kEod };
enum class PerformanceMetric { kAccuracy, kPrecision, kRecall, kF1, kMcc };

inline constexpr FairnessMetric kAllFairnessMetrics[] = {
    FairnessMetric::kSpd, FairnessMetric::kAod, FairnessMetric::kEod};
inline constexpr PerformanceMetric kAllPerformanceMetrics[] = {
    PerformanceMetric::kAccuracy, PerformanceMetric::kPrecision, PerformanceMetric::kRecall,
    PerformanceMetric::kF1, PerformanceMetric::kMcc};

std::string_view ToString(FairnessMetric m);
std::string_view ToString(PerformanceMetric m);
// Case-insensitive; Error(kConfig) for unknown names.
FairnessMetric ParseFairnessMetric(std::string_view name);
PerformanceMetric ParsePerformanceMetric(std::string_view name);

struct GroupStats {
  Confusion confusion;
  std::optional<double> positive_rate;  // P[Yhat=1 | g]
  std::optional<double> tpr;            // P[Yhat=1 | g, Y=1]
  std::optional<double> fpr;            // P[Yhat=1 | g, Y=0]
};

struct GroupRates {
  GroupStats favored;
  GroupStats deprived;
};

GroupRates ComputeGroupRates(std::span<const int> preds, std::span<const int> labels,
                             std::span<const int> sensitive);

// Absolute-valued group fairness metrics. Throw Error(kUndefinedMetric)
// naming the empty group or cell.
double Spd(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive);
double Aod(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive);
double Eod(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive);

struct PerformanceReport {
  Confusion confusion;
  MetricValue accuracy;
  MetricValue recall;
  MetricValue precision;
  MetricValue f1;
  MetricValue mcc;

  const MetricValue& Get(PerformanceMetric m) const;
};

// MCC is 0 when its denominator vanishes; precision, recall and F1 are
// undefined on zero denominators. Requires at least one instance.
PerformanceReport Performance(std::span<const int> preds, std::span<const int> labels);
PerformanceReport Performance(const Confusion& c);

// Non-throwing forms used when filling report tables.
MetricValue Evaluate(FairnessMetric m, std::span<const int> preds, std::span<const int> labels,
                     std::span<const int> sensitive);
MetricValue Evaluate(PerformanceMetric m, std::span<const int> preds,
                     std::span<const int> labels);

nlohmann::json ToJson(const MetricValue& v);
// Flat object keyed by metric name.
nlohmann::json ToJson(const PerformanceReport& r);

}  // namespace cfsa

#endif  // CFSA_METRICS_H_
