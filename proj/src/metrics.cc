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

#include "cfsa/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/error.h"

namespace cfsa {
namespace {

void CheckSizes(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::kShape, fmt::format("{} predictions but {} labels", a, b));
  }
}

std::optional<double> Ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

GroupStats Stats(const Confusion& c) {
  GroupStats g;
  g.confusion = c;
  g.positive_rate = Ratio(c.tp + c.fp, c.total());
  g.tpr = Ratio(c.tp, c.tp + c.fn);
  g.fpr = Ratio(c.fp, c.fp + c.tn);
  return g;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

double Require(const std::optional<double>& v, std::string_view what) {
  if (!v) throw Error(ErrorKind::kUndefinedMetric, fmt::format("{} is empty", what));
  return *v;
}

}  // namespace

Confusion Confusion::Of(std::span<const int> preds, std::span<const int> labels) {
  CheckSizes(preds.size(), labels.size());
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i]) {
      ++(labels[i] ? c.tp : c.fp);
    } else {
      ++(labels[i] ? c.fn : c.tn);
    }
  }
  return c;
}

std::string_view ToString(FairnessMetric m) {
  switch (m) {
    case FairnessMetric::kSpd: return "spd";
    case FairnessMetric::kAod: return "aod";
    case FairnessMetric::kEod: return "eod";
  }
  return "?";
}

std::string_view ToString(PerformanceMetric m) {
  switch (m) {
    case PerformanceMetric::kAccuracy: return "accuracy";
    case PerformanceMetric::kPrecision: return "precision";
    case PerformanceMetric::kRecall: return "recall";
    case PerformanceMetric::kF1: return "f1";
    case PerformanceMetric::kMcc: return "mcc";
  }
  return "?";
}

FairnessMetric ParseFairnessMetric(std::string_view name) {
  const std::string n = Lower(name);
  for (FairnessMetric m : kAllFairnessMetrics) {
    if (n == ToString(m)) return m;
  }
  throw Error(ErrorKind::kConfig, fmt::format("unknown fairness metric '{}'", name));
}

PerformanceMetric ParsePerformanceMetric(std::string_view name) {
  const std::string n = Lower(name);
  for (PerformanceMetric m : kAllPerformanceMetrics) {
    if (n == ToString(m)) return m;
  }
  throw Error(ErrorKind::kConfig, fmt::format("unknown performance metric '{}'", name));
}

GroupRates ComputeGroupRates(std::span<const int> preds, std::span<const int> labels,
                             std::span<const int> sensitive) {
  CheckSizes(preds.size(), labels.size());
  CheckSizes(preds.size(), sensitive.size());
  Confusion fav, dep;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Confusion& c = sensitive[i] ? fav : dep;
    if (preds[i]) {
      ++(labels[i] ? c.tp : c.fp);
    } else {
      ++(labels[i] ? c.fn : c.tn);
    }
  }
  return {Stats(fav), Stats(dep)};
}

double Spd(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive) {
  const GroupRates r = ComputeGroupRates(preds, labels, sensitive);
  return std::abs(Require(r.favored.positive_rate, "favored group") -
                  Require(r.deprived.positive_rate, "deprived group"));
}

double Aod(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive) {
  const GroupRates r = ComputeGroupRates(preds, labels, sensitive);
  const double fpr_gap = std::abs(Require(r.favored.fpr, "favored rejected (S=1,Y=0) cell") -
                                  Require(r.deprived.fpr, "deprived rejected (S=0,Y=0) cell"));
  const double tpr_gap = std::abs(Require(r.favored.tpr, "favored granted (S=1,Y=1) cell") -
                                  Require(r.deprived.tpr, "deprived granted (S=0,Y=1) cell"));
  return 0.5 * (fpr_gap + tpr_gap);
}

double Eod(std::span<const int> preds, std::span<const int> labels,
           std::span<const int> sensitive) {
  const GroupRates r = ComputeGroupRates(preds, labels, sensitive);
  return std::abs(Require(r.favored.tpr, "favored granted (S=1,Y=1) cell") -
                  Require(r.deprived.tpr, "deprived granted (S=0,Y=1) cell"));
}

const MetricValue& PerformanceReport::Get(PerformanceMetric m) const {
  switch (m) {
    case PerformanceMetric::kAccuracy: return accuracy;
    case PerformanceMetric::kPrecision: return precision;
    case PerformanceMetric::kRecall: return recall;
    case PerformanceMetric::kF1: return f1;
    case PerformanceMetric::kMcc: return mcc;
  }
  return accuracy;
}

PerformanceReport Performance(const Confusion& c) {
  if (c.total() == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "performance of zero instances");
  }
  PerformanceReport r;
  r.confusion = c;
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  r.accuracy = MetricValue::Of((tp + tn) / static_cast<double>(c.total()));
  r.recall = c.tp + c.fn ? MetricValue::Of(tp / (tp + fn))
                         : MetricValue::Undefined("recall: no positive labels (TP+FN=0)");
  r.precision = c.tp + c.fp
                    ? MetricValue::Of(tp / (tp + fp))
                    : MetricValue::Undefined("precision: no positive predictions (TP+FP=0)");
  if (!r.precision.defined() || !r.recall.defined()) {
    r.f1 = MetricValue::Undefined("f1: precision or recall undefined");
  } else if (*r.precision + *r.recall == 0.0) {
    r.f1 = MetricValue::Undefined("f1: precision + recall = 0");
  } else {
    r.f1 = MetricValue::Of(2.0 * *r.precision * *r.recall / (*r.precision + *r.recall));
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) {
    spdlog::debug("mcc denominator is zero; reporting 0");
    r.mcc = MetricValue::Of(0.0);
  } else {
    r.mcc = MetricValue::Of((tp * tn - fp * fn) / std::sqrt(denom));
  }
  return r;
}

PerformanceReport Performance(std::span<const int> preds, std::span<const int> labels) {
  return Performance(Confusion::Of(preds, labels));
}

MetricValue Evaluate(FairnessMetric m, std::span<const int> preds, std::span<const int> labels,
                     std::span<const int> sensitive) {
  try {
    switch (m) {
      case FairnessMetric::kSpd: return MetricValue::Of(Spd(preds, labels, sensitive));
      case FairnessMetric::kAod: return MetricValue::Of(Aod(preds, labels, sensitive));
      case FairnessMetric::kEod: return MetricValue::Of(Eod(preds, labels, sensitive));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUndefinedMetric) throw;
    return MetricValue::Undefined(fmt::format("{}: {}", ToString(m), e.what()));
  }
  return MetricValue::Undefined("unknown metric");
}

MetricValue Evaluate(PerformanceMetric m, std::span<const int> preds,
                     std::span<const int> labels) {
  try {
    return Performance(preds, labels).Get(m);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUndefinedMetric) throw;
    return MetricValue::Undefined(e.what());
  }
}

nlohmann::json ToJson(const MetricValue& v) {
  if (v.defined()) return *v;
  return {{"undefined", v.reason}};
}

nlohmann::json ToJson(const PerformanceReport& r) {
  nlohmann::json j;
  for (PerformanceMetric m : kAllPerformanceMetrics) j[std::string(ToString(m))] = ToJson(r.Get(m));
  return j;
}

}  // namespace cfsa
