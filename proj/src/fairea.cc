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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/error.h"
#include "cfsa/parallel.h"
#include "cfsa/rng.h"

namespace cfsa {

std::string_view ToString(Region r) {
  switch (r) {
    case Region::kWinWin: return "win_win";
    case Region::kGood: return "good";
    case Region::kInverted: return "inverted";
    case Region::kPoor: return "poor";
    case Region::kLoseLose: return "lose_lose";
  }
  return "?";
}

int MajorityLabel(std::span<const int> labels) {
  const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  return ones > labels.size() - ones ? 1 : 0;
}

std::vector<int> MutatePredictions(std::span<const int> preds, double degree, int majority,
                                   std::uint64_t seed) {
  if (!(degree >= 0.0 && degree <= 1.0)) {
    throw Error(ErrorKind::kValidation, fmt::format("mutation degree {} outside [0,1]", degree));
  }
  const std::size_t n = preds.size();
  // Slack so that e.g. 0.3 * 100 selects 30 positions, not 29.
  const auto k = std::min(
      n, static_cast<std::size_t>(std::floor(degree * static_cast<double>(n) + 1e-9)));
  std::vector<int> out(preds.begin(), preds.end());
  if (k == 0) return out;
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(positions[i], positions[i + rng.Index(n - i)]);
    out[positions[i]] = majority;
  }
  return out;
}

std::uint64_t MutationSeed(std::uint64_t seed, std::size_t degree_index, std::size_t repeat) {
  return DeriveSeed(DeriveSeed(seed, degree_index), repeat);
}

void BaselineOptions::Validate() const {
  if (repeats == 0) throw Error(ErrorKind::kValidation, "baseline repeats must be >= 1");
  if (degrees.empty()) throw Error(ErrorKind::kValidation, "no mutation degrees");
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (!(degrees[i] > 0.0 && degrees[i] <= 1.0)) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("mutation degree {} outside (0,1]", degrees[i]));
    }
    if (i > 0 && !(degrees[i] > degrees[i - 1])) {
      throw Error(ErrorKind::kValidation, "mutation degrees must be strictly ascending");
    }
  }
}

std::vector<std::vector<TradeoffBaseline>> BuildBaselines(
    std::span<const int> preds, std::span<const int> labels, std::span<const int> sensitive,
    std::span<const FairnessMetric> fairness, std::span<const PerformanceMetric> performance,
    const BaselineOptions& options) {
  options.Validate();
  const int majority = MajorityLabel(labels);
  const std::size_t n_deg = options.degrees.size();
  const std::size_t reps = options.repeats;
  const std::size_t nf = fairness.size();
  const std::size_t np = performance.size();

  struct Evaluated {
    std::vector<MetricValue> bias;
    std::vector<MetricValue> perf;
  };
  auto evaluate = [&](std::span<const int> p) {
    Evaluated e;
    for (FairnessMetric f : fairness) e.bias.push_back(Evaluate(f, p, labels, sensitive));
    for (PerformanceMetric m : performance) e.perf.push_back(Evaluate(m, p, labels));
    return e;
  };

  const Evaluated original = evaluate(preds);
  std::vector<Evaluated> runs(n_deg * reps);
  ParallelFor(runs.size(), options.threads, [&](std::size_t k) {
    const std::size_t d = k / reps;
    const std::size_t r = k % reps;
    runs[k] = evaluate(
        MutatePredictions(preds, options.degrees[d], majority, MutationSeed(options.seed, d, r)));
  });

  std::vector<std::vector<TradeoffBaseline>> out(nf, std::vector<TradeoffBaseline>(np));
  for (std::size_t fi = 0; fi < nf; ++fi) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      TradeoffBaseline& b = out[fi][pi];
      b.fairness_metric = fairness[fi];
      b.performance_metric = performance[pi];
      b.repeats = reps;
      b.seed = options.seed;
      b.majority = majority;
      const auto& ob = original.bias[fi];
      const auto& op = original.perf[pi];
      if (!ob.defined() || !op.defined()) {
        b.warnings.push_back(fmt::format("original model point undefined: {}",
                                         ob.defined() ? op.reason : ob.reason));
      } else {
        b.degrees.push_back(0.0);
        b.points.push_back({*ob, *op});
        b.sample_counts.push_back(1);
      }
      for (std::size_t d = 0; d < n_deg; ++d) {
        double bias_sum = 0.0;
        double perf_sum = 0.0;
        std::size_t valid = 0;
        for (std::size_t r = 0; r < reps; ++r) {
          const Evaluated& e = runs[d * reps + r];
          const MetricValue& bv = e.bias[fi];
          const MetricValue& pv = e.perf[pi];
          b.samples.push_back({options.degrees[d], r, MutationSeed(options.seed, d, r), bv, pv});
          if (bv.defined() && pv.defined()) {
            bias_sum += *bv;
            perf_sum += *pv;
            ++valid;
          }
        }
        if (valid < reps) {
          b.warnings.push_back(fmt::format("degree {}: {} of {} samples undefined for {}/{}",
                                           options.degrees[d], reps - valid, reps,
                                           ToString(fairness[fi]), ToString(performance[pi])));
        }
        if (valid == 0) continue;
        b.degrees.push_back(options.degrees[d]);
        b.points.push_back({bias_sum / static_cast<double>(valid),
                            perf_sum / static_cast<double>(valid)});
        b.sample_counts.push_back(valid);
      }
      for (const auto& w : b.warnings) spdlog::warn("trade-off baseline: {}", w);
    }
  }
  return out;
}

TradeoffBaseline BuildBaseline(std::span<const int> preds, std::span<const int> labels,
                               std::span<const int> sensitive, FairnessMetric fairness,
                               PerformanceMetric performance, const BaselineOptions& options) {
  const FairnessMetric f[] = {fairness};
  const PerformanceMetric p[] = {performance};
  return std::move(BuildBaselines(preds, labels, sensitive, f, p, options)[0][0]);
}

TradeoffBaseline BuildBaseline(const TrainedModel& model, const Dataset& test,
                               std::string_view sensitive, FairnessMetric fairness,
                               PerformanceMetric performance, const BaselineOptions& options) {
  const auto preds = model.Predict(test);
  const auto s = test.SensitiveValues(sensitive);
  return BuildBaseline(preds, test.labels(), s, fairness, performance, options);
}

double InterpolatePerformance(std::span<const TradeoffPoint> polyline, double bias) {
  if (polyline.empty()) throw Error(ErrorKind::kClassification, "empty trade-off baseline");
  bool covered = false;
  double best = 0.0;
  auto take = [&](double v) {
    best = covered ? std::max(best, v) : v;
    covered = true;
  };
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const TradeoffPoint& p = polyline[i];
    const TradeoffPoint& q = polyline[i + 1];
    const double lo = std::min(p.bias, q.bias);
    const double hi = std::max(p.bias, q.bias);
    if (bias < lo || bias > hi) continue;
    if (hi == lo) {
      take(std::max(p.performance, q.performance));
    } else {
      const double t = (bias - p.bias) / (q.bias - p.bias);
      take(p.performance + t * (q.performance - p.performance));
    }
  }
  if (polyline.size() == 1 && polyline[0].bias == bias) take(polyline[0].performance);
  if (covered) return best;

  // Outside the span: clamp to the nearest endpoint in bias.
  const auto [lo_it, hi_it] = std::minmax_element(
      polyline.begin(), polyline.end(),
      [](const TradeoffPoint& a, const TradeoffPoint& b) { return a.bias < b.bias; });
  const double edge = bias < lo_it->bias ? lo_it->bias : hi_it->bias;
  for (const TradeoffPoint& p : polyline) {
    if (p.bias == edge) take(p.performance);
  }
  return best;
}

MitigationOutcome Classify(const TradeoffPoint& point, std::span<const TradeoffPoint> polyline) {
  if (polyline.size() < 2) {
    throw Error(ErrorKind::kClassification,
                fmt::format("trade-off baseline has {} point(s), need at least 2", polyline.size()));
  }
  if (std::all_of(polyline.begin(), polyline.end(),
                  [&](const TradeoffPoint& p) { return p == polyline.front(); })) {
    throw Error(ErrorKind::kClassification, "degenerate trade-off baseline: all points identical");
  }
  if (!std::isfinite(point.bias) || !std::isfinite(point.performance)) {
    throw Error(ErrorKind::kClassification, "mitigation point is not finite");
  }
  const TradeoffPoint& origin = polyline.front();
  MitigationOutcome out;
  out.point = point;
  if (point.performance > origin.performance) {
    out.region = point.bias < origin.bias ? Region::kWinWin : Region::kInverted;
    return out;
  }
  if (point.bias > origin.bias) {
    out.region = Region::kLoseLose;
    return out;
  }
  const double expected = InterpolatePerformance(polyline, point.bias);
  out.baseline_performance = expected;
  out.region = point.performance > expected ? Region::kGood : Region::kPoor;
  return out;
}

MitigationOutcome Classify(const TradeoffPoint& point, const TradeoffBaseline& baseline) {
  if (baseline.degrees.empty() || baseline.degrees.front() != 0.0) {
    throw Error(ErrorKind::kClassification, "trade-off baseline lacks the original model point");
  }
  return Classify(point, baseline.points);
}

nlohmann::json TradeoffBaseline::ToJson() const {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    pts.push_back({{"degree", degrees[i]},
                   {"bias", points[i].bias},
                   {"performance", points[i].performance},
                   {"samples", sample_counts[i]}});
  }
  return {{"fairness_metric", ToString(fairness_metric)},
          {"performance_metric", ToString(performance_metric)},
          {"repeats", repeats},
          {"seed", seed},
          {"majority_label", majority},
          {"points", pts},
          {"warnings", warnings}};
}

void WriteSamplesCsv(const TradeoffBaseline& baseline, std::ostream& out) {
  auto cell = [](const MetricValue& v) { return v.defined() ? fmt::format("{}", *v) : ""; };
  for (const auto& s : baseline.samples) {
    out << fmt::format("{},{},{},{},{},{},{}\n", ToString(baseline.fairness_metric),
                       ToString(baseline.performance_metric), s.degree, s.repeat, s.seed,
                       cell(s.bias), cell(s.performance));
  }
}

}  // namespace cfsa
