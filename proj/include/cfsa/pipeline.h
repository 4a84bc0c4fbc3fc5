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

// End-to-end pipeline: load, split, score, debias, fit, ensemble, evaluate.
// Stage failures are re-thrown with the stage name prefixed to the message.

#ifndef CFSA_PIPELINE_H_
#define CFSA_PIPELINE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/cblist.h"
#include "cfsa/config.h"
#include "cfsa/debias.h"
#include "cfsa/ensemble.h"
#include "cfsa/fairea.h"
#include "cfsa/metrics.h"

namespace cfsa {

// Seconds per stage, in execution order.
using Timings = std::vector<std::pair<std::string, double>>;

struct AttributeFit {
  std::string column;
  SubgroupCounts train_counts;
  CBList cblist;
  DebiasResult debias;
  TrainedModel fair_model;
  std::vector<int> test_sensitive;
  // Indexed [fairness][performance] like RunConfig's metric lists.
  std::vector<std::vector<TradeoffBaseline>> baselines;
};

struct FittedPipeline {
  RunConfig config;
  std::size_t rows = 0;
  Dataset train;
  Dataset test;
  // Unmitigated model of the configured kind on the raw training split. Its
  // predictions anchor every trade-off baseline.
  TrainedModel original;
  SelectionResult selection;
  std::vector<AttributeFit> attributes;
  Timings timings;

  EnsembleSpec Ensemble(std::vector<double> weights) const;
};

FittedPipeline FitPipeline(const RunConfig& config, std::size_t threads);

// Loads and preprocesses the configured CSV.
Dataset LoadData(const RunConfig& config);

struct ModelEvaluation {
  std::string name;
  PerformanceReport performance;
  // [attribute][fairness metric]
  std::vector<std::vector<MetricValue>> fairness;
};

ModelEvaluation EvaluatePredictions(const FittedPipeline& fit, std::string name,
                                    std::span<const int> preds);

struct OutcomeCell {
  std::string attribute;
  FairnessMetric fairness = FairnessMetric::kSpd;
  PerformanceMetric performance = PerformanceMetric::kAccuracy;
  MetricValue bias;
  MetricValue score;
  TradeoffPoint origin;
  std::optional<Region> region;
  std::optional<double> baseline_performance;
  // Why the region is missing.
  std::string reason;

  bool beats() const { return region && BeatsBaseline(*region); }
};

struct EnsembleEvaluation {
  std::vector<double> weights;
  ModelEvaluation metrics;
  std::vector<OutcomeCell> cells;
  std::size_t beats = 0;
  std::size_t classified = 0;

  // Beating cells over all cells.
  double proportion() const;
};

EnsembleEvaluation EvaluateEnsemble(const FittedPipeline& fit, std::span<const double> weights);

nlohmann::json ToJson(const ModelEvaluation& e, const FittedPipeline& fit);
nlohmann::json ToJson(const OutcomeCell& c);
nlohmann::json ToJson(const Timings& t);

// Member weights for a fairness share `w` split evenly over the fair models.
std::vector<double> SweepWeights(std::size_t fair_models, double w);

}  // namespace cfsa

#endif  // CFSA_PIPELINE_H_
