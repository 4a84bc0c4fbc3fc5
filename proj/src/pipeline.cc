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

#include "cfsa/pipeline.h"

#include <chrono>
#include <fstream>
#include <type_traits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa {
namespace {

// Seed streams derived from the run seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kSelectionStream = 3;
constexpr std::uint64_t kCBListStream = 100;
constexpr std::uint64_t kDebiasStream = 200;
constexpr std::uint64_t kFaireaStream = 300;

template <class F>
auto Stage(Timings& timings, std::string name, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    timings.emplace_back(
        name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };
  spdlog::debug("stage {}", name);
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record();
    } else {
      auto r = f();
      record();
      return r;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("[{}] {}", name, e.what()));
  }
}

}  // namespace

Dataset LoadData(const RunConfig& config) {
  std::ifstream in(config.data.path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, fmt::format("cannot open data file '{}'",
                                            config.data.path.string()));
  }
  const CsvTable table = ParseCsv(in);
  const Schema schema = BuildSchema(config.data, table.header);
  return Preprocess(table, schema);
}

EnsembleSpec FittedPipeline::Ensemble(std::vector<double> weights) const {
  EnsembleSpec spec;
  for (const auto& a : attributes) spec.fair_models.push_back(a.fair_model);
  spec.perf_model = selection.model;
  spec.weights = std::move(weights);
  spec.Validate();
  return spec;
}

FittedPipeline FitPipeline(const RunConfig& config, std::size_t threads) {
  FittedPipeline fit;
  Stage(fit.timings, "config", [&] { config.Validate(); });
  fit.config = config;
  const std::uint64_t seed = config.run_seed();
  TrainConfig train_cfg = config.train;
  train_cfg.seed = seed;

  const Dataset data = Stage(fit.timings, "load", [&] { return LoadData(config); });
  fit.rows = data.rows();
  Stage(fit.timings, "split", [&] {
    auto s = Split(data, config.train_fraction, DeriveSeed(seed, kSplitStream));
    fit.train = std::move(s.train);
    fit.test = std::move(s.test);
  });

  fit.original = Stage(fit.timings, "original-model",
                       [&] { return Fit(config.model_kind, fit.train, train_cfg); });

  const auto& sens = config.data.sensitive;
  for (std::size_t k = 0; k < sens.size(); ++k) {
    AttributeFit a;
    a.column = sens[k].column;
    a.train_counts = SubgroupCounts::Of(fit.train, a.column);
    a.cblist = Stage(fit.timings, fmt::format("cblist:{}", a.column), [&] {
      CBListOptions o;
      o.folds = config.cblist_folds;
      o.probe_kind = config.probe_kind;
      o.train = train_cfg;
      o.seed = DeriveSeed(seed, kCBListStream + k);
      o.threads = threads;
      return BuildCBList(fit.train, a.column, o);
    });
    a.debias = Stage(fit.timings, fmt::format("debias:{}", a.column), [&] {
      return Debias(fit.train, a.column, a.cblist, MakeSynthesizer(config.synth),
                    DeriveSeed(seed, kDebiasStream + k));
    });
    a.fair_model = Stage(fit.timings, fmt::format("fair-model:{}", a.column),
                         [&] { return Fit(config.model_kind, a.debias.data, train_cfg); });
    a.test_sensitive = fit.test.SensitiveValues(a.column);
    fit.attributes.push_back(std::move(a));
  }

  fit.selection = Stage(fit.timings, "performance-model", [&] {
    std::vector<ModelCandidate> candidates;
    for (const auto& kind : config.resolved_candidates()) candidates.push_back({kind, train_cfg});
    return SelectPerformanceModel(fit.train, candidates, DeriveSeed(seed, kSelectionStream),
                                  config.selection_folds);
  });

  Stage(fit.timings, "baseline", [&] {
    const auto preds = fit.original.Predict(fit.test);
    for (std::size_t k = 0; k < fit.attributes.size(); ++k) {
      AttributeFit& a = fit.attributes[k];
      BaselineOptions o{config.degrees, config.repeats, DeriveSeed(seed, kFaireaStream + k),
                        threads};
      a.baselines = BuildBaselines(preds, fit.test.labels(), a.test_sensitive, config.fairness,
                                   config.performance, o);
    }
  });
  return fit;
}

ModelEvaluation EvaluatePredictions(const FittedPipeline& fit, std::string name,
                                    std::span<const int> preds) {
  ModelEvaluation e;
  e.name = std::move(name);
  e.performance = Performance(preds, fit.test.labels());
  for (const auto& a : fit.attributes) {
    auto& row = e.fairness.emplace_back();
    for (FairnessMetric f : kAllFairnessMetrics) {
      row.push_back(Evaluate(f, preds, fit.test.labels(), a.test_sensitive));
    }
  }
  return e;
}

double EnsembleEvaluation::proportion() const {
  return cells.empty() ? 0.0
                       : static_cast<double>(beats) / static_cast<double>(cells.size());
}

EnsembleEvaluation EvaluateEnsemble(const FittedPipeline& fit, std::span<const double> weights) {
  EnsembleEvaluation out;
  out.weights.assign(weights.begin(), weights.end());
  const EnsembleSpec spec = fit.Ensemble(out.weights);
  const auto preds = PredictLabels(spec, fit.test);
  out.metrics = EvaluatePredictions(fit, "cfsa", preds);
  const auto& cfg = fit.config;
  for (std::size_t k = 0; k < fit.attributes.size(); ++k) {
    const AttributeFit& a = fit.attributes[k];
    for (std::size_t fi = 0; fi < cfg.fairness.size(); ++fi) {
      for (std::size_t pi = 0; pi < cfg.performance.size(); ++pi) {
        OutcomeCell c;
        c.attribute = a.column;
        c.fairness = cfg.fairness[fi];
        c.performance = cfg.performance[pi];
        c.bias = Evaluate(c.fairness, preds, fit.test.labels(), a.test_sensitive);
        c.score = out.metrics.performance.Get(c.performance);
        const TradeoffBaseline& baseline = a.baselines[fi][pi];
        if (!baseline.points.empty()) c.origin = baseline.origin();
        if (!c.bias.defined() || !c.score.defined()) {
          c.reason = c.bias.defined() ? c.score.reason : c.bias.reason;
        } else {
          try {
            const auto o = Classify({*c.bias, *c.score}, baseline);
            c.region = o.region;
            c.baseline_performance = o.baseline_performance;
            ++out.classified;
          } catch (const Error& e) {
            c.reason = e.what();
          }
        }
        if (c.beats()) ++out.beats;
        out.cells.push_back(std::move(c));
      }
    }
  }
  return out;
}

nlohmann::json ToJson(const ModelEvaluation& e, const FittedPipeline& fit) {
  nlohmann::json fairness = nlohmann::json::object();
  for (std::size_t k = 0; k < fit.attributes.size(); ++k) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t i = 0; i < std::size(kAllFairnessMetrics); ++i) {
      row[std::string(ToString(kAllFairnessMetrics[i]))] = ToJson(e.fairness[k][i]);
    }
    fairness[fit.attributes[k].column] = row;
  }
  return {{"name", e.name}, {"performance", ToJson(e.performance)}, {"fairness", fairness}};
}

nlohmann::json ToJson(const OutcomeCell& c) {
  nlohmann::json j = {{"attribute", c.attribute},
                      {"fairness_metric", ToString(c.fairness)},
                      {"performance_metric", ToString(c.performance)},
                      {"bias", ToJson(c.bias)},
                      {"performance", ToJson(c.score)},
                      {"origin", {{"bias", c.origin.bias}, {"performance", c.origin.performance}}},
                      {"beats_baseline", c.beats()}};
  if (c.region) {
    j["region"] = ToString(*c.region);
  } else {
    j["region"] = {{"undefined", c.reason}};
  }
  if (c.baseline_performance) j["baseline_performance"] = *c.baseline_performance;
  return j;
}

nlohmann::json ToJson(const Timings& t) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, secs] : t) j[name] = secs;
  return j;
}

std::vector<double> SweepWeights(std::size_t fair_models, double w) {
  std::vector<double> out(fair_models, w / static_cast<double>(fair_models));
  out.push_back(1.0 - w);
  return out;
}

}  // namespace cfsa
