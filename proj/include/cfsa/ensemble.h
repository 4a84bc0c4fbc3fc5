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

#ifndef CFSA_ENSEMBLE_H_
#define CFSA_ENSEMBLE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/classifier.h"
#include "cfsa/dataset.h"

namespace cfsa {

// Fairness-oriented members (one per sensitive attribute) followed by the
// performance-oriented member. weights[i] belongs to member i in that order.
struct EnsembleSpec {
  std::vector<TrainedModel> fair_models;
  TrainedModel perf_model;
  std::vector<double> weights;

  std::size_t member_count() const { return fair_models.size() + 1; }
  const TrainedModel& member(std::size_t i) const {
    return i < fair_models.size() ? fair_models[i] : perf_model;
  }
  // Error(kShape) / Error(kValidation) when weights do not fit the members.
  void Validate() const;
};

// (w, 1 - w) for one fair model plus the performance model.
std::vector<double> TwoModelWeights(double fairness_weight);
std::vector<double> UniformWeights(std::size_t members);
// Rescales non-negative weights to sum to 1.
std::vector<double> NormalizeWeights(std::span<const double> weights);

struct Combined {
  ProbPair probs{};
  int label = 0;
};

// Componentwise weighted sum of probability pairs; ties predict 0.
Combined Combine(std::span<const ProbPair> probs, std::span<const double> weights);

Combined Predict(const EnsembleSpec& spec, std::span<const double> x);
std::vector<Combined> Predict(const EnsembleSpec& spec, const Dataset& d);
std::vector<int> PredictLabels(const EnsembleSpec& spec, const Dataset& d);

struct ModelCandidate {
  std::string kind = std::string(kLogistic);
  TrainConfig train;
};

struct SelectionResult {
  TrainedModel model;
  std::size_t winner = 0;
  // Pooled cross-validated accuracy per candidate; NaN when it failed.
  std::vector<double> cv_accuracy;
};

// Fold id per row with each class dealt round-robin after a seeded shuffle.
std::vector<std::size_t> StratifiedFolds(std::span<const int> labels, std::size_t folds,
                                         std::uint64_t seed);

// Picks the candidate with the highest stratified k-fold accuracy on `train`
// (first wins ties) and refits it on all of `train`.
SelectionResult SelectPerformanceModel(const Dataset& train,
                                       std::span<const ModelCandidate> candidates,
                                       std::uint64_t seed, std::size_t folds = 5);

// Writes one JSON file per member plus a manifest (ensemble.json) listing
// member files and weights. Returns the manifest path.
std::filesystem::path WriteEnsemble(const EnsembleSpec& spec, const std::filesystem::path& dir);
EnsembleSpec ReadEnsemble(const std::filesystem::path& manifest);

}  // namespace cfsa

#endif  // CFSA_ENSEMBLE_H_
