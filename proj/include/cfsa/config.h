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

// Run configuration. The on-disk form is an INI file with sections; a JSON
// object with the same sections and keys is accepted too (chosen by the .json
// extension). List values are comma-separated strings, or arrays in JSON.
//
//   [run]      seed (required)
//   [data]     path, label, favorable_label, sensitive, favored, deprived,
//              categorical, features, missing
//   [bins]     <column> = cut points
//   [split]    train_fraction
//   [cblist]   folds, probe
//   [model]    kind, learning_rate, epochs, l2_penalty
//   [synth]    clusters, filter_fraction, neighbors
//   [ensemble] fairness_weight, weights, candidates, selection_folds
//   [fairea]   degrees, repeats
//   [metrics]  fairness, performance
//   [output]   dir

#ifndef CFSA_CONFIG_H_
#define CFSA_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/classifier.h"
#include "cfsa/dataset.h"
#include "cfsa/fairea.h"
#include "cfsa/metrics.h"
#include "cfsa/synth.h"

namespace cfsa {

struct DataConfig {
  std::filesystem::path path;
  std::string label = "label";
  std::string favorable_label = "1";
  std::vector<SensitiveAttribute> sensitive;
  std::vector<std::string> categorical;
  // Feature columns in order; empty means every header column except the
  // label.
  std::vector<std::string> features;
  std::vector<std::string> missing = {"", "?", "NA"};
  std::map<std::string, std::vector<double>> bins;
};

struct RunConfig {
  std::filesystem::path source;
  DataConfig data;
  std::optional<std::uint64_t> seed;
  double train_fraction = 0.7;
  std::size_t cblist_folds = 5;
  std::string probe_kind = std::string(kLogistic);
  std::string model_kind = std::string(kLogistic);
  TrainConfig train;
  SynthConfig synth;
  double fairness_weight = 0.6;
  // Explicit member weights (fair models first); overrides fairness_weight.
  std::vector<double> weights;
  // Performance-model candidates; empty means {model_kind}.
  std::vector<std::string> candidates;
  std::size_t selection_folds = 5;
  std::vector<double> degrees = BaselineOptions{}.degrees;
  std::size_t repeats = BaselineOptions{}.repeats;
  std::vector<FairnessMetric> fairness = {std::begin(kAllFairnessMetrics),
                                          std::end(kAllFairnessMetrics)};
  std::vector<PerformanceMetric> performance = {std::begin(kAllPerformanceMetrics),
                                                std::end(kAllPerformanceMetrics)};
  std::filesystem::path output_dir = "cfsa_out";

  std::uint64_t run_seed() const;
  std::vector<std::string> resolved_candidates() const;
  // Member weights for the configured ensemble: explicit weights, else the
  // two-model split, else uniform when several attributes are debiased.
  std::vector<double> resolved_weights() const;
  // Error(kConfig) naming the offending key.
  void Validate() const;
  // Fully resolved echo, defaults included.
  nlohmann::json ToJson() const;
};

RunConfig LoadConfig(const std::filesystem::path& path);
RunConfig ParseIniConfig(const std::string& text, const std::filesystem::path& base_dir);
RunConfig ParseJsonConfig(const std::string& text, const std::filesystem::path& base_dir);

// Schema for the configured CSV. Error(kConfig) when a configured column is
// absent from `header`.
Schema BuildSchema(const DataConfig& data, const std::vector<std::string>& header);

// INI text reproducing `config` (used by gen-fixture).
std::string ToIni(const RunConfig& config);

}  // namespace cfsa

#endif  // CFSA_CONFIG_H_
