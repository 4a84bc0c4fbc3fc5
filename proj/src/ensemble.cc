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

#include "cfsa/ensemble.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa {

void EnsembleSpec::Validate() const {
  if (weights.size() != member_count()) {
    throw Error(ErrorKind::kShape, fmt::format("{} weights for {} ensemble members",
                                               weights.size(), member_count()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::kValidation, fmt::format("negative weight {}", w));
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kValidation, fmt::format("weights sum to {}, expected 1", sum));
  }
  for (std::size_t i = 0; i < member_count(); ++i) {
    if (member(i).feature_count() != perf_model.feature_count()) {
      throw Error(ErrorKind::kShape, "ensemble members disagree on feature count");
    }
  }
}

std::vector<double> TwoModelWeights(double fairness_weight) {
  if (!(fairness_weight >= 0.0 && fairness_weight <= 1.0)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("fairness weight {} outside [0,1]", fairness_weight));
  }
  return {fairness_weight, 1.0 - fairness_weight};
}

std::vector<double> UniformWeights(std::size_t members) {
  return std::vector<double>(members, 1.0 / static_cast<double>(members));
}

std::vector<double> NormalizeWeights(std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw Error(ErrorKind::kValidation, "weights must have a positive sum");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) {
    if (w < 0.0) throw Error(ErrorKind::kValidation, "weights must be non-negative");
    w /= sum;
  }
  return out;
}

Combined Combine(std::span<const ProbPair> probs, std::span<const double> weights) {
  if (probs.size() != weights.size() || probs.empty()) {
    throw Error(ErrorKind::kShape, fmt::format("{} probability vectors for {} weights",
                                               probs.size(), weights.size()));
  }
  Combined out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out.probs[0] += weights[i] * probs[i][0];
    out.probs[1] += weights[i] * probs[i][1];
  }
  out.label = ArgmaxLabel(out.probs);
  return out;
}

Combined Predict(const EnsembleSpec& spec, std::span<const double> x) {
  std::vector<ProbPair> probs(spec.member_count());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = spec.member(i).PredictProba(x);
  return Combine(probs, spec.weights);
}

std::vector<Combined> Predict(const EnsembleSpec& spec, const Dataset& d) {
  spec.Validate();
  std::vector<Combined> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = Predict(spec, d.row(i));
  return out;
}

std::vector<int> PredictLabels(const EnsembleSpec& spec, const Dataset& d) {
  const auto combined = Predict(spec, d);
  std::vector<int> out(combined.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = combined[i].label;
  return out;
}

std::vector<std::size_t> StratifiedFolds(std::span<const int> labels, std::size_t folds,
                                         std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::kValidation, "need at least two folds");
  std::vector<std::size_t> fold_of(labels.size());
  Rng rng(seed);
  std::size_t offset = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    rng.Shuffle(std::span(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) fold_of[rows[k]] = (offset + k) % folds;
    offset += rows.size();
  }
  return fold_of;
}

SelectionResult SelectPerformanceModel(const Dataset& train,
                                       std::span<const ModelCandidate> candidates,
                                       std::uint64_t seed, std::size_t folds) {
  if (candidates.empty()) throw Error(ErrorKind::kSelection, "no candidate models");
  const auto fold_of = StratifiedFolds(train.labels(), folds, seed);
  SelectionResult out;
  out.cv_accuracy.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
  std::string failures;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    try {
      std::size_t correct = 0;
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_rows, eval_rows;
        for (std::size_t i = 0; i < train.rows(); ++i) {
          (fold_of[i] == f ? eval_rows : fit_rows).push_back(i);
        }
        if (eval_rows.empty()) continue;
        const TrainedModel m = Fit(candidates[c].kind, train.Subset(fit_rows), candidates[c].train);
        for (std::size_t i : eval_rows) {
          correct += m.Predict(train.row(i)) == train.label(i) ? 1 : 0;
        }
      }
      out.cv_accuracy[c] = static_cast<double>(correct) / static_cast<double>(train.rows());
    } catch (const Error& e) {
      spdlog::warn("candidate {} ({}) failed during selection: {}", c, candidates[c].kind,
                   e.what());
      failures += fmt::format(" [{}] {}", c, e.what());
    }
  }
  std::size_t best = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (std::isnan(out.cv_accuracy[c])) continue;
    if (best == candidates.size() || out.cv_accuracy[c] > out.cv_accuracy[best]) best = c;
  }
  if (best == candidates.size()) {
    throw Error(ErrorKind::kSelection, "every candidate model failed:" + failures);
  }
  out.winner = best;
  out.model = Fit(candidates[best].kind, train, candidates[best].train);
  return out;
}

std::filesystem::path WriteEnsemble(const EnsembleSpec& spec, const std::filesystem::path& dir) {
  spec.Validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = {{"format_version", 1}, {"weights", spec.weights}};
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.member_count(); ++i) {
    const bool fair = i < spec.fair_models.size();
    const std::string file = fair ? fmt::format("fair_model_{}.json", i) : "perf_model.json";
    std::ofstream(dir / file) << spec.member(i).ToJson().dump(2) << '\n';
    members.push_back({{"role", fair ? "fairness" : "performance"}, {"file", file}});
  }
  manifest["members"] = members;
  const auto path = dir / "ensemble.json";
  std::ofstream(path) << manifest.dump(2) << '\n';
  return path;
}

EnsembleSpec ReadEnsemble(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot open '{}'", manifest.string()));
  EnsembleSpec spec;
  try {
    const auto j = nlohmann::json::parse(in);
    spec.weights = j.at("weights").get<std::vector<double>>();
    bool have_perf = false;
    for (const auto& m : j.at("members")) {
      std::ifstream member_in(manifest.parent_path() / m.at("file").get<std::string>());
      if (!member_in) throw Error(ErrorKind::kIo, "missing ensemble member file");
      TrainedModel model = TrainedModel::FromJson(nlohmann::json::parse(member_in));
      if (m.at("role").get<std::string>() == "performance") {
        spec.perf_model = std::move(model);
        have_perf = true;
      } else {
        spec.fair_models.push_back(std::move(model));
      }
    }
    if (!have_perf) throw Error(ErrorKind::kValidation, "manifest has no performance model");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, fmt::format("malformed ensemble manifest: {}", e.what()));
  }
  spec.Validate();
  return spec;
}

}  // namespace cfsa
