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

#ifndef CFSA_CLASSIFIER_H_
#define CFSA_CLASSIFIER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/dataset.h"

namespace cfsa {

// (P(Y=0), P(Y=1)); indexed by label.
using ProbPair = std::array<double, 2>;

// Argmax with ties resolved toward label 0.
inline int ArgmaxLabel(const ProbPair& p) { return p[1] > p[0] ? 1 : 0; }

inline constexpr std::string_view kLogistic = "logistic";
inline constexpr std::string_view kLinearSvm = "linear_svm";

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 2000;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  // Error(kValidation) when a positivity constraint fails.
  void Validate() const;

  bool operator==(const TrainConfig&) const = default;
};

// A fitted linear scorer z = w.x + b mapped to P(Y=1) = sigmoid(a*z + c).
// Logistic regression uses a=1, c=0; the SVM plug-in stores its Platt
// calibration in (a, c).
class TrainedModel {
 public:
  TrainedModel() = default;
  TrainedModel(std::string kind, std::vector<double> weights, double bias,
               double calibration_scale = 1.0, double calibration_offset = 0.0);

  const std::string& kind() const { return kind_; }
  std::size_t feature_count() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

  double Score(std::span<const double> x) const;
  // Error(kShape) on a width mismatch.
  ProbPair PredictProba(std::span<const double> x) const;
  int Predict(std::span<const double> x) const { return ArgmaxLabel(PredictProba(x)); }

  std::vector<ProbPair> PredictProba(const Dataset& d) const;
  std::vector<int> Predict(const Dataset& d) const;

  nlohmann::json ToJson() const;
  static TrainedModel FromJson(const nlohmann::json& j);

  bool operator==(const TrainedModel&) const = default;

 private:
  std::string kind_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double calibration_scale_ = 1.0;
  double calibration_offset_ = 0.0;
};

double Sigmoid(double z);

// Mean log-loss plus (l2/2)*||w||^2; the bias is not penalized.
double LogisticLoss(const Dataset& d, std::span<const double> weights, double bias,
                    double l2_penalty);
// Gradient of LogisticLoss; the last element is d/d(bias).
std::vector<double> LogisticGradient(const Dataset& d, std::span<const double> weights,
                                     double bias, double l2_penalty);

// Full-batch gradient descent from zero weights for cfg.epochs steps.
// Throws Error(kDegenerateTraining) when only one class is present.
// When loss_trace is given, the loss before every step and after the last
// step is appended to it.
TrainedModel FitLogistic(const Dataset& train, const TrainConfig& cfg,
                         std::vector<double>* loss_trace = nullptr);

// Optional plug-in: L2-regularized hinge loss by subgradient descent, then a
// Platt sigmoid fitted on the training scores.
TrainedModel FitLinearSvm(const Dataset& train, const TrainConfig& cfg);

// Dispatches on kind; Error(kValidation) for an unknown kind.
TrainedModel Fit(std::string_view kind, const Dataset& train, const TrainConfig& cfg);

}  // namespace cfsa

#endif  // CFSA_CLASSIFIER_H_
