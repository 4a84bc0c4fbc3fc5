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

#include "cfsa/classifier.h"

#include <cmath>

#include <fmt/format.h>

#include "cfsa/error.h"

namespace cfsa {
namespace {

double Dot(std::span<const double> w, std::span<const double> x) {
  double z = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
  return z;
}

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void RequireBothClasses(const Dataset& train) {
  if (train.rows() < 2) {
    throw Error(ErrorKind::kDegenerateTraining, "need at least two training rows");
  }
  std::size_t positives = 0;
  for (int y : train.labels()) positives += static_cast<std::size_t>(y);
  if (positives == 0 || positives == train.rows()) {
    throw Error(ErrorKind::kDegenerateTraining,
                fmt::format("training data has a single class ({} rows, all label {})",
                            train.rows(), positives == 0 ? 0 : 1));
  }
}

// Fits P(y=1) = sigmoid(a*s + c) to scores s (Platt 1999, with the usual
// smoothed targets) by Newton's method.
std::pair<double, double> FitPlatt(std::span<const double> scores,
                                   std::span<const int> labels) {
  double n_pos = 0;
  for (int y : labels) n_pos += y;
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  double a = 1.0;
  double c = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    double g_a = 0, g_c = 0, h_aa = 1e-12, h_ac = 0, h_cc = 1e-12;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double t = labels[i] ? hi : lo;
      const double p = Sigmoid(a * scores[i] + c);
      const double r = p - t;
      const double w = p * (1.0 - p);
      g_a += r * scores[i];
      g_c += r;
      h_aa += w * scores[i] * scores[i];
      h_ac += w * scores[i];
      h_cc += w;
    }
    const double det = h_aa * h_cc - h_ac * h_ac;
    if (std::abs(det) < 1e-18) break;
    const double da = (h_cc * g_a - h_ac * g_c) / det;
    const double dc = (h_aa * g_c - h_ac * g_a) / det;
    a -= da;
    c -= dc;
    if (std::abs(da) + std::abs(dc) < 1e-10) break;
  }
  return {a, c};
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("learning_rate must be positive, got {}", learning_rate));
  }
  if (epochs <= 0) {
    throw Error(ErrorKind::kValidation, fmt::format("epochs must be positive, got {}", epochs));
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("l2_penalty must be non-negative, got {}", l2_penalty));
  }
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

TrainedModel::TrainedModel(std::string kind, std::vector<double> weights, double bias,
                           double calibration_scale, double calibration_offset)
    : kind_(std::move(kind)),
      weights_(std::move(weights)),
      bias_(bias),
      calibration_scale_(calibration_scale),
      calibration_offset_(calibration_offset) {}

double TrainedModel::Score(std::span<const double> x) const {
  if (x.size() != weights_.size()) {
    throw Error(ErrorKind::kShape, fmt::format("input has {} features, model expects {}",
                                               x.size(), weights_.size()));
  }
  return Dot(weights_, x) + bias_;
}

ProbPair TrainedModel::PredictProba(std::span<const double> x) const {
  const double p1 = Sigmoid(calibration_scale_ * Score(x) + calibration_offset_);
  return {1.0 - p1, p1};
}

std::vector<ProbPair> TrainedModel::PredictProba(const Dataset& d) const {
  std::vector<ProbPair> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = PredictProba(d.row(i));
  return out;
}

std::vector<int> TrainedModel::Predict(const Dataset& d) const {
  std::vector<int> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = Predict(d.row(i));
  return out;
}

nlohmann::json TrainedModel::ToJson() const {
  return {{"format_version", 1},
          {"kind", kind_},
          {"feature_count", weights_.size()},
          {"weights", weights_},
          {"bias", bias_},
          {"calibration", {calibration_scale_, calibration_offset_}}};
}

TrainedModel TrainedModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw Error(ErrorKind::kValidation, "unsupported model format_version");
    }
    auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != j.at("feature_count").get<std::size_t>()) {
      throw Error(ErrorKind::kShape, "model feature_count disagrees with weights");
    }
    const auto cal = j.at("calibration").get<std::array<double, 2>>();
    return TrainedModel(j.at("kind").get<std::string>(), std::move(weights),
                        j.at("bias").get<double>(), cal[0], cal[1]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, fmt::format("malformed model JSON: {}", e.what()));
  }
}

double LogisticLoss(const Dataset& d, std::span<const double> weights, double bias,
                    double l2_penalty) {
  double loss = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double z = Dot(weights, d.row(i)) + bias;
    loss += Softplus(z) - d.label(i) * z;
  }
  loss /= static_cast<double>(d.rows());
  double norm2 = 0.0;
  for (double w : weights) norm2 += w * w;
  return loss + 0.5 * l2_penalty * norm2;
}

std::vector<double> LogisticGradient(const Dataset& d, std::span<const double> weights,
                                     double bias, double l2_penalty) {
  const std::size_t m = weights.size();
  std::vector<double> grad(m + 1, 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto x = d.row(i);
    const double r = Sigmoid(Dot(weights, x) + bias) - d.label(i);
    for (std::size_t j = 0; j < m; ++j) grad[j] += r * x[j];
    grad[m] += r;
  }
  const double inv_n = 1.0 / static_cast<double>(d.rows());
  for (std::size_t j = 0; j < m; ++j) grad[j] = grad[j] * inv_n + l2_penalty * weights[j];
  grad[m] *= inv_n;
  return grad;
}

TrainedModel FitLogistic(const Dataset& train, const TrainConfig& cfg,
                         std::vector<double>* loss_trace) {
  cfg.Validate();
  RequireBothClasses(train);
  const std::size_t m = train.cols();
  std::vector<double> w(m, 0.0);
  double b = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (loss_trace) loss_trace->push_back(LogisticLoss(train, w, b, cfg.l2_penalty));
    const auto grad = LogisticGradient(train, w, b, cfg.l2_penalty);
    for (std::size_t j = 0; j < m; ++j) w[j] -= cfg.learning_rate * grad[j];
    b -= cfg.learning_rate * grad[m];
  }
  if (loss_trace) loss_trace->push_back(LogisticLoss(train, w, b, cfg.l2_penalty));
  return TrainedModel(std::string(kLogistic), std::move(w), b);
}

TrainedModel FitLinearSvm(const Dataset& train, const TrainConfig& cfg) {
  cfg.Validate();
  RequireBothClasses(train);
  const std::size_t m = train.cols();
  const std::size_t n = train.rows();
  std::vector<double> w(m, 0.0);
  double b = 0.0;
  std::vector<double> grad(m + 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = train.row(i);
      const double t = train.label(i) ? 1.0 : -1.0;
      if (t * (Dot(w, x) + b) < 1.0) {
        for (std::size_t j = 0; j < m; ++j) grad[j] -= t * x[j];
        grad[m] -= t;
      }
    }
    const double step = cfg.learning_rate / std::sqrt(static_cast<double>(epoch) + 1.0);
    for (std::size_t j = 0; j < m; ++j) {
      w[j] -= step * (grad[j] / static_cast<double>(n) + cfg.l2_penalty * w[j]);
    }
    b -= step * grad[m] / static_cast<double>(n);
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = Dot(w, train.row(i)) + b;
  const auto [a, c] = FitPlatt(scores, train.labels());
  return TrainedModel(std::string(kLinearSvm), std::move(w), b, a, c);
}

TrainedModel Fit(std::string_view kind, const Dataset& train, const TrainConfig& cfg) {
  if (kind == kLogistic) return FitLogistic(train, cfg);
  if (kind == kLinearSvm) return FitLinearSvm(train, cfg);
  throw Error(ErrorKind::kValidation, fmt::format("unknown model kind '{}'", kind));
}

}  // namespace cfsa
