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

#include "cfsa/cblist.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "cfsa/error.h"
#include "cfsa/parallel.h"
#include "cfsa/rng.h"

namespace cfsa {

int CfTest(double p, double p_twin) { return (p > 0.5) != (p_twin > 0.5) ? 1 : 0; }

double CdTest(double p, double p_twin) { return std::abs(p - p_twin); }

double CbTest(double p, double p_twin) {
  const int flip = CfTest(p, p_twin);
  const double deviation = CdTest(p, p_twin);
  if (flip != 0) return flip + deviation;
  return deviation;
}

CBList::CBList(std::vector<BiasScore> entries, std::size_t fold_count, std::uint64_t seed)
    : entries_(std::move(entries)), fold_count_(fold_count), seed_(seed) {
  std::sort(entries_.begin(), entries_.end(), [](const BiasScore& a, const BiasScore& b) {
    if (a.cbtest != b.cbtest) return a.cbtest > b.cbtest;
    return a.row_id < b.row_id;
  });
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].row_id, i).second) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("duplicate row id {} in CBList", entries_[i].row_id));
    }
  }
}

const BiasScore* CBList::Find(RowId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::size_t> AssignFolds(std::size_t rows, std::size_t folds,
                                     std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span(order));
  std::vector<std::size_t> fold_of(rows);
  for (std::size_t pos = 0; pos < rows; ++pos) fold_of[order[pos]] = pos % folds;
  return fold_of;
}

CBList BuildCBList(const Dataset& train, std::string_view sensitive,
                   const CBListOptions& options) {
  const std::size_t n = train.rows();
  const std::size_t folds = options.folds;
  if (folds < 2 || folds > n) {
    throw Error(ErrorKind::kValidation,
                fmt::format("fold count {} must be in [2, {}]", folds, n));
  }
  if (folds == n && n > kMaxLeaveOneOutRows) {
    throw Error(ErrorKind::kValidation,
                fmt::format("leave-one-out is limited to {} rows; use K-fold scoring",
                            kMaxLeaveOneOutRows));
  }
  const auto s = train.SensitiveValues(sensitive);
  const Dataset twins = CounterfactualOf(train, sensitive);
  const auto fold_of = AssignFolds(n, folds, options.seed);

  std::vector<std::vector<std::size_t>> held_out(folds);
  for (std::size_t i = 0; i < n; ++i) held_out[fold_of[i]].push_back(i);

  std::vector<BiasScore> scores(n);
  ParallelFor(folds, options.threads, [&](std::size_t f) {
    std::vector<std::size_t> rest;
    rest.reserve(n - held_out[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] != f) rest.push_back(i);
    }
    TrainConfig cfg = options.train;
    cfg.seed = DeriveSeed(options.seed, f);
    TrainedModel model;
    try {
      model = Fit(options.probe_kind, train.Subset(rest), cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateTraining) throw;
      throw Error(ErrorKind::kDegenerateFold,
                  fmt::format("fold {} of {}: training complement has a single class; "
                              "use a smaller fold count ({})",
                              f, folds, e.what()));
    }
    for (std::size_t i : held_out[f]) {
      const double p = model.PredictProba(train.row(i))[1];
      const double p_twin = model.PredictProba(twins.row(i))[1];
      BiasScore& out = scores[i];
      out.row_id = train.row_id(i);
      out.cftest = CfTest(p, p_twin);
      out.cdtest = CdTest(p, p_twin);
      out.cbtest = CbTest(p, p_twin);
      out.subgroup = SubgroupOf(s[i], train.label(i));
      out.prob = p;
      out.twin_prob = p_twin;
      out.fold = f;
    }
  });
  return CBList(std::move(scores), folds, options.seed);
}

void WriteCBListCsv(const CBList& list, std::ostream& out) {
  out << "row_id,subgroup,cftest,cdtest,cbtest\n";
  for (const auto& e : list.entries()) {
    out << fmt::format("{},{},{},{},{}\n", e.row_id, ToString(e.subgroup), e.cftest,
                       e.cdtest, e.cbtest);
  }
}

}  // namespace cfsa
