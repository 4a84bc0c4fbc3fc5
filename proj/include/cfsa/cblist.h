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

#ifndef CFSA_CBLIST_H_
#define CFSA_CBLIST_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfsa/classifier.h"
#include "cfsa/dataset.h"

namespace cfsa {

// Counterfactual scores for one row. Arguments are P(Y=1) for a row and for
// its twin with the sensitive value flipped.

// 1 iff exactly one of p, p_twin exceeds 0.5 (strictly).
int CfTest(double p, double p_twin);
// |p - p_twin|.
double CdTest(double p, double p_twin);
// CfTest + CdTest when the label flips, else CdTest.
double CbTest(double p, double p_twin);

struct BiasScore {
  RowId row_id = 0;
  int cftest = 0;
  double cdtest = 0.0;
  double cbtest = 0.0;
  Subgroup subgroup = Subgroup::kDR;
  // P(Y=1) of the row and of its counterfactual twin under the held-out model.
  double prob = 0.0;
  double twin_prob = 0.0;
  // Out-of-fold index of the model that scored this row.
  std::size_t fold = 0;

  bool operator==(const BiasScore&) const = default;
};

// Scores sorted by cbtest descending, ties by ascending row id.
class CBList {
 public:
  CBList() = default;
  CBList(std::vector<BiasScore> entries, std::size_t fold_count, std::uint64_t seed);

  const std::vector<BiasScore>& entries() const { return entries_; }
  std::size_t fold_count() const { return fold_count_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return entries_.size(); }

  // nullptr when the row id is not in the list.
  const BiasScore* Find(RowId id) const;

  bool operator==(const CBList& o) const {
    return entries_ == o.entries_ && fold_count_ == o.fold_count_ && seed_ == o.seed_;
  }

 private:
  std::vector<BiasScore> entries_;
  std::size_t fold_count_ = 0;
  std::uint64_t seed_ = 0;
  std::unordered_map<RowId, std::size_t> index_;
};

// Exact leave-one-out is available up to this many rows.
inline constexpr std::size_t kMaxLeaveOneOutRows = 2000;

struct CBListOptions {
  // Number of folds; equal to the row count means leave-one-out.
  std::size_t folds = 5;
  std::string probe_kind = std::string(kLogistic);
  TrainConfig train;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Out-of-fold scoring: each row and its counterfactual twin are scored by a
// model fitted on the other folds. Throws Error(kDegenerateFold) when a
// fold's complement has a single class.
CBList BuildCBList(const Dataset& train, std::string_view sensitive,
                   const CBListOptions& options);

// Fold assignment used by BuildCBList: a seeded shuffle dealt round-robin.
std::vector<std::size_t> AssignFolds(std::size_t rows, std::size_t folds,
                                     std::uint64_t seed);

// row_id,subgroup,cftest,cdtest,cbtest
void WriteCBListCsv(const CBList& list, std::ostream& out);

}  // namespace cfsa

#endif  // CFSA_CBLIST_H_
