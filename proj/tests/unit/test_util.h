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

#ifndef CFSA_TESTS_TEST_UTIL_H_
#define CFSA_TESTS_TEST_UTIL_H_

#include <cstddef>
#include <string>
#include <vector>

#include "cfsa/dataset.h"
#include "cfsa/rng.h"

namespace cfsa::testing {

// Schema x0..x{m-1}, sex, label.
inline Schema ToySchema(std::size_t m) {
  Schema s;
  for (std::size_t j = 0; j < m; ++j) s.columns.push_back({"x" + std::to_string(j)});
  s.columns.push_back({"sex", ColumnKind::kCategorical, {}});
  s.columns.push_back({"label", ColumnKind::kCategorical, {}});
  s.sensitive_attrs = {{"sex", "1", {"0"}}};
  s.label_column = "label";
  s.favorable_label = "1";
  return s;
}

struct ToyRow {
  std::vector<double> x;
  int s = 0;
  int y = 0;
};

inline Dataset MakeDataset(const std::vector<ToyRow>& rows) {
  const std::size_t m = rows.empty() ? 0 : rows.front().x.size();
  std::vector<double> f;
  std::vector<int> y;
  std::vector<RowId> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    f.insert(f.end(), rows[i].x.begin(), rows[i].x.end());
    f.push_back(rows[i].s);
    y.push_back(rows[i].y);
    ids.push_back(static_cast<RowId>(i));
  }
  return Dataset(ToySchema(m), std::move(f), std::move(y), std::move(ids));
}

// Uniform features; sensitive and label drawn independently.
inline Dataset RandomDataset(std::size_t n, std::size_t m, std::uint64_t seed,
                             double p_s = 0.5, double p_y = 0.5) {
  Rng rng(seed);
  std::vector<ToyRow> rows(n);
  for (auto& r : rows) {
    for (std::size_t j = 0; j < m; ++j) r.x.push_back(rng.Uniform());
    r.s = rng.Uniform() < p_s;
    r.y = rng.Uniform() < p_y;
  }
  return MakeDataset(rows);
}

inline std::vector<int> RandomBits(std::size_t n, Rng& rng, double p = 0.5) {
  std::vector<int> v(n);
  for (int& b : v) b = rng.Uniform() < p;
  return v;
}

}  // namespace cfsa::testing

#endif  // CFSA_TESTS_TEST_UTIL_H_
