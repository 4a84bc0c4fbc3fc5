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

#include "cfsa/fixtures.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>

#include <fmt/format.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa::fixtures {
namespace {

bool InUnit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void FixtureSpec::Validate() const {
  if (n < 4) throw Error(ErrorKind::kGeneration, fmt::format("n={} is below 4", n));
  if (features < 1) throw Error(ErrorKind::kGeneration, "need at least one feature");
  if (sensitive_attrs < 1) throw Error(ErrorKind::kGeneration, "need a sensitive attribute");
  if (!InUnit(favored_grant_rate) || !InUnit(deprived_grant_rate) || !InUnit(beta) ||
      !InUnit(band)) {
    throw Error(ErrorKind::kGeneration,
                fmt::format("rates and beta must lie in [0,1] (got {}, {}, {})",
                            favored_grant_rate, deprived_grant_rate, beta));
  }
  if (!(separation >= 0.0 && separation <= 1.0) || !(noise >= 0.0) ||
      !(label_noise >= 0.0)) {
    throw Error(ErrorKind::kGeneration,
                fmt::format("separation {} or noise {} out of range", separation, noise));
  }
  if (!(favored_share > 0.0 && favored_share < 1.0)) {
    throw Error(ErrorKind::kGeneration,
                fmt::format("favored_share {} must lie in (0,1)", favored_share));
  }
}

std::string SensitiveName(std::size_t attr) {
  if (attr == 0) return "sex";
  if (attr == 1) return "race";
  return fmt::format("attr{}", attr);
}

Fixture GenBiased(const FixtureSpec& spec) {
  spec.Validate();
  const std::size_t n = spec.n;
  const std::size_t m = spec.features;
  const std::size_t a = spec.sensitive_attrs;
  Rng rng(spec.seed);

  std::vector<std::vector<int>> sens(a, std::vector<int>(n));
  std::vector<double> raw(n * m);
  std::vector<double> score(n);
  Fixture out;
  out.true_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t deprived = 0;
    for (std::size_t k = 0; k < a; ++k) {
      sens[k][i] = rng.Uniform() < spec.favored_share ? 1 : 0;
      deprived += sens[k][i] == 0 ? 1 : 0;
    }
    const double prior =
        spec.favored_grant_rate - (spec.favored_grant_rate - spec.deprived_grant_rate) *
                                      static_cast<double>(deprived) / static_cast<double>(a);
    const int blob = rng.Uniform() < prior ? 1 : 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double mean = 0.5 + (blob == 1 ? 0.5 : -0.5) * spec.separation;
      const double v = std::clamp(mean + spec.noise * rng.Normal(), 0.0, 1.0);
      raw[i * m + j] = v;
      sum += v;
    }
    score[i] = sum / static_cast<double>(m) - 0.5;
    out.true_labels[i] = score[i] + spec.label_noise * rng.Normal() > 0.0 ? 1 : 0;
  }

  // Borderline deprived candidates are the ones turned down.
  std::vector<int> labels = out.true_labels;
  out.bias_injected.assign(n, 0);
  for (std::size_t k = 0; k < a; ++k) {
    std::vector<std::size_t> granted;
    for (std::size_t i = 0; i < n; ++i) {
      if (sens[k][i] == 0 && labels[i] == 1) granted.push_back(i);
    }
    std::stable_sort(granted.begin(), granted.end(),
                     [&](std::size_t x, std::size_t y) { return score[x] < score[y]; });
    const auto flips = static_cast<std::size_t>(
        std::llround(spec.beta * static_cast<double>(granted.size())));
    const auto band = std::max(flips, static_cast<std::size_t>(std::llround(
                                          spec.band * static_cast<double>(granted.size()))));
    std::span<std::size_t> eligible(granted.data(), band);
    rng.Shuffle(eligible);
    for (std::size_t r = 0; r < flips; ++r) {
      labels[eligible[r]] = 0;
      out.bias_injected[eligible[r]] = 1;
    }
    out.deprived_granted_before.push_back(granted.size());
    out.injected_per_attr.push_back(flips);
  }

  // Min-max scale so the fixture is already in preprocessed form.
  for (std::size_t j = 0; j < m; ++j) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, raw[i * m + j]);
      hi = std::max(hi, raw[i * m + j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double& v = raw[i * m + j];
      v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
  }

  Schema schema;
  for (std::size_t j = 0; j < m; ++j) schema.columns.push_back({fmt::format("x{}", j)});
  for (std::size_t k = 0; k < a; ++k) {
    schema.columns.push_back({SensitiveName(k), ColumnKind::kCategorical, {}});
    schema.sensitive_attrs.push_back({SensitiveName(k), "1", {"0"}});
  }
  schema.columns.push_back({"label", ColumnKind::kCategorical, {}});
  schema.label_column = "label";
  schema.favorable_label = "1";

  const std::size_t cols = m + a;
  std::vector<double> features(n * cols);
  std::vector<RowId> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) features[i * cols + j] = raw[i * m + j];
    for (std::size_t k = 0; k < a; ++k) features[i * cols + m + k] = sens[k][i];
    ids[i] = static_cast<RowId>(i);
  }
  for (std::size_t k = 0; k < a; ++k) {
    const auto fav = static_cast<std::size_t>(std::count(sens[k].begin(), sens[k].end(), 1));
    if (fav == 0 || fav == n) {
      throw Error(ErrorKind::kGeneration,
                  fmt::format("attribute {} has an empty group; increase n", SensitiveName(k)));
    }
  }
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == n) {
    throw Error(ErrorKind::kGeneration, "generated labels are single-class");
  }
  out.data = Dataset(std::move(schema), std::move(features), std::move(labels), std::move(ids));
  return out;
}

void WriteTruthCsv(const Fixture& fixture, std::ostream& out) {
  out << "row_id,true_label,bias_injected\n";
  for (std::size_t i = 0; i < fixture.data.rows(); ++i) {
    out << fixture.data.row_id(i) << ',' << fixture.true_labels[i] << ','
        << static_cast<int>(fixture.bias_injected[i]) << '\n';
  }
}

double GapAfter(std::size_t fg, std::size_t fr, std::size_t dg, std::size_t dr, std::size_t a,
                std::size_t b) {
  const long double fav = static_cast<long double>(fg - a) / static_cast<long double>(fg - a + fr);
  const long double dep = static_cast<long double>(dg) / static_cast<long double>(dg + dr - b);
  return static_cast<double>(std::fabs(fav - dep));
}

std::pair<std::size_t, std::size_t> OracleRemovals(std::size_t fg, std::size_t fr,
                                                   std::size_t dg, std::size_t dr) {
  constexpr long double kTie = 1e-15L;
  std::vector<long double> dep_rate(dr + 1);
  for (std::size_t b = 0; b <= dr; ++b) {
    dep_rate[b] = dg + dr - b > 0
                      ? static_cast<long double>(dg) / static_cast<long double>(dg + dr - b)
                      : -1.0L;
  }
  const long double fav_total = static_cast<long double>(fg + fr);
  const long double dep_total = static_cast<long double>(dg + dr);
  bool found = false;
  long double best_gap = 0, best_res = 0;
  std::size_t best_a = 0, best_b = 0;
  for (std::size_t a = 0; a <= fg; ++a) {
    if (fg - a + fr == 0) continue;
    const long double fav =
        static_cast<long double>(fg - a) / static_cast<long double>(fg - a + fr);
    for (std::size_t b = 0; b <= dr; ++b) {
      if (dep_rate[b] < 0) continue;
      const long double gap = std::fabs(fav - dep_rate[b]);
      const long double res = std::fabs(static_cast<long double>(a) * dep_total -
                                        static_cast<long double>(b) * fav_total);
      bool better = !found;
      if (!better) {
        if (gap < best_gap - kTie) {
          better = true;
        } else if (gap <= best_gap + kTie) {
          better = res < best_res || (res == best_res && a + b < best_a + best_b);
        }
      }
      if (better) {
        found = true;
        best_gap = gap;
        best_res = res;
        best_a = a;
        best_b = b;
      }
    }
  }
  return {best_a, best_b};
}

Dataset TwoBlobSubgroup(std::size_t per_blob, std::uint64_t seed) {
  Rng rng(seed);
  Schema schema;
  schema.columns = {{"x0"}, {"x1"}, {"sex", ColumnKind::kCategorical, {}},
                    {"label", ColumnKind::kCategorical, {}}};
  schema.sensitive_attrs = {{"sex", "1", {"0"}}};
  schema.label_column = "label";
  schema.favorable_label = "1";
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<RowId> ids;
  for (std::size_t blob = 0; blob < 2; ++blob) {
    const double centre = blob == 0 ? 0.2 : 0.8;
    for (std::size_t i = 0; i < per_blob; ++i) {
      features.push_back(std::clamp(centre + 0.05 * rng.Normal(), 0.0, 1.0));
      features.push_back(std::clamp(centre + 0.05 * rng.Normal(), 0.0, 1.0));
      features.push_back(0.0);
      labels.push_back(1);
      ids.push_back(static_cast<RowId>(ids.size()));
    }
  }
  return Dataset(std::move(schema), std::move(features), std::move(labels), std::move(ids));
}

}  // namespace cfsa::fixtures
