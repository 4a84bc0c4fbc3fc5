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

#include "cfsa/synth.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    d += t * t;
  }
  return d;
}

std::size_t Nearest(const std::vector<std::vector<double>>& centroids,
                    std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = SquaredDistance(centroids[c], x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

void SynthConfig::Validate() const {
  if (!(filter_fraction >= 0.0 && filter_fraction < 1.0)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("filter_fraction {} outside [0,1)", filter_fraction));
  }
  if (neighbors == 0) throw Error(ErrorKind::kValidation, "neighbors must be positive");
}

std::size_t DefaultClusterCount(std::size_t subgroup_size) {
  if (subgroup_size == 0) return 1;
  const auto k = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(subgroup_size) / 2.0)));
  return std::clamp<std::size_t>(k, 1, subgroup_size);
}

KMeansResult KMeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations, double tolerance) {
  const std::size_t n = points.size();
  if (n == 0 || k == 0 || k > n) {
    throw Error(ErrorKind::kValidation,
                fmt::format("k-means needs 1 <= k <= n (k={}, n={})", k, n));
  }
  Rng rng(seed);
  KMeansResult out;

  // k-means++ seeding.
  out.centroids.push_back(points[rng.Index(n)]);
  std::vector<double> d2(n);
  while (out.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = SquaredDistance(points[i], out.centroids[Nearest(out.centroids, points[i])]);
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      while (d2[pick] == 0.0) --pick;
      double target = rng.Uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.Index(n);
    }
    out.centroids.push_back(points[pick]);
  }

  const std::size_t m = points[0].size();
  out.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    out.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i) out.assignment[i] = Nearest(out.centroids, points[i]);

    std::vector<std::vector<double>> sums(k, std::vector<double>(m, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[out.assignment[i]];
      for (std::size_t j = 0; j < m; ++j) s[j] += points[i][j];
      ++sizes[out.assignment[i]];
    }
    std::vector<bool> taken(n, false);
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> next(m);
      if (sizes[c] > 0) {
        for (std::size_t j = 0; j < m; ++j) next[j] = sums[c][j] / static_cast<double>(sizes[c]);
      } else {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (taken[i]) continue;
          const double d = SquaredDistance(points[i], out.centroids[out.assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        taken[far] = true;
        next = points[far];
      }
      movement = std::max(movement, std::sqrt(SquaredDistance(next, out.centroids[c])));
      out.centroids[c] = std::move(next);
    }
    if (movement < tolerance) break;
  }
  for (std::size_t i = 0; i < n; ++i) out.assignment[i] = Nearest(out.centroids, points[i]);
  return out;
}

std::vector<std::size_t> LargestRemainder(std::span<const std::size_t> weights,
                                          std::size_t total) {
  const std::size_t sum = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  std::vector<std::size_t> out(weights.size(), 0);
  if (total == 0) return out;
  if (sum == 0) throw Error(ErrorKind::kValidation, "cannot allocate across zero weights");
  std::vector<std::size_t> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = total * weights[i] / sum;
    remainder[i] = total * weights[i] % sum;
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[order[r]];
  return out;
}

Dataset Synthesize(const Dataset& subgroup, std::string_view sensitive, std::size_t n_new,
                   const SynthConfig& cfg, RowId first_id, SynthesisTrace* trace) {
  cfg.Validate();
  DatasetBuilder builder(subgroup);
  if (n_new == 0) return std::move(builder).Build();
  const std::size_t n = subgroup.rows();
  if (n < 2) {
    throw Error(ErrorKind::kSynthesisInfeasible,
                fmt::format("cannot synthesize {} rows from a subgroup of {} row(s)", n_new, n));
  }
  const std::size_t s_col = subgroup.SensitiveIndex(sensitive);
  for (std::size_t i = 1; i < n; ++i) {
    if (subgroup.label(i) != subgroup.label(0) ||
        subgroup.at(i, s_col) != subgroup.at(0, s_col)) {
      throw Error(ErrorKind::kValidation, "subgroup rows do not share (S, Y)");
    }
  }

  const auto sensitive_cols = subgroup.SensitiveIndices();
  std::vector<std::size_t> plain_cols;
  for (std::size_t j = 0; j < subgroup.cols(); ++j) {
    if (std::find(sensitive_cols.begin(), sensitive_cols.end(), j) == sensitive_cols.end()) {
      plain_cols.push_back(j);
    }
  }
  std::vector<std::vector<double>> points(n, std::vector<double>(plain_cols.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < plain_cols.size(); ++j) points[i][j] = subgroup.at(i, plain_cols[j]);
  }
  auto same_sensitive = [&](std::size_t a, std::size_t b) {
    for (std::size_t j : sensitive_cols) {
      if (subgroup.at(a, j) != subgroup.at(b, j)) return false;
    }
    return true;
  };

  const std::size_t k = cfg.k_clusters == 0 ? DefaultClusterCount(n)
                                            : std::clamp<std::size_t>(cfg.k_clusters, 1, n);
  const KMeansResult km = KMeans(points, k, DeriveSeed(cfg.seed, 0));

  // Per-cluster filtering of the farthest points, keeping at least one.
  std::vector<std::vector<std::size_t>> retained(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (km.assignment[i] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    std::vector<double> dist(n);
    for (std::size_t i : members) dist[i] = SquaredDistance(points[i], km.centroids[c]);
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const auto drop = std::min(
        static_cast<std::size_t>(std::ceil(cfg.filter_fraction * static_cast<double>(members.size()) - 1e-9)),
        members.size() - 1);
    members.resize(members.size() - drop);
    std::sort(members.begin(), members.end());
    retained[c] = std::move(members);
  }
  std::vector<std::size_t> sizes(k);
  for (std::size_t c = 0; c < k; ++c) sizes[c] = retained[c].size();
  const auto allocation = LargestRemainder(sizes, n_new);

  if (trace) {
    trace->cluster_of = km.assignment;
    trace->retained = retained;
    trace->allocation = allocation;
    trace->samples.clear();
  }

  Rng rng(DeriveSeed(cfg.seed, 1));
  std::vector<double> x(subgroup.cols());
  RowId next_id = first_id;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& pool = retained[c];
    for (std::size_t made = 0; made < allocation[c]; ++made) {
      const std::size_t base = pool[rng.Index(pool.size())];
      std::vector<std::pair<double, std::size_t>> candidates;
      for (std::size_t other : pool) {
        if (other == base || !same_sensitive(base, other)) continue;
        candidates.emplace_back(SquaredDistance(points[base], points[other]), other);
      }
      std::sort(candidates.begin(), candidates.end());
      if (candidates.size() > cfg.neighbors) candidates.resize(cfg.neighbors);
      const std::size_t partner =
          candidates.empty() ? base : candidates[rng.Index(candidates.size())].second;
      const double u = rng.Uniform();
      const auto xa = subgroup.row(base);
      const auto xb = subgroup.row(partner);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double v = xa[j] + u * (xb[j] - xa[j]);
        x[j] = std::clamp(v, std::min(xa[j], xb[j]), std::max(xa[j], xb[j]));
      }
      builder.Add(x, subgroup.label(0), next_id++, /*synthetic=*/true);
      if (trace) trace->samples.push_back({c, base, partner, u});
    }
  }
  return std::move(builder).Build();
}

}  // namespace cfsa
