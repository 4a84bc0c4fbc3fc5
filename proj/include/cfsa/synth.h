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

#ifndef CFSA_SYNTH_H_
#define CFSA_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cfsa/dataset.h"

namespace cfsa {

struct SynthConfig {
  // 0 selects DefaultClusterCount(subgroup size).
  std::size_t k_clusters = 0;
  double filter_fraction = 0.20;
  std::size_t neighbors = 5;
  std::uint64_t seed = 0;

  void Validate() const;
};

// ceil(sqrt(size / 2)), at least 1 and at most size.
std::size_t DefaultClusterCount(std::size_t subgroup_size);

struct KMeansResult {
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> centroids;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded
// from the point farthest from its centroid.
KMeansResult KMeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations = 100,
                    double tolerance = 1e-6);

// Splits total across buckets proportionally to weights by the
// largest-remainder method; ties go to the lower bucket index.
std::vector<std::size_t> LargestRemainder(std::span<const std::size_t> weights,
                                          std::size_t total);

// How each synthetic row was made, for audit and tests. Indices refer to rows
// of the subgroup dataset.
struct SynthesisTrace {
  std::vector<std::size_t> cluster_of;                 // per subgroup row
  std::vector<std::vector<std::size_t>> retained;      // per cluster
  std::vector<std::size_t> allocation;                 // per cluster
  struct Sample {
    std::size_t cluster;
    std::size_t base;
    std::size_t partner;
    double u;
  };
  std::vector<Sample> samples;                         // per synthetic row
};

// Generates n_new rows resembling `subgroup`, whose rows must share the same
// label and sensitive value. Clusters on the non-sensitive features, drops
// the farthest filter_fraction of each cluster, allocates n_new across
// clusters by retained size and interpolates between a retained row and one
// of its nearest retained neighbours in the same cluster. Partners must
// match the base row on every sensitive column so sensitive values stay
// binary. New rows get ids first_id, first_id + 1, ... and are flagged
// synthetic.
Dataset Synthesize(const Dataset& subgroup, std::string_view sensitive, std::size_t n_new,
                   const SynthConfig& cfg, RowId first_id,
                   SynthesisTrace* trace = nullptr);

}  // namespace cfsa

#endif  // CFSA_SYNTH_H_
