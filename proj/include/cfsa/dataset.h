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

#ifndef CFSA_DATASET_H_
#define CFSA_DATASET_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfsa {

using RowId = std::int64_t;

enum class ColumnKind { kNumeric, kCategorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Optional bin edges for numeric columns. When present the column is
  // replaced by its bin index (number of edges <= value) before scaling.
  std::vector<double> cut_points;

  bool operator==(const ColumnSpec&) const = default;
};

// A sensitive attribute is binarized as favored-value-vs-rest. If
// deprived_values is non-empty, any other value is a validation error.
struct SensitiveAttribute {
  std::string column;
  std::string favored_value;
  std::vector<std::string> deprived_values;

  bool operator==(const SensitiveAttribute&) const = default;
};

struct Schema {
  // All columns used from the CSV, including the label column. Feature order
  // follows this order with the label removed.
  std::vector<ColumnSpec> columns;
  std::vector<SensitiveAttribute> sensitive_attrs;
  std::string label_column;
  std::string favorable_label;
  std::vector<std::string> missing_tokens = {"", "?", "NA"};

  const ColumnSpec* FindColumn(std::string_view name) const;
  const SensitiveAttribute* FindSensitive(std::string_view name) const;
  std::vector<std::string> FeatureNames() const;

  // Throws Error(kSchema) on structural problems: unknown sensitive or label
  // column, label marked sensitive, duplicate column names.
  void Validate() const;

  bool operator==(const Schema&) const = default;
};

// Immutable row-major table of features in [0,1] with binary labels.
// Sensitive attribute columns are ordinary feature columns holding 0
// (deprived) or 1 (favored); a label of 1 is the favorable outcome.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<double> features, std::vector<int> labels,
          std::vector<RowId> row_ids, std::vector<std::uint8_t> synthetic = {});

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return feature_names_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * cols(), cols()};
  }
  double at(std::size_t i, std::size_t j) const {
    return features_[i * cols() + j];
  }
  std::span<const double> values() const { return features_; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  RowId row_id(std::size_t i) const { return row_ids_[i]; }
  const std::vector<RowId>& row_ids() const { return row_ids_; }
  bool synthetic(std::size_t i) const { return synthetic_[i] != 0; }

  const Schema& schema() const { return schema_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

  // Feature column index by name; Error(kValidation) when absent.
  std::size_t ColumnIndex(std::string_view name) const;
  // Index of a declared sensitive attribute whose values are all 0 or 1.
  std::size_t SensitiveIndex(std::string_view name) const;
  // Indices of every declared sensitive attribute column.
  std::vector<std::size_t> SensitiveIndices() const;
  std::vector<int> SensitiveValues(std::string_view name) const;

  Dataset Subset(std::span<const std::size_t> indices) const;
  // Smallest id strictly greater than every row id (0 when empty).
  RowId NextRowId() const;

  bool operator==(const Dataset&) const = default;

 private:
  friend class DatasetBuilder;

  Schema schema_;
  std::vector<std::string> feature_names_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<RowId> row_ids_;
  std::vector<std::uint8_t> synthetic_;
};

// Accumulates rows with the same schema as a template dataset.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(const Dataset& like);

  void Add(std::span<const double> features, int label, RowId id,
           bool synthetic = false);
  void AddRow(const Dataset& from, std::size_t i);
  void AddAll(const Dataset& from);
  std::size_t rows() const { return labels_.size(); }

  Dataset Build() &&;

 private:
  Schema schema_;
  std::size_t cols_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<RowId> row_ids_;
  std::vector<std::uint8_t> synthetic_;
};

// Parses RFC-4180 CSV text into a header and records.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
};
CsvTable ParseCsv(std::istream& in);

// Drops rows with missing values, encodes categoricals, min-max scales
// numerics and binarizes the label and sensitive columns.
Dataset Preprocess(const CsvTable& table, const Schema& schema);
Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema);

// Writes the dataset back as CSV: features, label, and optionally row_id and
// synthetic provenance columns. Values use round-trip precision.
void WriteCsv(const Dataset& d, std::ostream& out, bool with_provenance);

// Schema describing a dataset that is already preprocessed: every feature
// numeric, sensitive favored value "1", favorable label "1".
Schema PreprocessedSchema(const Dataset& d);

struct JointDistribution {
  // Percentages of all rows; the four cells sum to 100.
  double favored_granted = 0;
  double favored_rejected = 0;
  double deprived_granted = 0;
  double deprived_rejected = 0;
  std::array<std::size_t, 4> counts{};  // FG, FR, DG, DR
};
JointDistribution SummaryStats(const Dataset& d, std::string_view sensitive);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};
TrainTestSplit Split(const Dataset& d, double train_fraction,
                     std::uint64_t seed);

enum class Subgroup { kDR, kDG, kFR, kFG };
std::string_view ToString(Subgroup g);
Subgroup SubgroupOf(int sensitive, int label);

struct SubgroupPartition {
  std::vector<std::size_t> dr, dg, fr, fg;

  std::size_t size() const {
    return dr.size() + dg.size() + fr.size() + fg.size();
  }
};
SubgroupPartition Partition(const Dataset& d, std::string_view sensitive);

// D': the sensitive column flipped 0 <-> 1 in every row.
Dataset CounterfactualOf(const Dataset& d, std::string_view sensitive);

}  // namespace cfsa

#endif  // CFSA_DATASET_H_
