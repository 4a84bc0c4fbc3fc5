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

#include "cfsa/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

// Raw values match either textually or, when both parse, numerically, so
// that "1" and "1.0" name the same category.
bool SameValue(std::string_view a, std::string_view b) {
  a = Trim(a);
  b = Trim(b);
  if (a == b) return true;
  const auto x = ParseDouble(a);
  const auto y = ParseDouble(b);
  return x && y && *x == *y;
}

}  // namespace

const ColumnSpec* Schema::FindColumn(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const SensitiveAttribute* Schema::FindSensitive(std::string_view name) const {
  for (const auto& s : sensitive_attrs) {
    if (s.column == name) return &s;
  }
  return nullptr;
}

std::vector<std::string> Schema::FeatureNames() const {
  std::vector<std::string> names;
  for (const auto& c : columns) {
    if (c.name != label_column) names.push_back(c.name);
  }
  return names;
}

void Schema::Validate() const {
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c.name).second) {
      throw Error(ErrorKind::kSchema, fmt::format("duplicate column '{}'", c.name));
    }
  }
  if (!FindColumn(label_column)) {
    throw Error(ErrorKind::kSchema,
                fmt::format("label column '{}' is not in the schema", label_column));
  }
  if (sensitive_attrs.empty()) {
    throw Error(ErrorKind::kSchema, "no sensitive attribute declared");
  }
  for (const auto& s : sensitive_attrs) {
    if (!FindColumn(s.column)) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("sensitive column '{}' is not in the schema", s.column));
    }
    if (s.column == label_column) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("column '{}' cannot be both label and sensitive", s.column));
    }
  }
  if (FeatureNames().size() < 2) {
    throw Error(ErrorKind::kSchema,
                "need at least one non-sensitive feature besides the sensitive one");
  }
}

Dataset::Dataset(Schema schema, std::vector<double> features,
                 std::vector<int> labels, std::vector<RowId> row_ids,
                 std::vector<std::uint8_t> synthetic)
    : schema_(std::move(schema)),
      feature_names_(schema_.FeatureNames()),
      features_(std::move(features)),
      labels_(std::move(labels)),
      row_ids_(std::move(row_ids)),
      synthetic_(std::move(synthetic)) {
  const std::size_t n = labels_.size();
  if (synthetic_.empty()) synthetic_.assign(n, 0);
  if (features_.size() != n * cols() || row_ids_.size() != n ||
      synthetic_.size() != n) {
    throw Error(ErrorKind::kShape, "dataset component sizes disagree");
  }
  for (double v : features_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("feature value {} outside [0,1]", v));
    }
  }
  for (int y : labels_) {
    if (y != 0 && y != 1) {
      throw Error(ErrorKind::kValidation, fmt::format("label {} is not 0/1", y));
    }
  }
  std::unordered_set<RowId> ids(row_ids_.begin(), row_ids_.end());
  if (ids.size() != n) {
    throw Error(ErrorKind::kValidation, "row ids are not unique");
  }
}

std::size_t Dataset::ColumnIndex(std::string_view name) const {
  const auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) {
    throw Error(ErrorKind::kValidation, fmt::format("unknown column '{}'", name));
  }
  return static_cast<std::size_t>(it - feature_names_.begin());
}

std::size_t Dataset::SensitiveIndex(std::string_view name) const {
  if (!schema_.FindSensitive(name)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("'{}' is not a declared sensitive attribute", name));
  }
  const std::size_t j = ColumnIndex(name);
  for (std::size_t i = 0; i < rows(); ++i) {
    const double v = at(i, j);
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("sensitive column '{}' is not binary", name));
    }
  }
  return j;
}

std::vector<std::size_t> Dataset::SensitiveIndices() const {
  std::vector<std::size_t> out;
  for (const auto& s : schema_.sensitive_attrs) out.push_back(ColumnIndex(s.column));
  return out;
}

std::vector<int> Dataset::SensitiveValues(std::string_view name) const {
  const std::size_t j = SensitiveIndex(name);
  std::vector<int> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j) == 1.0 ? 1 : 0;
  return out;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  DatasetBuilder b(*this);
  for (std::size_t i : indices) b.AddRow(*this, i);
  return std::move(b).Build();
}

RowId Dataset::NextRowId() const {
  if (row_ids_.empty()) return 0;
  return *std::max_element(row_ids_.begin(), row_ids_.end()) + 1;
}

DatasetBuilder::DatasetBuilder(const Dataset& like)
    : schema_(like.schema()), cols_(like.cols()) {}

void DatasetBuilder::Add(std::span<const double> features, int label, RowId id,
                         bool synthetic) {
  if (features.size() != cols_) {
    throw Error(ErrorKind::kShape,
                fmt::format("row has {} values, expected {}", features.size(), cols_));
  }
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
  row_ids_.push_back(id);
  synthetic_.push_back(synthetic ? 1 : 0);
}

void DatasetBuilder::AddRow(const Dataset& from, std::size_t i) {
  Add(from.row(i), from.label(i), from.row_id(i), from.synthetic(i));
}

void DatasetBuilder::AddAll(const Dataset& from) {
  for (std::size_t i = 0; i < from.rows(); ++i) AddRow(from, i);
}

Dataset DatasetBuilder::Build() && {
  return Dataset(std::move(schema_), std::move(features_), std::move(labels_),
                 std::move(row_ids_), std::move(synthetic_));
}

CsvTable ParseCsv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool any = false;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // A lone empty line is not a record.
    if (!(record.size() == 1 && record[0].empty() && !field_started)) {
      if (table.header.empty() && table.records.empty()) {
        table.header = std::move(record);
      } else {
        table.records.push_back(std::move(record));
      }
    }
    record.clear();
    field_started = false;
  };
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::kValidation, "unterminated quoted CSV field");
  if (any && (field_started || !record.empty())) end_record();
  // Strip a UTF-8 byte order mark from the first header cell.
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) {
    table.header[0].erase(0, 3);
  }
  for (auto& h : table.header) h = std::string(Trim(h));
  return table;
}

Dataset Preprocess(const CsvTable& table, const Schema& schema) {
  schema.Validate();
  if (table.header.empty()) throw Error(ErrorKind::kEmptyDataset, "CSV is empty");

  std::vector<std::size_t> source(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto it = std::find(table.header.begin(), table.header.end(),
                              schema.columns[c].name);
    if (it == table.header.end()) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("column '{}' missing from CSV header", schema.columns[c].name));
    }
    source[c] = static_cast<std::size_t>(it - table.header.begin());
  }

  auto is_missing = [&](std::string_view v) {
    v = Trim(v);
    return std::any_of(schema.missing_tokens.begin(), schema.missing_tokens.end(),
                       [&](const std::string& t) { return v == t; });
  };

  // Keep complete rows; the record's position is its row id.
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < table.records.size(); ++r) {
    const auto& rec = table.records[r];
    if (rec.size() != table.header.size()) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("CSV record {} has {} fields, header has {}", r + 1,
                              rec.size(), table.header.size()));
    }
    bool complete = true;
    for (std::size_t c : source) complete = complete && !is_missing(rec[c]);
    if (complete) kept.push_back(r);
  }
  if (kept.empty()) throw Error(ErrorKind::kEmptyDataset, "no complete rows in CSV");

  const std::size_t n = kept.size();
  const auto feature_names = schema.FeatureNames();
  const std::size_t m = feature_names.size();
  std::vector<double> features(n * m);
  std::vector<int> labels(n);
  std::vector<RowId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<RowId>(kept[i]);

  std::size_t f = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& spec = schema.columns[c];
    auto raw = [&](std::size_t i) { return Trim(table.records[kept[i]][source[c]]); };

    if (spec.name == schema.label_column) {
      std::set<std::string, std::less<>> distinct;
      for (std::size_t i = 0; i < n; ++i) distinct.emplace(raw(i));
      if (distinct.size() > 2) {
        throw Error(ErrorKind::kValidation,
                    fmt::format("label column '{}' has {} distinct values, expected 2",
                                spec.name, distinct.size()));
      }
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = SameValue(raw(i), schema.favorable_label) ? 1 : 0;
      }
      continue;
    }

    std::vector<double> col(n);
    if (const SensitiveAttribute* sa = schema.FindSensitive(spec.name)) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = raw(i);
        if (SameValue(v, sa->favored_value)) {
          col[i] = 1.0;
          continue;
        }
        if (!sa->deprived_values.empty() &&
            std::none_of(sa->deprived_values.begin(), sa->deprived_values.end(),
                         [&](const std::string& d) { return SameValue(v, d); })) {
          throw Error(ErrorKind::kValidation,
                      fmt::format("sensitive column '{}' has value '{}' that is neither "
                                  "favored nor a declared deprived value",
                                  spec.name, v));
        }
        col[i] = 0.0;
      }
    } else if (spec.kind == ColumnKind::kCategorical) {
      std::map<std::string, std::size_t, std::less<>> codes;
      for (std::size_t i = 0; i < n; ++i) codes.emplace(std::string(raw(i)), 0);
      std::size_t next = 0;
      for (auto& [_, code] : codes) code = next++;
      const double denom = codes.size() > 1 ? static_cast<double>(codes.size() - 1) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = static_cast<double>(codes.find(raw(i))->second) / denom;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = ParseDouble(raw(i));
        if (!v || !std::isfinite(*v)) {
          throw Error(ErrorKind::kValidation,
                      fmt::format("non-numeric value '{}' in column '{}' (record {})",
                                  raw(i), spec.name, kept[i] + 1));
        }
        col[i] = *v;
      }
      if (!spec.cut_points.empty()) {
        for (double& v : col) {
          v = static_cast<double>(std::upper_bound(spec.cut_points.begin(),
                                                   spec.cut_points.end(), v) -
                                  spec.cut_points.begin()) /
              static_cast<double>(spec.cut_points.size());
        }
      } else {
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        const double min = *lo;
        const double max = *hi;
        for (double& v : col) {
          if (max > min) {
            v = (v - min) / (max - min);
          } else {
            // Constant column: keep it if already in range.
            v = (v >= 0.0 && v <= 1.0) ? v : 0.0;
          }
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) features[i * m + f] = col[i];
    ++f;
  }
  return Dataset(schema, std::move(features), std::move(labels), std::move(ids));
}

Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, fmt::format("cannot open '{}'", path.string()));
  }
  return Preprocess(ParseCsv(in), schema);
}

void WriteCsv(const Dataset& d, std::ostream& out, bool with_provenance) {
  for (const auto& name : d.feature_names()) out << name << ',';
  out << d.schema().label_column;
  if (with_provenance) out << ",row_id,synthetic";
  out << '\n';
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.row(i)) out << fmt::format("{}", v) << ',';
    out << d.label(i);
    if (with_provenance) out << ',' << d.row_id(i) << ',' << (d.synthetic(i) ? 1 : 0);
    out << '\n';
  }
}

Schema PreprocessedSchema(const Dataset& d) {
  Schema s;
  for (const auto& name : d.feature_names()) s.columns.push_back({name, ColumnKind::kNumeric, {}});
  s.columns.push_back({d.schema().label_column, ColumnKind::kNumeric, {}});
  for (const auto& attr : d.schema().sensitive_attrs) {
    s.sensitive_attrs.push_back({attr.column, "1", {"0"}});
  }
  s.label_column = d.schema().label_column;
  s.favorable_label = "1";
  return s;
}

JointDistribution SummaryStats(const Dataset& d, std::string_view sensitive) {
  const auto s = d.SensitiveValues(sensitive);
  JointDistribution out;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    ++out.counts[static_cast<std::size_t>(s[i] ? (d.label(i) ? 0 : 1) : (d.label(i) ? 2 : 3))];
  }
  const double n = static_cast<double>(d.rows());
  if (n == 0) throw Error(ErrorKind::kEmptyDataset, "summary of empty dataset");
  out.favored_granted = 100.0 * static_cast<double>(out.counts[0]) / n;
  out.favored_rejected = 100.0 * static_cast<double>(out.counts[1]) / n;
  out.deprived_granted = 100.0 * static_cast<double>(out.counts[2]) / n;
  out.deprived_rejected = 100.0 * static_cast<double>(out.counts[3]) / n;
  return out;
}

TrainTestSplit Split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kValidation,
                fmt::format("train fraction {} outside (0,1)", train_fraction));
  }
  const std::size_t n = d.rows();
  if (n < 2) throw Error(ErrorKind::kValidation, "need at least two rows to split");
  // The small slack keeps products like 0.7 * 100 from flooring to 69.
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorKind::kValidation,
                fmt::format("train fraction {} leaves an empty side for n={}",
                            train_fraction, n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span(order));
  return {d.Subset(std::span(order).first(n_train)),
          d.Subset(std::span(order).subspan(n_train))};
}

std::string_view ToString(Subgroup g) {
  switch (g) {
    case Subgroup::kDR: return "DR";
    case Subgroup::kDG: return "DG";
    case Subgroup::kFR: return "FR";
    case Subgroup::kFG: return "FG";
  }
  return "?";
}

Subgroup SubgroupOf(int sensitive, int label) {
  if (sensitive) return label ? Subgroup::kFG : Subgroup::kFR;
  return label ? Subgroup::kDG : Subgroup::kDR;
}

SubgroupPartition Partition(const Dataset& d, std::string_view sensitive) {
  const auto s = d.SensitiveValues(sensitive);
  SubgroupPartition p;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    switch (SubgroupOf(s[i], d.label(i))) {
      case Subgroup::kDR: p.dr.push_back(i); break;
      case Subgroup::kDG: p.dg.push_back(i); break;
      case Subgroup::kFR: p.fr.push_back(i); break;
      case Subgroup::kFG: p.fg.push_back(i); break;
    }
  }
  return p;
}

Dataset CounterfactualOf(const Dataset& d, std::string_view sensitive) {
  const std::size_t j = d.SensitiveIndex(sensitive);
  std::vector<double> features(d.values().begin(), d.values().end());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double& v = features[i * d.cols() + j];
    v = 1.0 - v;
  }
  std::vector<std::uint8_t> synthetic(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) synthetic[i] = d.synthetic(i) ? 1 : 0;
  return Dataset(d.schema(), std::move(features), d.labels(), d.row_ids(),
                 std::move(synthetic));
}

}  // namespace cfsa
