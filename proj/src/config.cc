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

#include "cfsa/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cfsa/error.h"

namespace cfsa {
namespace {

namespace pt = boost::property_tree;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void Bad(std::string_view key, std::string_view what) {
  throw Error(ErrorKind::kConfig, fmt::format("config key '{}': {}", key, what));
}

double ToDouble(std::string_view key, const std::string& text) {
  const std::string t = Trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    Bad(key, fmt::format("'{}' is not a number", t));
  }
  return v;
}

std::uint64_t ToU64(std::string_view key, const std::string& text) {
  const std::string t = Trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    Bad(key, fmt::format("'{}' is not a non-negative integer", t));
  }
  return v;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  if (!text.empty() && text.back() == ',') out.emplace_back();
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

// A list is either an array node (JSON) or a comma-separated value.
std::vector<std::string> ListOf(const pt::ptree& node) {
  if (node.empty()) return SplitList(node.data());
  std::vector<std::string> out;
  for (const auto& [k, v] : node) out.push_back(Trim(v.data()));
  return out;
}

std::vector<double> DoubleList(std::string_view key, const pt::ptree& node) {
  std::vector<double> out;
  for (const auto& s : ListOf(node)) out.push_back(ToDouble(key, s));
  return out;
}

void CheckKeys(const pt::ptree& section, std::string_view name,
               std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : section) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::kConfig, fmt::format("unknown key '{}' in [{}]", k, name));
    }
  }
}

void Rethrow(std::string_view key, const Error& e) {
  throw Error(ErrorKind::kConfig, fmt::format("config key '{}': {}", key, e.what()));
}

bool KnownKind(std::string_view kind) { return kind == kLogistic || kind == kLinearSvm; }

RunConfig FromTree(const pt::ptree& root, const std::filesystem::path& base_dir) {
  static const std::set<std::string, std::less<>> kSections = {
      "run", "data", "bins", "split", "cblist", "model", "synth",
      "ensemble", "fairea", "metrics", "output"};
  for (const auto& [k, v] : root) {
    if (!kSections.contains(k)) {
      throw Error(ErrorKind::kConfig, fmt::format("unknown config section '{}'", k));
    }
  }
  RunConfig c;
  const pt::ptree empty;
  auto section = [&](const char* name) -> const pt::ptree& {
    const auto child = root.get_child_optional(name);
    return child ? *child : empty;
  };
  auto scalar = [](const pt::ptree& s, const char* key) -> std::optional<std::string> {
    const auto child = s.get_child_optional(key);
    if (!child) return std::nullopt;
    return Trim(child->data());
  };

  const auto& run = section("run");
  CheckKeys(run, "run", {"seed"});
  if (auto v = scalar(run, "seed")) c.seed = ToU64("run.seed", *v);

  const auto& data = section("data");
  CheckKeys(data, "data", {"path", "label", "favorable_label", "sensitive", "favored", "deprived",
                           "categorical", "features", "missing"});
  if (auto v = scalar(data, "path"); v && !v->empty()) c.data.path = base_dir / *v;
  if (auto v = scalar(data, "label")) c.data.label = *v;
  if (auto v = scalar(data, "favorable_label")) c.data.favorable_label = *v;
  std::vector<std::string> sensitive, favored, deprived;
  if (auto n = data.get_child_optional("sensitive")) sensitive = ListOf(*n);
  if (auto n = data.get_child_optional("favored")) favored = ListOf(*n);
  if (auto n = data.get_child_optional("deprived")) deprived = ListOf(*n);
  if (favored.empty()) favored.assign(sensitive.size(), "1");
  if (favored.size() != sensitive.size()) {
    Bad("data.favored", fmt::format("{} values for {} sensitive columns", favored.size(),
                                    sensitive.size()));
  }
  if (!deprived.empty() && deprived.size() != sensitive.size()) {
    Bad("data.deprived", fmt::format("{} values for {} sensitive columns", deprived.size(),
                                     sensitive.size()));
  }
  for (std::size_t i = 0; i < sensitive.size(); ++i) {
    SensitiveAttribute a{sensitive[i], favored[i], {}};
    if (!deprived.empty() && !deprived[i].empty()) a.deprived_values = {deprived[i]};
    c.data.sensitive.push_back(std::move(a));
  }
  if (auto n = data.get_child_optional("categorical")) c.data.categorical = ListOf(*n);
  if (auto n = data.get_child_optional("features")) c.data.features = ListOf(*n);
  if (auto n = data.get_child_optional("missing")) c.data.missing = ListOf(*n);

  for (const auto& [column, node] : section("bins")) {
    c.data.bins[column] = DoubleList(fmt::format("bins.{}", column), node);
  }

  const auto& split = section("split");
  CheckKeys(split, "split", {"train_fraction"});
  if (auto v = scalar(split, "train_fraction")) {
    c.train_fraction = ToDouble("split.train_fraction", *v);
  }

  const auto& cblist = section("cblist");
  CheckKeys(cblist, "cblist", {"folds", "probe"});
  if (auto v = scalar(cblist, "folds")) c.cblist_folds = ToU64("cblist.folds", *v);
  if (auto v = scalar(cblist, "probe")) c.probe_kind = *v;

  const auto& model = section("model");
  CheckKeys(model, "model", {"kind", "learning_rate", "epochs", "l2_penalty"});
  if (auto v = scalar(model, "kind")) c.model_kind = *v;
  if (auto v = scalar(model, "learning_rate")) {
    c.train.learning_rate = ToDouble("model.learning_rate", *v);
  }
  if (auto v = scalar(model, "epochs")) {
    const auto e = ToU64("model.epochs", *v);
    if (e > 100'000'000) Bad("model.epochs", "too large");
    c.train.epochs = static_cast<int>(e);
  }
  if (auto v = scalar(model, "l2_penalty")) c.train.l2_penalty = ToDouble("model.l2_penalty", *v);

  const auto& synth = section("synth");
  CheckKeys(synth, "synth", {"clusters", "filter_fraction", "neighbors"});
  if (auto v = scalar(synth, "clusters")) c.synth.k_clusters = ToU64("synth.clusters", *v);
  if (auto v = scalar(synth, "filter_fraction")) {
    c.synth.filter_fraction = ToDouble("synth.filter_fraction", *v);
  }
  if (auto v = scalar(synth, "neighbors")) c.synth.neighbors = ToU64("synth.neighbors", *v);

  const auto& ens = section("ensemble");
  CheckKeys(ens, "ensemble", {"fairness_weight", "weights", "candidates", "selection_folds"});
  if (auto v = scalar(ens, "fairness_weight")) {
    c.fairness_weight = ToDouble("ensemble.fairness_weight", *v);
  }
  if (auto n = ens.get_child_optional("weights")) c.weights = DoubleList("ensemble.weights", *n);
  if (auto n = ens.get_child_optional("candidates")) c.candidates = ListOf(*n);
  if (auto v = scalar(ens, "selection_folds")) {
    c.selection_folds = ToU64("ensemble.selection_folds", *v);
  }

  const auto& fairea = section("fairea");
  CheckKeys(fairea, "fairea", {"degrees", "repeats"});
  if (auto n = fairea.get_child_optional("degrees")) c.degrees = DoubleList("fairea.degrees", *n);
  if (auto v = scalar(fairea, "repeats")) c.repeats = ToU64("fairea.repeats", *v);

  const auto& metrics = section("metrics");
  CheckKeys(metrics, "metrics", {"fairness", "performance"});
  try {
    if (auto n = metrics.get_child_optional("fairness")) {
      c.fairness.clear();
      for (const auto& s : ListOf(*n)) c.fairness.push_back(ParseFairnessMetric(s));
    }
    if (auto n = metrics.get_child_optional("performance")) {
      c.performance.clear();
      for (const auto& s : ListOf(*n)) c.performance.push_back(ParsePerformanceMetric(s));
    }
  } catch (const Error& e) {
    Rethrow("metrics", e);
  }

  const auto& output = section("output");
  CheckKeys(output, "output", {"dir"});
  const auto dir = scalar(output, "dir");
  c.output_dir = base_dir / (dir && !dir->empty() ? std::filesystem::path(*dir) : c.output_dir);
  return c;
}

}  // namespace

std::uint64_t RunConfig::run_seed() const {
  if (!seed) throw Error(ErrorKind::kConfig, "config key 'run.seed' is required");
  return *seed;
}

std::vector<std::string> RunConfig::resolved_candidates() const {
  return candidates.empty() ? std::vector<std::string>{model_kind} : candidates;
}

std::vector<double> RunConfig::resolved_weights() const {
  if (!weights.empty()) return weights;
  const std::size_t fair = data.sensitive.size();
  if (fair == 1) return {fairness_weight, 1.0 - fairness_weight};
  return std::vector<double>(fair + 1, 1.0 / static_cast<double>(fair + 1));
}

void RunConfig::Validate() const {
  run_seed();
  if (data.path.empty()) Bad("data.path", "is required");
  if (data.label.empty()) Bad("data.label", "is required");
  if (data.sensitive.empty()) Bad("data.sensitive", "name at least one sensitive column");
  std::set<std::string> seen;
  for (const auto& a : data.sensitive) {
    if (a.column.empty()) Bad("data.sensitive", "empty column name");
    if (!seen.insert(a.column).second) {
      Bad("data.sensitive", fmt::format("column '{}' listed twice", a.column));
    }
    if (a.column == data.label) Bad("data.sensitive", "the label cannot be sensitive");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    Bad("split.train_fraction", fmt::format("{} outside (0,1)", train_fraction));
  }
  if (cblist_folds < 2) Bad("cblist.folds", "must be at least 2");
  if (!KnownKind(probe_kind)) Bad("cblist.probe", fmt::format("unknown model '{}'", probe_kind));
  if (!KnownKind(model_kind)) Bad("model.kind", fmt::format("unknown model '{}'", model_kind));
  for (const auto& k : candidates) {
    if (!KnownKind(k)) Bad("ensemble.candidates", fmt::format("unknown model '{}'", k));
  }
  try {
    train.Validate();
  } catch (const Error& e) {
    Rethrow("model", e);
  }
  try {
    synth.Validate();
  } catch (const Error& e) {
    Rethrow("synth", e);
  }
  if (!(fairness_weight >= 0.0 && fairness_weight <= 1.0)) {
    Bad("ensemble.fairness_weight", fmt::format("{} outside [0,1]", fairness_weight));
  }
  if (!weights.empty()) {
    if (weights.size() != data.sensitive.size() + 1) {
      Bad("ensemble.weights", fmt::format("{} weights for {} ensemble members", weights.size(),
                                          data.sensitive.size() + 1));
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) Bad("ensemble.weights", "weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) Bad("ensemble.weights", fmt::format("sum is {}, not 1", sum));
  }
  if (selection_folds < 2) Bad("ensemble.selection_folds", "must be at least 2");
  try {
    BaselineOptions{degrees, repeats, 0, 1}.Validate();
  } catch (const Error& e) {
    Rethrow("fairea", e);
  }
  if (fairness.empty()) Bad("metrics.fairness", "is empty");
  if (performance.empty()) Bad("metrics.performance", "is empty");
}

nlohmann::json RunConfig::ToJson() const {
  nlohmann::json sensitive = nlohmann::json::array();
  for (const auto& a : data.sensitive) {
    sensitive.push_back(
        {{"column", a.column}, {"favored", a.favored_value}, {"deprived", a.deprived_values}});
  }
  nlohmann::json bins = nlohmann::json::object();
  for (const auto& [k, v] : data.bins) bins[k] = v;
  std::vector<std::string> fair_names, perf_names;
  for (auto m : fairness) fair_names.emplace_back(ToString(m));
  for (auto m : performance) perf_names.emplace_back(ToString(m));
  return {
      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
      {"data",
       {{"path", data.path.generic_string()},
        {"label", data.label},
        {"favorable_label", data.favorable_label},
        {"sensitive", sensitive},
        {"categorical", data.categorical},
        {"features", data.features},
        {"missing", data.missing},
        {"bins", bins}}},
      {"split", {{"train_fraction", train_fraction}}},
      {"cblist", {{"folds", cblist_folds}, {"probe", probe_kind}}},
      {"model",
       {{"kind", model_kind},
        {"learning_rate", train.learning_rate},
        {"epochs", train.epochs},
        {"l2_penalty", train.l2_penalty}}},
      {"synth",
       {{"clusters", synth.k_clusters},
        {"filter_fraction", synth.filter_fraction},
        {"neighbors", synth.neighbors}}},
      {"ensemble",
       {{"fairness_weight", fairness_weight},
        {"weights", resolved_weights()},
        {"candidates", resolved_candidates()},
        {"selection_folds", selection_folds}}},
      {"fairea", {{"degrees", degrees}, {"repeats", repeats}}},
      {"metrics", {{"fairness", fair_names}, {"performance", perf_names}}},
      {"output", {{"dir", output_dir.generic_string()}}},
  };
}

RunConfig ParseIniConfig(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfig, fmt::format("malformed INI config: {}", e.what()));
  }
  return FromTree(tree, base_dir);
}

RunConfig ParseJsonConfig(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_json(in, tree);
  } catch (const pt::json_parser_error& e) {
    throw Error(ErrorKind::kConfig, fmt::format("malformed JSON config: {}", e.what()));
  }
  return FromTree(tree, base_dir);
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = path.parent_path();
  RunConfig c = path.extension() == ".json" ? ParseJsonConfig(buf.str(), base)
                                            : ParseIniConfig(buf.str(), base);
  c.source = path;
  return c;
}

Schema BuildSchema(const DataConfig& data, const std::vector<std::string>& header) {
  auto has = [&](const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
  };
  auto require = [&](const std::string& name, std::string_view role) {
    if (!has(name)) {
      throw Error(ErrorKind::kConfig,
                  fmt::format("{} column '{}' not found in the CSV header", role, name));
    }
  };
  require(data.label, "label");
  for (const auto& a : data.sensitive) require(a.column, "sensitive");
  for (const auto& c : data.categorical) require(c, "categorical");
  for (const auto& [c, cuts] : data.bins) require(c, "binned");

  std::vector<std::string> names = data.features;
  if (names.empty()) {
    for (const auto& h : header) {
      if (h != data.label) names.push_back(h);
    }
  }
  for (const auto& a : data.sensitive) {
    if (std::find(names.begin(), names.end(), a.column) == names.end()) names.push_back(a.column);
  }
  Schema s;
  for (const auto& name : names) {
    require(name, "feature");
    ColumnSpec col{name, ColumnKind::kNumeric, {}};
    if (std::find(data.categorical.begin(), data.categorical.end(), name) !=
        data.categorical.end()) {
      col.kind = ColumnKind::kCategorical;
    }
    if (auto it = data.bins.find(name); it != data.bins.end()) col.cut_points = it->second;
    s.columns.push_back(std::move(col));
  }
  s.columns.push_back({data.label, ColumnKind::kCategorical, {}});
  s.sensitive_attrs = data.sensitive;
  s.label_column = data.label;
  s.favorable_label = data.favorable_label;
  s.missing_tokens = data.missing;
  try {
    s.Validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  return s;
}

std::string ToIni(const RunConfig& c) {
  auto join = [](const auto& v) { return fmt::format("{}", fmt::join(v, ", ")); };
  std::vector<std::string> sens, fav;
  for (const auto& a : c.data.sensitive) {
    sens.push_back(a.column);
    fav.push_back(a.favored_value);
  }
  std::vector<std::string> fair, perf;
  for (auto m : c.fairness) fair.emplace_back(ToString(m));
  for (auto m : c.performance) perf.emplace_back(ToString(m));
  std::string out;
  out += fmt::format("[run]\nseed = {}\n\n", c.run_seed());
  out += fmt::format("[data]\npath = {}\nlabel = {}\nfavorable_label = {}\nsensitive = {}\n"
                     "favored = {}\n",
                     c.data.path.generic_string(), c.data.label, c.data.favorable_label,
                     join(sens), join(fav));
  if (!c.data.categorical.empty()) out += fmt::format("categorical = {}\n", join(c.data.categorical));
  out += fmt::format("\n[split]\ntrain_fraction = {}\n\n", c.train_fraction);
  out += fmt::format("[cblist]\nfolds = {}\nprobe = {}\n\n", c.cblist_folds, c.probe_kind);
  out += fmt::format("[model]\nkind = {}\nlearning_rate = {}\nepochs = {}\nl2_penalty = {}\n\n",
                     c.model_kind, c.train.learning_rate, c.train.epochs, c.train.l2_penalty);
  out += fmt::format("[ensemble]\nfairness_weight = {}\ncandidates = {}\n\n", c.fairness_weight,
                     join(c.resolved_candidates()));
  out += fmt::format("[fairea]\ndegrees = {}\nrepeats = {}\n\n", join(c.degrees), c.repeats);
  out += fmt::format("[metrics]\nfairness = {}\nperformance = {}\n\n", join(fair), join(perf));
  out += fmt::format("[output]\ndir = {}\n", c.output_dir.generic_string());
  return out;
}

}  // namespace cfsa
