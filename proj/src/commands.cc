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

#include "cfsa/commands.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/rng.h"

namespace cfsa {
namespace {

namespace fs = std::filesystem;

std::string Cell(const MetricValue& v) { return v.defined() ? fmt::format("{}", *v) : ""; }

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string SafeName(std::string_view column) {
  std::string out;
  for (char c : column) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

std::string Dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json Summary(const JointDistribution& d) {
  return {{"favored_granted_pct", d.favored_granted},
          {"favored_rejected_pct", d.favored_rejected},
          {"deprived_granted_pct", d.deprived_granted},
          {"deprived_rejected_pct", d.deprived_rejected},
          {"counts", {{"FG", d.counts[0]}, {"FR", d.counts[1]}, {"DG", d.counts[2]},
                      {"DR", d.counts[3]}}}};
}

std::string CBListCsv(const CBList& list) {
  std::ostringstream out;
  WriteCBListCsv(list, out);
  return out.str();
}

nlohmann::json CBListSummary(const CBList& list) {
  std::size_t flips = 0, over_one = 0;
  std::vector<double> scores;
  for (const auto& e : list.entries()) {
    flips += static_cast<std::size_t>(e.cftest);
    over_one += e.cbtest > 1.0 ? 1 : 0;
    scores.push_back(e.cbtest);
  }
  std::sort(scores.begin(), scores.end());
  auto pct = [&](double q) {
    if (scores.empty()) return 0.0;
    const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(scores.size()))) - 1;
    return scores[std::min(i, scores.size() - 1)];
  };
  return {{"rows", list.size()},
          {"cftest_positive", flips},
          {"cbtest_over_1", over_one},
          {"cbtest_p50", pct(0.50)},
          {"cbtest_p95", pct(0.95)},
          {"folds", list.fold_count()}};
}

std::string OutcomesCsv(const std::vector<OutcomeCell>& cells) {
  std::string out =
      "attribute,fairness_metric,performance_metric,bias,performance,origin_bias,"
      "origin_performance,baseline_performance,region,beats_baseline,undefined_reason\n";
  for (const auto& c : cells) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", CsvField(c.attribute),
                       ToString(c.fairness), ToString(c.performance), Cell(c.bias),
                       Cell(c.score), c.origin.bias, c.origin.performance,
                       c.baseline_performance ? fmt::format("{}", *c.baseline_performance) : "",
                       c.region ? ToString(*c.region) : "", c.beats() ? 1 : 0,
                       CsvField(c.reason));
  }
  return out;
}

std::string MetricsCsv(const std::vector<ModelEvaluation>& models, const FittedPipeline& fit) {
  std::string out = "model,metric,attribute,value,undefined_reason\n";
  for (const auto& m : models) {
    for (PerformanceMetric p : kAllPerformanceMetrics) {
      const auto& v = m.performance.Get(p);
      out += fmt::format("{},{},,{},{}\n", CsvField(m.name), ToString(p), Cell(v),
                         CsvField(v.reason));
    }
    for (std::size_t k = 0; k < fit.attributes.size(); ++k) {
      for (std::size_t i = 0; i < std::size(kAllFairnessMetrics); ++i) {
        const auto& v = m.fairness[k][i];
        out += fmt::format("{},{},{},{},{}\n", CsvField(m.name), ToString(kAllFairnessMetrics[i]),
                           CsvField(fit.attributes[k].column), Cell(v), CsvField(v.reason));
      }
    }
  }
  return out;
}

std::string BaselineCsv(const AttributeFit& a) {
  std::string out = "fairness_metric,performance_metric,degree,bias,performance,samples\n";
  for (const auto& row : a.baselines) {
    for (const auto& b : row) {
      for (std::size_t i = 0; i < b.points.size(); ++i) {
        out += fmt::format("{},{},{},{},{},{}\n", ToString(b.fairness_metric),
                           ToString(b.performance_metric), b.degrees[i], b.points[i].bias,
                           b.points[i].performance, b.sample_counts[i]);
      }
    }
  }
  return out;
}

std::string SamplesCsv(const AttributeFit& a) {
  std::ostringstream out;
  out << "fairness_metric,performance_metric,degree,repeat,seed,bias,performance\n";
  for (const auto& row : a.baselines) {
    for (const auto& b : row) WriteSamplesCsv(b, out);
  }
  return out.str();
}

nlohmann::json RegionCounts(const std::vector<OutcomeCell>& cells) {
  std::map<std::string, std::size_t> counts;
  for (Region r : {Region::kWinWin, Region::kGood, Region::kInverted, Region::kPoor,
                   Region::kLoseLose}) {
    counts[std::string(ToString(r))] = 0;
  }
  std::size_t undefined = 0;
  for (const auto& c : cells) {
    if (c.region) {
      ++counts[std::string(ToString(*c.region))];
    } else {
      ++undefined;
    }
  }
  nlohmann::json j = counts;
  j["undefined"] = undefined;
  return j;
}

nlohmann::json EvaluationSummary(const EnsembleEvaluation& e) {
  return {{"cells", e.cells.size()},
          {"classified", e.classified},
          {"beats_baseline", e.beats},
          {"beat_proportion", e.proportion()},
          {"regions", RegionCounts(e.cells)}};
}

std::string ModelJson(const TrainedModel& m) { return Dump(m.ToJson()); }

void AddEnsembleFiles(ArtifactSet& files, const EnsembleSpec& spec) {
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.member_count(); ++i) {
    const bool fair = i < spec.fair_models.size();
    const std::string file = fair ? fmt::format("fair_model_{}.json", i) : "perf_model.json";
    files.Add("ensemble/" + file, ModelJson(spec.member(i)));
    members.push_back({{"role", fair ? "fairness" : "performance"}, {"file", file}});
  }
  files.Add("ensemble/ensemble.json",
            Dump({{"format_version", 1}, {"weights", spec.weights}, {"members", members}}));
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kSchema:
    case ErrorKind::kGeneration:
      return 2;
    case ErrorKind::kValidation:
    case ErrorKind::kEmptyDataset:
    case ErrorKind::kIo:
      return 3;
    default:
      return 4;
  }
}

void ArtifactSet::Add(std::string name, std::string content) {
  files_.emplace_back(std::move(name), std::move(content));
}

std::vector<fs::path> ArtifactSet::Commit() {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorKind::kIo,
                fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
  }
  const fs::path staging = dir_ / fmt::format(".cfsa-staging-{}", ::getpid());
  std::vector<fs::path> placed;
  auto rollback = [&] {
    std::error_code ignored;
    for (const auto& p : placed) fs::remove(p, ignored);
    fs::remove_all(staging, ignored);
  };
  try {
    for (const auto& [name, content] : files_) {
      const fs::path tmp = staging / name;
      fs::create_directories(tmp.parent_path());
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) throw Error(ErrorKind::kIo, fmt::format("failed writing '{}'", tmp.string()));
    }
    for (const auto& [name, content] : files_) {
      const fs::path final_path = dir_ / name;
      fs::create_directories(final_path.parent_path());
      fs::rename(staging / name, final_path);
      placed.push_back(final_path);
    }
  } catch (const fs::filesystem_error& e) {
    rollback();
    throw Error(ErrorKind::kIo, fmt::format("writing outputs failed: {}", e.what()));
  } catch (...) {
    rollback();
    throw;
  }
  std::error_code ignored;
  fs::remove_all(staging, ignored);
  return placed;
}

RunConfig ApplyOverrides(RunConfig config, const CommandOptions& options) {
  if (options.seed) config.seed = *options.seed;
  if (options.out) config.output_dir = *options.out;
  return config;
}

RunOutput CmdRun(const RunConfig& file_config, const CommandOptions& options) {
  const RunConfig config = ApplyOverrides(file_config, options);
  RunOutput out;
  out.fit = FitPipeline(config, options.threads);
  const FittedPipeline& fit = out.fit;
  out.evaluation = EvaluateEnsemble(fit, config.resolved_weights());

  std::vector<ModelEvaluation> models;
  models.push_back(EvaluatePredictions(fit, "original", fit.original.Predict(fit.test)));
  for (const auto& a : fit.attributes) {
    models.push_back(EvaluatePredictions(fit, "fair:" + a.column, a.fair_model.Predict(fit.test)));
  }
  models.push_back(EvaluatePredictions(fit, "performance", fit.selection.model.Predict(fit.test)));
  models.push_back(out.evaluation.metrics);

  nlohmann::json attrs = nlohmann::json::array();
  ArtifactSet files(config.output_dir);
  for (const auto& a : fit.attributes) {
    nlohmann::json baselines = nlohmann::json::array();
    for (const auto& row : a.baselines) {
      for (const auto& b : row) baselines.push_back(b.ToJson());
    }
    attrs.push_back({{"column", a.column},
                     {"train_summary", Summary(SummaryStats(fit.train, a.column))},
                     {"cblist", CBListSummary(a.cblist)},
                     {"debias", a.debias.report.ToJson()},
                     {"debiased_rows", a.debias.data.rows()},
                     {"baselines", baselines}});
    const std::string tag = SafeName(a.column);
    files.Add(fmt::format("cblist_{}.csv", tag), CBListCsv(a.cblist));
    files.Add(fmt::format("baseline_{}.csv", tag), BaselineCsv(a));
    files.Add(fmt::format("baseline_samples_{}.csv", tag), SamplesCsv(a));
  }
  nlohmann::json model_json = nlohmann::json::array();
  for (const auto& m : models) model_json.push_back(ToJson(m, fit));
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : out.evaluation.cells) cells.push_back(ToJson(c));

  nlohmann::json candidates = nlohmann::json::array();
  const auto kinds = config.resolved_candidates();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const double acc = fit.selection.cv_accuracy[i];
    candidates.push_back({{"kind", kinds[i]},
                          {"cv_accuracy", std::isnan(acc) ? nlohmann::json(nullptr)
                                                          : nlohmann::json(acc)}});
  }

  out.report = {{"format_version", 1},
                {"command", "run"},
                {"config", config.ToJson()},
                {"data",
                 {{"rows", fit.rows}, {"train_rows", fit.train.rows()},
                  {"test_rows", fit.test.rows()}}},
                {"attributes", attrs},
                {"selection", {{"candidates", candidates}, {"winner", kinds[fit.selection.winner]}}},
                {"weights", out.evaluation.weights},
                {"models", model_json},
                {"outcomes", cells},
                {"summary", EvaluationSummary(out.evaluation)},
                {"timings", ToJson(fit.timings)}};

  files.Add("outcomes.csv", OutcomesCsv(out.evaluation.cells));
  files.Add("metrics.csv", MetricsCsv(models, fit));
  AddEnsembleFiles(files, fit.Ensemble(out.evaluation.weights));
  files.Add("report.json", Dump(out.report));
  out.files = files.Commit();
  return out;
}

std::vector<double> WeightGrid(double step) {
  if (!(step > 0.0 && step <= 1.0)) {
    throw Error(ErrorKind::kConfig, fmt::format("weight step {} outside (0,1]", step));
  }
  const double intervals = 1.0 / step;
  const auto n = static_cast<std::size_t>(std::llround(intervals));
  if (std::abs(intervals - static_cast<double>(n)) > 1e-9) {
    throw Error(ErrorKind::kConfig, fmt::format("weight step {} does not divide 1", step));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(n));
  return out;
}

SweepOutput CmdSweepWeights(const RunConfig& file_config, double step,
                            const CommandOptions& options) {
  const RunConfig config = ApplyOverrides(file_config, options);
  const auto grid = WeightGrid(step);
  const FittedPipeline fit = FitPipeline(config, options.threads);
  SweepOutput out;
  std::string csv =
      "fairness_weight,performance_weight,cells,classified,beats_baseline,beat_proportion,"
      "accuracy\n";
  nlohmann::json rows = nlohmann::json::array();
  for (double w : grid) {
    SweepRow row{w, EvaluateEnsemble(fit, SweepWeights(fit.attributes.size(), w))};
    const auto& e = row.evaluation;
    csv += fmt::format("{},{},{},{},{},{},{}\n", w, 1.0 - w, e.cells.size(), e.classified, e.beats,
                       e.proportion(), Cell(e.metrics.performance.accuracy));
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : e.cells) cells.push_back(ToJson(c));
    rows.push_back({{"fairness_weight", w},
                    {"weights", e.weights},
                    {"summary", EvaluationSummary(e)},
                    {"metrics", ToJson(e.metrics, fit)},
                    {"outcomes", cells}});
    out.rows.push_back(std::move(row));
  }
  out.report = {{"format_version", 1},
                {"command", "sweep-weights"},
                {"config", config.ToJson()},
                {"step", step},
                {"rows", rows},
                {"timings", ToJson(fit.timings)}};
  ArtifactSet files(config.output_dir);
  files.Add("sweep.csv", csv);
  files.Add("sweep.json", Dump(out.report));
  out.files = files.Commit();
  return out;
}

AuditOutput CmdAudit(const RunConfig& file_config, const CommandOptions& options) {
  const RunConfig config = ApplyOverrides(file_config, options);
  try {
    config.Validate();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("[config] {}", e.what()));
  }
  const std::uint64_t seed = config.run_seed();
  Dataset data;
  try {
    data = LoadData(config);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("[load] {}", e.what()));
  }
  AuditOutput out;
  ArtifactSet files(config.output_dir);
  nlohmann::json attrs = nlohmann::json::array();
  for (std::size_t k = 0; k < config.data.sensitive.size(); ++k) {
    const std::string& column = config.data.sensitive[k].column;
    CBListOptions o;
    o.folds = config.cblist_folds;
    o.probe_kind = config.probe_kind;
    o.train = config.train;
    o.train.seed = seed;
    o.seed = DeriveSeed(seed, 100 + k);
    o.threads = options.threads;
    try {
      out.lists.push_back(BuildCBList(data, column, o));
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("[cblist:{}] {}", column, e.what()));
    }
    attrs.push_back({{"column", column},
                     {"summary", Summary(SummaryStats(data, column))},
                     {"cblist", CBListSummary(out.lists.back())}});
    files.Add(fmt::format("cblist_{}.csv", SafeName(column)), CBListCsv(out.lists.back()));
  }
  out.report = {{"format_version", 1},
                {"command", "audit"},
                {"config", config.ToJson()},
                {"rows", data.rows()},
                {"attributes", attrs}};
  files.Add("audit.json", Dump(out.report));
  out.files = files.Commit();
  return out;
}

std::vector<fs::path> CmdGenFixture(const GenFixtureOptions& options) {
  const auto fixture = fixtures::GenBiased(options.spec);
  std::ostringstream data, truth;
  WriteCsv(fixture.data, data, false);
  fixtures::WriteTruthCsv(fixture, truth);

  RunConfig config;
  config.seed = options.spec.seed;
  config.data.path = "fixture.csv";
  for (std::size_t k = 0; k < options.spec.sensitive_attrs; ++k) {
    config.data.sensitive.push_back({fixtures::SensitiveName(k), "1", {}});
  }
  config.output_dir = "out";

  ArtifactSet files(options.out);
  files.Add("fixture.csv", data.str());
  files.Add("fixture_truth.csv", truth.str());
  files.Add("config.ini", ToIni(config));
  return files.Commit();
}

}  // namespace cfsa
