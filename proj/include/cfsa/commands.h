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

// The four subcommands behind the `cfsa` tool. Each writes its artifacts
// atomically into the output directory and returns what it wrote.

#ifndef CFSA_COMMANDS_H_
#define CFSA_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsa/config.h"
#include "cfsa/error.h"
#include "cfsa/fixtures.h"
#include "cfsa/pipeline.h"

namespace cfsa {

// 2 for configuration errors, 3 for data errors, 4 for pipeline errors.
int ExitCodeFor(ErrorKind kind);

// Files staged in memory and moved into `dir` together. A failed commit
// removes whatever it already placed.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void Add(std::string name, std::string content);
  // Files are placed in insertion order.
  std::vector<std::filesystem::path> Commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct CommandOptions {
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

// Applies --seed and --out on top of the file configuration.
RunConfig ApplyOverrides(RunConfig config, const CommandOptions& options);

struct RunOutput {
  FittedPipeline fit;
  EnsembleEvaluation evaluation;
  nlohmann::json report;
  std::vector<std::filesystem::path> files;
};

RunOutput CmdRun(const RunConfig& config, const CommandOptions& options);

struct SweepRow {
  double fairness_weight = 0.0;
  EnsembleEvaluation evaluation;
};

struct SweepOutput {
  std::vector<SweepRow> rows;
  nlohmann::json report;
  std::vector<std::filesystem::path> files;
};

// Weights 0, step, 2*step, ..., 1 for the fair share; step must divide 1.
std::vector<double> WeightGrid(double step);

SweepOutput CmdSweepWeights(const RunConfig& config, double step, const CommandOptions& options);

struct AuditOutput {
  nlohmann::json report;
  std::vector<CBList> lists;
  std::vector<std::filesystem::path> files;
};

AuditOutput CmdAudit(const RunConfig& config, const CommandOptions& options);

struct GenFixtureOptions {
  fixtures::FixtureSpec spec;
  std::filesystem::path out = "fixture";
};

// Writes fixture.csv, fixture_truth.csv and a ready-to-run config.ini.
std::vector<std::filesystem::path> CmdGenFixture(const GenFixtureOptions& options);

}  // namespace cfsa

#endif  // CFSA_COMMANDS_H_
