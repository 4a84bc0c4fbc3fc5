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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cfsa/commands.h"
#include "cfsa/config.h"
#include "cfsa/error.h"
#include "cfsa/parallel.h"

namespace {

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("cfsa");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CFSA_LOG")) spdlog::cfg::helpers::load_levels(level);
}

}  // namespace

int main(int argc, char** argv) {
  SetupLogging();
  CLI::App app{"Bias mitigation by counterfactual scoring, label correction and ensembling"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = cfsa::DefaultThreads();
  std::optional<std::string> out;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (INI, or JSON by extension)")
        ->required();
    cmd->add_option("--seed", seed, "Override the configured seed");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Override the output directory");
  };

  auto* run = app.add_subcommand("run", "Run the full pipeline and write a report");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep-weights", "Evaluate the ensemble over a weight grid");
  add_common(sweep);
  double step = 0.1;
  sweep->add_option("--step", step, "Grid step for the fairness-model weight");
  auto* audit = app.add_subcommand("audit", "Write the ranked bias list and group statistics");
  add_common(audit);

  auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic biased dataset");
  cfsa::GenFixtureOptions gen_options;
  std::string gen_out = "fixture";
  gen->add_option("--n", gen_options.spec.n, "Rows");
  gen->add_option("--beta", gen_options.spec.beta, "Fraction of deprived granted rows flipped");
  gen->add_option("--seed", gen_options.spec.seed, "Generator seed");
  gen->add_option("--attrs", gen_options.spec.sensitive_attrs, "Sensitive attributes");
  gen->add_option("--features", gen_options.spec.features, "Non-sensitive features");
  gen->add_option("--band", gen_options.spec.band,
                  "Borderline band the flipped rows are drawn from");
  gen->add_option("--label-noise", gen_options.spec.label_noise,
                  "Noise sd on the ground-truth score");
  gen->add_option("--out", gen_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      gen_options.out = gen_out;
      for (const auto& p : cfsa::CmdGenFixture(gen_options)) std::cout << p.string() << '\n';
      return 0;
    }
    cfsa::CommandOptions options;
    options.threads = threads;
    options.seed = seed;
    if (out) options.out = std::filesystem::path(*out);
    const cfsa::RunConfig config = cfsa::LoadConfig(config_path);
    if (run->parsed()) {
      const auto result = cfsa::CmdRun(config, options);
      const auto& s = result.report.at("summary");
      std::cout << fmt::format("beat baseline in {}/{} cells\n", s.at("beats_baseline").get<int>(),
                               s.at("cells").get<int>());
      for (const auto& p : result.files) std::cout << p.string() << '\n';
    } else if (sweep->parsed()) {
      const auto result = cfsa::CmdSweepWeights(config, step, options);
      for (const auto& row : result.rows) {
        std::cout << fmt::format("w={:.2f} beat {}/{}\n", row.fairness_weight, row.evaluation.beats,
                                 row.evaluation.cells.size());
      }
      for (const auto& p : result.files) std::cout << p.string() << '\n';
    } else if (audit->parsed()) {
      const auto result = cfsa::CmdAudit(config, options);
      for (const auto& p : result.files) std::cout << p.string() << '\n';
    }
    return 0;
  } catch (const cfsa::Error& e) {
    std::cerr << fmt::format("cfsa: {} error: {}\n", cfsa::ToString(e.kind()), e.what());
    return cfsa::ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cfsa: io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "cfsa: internal error: " << e.what() << '\n';
    return 4;
  }
}
