// Copyright 2026 The hapax-mcmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HAPAX_PIPELINE_HPP_
#define HAPAX_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hapax/ranksize.hpp"

namespace hapax::cli {

inline constexpr std::string_view kVersion = "0.1.0";

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "HAPAX_OUT_DIR";

enum class Stage { kExtract, kFit, kTarget, kSequence, kOrderTest, kMcmc, kReport };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

// Stages run by `pipeline` when none are listed.
const std::vector<Stage>& default_stages();

struct PipelineConfig {
  std::filesystem::path corpus_dir;  // extract, sequence
  std::filesystem::path out_dir = ".";

  // Inputs that default to the stage outputs found in out_dir.
  std::optional<std::filesystem::path> points_csv;  // fit: rank,size
  std::optional<std::filesystem::path> table_csv;
  std::optional<std::filesystem::path> sequence_txt;
  std::optional<std::filesystem::path> fit_json;
  std::optional<std::filesystem::path> reference;  // mcmc: one rank per line

  std::optional<ZMParams> params;  // overrides fit_json
  std::uint64_t seed = 20240101;
  int r_bar = kDefaultRBar;
  double fit_level = 0.95;
  std::vector<double> alpha_levels = {0.05, 0.01, 0.001};
  bool halve_alpha = true;

  std::size_t replicates = 100;
  std::size_t len1 = 0;
  std::size_t len2 = 0;

  std::size_t mcmc_steps = 100000;
  std::size_t mcmc_runs = 100;
  bool write_samples = false;

  bool partial_report = false;  // report: skip absent reports
  unsigned threads = 0;         // does not affect results
};

// Default output directory: $HAPAX_OUT_DIR, else the working directory.
std::filesystem::path default_out_dir();

// SHA-256 of the canonical JSON form of every result-affecting field.
std::string config_hash(const PipelineConfig& config);

// Checks option ranges and that every explicitly given path exists.
// Throws DomainError or IngestionError.
void validate(const PipelineConfig& config, const std::vector<Stage>& stages);

struct StageResult {
  Stage stage;
  std::vector<std::filesystem::path> outputs;
};

// Each writes into out_dir and prints a one-line summary to `log`.
StageResult run_extract(const PipelineConfig& config, std::ostream& log);
StageResult run_fit(const PipelineConfig& config, std::ostream& log);
StageResult run_target(const PipelineConfig& config, std::ostream& log);
StageResult run_sequence(const PipelineConfig& config, std::ostream& log);
StageResult run_ordertest(const PipelineConfig& config, std::ostream& log);
StageResult run_mcmc(const PipelineConfig& config, std::ostream& log);
// Per-figure CSVs from the reports in out_dir.
StageResult emit_plot_data(const PipelineConfig& config, std::ostream& log);

StageResult run_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

// A stage of run_pipeline failed; what() names it.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string("stage '") + std::string(stage_name(stage)) + "' failed: " + what),
        stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Runs `stages` in pipeline order and writes manifest.json. Outputs of
// earlier stages not in the list must already exist in out_dir.
std::vector<StageResult> run_pipeline(const PipelineConfig& config,
                                      const std::vector<Stage>& stages,
                                      std::ostream& log);

}  // namespace hapax::cli

#endif  // HAPAX_PIPELINE_HPP_
