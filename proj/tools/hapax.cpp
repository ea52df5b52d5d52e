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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hapax/error.hpp"
#include "hapax/pipeline.hpp"

namespace {

using hapax::cli::PipelineConfig;
using hapax::cli::Stage;

// Option values that need conversion after parsing.
struct RawOptions {
  std::string corpus, out, points, table, sequence, fit_json, reference;
  std::optional<double> alpha, beta, gamma;
  bool no_halve = false;
  std::vector<std::string> stages;
};

void add_out(CLI::App* cmd, RawOptions& raw) {
  cmd->add_option("-o,--out", raw.out, "Output directory (default: $HAPAX_OUT_DIR or .)");
}

void add_seed(CLI::App* cmd, PipelineConfig& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

void add_levels(CLI::App* cmd, PipelineConfig& c, RawOptions& raw) {
  cmd->add_option("--alpha-levels", c.alpha_levels, "Significance levels, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_flag("--no-halve-alpha", raw.no_halve, "Use alpha instead of alpha/2 in KS thresholds");
}

void add_params(CLI::App* cmd, PipelineConfig& c, RawOptions& raw) {
  cmd->add_option("--alpha", raw.alpha, "Zipf-Mandelbrot scale");
  cmd->add_option("--beta", raw.beta, "Zipf-Mandelbrot shift (default 0)");
  cmd->add_option("--gamma", raw.gamma, "Zipf-Mandelbrot exponent");
  cmd->add_option("--fit-json", raw.fit_json, "Fit report to take parameters from");
  cmd->add_option("--rbar", c.r_bar, "Number of ranks of the target")->capture_default_str();
  cmd->add_option("--table", raw.table, "Hapax table used to check r_bar");
}

void add_ordertest(CLI::App* cmd, PipelineConfig& c) {
  cmd->add_option("--replicates", c.replicates, "Simulated replicates")->capture_default_str();
  cmd->add_option("--len1", c.len1, "Order-1 replicate length (0: input length)")->capture_default_str();
  cmd->add_option("--len2", c.len2, "Order-2 replicate length (0: min(100000, input length))")
      ->capture_default_str();
}

void add_mcmc(CLI::App* cmd, PipelineConfig& c, RawOptions& raw) {
  cmd->add_option("--steps", c.mcmc_steps, "Steps per chain")->capture_default_str();
  cmd->add_option("--runs", c.mcmc_runs, "Independent chains")->capture_default_str();
  cmd->add_option("--reference", raw.reference, "Empirical rank sample, one rank per line");
  cmd->add_flag("--write-samples", c.write_samples, "Write mh_samples_<run>.txt");
}

void add_threads(CLI::App* cmd, PipelineConfig& c) {
  cmd->add_option("--threads", c.threads, "Worker threads (0: hardware concurrency)");
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

void finish(PipelineConfig& c, const RawOptions& raw) {
  c.corpus_dir = raw.corpus;
  c.out_dir = raw.out.empty() ? hapax::cli::default_out_dir() : std::filesystem::path(raw.out);
  c.points_csv = opt_path(raw.points);
  c.table_csv = opt_path(raw.table);
  c.sequence_txt = opt_path(raw.sequence);
  c.fit_json = opt_path(raw.fit_json);
  c.reference = opt_path(raw.reference);
  c.halve_alpha = !raw.no_halve;
  if (raw.alpha || raw.beta || raw.gamma) {
    if (!raw.alpha || !raw.gamma) throw hapax::DomainError("--alpha and --gamma must be given together");
    c.params = hapax::ZMParams{*raw.alpha, raw.beta.value_or(0.0), *raw.gamma};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hapax rank-size laws: extraction, Zipf-Mandelbrot fit, Markov order tests and "
               "Metropolis-Hastings sampling"};
  app.set_version_flag("--version", std::string(hapax::cli::kVersion));
  app.set_config("--config", "", "TOML/INI file with option values; flags win");
  app.require_subcommand(1);

  PipelineConfig cfg;
  RawOptions raw;
  std::vector<std::pair<CLI::App*, Stage>> commands;

  auto* extract = app.add_subcommand("extract", "Build hapax_table.csv and rank_sequence.txt");
  extract->add_option("corpus", raw.corpus, "Directory of .txt documents")->required();
  add_out(extract, raw);
  commands.emplace_back(extract, Stage::kExtract);

  auto* fit = app.add_subcommand("fit", "Fit a Zipf-Mandelbrot law, write fit_report.json");
  fit->add_option("--points", raw.points, "rank,size CSV (default: ordinal ranks of the hapax table)");
  fit->add_option("--table", raw.table, "Hapax table (default: <out>/hapax_table.csv)");
  fit->add_option("--level", cfg.fit_level, "Confidence level")->capture_default_str();
  add_out(fit, raw);
  commands.emplace_back(fit, Stage::kFit);

  auto* target = app.add_subcommand("target", "Write target_distribution.csv");
  add_params(target, cfg, raw);
  add_out(target, raw);
  commands.emplace_back(target, Stage::kTarget);

  auto* sequence = app.add_subcommand("sequence", "Rebuild rank_sequence.txt from a corpus and table");
  sequence->add_option("corpus", raw.corpus, "Directory of .txt documents")->required();
  sequence->add_option("--table", raw.table, "Hapax table (default: <out>/hapax_table.csv)");
  add_out(sequence, raw);
  commands.emplace_back(sequence, Stage::kSequence);

  auto* ordertest = app.add_subcommand("ordertest", "First- versus second-order Markov tests");
  ordertest->add_option("--sequence", raw.sequence, "Rank sequence (default: <out>/rank_sequence.txt)");
  add_ordertest(ordertest, cfg);
  add_seed(ordertest, cfg);
  add_levels(ordertest, cfg, raw);
  add_threads(ordertest, cfg);
  add_out(ordertest, raw);
  commands.emplace_back(ordertest, Stage::kOrderTest);

  auto* mcmc = app.add_subcommand("mcmc", "Metropolis-Hastings convergence study");
  add_params(mcmc, cfg, raw);
  add_mcmc(mcmc, cfg, raw);
  add_seed(mcmc, cfg);
  add_levels(mcmc, cfg, raw);
  add_threads(mcmc, cfg);
  add_out(mcmc, raw);
  commands.emplace_back(mcmc, Stage::kMcmc);

  auto* report = app.add_subcommand("report", "Per-figure CSVs from the reports in <out>");
  report->add_flag("--partial", cfg.partial_report, "Skip reports that are absent");
  report->add_option("--fit-json", raw.fit_json, "Fit report (default: <out>/fit_report.json)");
  add_out(report, raw);
  commands.emplace_back(report, Stage::kReport);

  auto* pipeline = app.add_subcommand("pipeline", "Run the stages in order and write manifest.json");
  pipeline->add_option("corpus", raw.corpus, "Directory of .txt documents");
  pipeline->add_option("--stages", raw.stages, "Stages to run, comma separated (default: all)")
      ->delimiter(',');
  pipeline->add_option("--level", cfg.fit_level, "Confidence level of the fit")->capture_default_str();
  add_params(pipeline, cfg, raw);
  add_ordertest(pipeline, cfg);
  add_mcmc(pipeline, cfg, raw);
  add_seed(pipeline, cfg);
  add_levels(pipeline, cfg, raw);
  add_threads(pipeline, cfg);
  add_out(pipeline, raw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    finish(cfg, raw);
    if (pipeline->parsed()) {
      std::vector<Stage> stages;
      for (const auto& name : raw.stages) {
        const auto s = hapax::cli::parse_stage(name);
        if (!s) throw hapax::DomainError("unknown stage '" + name + "'");
        stages.push_back(*s);
      }
      if (stages.empty()) stages = hapax::cli::default_stages();
      hapax::cli::run_pipeline(cfg, stages, std::cout);
      return 0;
    }
    for (const auto& [cmd, stage] : commands) {
      if (!cmd->parsed()) continue;
      hapax::cli::validate(cfg, {stage});
      hapax::cli::run_stage(stage, cfg, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "hapax: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
