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

#include "hapax/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/opensslv.h>
#include <unicode/uvernum.h>

#include "json.hpp"

#include "hapax/corpus.hpp"
#include "hapax/error.hpp"
#include "hapax/io.hpp"
#include "hapax/markov.hpp"
#include "hapax/mh_sampler.hpp"

namespace hapax::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTableFile = "hapax_table.csv";
constexpr const char* kSequenceFile = "rank_sequence.txt";
constexpr const char* kExtractSummary = "extract_summary.json";
constexpr const char* kSequenceSummary = "sequence_summary.json";
constexpr const char* kFitReport = "fit_report.json";
constexpr const char* kPointsFile = "ranksize_points.csv";
constexpr const char* kTargetFile = "target_distribution.csv";
constexpr const char* kTargetSummary = "target_summary.json";
constexpr const char* kOrderReport = "order_test_report.json";
constexpr const char* kConvergenceReport = "convergence_report.json";
constexpr const char* kKsStatistics = "ks_statistics.csv";
constexpr const char* kPlotSummary = "plot_data.json";
constexpr const char* kManifest = "manifest.json";

std::string path_string(const std::optional<fs::path>& p) {
  return p ? p->generic_string() : std::string();
}

json config_json(const PipelineConfig& c) {
  json j;
  j["corpus_dir"] = c.corpus_dir.generic_string();
  j["points_csv"] = path_string(c.points_csv);
  j["table_csv"] = path_string(c.table_csv);
  j["sequence_txt"] = path_string(c.sequence_txt);
  j["fit_json"] = path_string(c.fit_json);
  j["reference"] = path_string(c.reference);
  if (c.params) {
    j["params"] = {{"alpha", c.params->alpha}, {"beta", c.params->beta}, {"gamma", c.params->gamma}};
  } else {
    j["params"] = nullptr;
  }
  j["seed"] = c.seed;
  j["r_bar"] = c.r_bar;
  j["fit_level"] = c.fit_level;
  j["alpha_levels"] = c.alpha_levels;
  j["halve_alpha"] = c.halve_alpha;
  j["replicates"] = c.replicates;
  j["len1"] = c.len1;
  j["len2"] = c.len2;
  j["mcmc_steps"] = c.mcmc_steps;
  j["mcmc_runs"] = c.mcmc_runs;
  j["write_samples"] = c.write_samples;
  j["partial_report"] = c.partial_report;
  return j;
}

json meta(const PipelineConfig& c) {
  return {{"seed", c.seed}, {"config_hash", config_hash(c)}, {"tool_version", std::string(kVersion)}};
}

void write_json(const fs::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const std::string text = io::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IngestionError(path.string(), std::string("bad JSON: ") + e.what());
  }
}

// An input of `stage`, produced by `producer` unless given explicitly.
fs::path require_input(const PipelineConfig& c, const std::optional<fs::path>& explicit_path,
                       const char* default_name, Stage stage, Stage producer) {
  if (explicit_path) {
    if (!fs::exists(*explicit_path)) throw IngestionError(explicit_path->string(), "not found");
    return *explicit_path;
  }
  const fs::path p = c.out_dir / default_name;
  if (!fs::exists(p)) {
    throw DependencyError(std::string(stage_name(stage)) + ": missing " + p.string() +
                          " (run '" + std::string(stage_name(producer)) + "' first)");
  }
  return p;
}

std::string level_key(const char* prefix, double level) {
  return std::string(prefix) + io::format_double(level);
}

std::string csv_header(std::string head, const char* prefix, const std::vector<double>& levels) {
  for (const double a : levels) head += "," + level_key(prefix, a);
  return head + "\n";
}

std::string csv_row(const std::vector<double>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += io::format_double(cells[i]);
  }
  return row + "\n";
}

double get_double(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::vector<double> get_doubles(const json& j, const char* key, const fs::path& source) {
  if (!j.contains(key)) throw IngestionError(source.string(), std::string("missing field '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(get_double(v));
  return out;
}

ZMParams resolve_params(const PipelineConfig& c, Stage stage) {
  if (c.params) {
    c.params->validate();
    return *c.params;
  }
  const fs::path p = require_input(c, c.fit_json, kFitReport, stage, Stage::kFit);
  const json j = read_json(p);
  try {
    const auto& pj = j.at("params");
    ZMParams params{pj.at("alpha").get<double>(), pj.at("beta").get<double>(),
                    pj.at("gamma").get<double>()};
    params.validate();
    return params;
  } catch (const json::exception& e) {
    throw IngestionError(p.string(), std::string("bad fit report: ") + e.what());
  }
}

std::optional<fs::path> optional_table(const PipelineConfig& c) {
  if (c.table_csv) return c.table_csv;
  const fs::path p = c.out_dir / kTableFile;
  if (fs::exists(p)) return p;
  return std::nullopt;
}

TargetDistribution resolve_target(const PipelineConfig& c, Stage stage) {
  const ZMParams params = resolve_params(c, stage);
  if (const auto table_path = optional_table(c)) {
    const HapaxTable table = io::parse_hapax_table(io::read_text(*table_path), table_path->string());
    if (c.r_bar < table.alphabet_size()) {
      throw DomainError(std::string(stage_name(stage)) + ": r_bar " + std::to_string(c.r_bar) +
                        " is below the observed alphabet size " +
                        std::to_string(table.alphabet_size()));
    }
  }
  return TargetDistribution::from_params(params, c.r_bar);
}

json indicators_json(const Indicators& ind) {
  return {{"mean", ind.mean},
          {"std_dev", ind.std_dev},
          {"kurtosis", ind.kurtosis},
          {"skewness", ind.skewness},
          {"entropy", ind.entropy}};
}

constexpr const char* kIndicatorNames[] = {"mean", "std_dev", "kurtosis", "skewness", "entropy"};

std::string indicators_row(const std::string& label, const json& ind) {
  std::string row = label;
  for (const char* name : kIndicatorNames) row += "," + io::format_double(get_double(ind.at(name)));
  return row + "\n";
}

std::string indicators_csv(const json& report) {
  std::string out = "replicate,mean,std_dev,kurtosis,skewness,entropy\n";
  const auto& reps = report.at("replicates").at("indicators");
  for (std::size_t k = 0; k < reps.size(); ++k) out += indicators_row(std::to_string(k), reps[k]);
  out += indicators_row("empirical", report.at("empirical_indicators"));
  return out;
}

// The per-replicate CSVs share one layout: replicate, statistic, thresholds.
std::string statistic_csv(const char* column, const std::vector<double>& values,
                          const std::vector<double>& levels, const std::vector<double>& thresholds) {
  std::string out = csv_header(std::string("replicate,") + column, "threshold_", levels);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::vector<double> cells = {values[k]};
    cells.insert(cells.end(), thresholds.begin(), thresholds.end());
    out += std::to_string(k) + "," + csv_row(cells);
  }
  return out;
}

std::string wmw_csv(const std::vector<double>& p, const std::vector<double>& z,
                    const std::vector<double>& levels) {
  std::string out = csv_header("replicate,p_value,z", "alpha_", levels);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::vector<double> cells = {p[k], z[k]};
    cells.insert(cells.end(), levels.begin(), levels.end());
    out += std::to_string(k) + "," + csv_row(cells);
  }
  return out;
}

struct OrderTables {
  std::string ks_first, wmw, chi_square, ks_empirical, indicators;
};

OrderTables order_tables(const json& r, const fs::path& source) {
  const auto& reps = r.at("replicates");
  const std::vector<double> levels = get_doubles(r.at("config"), "alpha_levels", source);
  const auto& th = r.at("thresholds");
  OrderTables t;
  t.ks_first = statistic_csv("ks_stat", get_doubles(reps, "ks_first_vs_second", source), levels,
                             get_doubles(th, "ks_first_vs_second", source));
  t.wmw = wmw_csv(get_doubles(reps, "wmw_p_values", source), get_doubles(reps, "wmw_z", source), levels);
  t.chi_square = statistic_csv("chi_square", get_doubles(reps, "chi_square", source), levels,
                               get_doubles(th, "chi_square", source));
  t.ks_empirical = statistic_csv("ks_stat", get_doubles(reps, "ks_vs_empirical", source), levels,
                                 get_doubles(th, "ks_vs_empirical", source));
  t.indicators = indicators_csv(r);
  return t;
}

std::vector<fs::path> stage_outputs(Stage stage) {
  switch (stage) {
    case Stage::kExtract: return {kTableFile, kSequenceFile, kExtractSummary};
    case Stage::kFit: return {kFitReport, kPointsFile};
    case Stage::kTarget: return {kTargetFile, kTargetSummary};
    case Stage::kSequence: return {kSequenceFile, kSequenceSummary};
    case Stage::kOrderTest: return {kOrderReport};
    case Stage::kMcmc: return {kConvergenceReport, kKsStatistics};
    case Stage::kReport: return {kPlotSummary};
  }
  return {};
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kExtract: return "extract";
    case Stage::kFit: return "fit";
    case Stage::kTarget: return "target";
    case Stage::kSequence: return "sequence";
    case Stage::kOrderTest: return "ordertest";
    case Stage::kMcmc: return "mcmc";
    case Stage::kReport: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const Stage s : {Stage::kExtract, Stage::kFit, Stage::kTarget, Stage::kSequence,
                        Stage::kOrderTest, Stage::kMcmc, Stage::kReport}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

const std::vector<Stage>& default_stages() {
  static const std::vector<Stage> stages = {Stage::kExtract,   Stage::kFit,  Stage::kTarget,
                                            Stage::kOrderTest, Stage::kMcmc, Stage::kReport};
  return stages;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return fs::path(env);
  return fs::path(".");
}

std::string config_hash(const PipelineConfig& config) {
  return io::sha256_hex(config_json(config).dump());
}

void validate(const PipelineConfig& c, const std::vector<Stage>& stages) {
  const auto needs = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  if (needs(Stage::kExtract) || needs(Stage::kSequence)) {
    if (c.corpus_dir.empty()) throw DomainError("no corpus directory given");
    if (!fs::is_directory(c.corpus_dir)) throw IngestionError(c.corpus_dir.string(), "not a directory");
  }
  if (fs::exists(c.out_dir) && !fs::is_directory(c.out_dir))
    throw IngestionError(c.out_dir.string(), "output path is not a directory");
  for (const auto* p : {&c.points_csv, &c.table_csv, &c.sequence_txt, &c.fit_json, &c.reference}) {
    if (*p && !fs::is_regular_file(**p)) throw IngestionError((*p)->string(), "not found");
  }
  if (c.r_bar < 1) throw DomainError("r_bar must be >= 1");
  if (!(c.fit_level > 0 && c.fit_level < 1)) throw DomainError("fit level must lie in (0, 1)");
  if (c.alpha_levels.empty()) throw DomainError("no significance levels");
  for (const double a : c.alpha_levels)
    if (!(a > 0 && a < 1)) throw DomainError("significance levels must lie in (0, 1)");
  if (c.replicates < 1) throw DomainError("replicates must be >= 1");
  if (c.mcmc_steps < 1) throw DomainError("steps must be >= 1");
  if (c.mcmc_runs < 1) throw DomainError("runs must be >= 1");
  if (c.params) c.params->validate();
}

StageResult run_extract(const PipelineConfig& c, std::ostream& log) {
  const auto corpus = load_corpus(c.corpus_dir);
  const HapaxTable table = build_hapax_table(corpus);
  const RankSequence seq = build_rank_sequence(corpus, table);
  fs::create_directories(c.out_dir);
  io::write_file_atomic(c.out_dir / kTableFile, io::format_hapax_table(table));
  io::write_file_atomic(c.out_dir / kSequenceFile, io::format_rank_sequence(seq.values));
  json summary = meta(c);
  summary["documents"] = corpus.size();
  summary["hapaxes"] = table.entries().size();
  summary["occurrences"] = table.total_occurrences();
  summary["alphabet_size"] = table.alphabet_size();
  write_json(c.out_dir / kExtractSummary, summary);
  log << "extract: " << corpus.size() << " documents, " << table.entries().size() << " hapaxes, "
      << table.total_occurrences() << " occurrences, alphabet size " << table.alphabet_size()
      << "\n";
  return {Stage::kExtract, stage_outputs(Stage::kExtract)};
}

StageResult run_sequence(const PipelineConfig& c, std::ostream& log) {
  const fs::path table_path = require_input(c, c.table_csv, kTableFile, Stage::kSequence, Stage::kExtract);
  const HapaxTable table = io::parse_hapax_table(io::read_text(table_path), table_path.string());
  const auto corpus = load_corpus(c.corpus_dir);
  const RankSequence seq = build_rank_sequence(corpus, table);
  fs::create_directories(c.out_dir);
  io::write_file_atomic(c.out_dir / kSequenceFile, io::format_rank_sequence(seq.values));
  json summary = meta(c);
  summary["documents"] = corpus.size();
  summary["length"] = seq.values.size();
  summary["alphabet_size"] = seq.alphabet_size;
  write_json(c.out_dir / kSequenceSummary, summary);
  log << "sequence: " << seq.values.size() << " ranks from " << corpus.size() << " documents\n";
  return {Stage::kSequence, stage_outputs(Stage::kSequence)};
}

StageResult run_fit(const PipelineConfig& c, std::ostream& log) {
  std::vector<RankSizePoint> points;
  if (c.points_csv) {
    if (!fs::exists(*c.points_csv)) throw IngestionError(c.points_csv->string(), "not found");
    points = io::parse_points(io::read_text(*c.points_csv), c.points_csv->string());
  } else {
    const fs::path t = require_input(c, c.table_csv, kTableFile, Stage::kFit, Stage::kExtract);
    points = io::table_points(io::parse_hapax_table(io::read_text(t), t.string()));
  }
  FitResult fit;
  try {
    fit = fit_zm(points, c.fit_level);
  } catch (const FitError& e) {
    const auto& b = e.best_so_far().params;
    throw Error(std::string(e.what()) + " (best so far: alpha=" + io::format_double(b.alpha) +
                " beta=" + io::format_double(b.beta) + " gamma=" + io::format_double(b.gamma) + ")");
  }
  fs::create_directories(c.out_dir);
  std::string pts = "rank,size\n";
  for (const auto& p : points) pts += std::to_string(p.rank) + "," + io::format_double(p.size) + "\n";
  io::write_file_atomic(c.out_dir / kPointsFile, pts);

  json j = meta(c);
  j["params"] = {{"alpha", fit.params.alpha}, {"beta", fit.params.beta}, {"gamma", fit.params.gamma}};
  const char* names[] = {"alpha", "beta", "gamma"};
  for (int k = 0; k < 3; ++k) j["confidence_intervals"][names[k]] = {fit.ci[k].low, fit.ci[k].high};
  j["level"] = fit.level;
  j["rss"] = fit.rss;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["ill_conditioned"] = fit.ill_conditioned;
  j["diagnostic"] = fit.diagnostic;
  write_json(c.out_dir / kFitReport, j);
  log << "fit: alpha=" << io::format_double(fit.params.alpha)
      << " beta=" << io::format_double(fit.params.beta)
      << " gamma=" << io::format_double(fit.params.gamma) << " rss=" << io::format_double(fit.rss)
      << " r2=" << io::format_double(fit.r_squared) << " (" << fit.n_points << " points)\n";
  return {Stage::kFit, stage_outputs(Stage::kFit)};
}

StageResult run_target(const PipelineConfig& c, std::ostream& log) {
  const TargetDistribution target = resolve_target(c, Stage::kTarget);
  fs::create_directories(c.out_dir);
  io::write_file_atomic(c.out_dir / kTargetFile, io::format_target(target));
  json j = meta(c);
  j["r_bar"] = target.r_bar();
  j["mean_acceptance_probability"] = mean_acceptance_probability(target);
  write_json(c.out_dir / kTargetSummary, j);
  log << "target: r_bar=" << target.r_bar() << " F_1=" << io::format_double(target.prob(1))
      << " F_r_bar=" << io::format_double(target.prob(target.r_bar())) << "\n";
  return {Stage::kTarget, stage_outputs(Stage::kTarget)};
}

StageResult run_ordertest(const PipelineConfig& c, std::ostream& log) {
  const fs::path sp = require_input(c, c.sequence_txt, kSequenceFile, Stage::kOrderTest, Stage::kExtract);
  RankSequence seq = io::parse_rank_sequence(io::read_text(sp), sp.string());
  OrderTestConfig oc;
  oc.replicates = c.replicates;
  oc.len1 = c.len1;
  oc.len2 = c.len2;
  oc.seed = c.seed;
  oc.alpha_levels = c.alpha_levels;
  oc.halve_alpha = c.halve_alpha;
  oc.threads = c.threads;
  const OrderTestReport r = order_test(seq, oc);

  json j = meta(c);
  j["config"] = {{"replicates", r.config.replicates}, {"len1", r.config.len1},
                 {"len2", r.config.len2},             {"seed", r.config.seed},
                 {"alpha_levels", r.config.alpha_levels}, {"halve_alpha", r.config.halve_alpha}};
  j["input_length"] = r.input_length;
  j["states"] = r.states;
  j["chi_square_df"] = r.chi_square_df;
  j["thresholds"] = {{"ks_first_vs_second", r.ks_first_thresholds},
                     {"chi_square", r.chi_square_thresholds},
                     {"ks_vs_empirical", r.ks_empirical_thresholds}};
  j["pass_fraction"] = {{"ks_first_vs_second", r.ks_first_pass},
                        {"wmw", r.wmw_pass},
                        {"chi_square", r.chi_square_pass},
                        {"ks_vs_empirical", r.ks_empirical_pass}};
  json inds = json::array();
  for (const auto& ind : r.indicators) inds.push_back(indicators_json(ind));
  j["replicates"] = {{"ks_first_vs_second", r.ks_first_vs_second},
                     {"wmw_p_values", r.wmw_p_values},
                     {"wmw_z", r.wmw_z},
                     {"chi_square", r.chi_square_stats},
                     {"ks_vs_empirical", r.ks_vs_empirical},
                     {"indicators", inds}};
  j["empirical_indicators"] = indicators_json(r.empirical_indicators);

  fs::create_directories(c.out_dir);
  write_json(c.out_dir / kOrderReport, j);
  const OrderTables t = order_tables(j, c.out_dir / kOrderReport);
  io::write_file_atomic(c.out_dir / "ks_first_vs_second.csv", t.ks_first);
  io::write_file_atomic(c.out_dir / "wmw_pvalues.csv", t.wmw);
  io::write_file_atomic(c.out_dir / "chi_square.csv", t.chi_square);
  io::write_file_atomic(c.out_dir / "ks_vs_empirical.csv", t.ks_empirical);
  io::write_file_atomic(c.out_dir / "indicators.csv", t.indicators);

  log << "ordertest: " << r.config.replicates << " replicates, len1=" << r.config.len1
      << " len2=" << r.config.len2 << "; at alpha=" << io::format_double(c.alpha_levels[0])
      << " KS pass " << io::format_double(r.ks_first_pass[0]) << ", WMW pass "
      << io::format_double(r.wmw_pass[0]) << "\n";
  StageResult out{Stage::kOrderTest, stage_outputs(Stage::kOrderTest)};
  for (const char* f : {"ks_first_vs_second.csv", "wmw_pvalues.csv", "chi_square.csv",
                        "ks_vs_empirical.csv", "indicators.csv"})
    out.outputs.emplace_back(f);
  return out;
}

StageResult run_mcmc(const PipelineConfig& c, std::ostream& log) {
  const TargetDistribution target = resolve_target(c, Stage::kMcmc);
  const fs::path rp = require_input(c, c.reference, kSequenceFile, Stage::kMcmc, Stage::kExtract);
  const RankSequence ref = io::parse_rank_sequence(io::read_text(rp), rp.string());

  ConvergenceConfig cc;
  cc.runs = c.mcmc_runs;
  cc.chain.n_steps = c.mcmc_steps;
  cc.chain.seed = c.seed;
  cc.levels = c.alpha_levels;
  cc.halve_alpha = c.halve_alpha;
  cc.threads = c.threads;
  cc.keep_samples = c.write_samples;
  const ConvergenceReport r = convergence_study(target, ref.values, cc);

  json j = meta(c);
  j["r_bar"] = target.r_bar();
  j["runs"] = r.runs;
  j["n_steps"] = r.n_steps;
  j["reference_size"] = r.reference_size;
  j["levels"] = r.levels;
  j["halve_alpha"] = c.halve_alpha;
  j["thresholds"] = r.thresholds;
  j["pass_fraction"] = r.pass_fraction;
  j["ks_statistics"] = r.ks_statistics;
  j["acceptance_rates"] = r.acceptance_rates;
  j["mean_acceptance_probability"] = mean_acceptance_probability(target);

  fs::create_directories(c.out_dir);
  write_json(c.out_dir / kConvergenceReport, j);
  std::string ks = "run,ks_stat,acceptance_rate\n";
  for (std::size_t k = 0; k < r.runs; ++k)
    ks += std::to_string(k) + "," + csv_row({r.ks_statistics[k], r.acceptance_rates[k]});
  io::write_file_atomic(c.out_dir / kKsStatistics, ks);

  StageResult out{Stage::kMcmc, stage_outputs(Stage::kMcmc)};
  if (c.write_samples) {
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      const fs::path name = "mh_samples_" + std::to_string(k) + ".txt";
      io::write_file_atomic(c.out_dir / name, io::format_rank_sequence(r.samples[k]));
      out.outputs.push_back(name);
    }
  }
  log << "mcmc: " << r.runs << " runs of " << r.n_steps << " steps against " << r.reference_size
      << " reference ranks; at alpha=" << io::format_double(r.levels[0]) << " KS pass "
      << io::format_double(r.pass_fraction[0]) << "\n";
  return out;
}

StageResult emit_plot_data(const PipelineConfig& c, std::ostream& log) {
  const fs::path fit_path = c.fit_json.value_or(c.out_dir / kFitReport);
  const fs::path points_path = c.out_dir / kPointsFile;
  const fs::path order_path = c.out_dir / kOrderReport;
  const fs::path conv_path = c.out_dir / kConvergenceReport;

  std::vector<std::string> missing;
  const auto present = [&](const fs::path& p) {
    if (fs::exists(p)) return true;
    missing.push_back(p.string());
    return false;
  };
  const bool have_fit_json = present(fit_path);
  const bool have_points = present(points_path);
  const bool have_fit = have_fit_json && have_points;
  const bool have_order = present(order_path);
  const bool have_conv = present(conv_path);
  if (!missing.empty() && (!c.partial_report || (!have_fit && !have_order && !have_conv))) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DependencyError("report: missing report " + list);
  }

  fs::create_directories(c.out_dir);
  StageResult out{Stage::kReport, {}};
  const auto emit = [&](const char* name, const std::string& content) {
    io::write_file_atomic(c.out_dir / name, content);
    out.outputs.emplace_back(name);
  };
  if (have_fit) {
    const json fit = read_json(fit_path);
    const ZMParams params{fit.at("params").at("alpha").get<double>(),
                          fit.at("params").at("beta").get<double>(),
                          fit.at("params").at("gamma").get<double>()};
    const auto points = io::parse_points(io::read_text(points_path), points_path.string());
    std::string csv = "rank,observed,fitted\n";
    for (const auto& p : points)
      csv += std::to_string(p.rank) + "," + csv_row({p.size, zm_eval(params, p.rank)});
    emit("fig1_ranksize.csv", csv);
  }
  if (have_order) {
    const OrderTables t = order_tables(read_json(order_path), order_path);
    emit("fig2_ks_first_vs_second.csv", t.ks_first);
    emit("fig3_wmw_pvalues.csv", t.wmw);
    emit("fig4_chi_square.csv", t.chi_square);
    emit("fig5_indicators.csv", t.indicators);
    emit("fig7_ks_vs_empirical.csv", t.ks_empirical);
  }
  if (have_conv) {
    const json conv = read_json(conv_path);
    const auto levels = get_doubles(conv, "levels", conv_path);
    const auto thresholds = get_doubles(conv, "thresholds", conv_path);
    std::string csv = csv_header("ks_stat", "threshold_", levels);
    for (const double ks : get_doubles(conv, "ks_statistics", conv_path)) {
      std::vector<double> cells = {ks};
      cells.insert(cells.end(), thresholds.begin(), thresholds.end());
      csv += csv_row(cells);
    }
    emit("fig6_ks_hist.csv", csv);
  }
  json summary = meta(c);
  summary["figures"] = json::array();
  for (const auto& p : out.outputs) summary["figures"].push_back(p.generic_string());
  emit(kPlotSummary, summary.dump(2) + "\n");
  log << "report: " << out.outputs.size() - 1 << " figure tables\n";
  return out;
}

StageResult run_stage(Stage stage, const PipelineConfig& c, std::ostream& log) {
  switch (stage) {
    case Stage::kExtract: return run_extract(c, log);
    case Stage::kFit: return run_fit(c, log);
    case Stage::kTarget: return run_target(c, log);
    case Stage::kSequence: return run_sequence(c, log);
    case Stage::kOrderTest: return run_ordertest(c, log);
    case Stage::kMcmc: return run_mcmc(c, log);
    case Stage::kReport: return emit_plot_data(c, log);
  }
  throw DomainError("unknown stage");
}

std::vector<StageResult> run_pipeline(const PipelineConfig& c, const std::vector<Stage>& requested,
                                      std::ostream& log) {
  const std::vector<Stage>& order = default_stages();
  std::vector<Stage> stages;
  for (const Stage s : {Stage::kExtract, Stage::kFit, Stage::kTarget, Stage::kSequence,
                        Stage::kOrderTest, Stage::kMcmc, Stage::kReport}) {
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) stages.push_back(s);
  }
  if (stages.empty()) throw DomainError("pipeline: no stages requested");
  validate(c, stages);

  // Upstream stages that will not run must have left their outputs behind.
  // `sequence` is not part of the default chain and ranks right after extract.
  const auto rank = [&](Stage s) {
    const auto it = std::find(order.begin(), order.end(), s);
    return it == order.end() ? static_cast<std::ptrdiff_t>(1) : it - order.begin();
  };
  for (const Stage s : stages) {
    for (const Stage up : order) {
      if (rank(up) >= rank(s)) break;
      if (std::find(stages.begin(), stages.end(), up) != stages.end()) continue;
      for (const auto& f : stage_outputs(up)) {
        if (!fs::exists(c.out_dir / f)) {
          throw DependencyError("stage '" + std::string(stage_name(s)) + "' needs the output of '" +
                                std::string(stage_name(up)) + "' (" + (c.out_dir / f).string() +
                                " missing)");
        }
      }
    }
  }

  std::vector<StageResult> results;
  for (const Stage s : stages) {
    try {
      results.push_back(run_stage(s, c, log));
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(s, e.what());
    }
  }

  json manifest = meta(c);
  manifest["config"] = config_json(c);
  manifest["versions"] = {{"hapax", std::string(kVersion)},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION},
                          {"icu", U_ICU_VERSION},
                          {"openssl", OPENSSL_VERSION_TEXT}};
  manifest["stages"] = json::array();
  for (const auto& r : results) {
    json files = json::object();
    for (const auto& f : r.outputs) files[f.generic_string()] = io::sha256_file(c.out_dir / f);
    manifest["stages"].push_back({{"stage", std::string(stage_name(r.stage))}, {"outputs", files}});
  }
  write_json(c.out_dir / kManifest, manifest);
  return results;
}

}  // namespace hapax::cli
