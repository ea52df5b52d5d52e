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

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"

#include "hapax/error.hpp"
#include "hapax/io.hpp"
#include "hapax/pipeline.hpp"

using namespace hapax;
using namespace hapax::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = HAPAX_FIXTURES;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("hapax_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig c;
  c.corpus_dir = kFixtures / "small";
  c.out_dir = out;
  c.replicates = 5;
  c.mcmc_runs = 4;
  c.mcmc_steps = 2000;
  return c;
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(io::read_text(p)); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HAPAX_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("io number formatting is shortest round-trip") {
  for (const double x : {0.1, 1.0 / 3.0, 6.029e8, 1e-300, 0.0046976}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("io sha256 known vector") {
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("io table and sequence round trip") {
  const auto table = HapaxTable::from_entries({{"a", 2, 1, 1}, {"c", 1, 2, 2}, {"d", 1, 2, 3}});
  const std::string csv = io::format_hapax_table(table);
  CHECK(csv == "word,frequency,dense_rank,ordinal_rank\na,2,1,1\nc,1,2,2\nd,1,2,3\n");
  CHECK(io::format_hapax_table(io::parse_hapax_table(csv, "t")) == csv);
  CHECK_THROWS_AS(io::parse_hapax_table("word,frequency,dense_rank,ordinal_rank\na,x,1,1\n", "t"),
                  IngestionError);
  CHECK_THROWS_AS(io::parse_hapax_table("word,frequency,dense_rank,ordinal_rank\na,2,2,1\n", "t"),
                  IngestionError);

  const auto seq = io::parse_rank_sequence("1\n2\r\n1\n2\n", "s");
  CHECK(seq.values == std::vector<int>{1, 2, 1, 2});
  CHECK(seq.alphabet_size == 2);
  CHECK_THROWS_AS(io::parse_rank_sequence("1\n0\n", "s"), IngestionError);
  CHECK_THROWS_AS(io::parse_points("rank,size\n1,2,3\n", "p"), IngestionError);
}

TEST_CASE("run_extract on the toy fixture") {
  TempDir tmp;
  PipelineConfig c;
  c.corpus_dir = kFixtures / "toy";
  c.out_dir = tmp.path;
  std::ostringstream log;
  run_extract(c, log);
  CHECK(log.str() == "extract: 2 documents, 3 hapaxes, 4 occurrences, alphabet size 2\n");
  const std::string table = io::read_text(tmp.path / "hapax_table.csv");
  CHECK(table == "word,frequency,dense_rank,ordinal_rank\na,2,1,1\nc,1,2,2\nd,1,2,3\n");
  CHECK(io::read_text(tmp.path / "rank_sequence.txt") == "1\n2\n1\n2\n");
  const auto summary = load(tmp.path / "extract_summary.json");
  CHECK(summary.at("seed") == c.seed);
  CHECK(summary.at("config_hash") == config_hash(c));

  run_extract(c, log);
  CHECK(io::read_text(tmp.path / "hapax_table.csv") == table);
  for (const auto& e : fs::directory_iterator(tmp.path)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("run_extract errors") {
  TempDir tmp;
  PipelineConfig c;
  c.out_dir = tmp.path;
  c.corpus_dir = kFixtures / "empty";
  std::ostringstream log;
  try {
    run_extract(c, log);
    FAIL("expected an error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("no documents") != std::string::npos);
  }
  c.corpus_dir = tmp.path / "missing";
  CHECK_THROWS_AS(validate(c, {Stage::kExtract}), IngestionError);
}

TEST_CASE("standalone stages report missing inputs") {
  TempDir tmp;
  PipelineConfig c;
  c.out_dir = tmp.path;
  std::ostringstream log;
  CHECK_THROWS_AS(run_ordertest(c, log), DependencyError);
  CHECK_THROWS_AS(run_fit(c, log), DependencyError);
  CHECK_THROWS_AS(run_target(c, log), DependencyError);
  CHECK_THROWS_AS(run_mcmc(c, log), DependencyError);
  CHECK_THROWS_AS(emit_plot_data(c, log), DependencyError);
  c.partial_report = true;
  CHECK_THROWS_AS(emit_plot_data(c, log), DependencyError);
}

TEST_CASE("pipeline: ordertest alone without fit output is a dependency error") {
  TempDir tmp;
  PipelineConfig c = small_config(tmp.path);
  std::ostringstream log;
  run_extract(c, log);
  try {
    run_pipeline(c, {Stage::kOrderTest}, log);
    FAIL("expected a dependency error");
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("'fit'") != std::string::npos);
  }
}

TEST_CASE("target checks r_bar against the alphabet") {
  TempDir tmp;
  PipelineConfig c = small_config(tmp.path);
  std::ostringstream log;
  run_extract(c, log);
  c.params = ZMParams{1, 0, 1};
  c.r_bar = 3;
  CHECK_THROWS_AS(run_target(c, log), DomainError);
  c.r_bar = 300;
  run_target(c, log);
  const std::string csv = io::read_text(tmp.path / "target_distribution.csv");
  CHECK(csv.rfind("rank,prob\n1,", 0) == 0);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  double sum = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    sum += std::stod(line.substr(line.find(',') + 1));
    ++rows;
  }
  CHECK(rows == 300);
  CHECK(sum == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("pipeline end to end on the small fixture") {
  TempDir a, b;
  std::ostringstream log;
  const auto results = run_pipeline(small_config(a.path), default_stages(), log);
  CHECK(results.size() == default_stages().size());
  run_pipeline(small_config(b.path), default_stages(), log);

  const auto ma = load(a.path / "manifest.json");
  const auto mb = load(b.path / "manifest.json");
  CHECK(ma.at("stages") == mb.at("stages"));
  CHECK(ma.at("config_hash") == mb.at("config_hash"));
  for (const auto& stage : ma.at("stages")) {
    for (const auto& [file, sum] : stage.at("outputs").items()) {
      CHECK(io::sha256_file(a.path / file) == sum.get<std::string>());
    }
  }

  const auto fit = load(a.path / "fit_report.json");
  CHECK(fit.at("converged").get<bool>());
  CHECK(fit.at("r_squared").get<double>() > 0.9);
  for (const char* p : {"alpha", "beta", "gamma"}) CHECK(fit.at("confidence_intervals").contains(p));

  const auto order = load(a.path / "order_test_report.json");
  CHECK(order.at("replicates").at("wmw_p_values").size() == 5);
  CHECK(order.at("seed") == 20240101u);

  const auto conv = load(a.path / "convergence_report.json");
  CHECK(conv.at("ks_statistics").size() == 4);
  CHECK(conv.at("n_steps") == 2000);

  CHECK(io::read_text(a.path / "fig6_ks_hist.csv").rfind("ks_stat,threshold_0.05,threshold_0.01,threshold_0.001\n", 0) == 0);
  CHECK(io::read_text(a.path / "fig1_ranksize.csv").rfind("rank,observed,fitted\n1,", 0) == 0);
  CHECK(io::read_text(a.path / "fig3_wmw_pvalues.csv").rfind("replicate,p_value,z,", 0) == 0);
  for (const char* f : {"fig2_ks_first_vs_second.csv", "fig4_chi_square.csv", "fig5_indicators.csv",
                        "fig7_ks_vs_empirical.csv", "ks_first_vs_second.csv", "wmw_pvalues.csv",
                        "chi_square.csv", "ks_vs_empirical.csv", "indicators.csv", "ks_statistics.csv"})
    CHECK(fs::exists(a.path / f));

  // A different seed changes the stochastic stages only.
  TempDir d;
  PipelineConfig other = small_config(d.path);
  other.seed = 7;
  run_pipeline(other, default_stages(), log);
  const auto md = load(d.path / "manifest.json");
  CHECK(md.at("config_hash") != ma.at("config_hash"));
  CHECK(io::read_text(d.path / "hapax_table.csv") == io::read_text(a.path / "hapax_table.csv"));
  CHECK(io::read_text(d.path / "ks_statistics.csv") != io::read_text(a.path / "ks_statistics.csv"));
}

TEST_CASE("pipeline names the failing stage") {
  TempDir tmp;
  PipelineConfig c;
  c.corpus_dir = kFixtures / "toy";  // three points: too few to fit
  c.out_dir = tmp.path;
  std::ostringstream log;
  try {
    run_pipeline(c, default_stages(), log);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::kFit);
    CHECK(std::string(e.what()).find("stage 'fit' failed") != std::string::npos);
  }
  CHECK(fs::exists(tmp.path / "hapax_table.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "manifest.json"));
}

TEST_CASE("report with partial inputs") {
  TempDir tmp;
  PipelineConfig c = small_config(tmp.path);
  std::ostringstream log;
  run_extract(c, log);
  run_ordertest(c, log);
  CHECK_THROWS_AS(emit_plot_data(c, log), DependencyError);
  c.partial_report = true;
  const auto r = emit_plot_data(c, log);
  CHECK(fs::exists(tmp.path / "fig3_wmw_pvalues.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "fig6_ks_hist.csv"));
  CHECK(r.outputs.size() == 6);
}

TEST_CASE("command line") {
  TempDir tmp;
  const std::string out = " -o " + tmp.path.string();
  CHECK(run_cli("extract " + (kFixtures / "toy").string() + out) == 0);
  CHECK(run_cli("extract " + (kFixtures / "empty").string() + out) != 0);
  CHECK(run_cli("ordertest" + out + "/nothing") != 0);
  CHECK(run_cli("fit --points " + (tmp.path / "missing.csv").string() + out) != 0);
  CHECK(run_cli("bogus") != 0);

  // Config file values apply, flags win.
  const fs::path ini = tmp.path / "run.ini";
  io::write_file_atomic(ini, "[ordertest]\nreplicates=3\nlen2=50\n");
  CHECK(run_cli("--config " + ini.string() + " ordertest --replicates 2" + out) == 0);
  const auto report = load(tmp.path / "order_test_report.json");
  CHECK(report.at("config").at("replicates") == 2);
  CHECK(report.at("config").at("len2") == 50);

  const std::string env = "HAPAX_OUT_DIR=" + (tmp.path / "env").string() + " ";
  const int status = std::system((env + HAPAX_BIN + " extract " + (kFixtures / "toy").string() +
                                  " >/dev/null 2>&1").c_str());
  CHECK(status == 0);
  CHECK(fs::exists(tmp.path / "env" / "hapax_table.csv"));
}
