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

#include "doctest.h"
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hapax/error.hpp"
#include "hapax/mh_sampler.hpp"
#include "hapax/stats.hpp"

using namespace hapax;

namespace {

const ZMParams kCorpusFit{6.029e8, 2540, 1.896};

TargetDistribution three() { return TargetDistribution::from_weights({0.5, 0.3, 0.2}); }

TargetDistribution random_target(std::mt19937_64& g, int k) {
  std::uniform_real_distribution<double> w(0.01, 1.0);
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (auto& x : weights) x = w(g);
  std::sort(weights.rbegin(), weights.rend());
  return TargetDistribution::from_weights(weights);
}

// Solves pi (P - I) = 0, sum pi = 1 by Gaussian elimination with pivoting.
std::vector<double> stationary_by_elimination(const TransitionMatrix1& tm) {
  const std::size_t k = tm.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0));
  for (std::size_t r = 0; r + 1 < k; ++r)
    for (std::size_t c = 0; c < k; ++c) a[r][c] = tm.prob(c, r) - (r == c ? 1 : 0);
  for (std::size_t c = 0; c < k; ++c) a[k - 1][c] = 1;
  a[k - 1][k] = 1;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = a[i][k] / a[i][i];
  return pi;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<double> empirical(const std::vector<int>& v, int k) {
  std::vector<double> f(static_cast<std::size_t>(k), 0);
  for (const int x : v) f[static_cast<std::size_t>(x - 1)] += 1.0 / static_cast<double>(v.size());
  return f;
}

}  // namespace

TEST_CASE("acceptance_prob") {
  const auto f = three();
  CHECK(acceptance_prob(f, 2, 2) == 1);
  CHECK(acceptance_prob(f, 3, 1) == 1);
  CHECK(acceptance_prob(f, 2, 1) == 1);
  CHECK(acceptance_prob(f, 1, 2) == doctest::Approx(0.6));
  CHECK(acceptance_prob(f, 2, 3) == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(acceptance_prob(f, 0, 1), DomainError);
  CHECK_THROWS_AS(acceptance_prob(f, 1, 4), DomainError);
}

TEST_CASE("run_chain basics") {
  const auto single = TargetDistribution::from_weights({1.0});
  MHConfig cfg;
  cfg.n_steps = 1000;
  const auto r = run_chain(single, cfg);
  CHECK(std::all_of(r.samples.values.begin(), r.samples.values.end(), [](int x) { return x == 1; }));
  CHECK(r.acceptance_rate == 1);

  const auto f = TargetDistribution::from_params(kCorpusFit, 300);
  cfg.seed = 5;
  const auto a = run_chain(f, cfg), b = run_chain(f, cfg);
  CHECK(a.samples.values == b.samples.values);
  CHECK(a.accepted == b.accepted);
  CHECK(a.acceptance_rate == doctest::Approx(static_cast<double>(a.accepted) / 999));
  cfg.seed = 6;
  CHECK(run_chain(f, cfg).samples.values != a.samples.values);

  cfg.initial_state = 17;
  CHECK(run_chain(f, cfg).samples.values.front() == 17);
  cfg.initial_state = 301;
  CHECK_THROWS_AS(run_chain(f, cfg), DomainError);
  cfg.initial_state.reset();
  cfg.n_steps = 0;
  CHECK_THROWS_AS(run_chain(f, cfg), DomainError);
}

TEST_CASE("run_chain ergodic frequencies") {
  MHConfig cfg;
  cfg.n_steps = 200000;
  cfg.seed = 11;
  const auto r = run_chain(three(), cfg);
  const auto freq = empirical(r.samples.values, 3);
  CHECK(max_abs_diff(freq, three().probs()) < 0.01);
}

TEST_CASE("mh_transition_matrix hand values") {
  const auto tm = mh_transition_matrix(three());
  const double expect[3][3] = {{2.0 / 3, 0.2, 2.0 / 15}, {1.0 / 3, 4.0 / 9, 2.0 / 9}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(tm.prob(i, j) == doctest::Approx(expect[i][j]).epsilon(1e-14));

  const auto uni = mh_transition_matrix(TargetDistribution::from_weights(std::vector<double>(7, 1.0)));
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(uni.prob(i, j) == doctest::Approx(1.0 / 7).epsilon(1e-14));
}

TEST_CASE("mh kernel: detailed balance, stationarity and the elimination oracle") {
  std::mt19937_64 g(31);
  std::uniform_int_distribution<int> size(1, 300);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_target(g, size(g));
    const auto tm = mh_transition_matrix(f);
    const std::size_t k = tm.size();
    const auto& p = f.probs();
    double balance = 0, stat = 0;
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0, col = 0;
      for (std::size_t j = 0; j < k; ++j) {
        row += tm.prob(i, j);
        col += p[j] * tm.prob(j, i);
        if (i != j) balance = std::max(balance, std::abs(p[i] * tm.prob(i, j) - p[j] * tm.prob(j, i)));
      }
      CHECK(std::abs(row - 1) < 1e-12);
      stat = std::max(stat, std::abs(col - p[i]));
    }
    CHECK(balance < 1e-14);
    CHECK(stat < 1e-12);
    if (k <= 60) CHECK(max_abs_diff(stationary_by_elimination(tm), p) < 1e-10);
  }
}

TEST_CASE("stationary_oracle") {
  const auto f = three();
  CHECK(max_abs_diff(stationary_oracle(mh_transition_matrix(f), 1e-14), f.probs()) < 1e-10);

  const auto one = TransitionMatrix1::from_probs({1}, {1.0}, {1.0});
  CHECK(stationary_oracle(one, 1e-12) == std::vector<double>{1.0});

  const auto ds = TransitionMatrix1::from_probs(
      {1, 2, 3}, {0.2, 0.5, 0.3, 0.3, 0.2, 0.5, 0.5, 0.3, 0.2}, {1, 1, 1});
  const auto pi = stationary_oracle(ds, 1e-14);
  for (const double x : pi) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // Bipartite chain: iterates oscillate forever from the uniform start.
  const auto periodic = TransitionMatrix1::from_probs(
      {1, 2, 3}, {0, 1, 0, 0.5, 0, 0.5, 0, 1, 0}, {1, 1, 1});
  CHECK_THROWS_AS(stationary_oracle(periodic, 1e-12, 1000), ConvergenceError);
}

TEST_CASE("simulated acceptance rate matches the exact mean acceptance") {
  const auto f = TargetDistribution::from_params(kCorpusFit, 300);
  const auto& p = f.probs();
  double exact = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) exact += p[i] / 300.0 * std::min(1.0, p[j] / p[i]);
  CHECK(mean_acceptance_probability(f) == doctest::Approx(exact).epsilon(1e-12));
  MHConfig cfg;
  cfg.n_steps = 200000;
  cfg.seed = 3;
  CHECK(std::abs(run_chain(f, cfg).acceptance_rate - exact) < 0.01);
}

TEST_CASE("sample_iid follows the target") {
  Rng rng(1);
  const auto x = sample_iid(three(), 200000, rng);
  CHECK(max_abs_diff(empirical(x, 3), three().probs()) < 0.01);
}

TEST_CASE("convergence_study") {
  const auto f = TargetDistribution::from_params(kCorpusFit, 300);
  ConvergenceConfig cfg;
  cfg.runs = 1;
  cfg.chain.n_steps = 5000;
  cfg.chain.seed = 123;
  Rng rng = convergence_run_rng(cfg.chain.seed, 0);
  const auto own = run_chain(f, cfg.chain, rng).samples.values;
  const auto self = convergence_study(f, own, cfg);
  CHECK(self.ks_statistics.at(0) == 0);
  for (const double p : self.pass_fraction) CHECK(p == 1);

  cfg.runs = 6;
  cfg.keep_samples = true;
  const auto a = convergence_study(f, own, cfg);
  cfg.threads = 1;
  const auto b = convergence_study(f, own, cfg);
  CHECK(a.ks_statistics == b.ks_statistics);
  CHECK(a.samples.at(0) == own);
  CHECK(a.thresholds.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto pass = std::count_if(a.ks_statistics.begin(), a.ks_statistics.end(),
                                    [&](double s) { return s <= a.thresholds[l]; });
    CHECK(a.pass_fraction[l] == doctest::Approx(pass / 6.0));
  }
  CHECK_THROWS_AS(convergence_study(f, std::vector<int>{}, cfg), DomainError);
}

TEST_CASE("uniform reference against flat and steep targets") {
  ConvergenceConfig cfg;
  cfg.runs = 5;
  cfg.chain.n_steps = 100000;

  // Near-flat target: the statistic tracks the exact CDF gap, which is small.
  const auto flat = TargetDistribution::from_params(kCorpusFit, 300);
  std::vector<int> uniform300;
  for (int rep = 0; rep < 100; ++rep)
    for (int r = 1; r <= 300; ++r) uniform300.push_back(r);
  double cdf = 0, gap = 0;
  for (int r = 1; r <= 300; ++r) {
    cdf += flat.prob(r);
    gap = std::max(gap, std::abs(cdf - r / 300.0));
  }
  CHECK(gap < 0.03);
  const auto fr = convergence_study(flat, uniform300, cfg);
  for (const double s : fr.ks_statistics) CHECK(std::abs(s - gap) < 0.01);

  // Steep target: rejected at every level.
  const auto steep = TargetDistribution::from_params({1, 0, 1.896}, 50);
  std::vector<int> uniform50;
  for (int rep = 0; rep < 600; ++rep)
    for (int r = 1; r <= 50; ++r) uniform50.push_back(r);
  const auto sr = convergence_study(steep, uniform50, cfg);
  for (const double p : sr.pass_fraction) CHECK(p == 0);
  for (const double s : sr.ks_statistics) CHECK(s > sr.thresholds.back());
}
