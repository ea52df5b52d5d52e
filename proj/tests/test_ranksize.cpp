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
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hapax/error.hpp"
#include "hapax/ranksize.hpp"

using namespace hapax;

namespace {

const ZMParams kCorpusFit{6.029e8, 2540, 1.896};

std::vector<RankSizePoint> generate(const ZMParams& p, int n) {
  std::vector<RankSizePoint> pts;
  for (int r = 1; r <= n; ++r) pts.push_back({r, zm_eval(p, r)});
  return pts;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Ordinary least-squares slope of log(size) on log(rank).
double loglog_slope(const std::vector<RankSizePoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double x = std::log(static_cast<double>(p.rank)), y = std::log(p.size);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("zm_eval") {
  CHECK(zm_eval({5, 0, 1}, 5) == doctest::Approx(1.0));
  // 6.029e8 / 2541^1.896, evaluated at 40 digits.
  CHECK(zm_eval(kCorpusFit, 1) == doctest::Approx(211.035947673222).epsilon(1e-12));
  const long double oracle = 6.029e8L / std::pow(2541.0L, 1.896L);
  CHECK(zm_eval(kCorpusFit, 1) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));

  CHECK_THROWS_AS(zm_eval({0, 0, 1}, 1), DomainError);
  CHECK_THROWS_AS(zm_eval({1, -1, 1}, 1), DomainError);
  CHECK_THROWS_AS(zm_eval({1, 0, 0}, 1), DomainError);
  CHECK_THROWS_AS(zm_eval({1, 0, 1}, 0), DomainError);
}

TEST_CASE("zm_eval is strictly decreasing in rank") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> la(-3, 9), beta(-0.99, 3000), gam(0.05, 4);
  std::uniform_int_distribution<int> rank(1, 5000);
  for (int i = 0; i < 2000; ++i) {
    const ZMParams p{std::pow(10.0, la(g)), beta(g), gam(g)};
    int r1 = rank(g), r2 = rank(g);
    if (r1 == r2) continue;
    if (r1 > r2) std::swap(r1, r2);
    CHECK(zm_eval(p, r1) > zm_eval(p, r2));
  }
}

TEST_CASE("fit_zm recovers noiseless Zipf-Mandelbrot data") {
  const ZMParams truth{100, 5, 1.5};
  const auto pts = generate(truth, 200);
  const FitResult fit = fit_zm(pts, 0.95);
  CHECK(fit.converged);
  CHECK_FALSE(fit.ill_conditioned);
  CHECK(rel(fit.params.alpha, truth.alpha) < 1e-3);
  CHECK(rel(fit.params.beta, truth.beta) < 1e-3);
  CHECK(rel(fit.params.gamma, truth.gamma) < 1e-3);
  CHECK(fit.rss < 1e-8);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.n_points == 200);
  for (const auto& ci : fit.ci) CHECK((ci.high - ci.low) / 2 < 1e-6);
  CHECK(fit.ci[0].contains(fit.params.alpha));
  CHECK(fit.ci[1].contains(fit.params.beta));
  CHECK(fit.ci[2].contains(fit.params.gamma));
}

TEST_CASE("fit_zm on pure Zipf data agrees with the log-log slope") {
  const auto pts = generate({1, 0, 1}, 50);
  CHECK(loglog_slope(pts) == doctest::Approx(-1.0).epsilon(1e-12));
  const FitResult fit = fit_zm(pts);
  CHECK(std::abs(fit.params.gamma - 1) < 1e-3);
}

TEST_CASE("fit_zm recovers random valid parameters") {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> la(0, 4), beta(0.5, 20), gam(0.5, 3);
  for (int trial = 0; trial < 25; ++trial) {
    const ZMParams truth{std::pow(10.0, la(g)), beta(g), gam(g)};
    const FitResult fit = fit_zm(generate(truth, 120));
    CHECK(rel(fit.params.alpha, truth.alpha) < 1e-3);
    CHECK(rel(fit.params.beta, truth.beta) < 1e-3);
    CHECK(rel(fit.params.gamma, truth.gamma) < 1e-3);
  }
}

TEST_CASE("scaling sizes scales alpha only") {
  std::mt19937_64 g(8);
  std::normal_distribution<double> noise(0, 0.02);
  auto pts = generate({300, 3, 1.2}, 150);
  for (auto& p : pts) p.size *= std::exp(noise(g));
  const FitResult base = fit_zm(pts);
  auto scaled = pts;
  for (auto& p : scaled) p.size *= 7.5;
  const FitResult s = fit_zm(scaled);
  CHECK(rel(s.params.alpha, 7.5 * base.params.alpha) < 1e-5);
  CHECK(rel(s.params.beta, base.params.beta) < 1e-5);
  CHECK(rel(s.params.gamma, base.params.gamma) < 1e-5);
}

TEST_CASE("confidence intervals widen with the level") {
  std::mt19937_64 g(21);
  std::normal_distribution<double> noise(0, 0.05);
  auto pts = generate({1000, 10, 1.7}, 300);
  for (auto& p : pts) p.size *= std::exp(noise(g));
  const FitResult f95 = fit_zm(pts, 0.95);
  const auto ci99 = confidence_intervals(f95.internals, 0.99);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ci99[i].low < f95.ci[i].low);
    CHECK(ci99[i].high > f95.ci[i].high);
  }
  const double est[3] = {f95.params.alpha, f95.params.beta, f95.params.gamma};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(f95.ci[i].contains(est[i]));
    CHECK((f95.ci[i].low + f95.ci[i].high) / 2 == doctest::Approx(est[i]));
  }
}

TEST_CASE("fit_zm error paths") {
  CHECK_THROWS_AS(fit_zm(generate({1, 0, 1}, 3)), DomainError);
  std::vector<RankSizePoint> unordered{{1, 5}, {3, 3}, {2, 4}, {4, 2}};
  CHECK_THROWS_AS(fit_zm(unordered), DomainError);
  std::vector<RankSizePoint> nonpositive{{1, 5}, {2, 0}, {3, 4}, {4, 2}};
  CHECK_THROWS_AS(fit_zm(nonpositive), DomainError);
  CHECK_THROWS_AS(fit_zm(generate({1, 0, 1}, 10), 1.0), DomainError);

  std::vector<RankSizePoint> flat{{1, 4}, {2, 4}, {3, 4}, {4, 4}, {5, 4}};
  const FitResult f = fit_zm(flat);
  CHECK(f.ill_conditioned);
  CHECK_FALSE(f.diagnostic.empty());
  CHECK(f.ci[2].contains(f.params.gamma));

  FitConfig tight;
  tight.max_iterations = 1;
  try {
    fit_zm(generate({100, 5, 1.5}, 200), 0.95, tight);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.best_so_far().iterations == 1);
    CHECK(e.best_so_far().rss > 0);
    CHECK_FALSE(e.best_so_far().converged);
  }

  FitInternals singular;
  singular.n_points = 10;
  singular.rss = 1;
  CHECK_THROWS_AS(confidence_intervals(singular, 0.95), UnidentifiableParameter);
  singular.jtj = {1, 1, 0, 1, 1, 0, 0, 0, 1};
  CHECK_THROWS_AS(confidence_intervals(singular, 0.95), UnidentifiableParameter);
}

TEST_CASE("target_distribution") {
  const auto one = TargetDistribution::from_params(kCorpusFit, 1);
  REQUIRE(one.r_bar() == 1);
  CHECK(one.prob(1) == 1.0);

  const auto t = TargetDistribution::from_params(kCorpusFit, kDefaultRBar);
  CHECK(t.r_bar() == 300);
  // Ratios (2542/2541)^1.896 and (2840/2541)^1.896 at 40 digits.
  CHECK(t.prob(1) / t.prob(2) == doctest::Approx(1.000746294481083).epsilon(1e-12));
  CHECK(t.prob(1) / t.prob(300) == doctest::Approx(1.234817363693794).epsilon(1e-12));
  const double sum = std::accumulate(t.probs().begin(), t.probs().end(), 0.0);
  CHECK(std::abs(sum - 1) < 1e-12);
  for (int r = 2; r <= 300; ++r) CHECK(t.prob(r) < t.prob(r - 1));
  CHECK_THROWS_AS(TargetDistribution::from_params(kCorpusFit, 0), DomainError);
}

TEST_CASE("target_distribution invariants over random parameters") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> la(-5, 12), beta(-0.9, 5000), gam(0.1, 6);
  std::uniform_int_distribution<int> rbar(1, 600);
  for (int i = 0; i < 300; ++i) {
    const auto t = TargetDistribution::from_params({std::pow(10.0, la(g)), beta(g), gam(g)}, rbar(g));
    const double sum = std::accumulate(t.probs().begin(), t.probs().end(), 0.0);
    CHECK(std::abs(sum - 1) < 1e-12);
    for (int r = 2; r <= t.r_bar(); ++r) CHECK(t.prob(r) < t.prob(r - 1));
  }
  CHECK_FALSE(TargetDistribution::from_weights({0.5, 0.5}).strictly_decreasing());
  CHECK(TargetDistribution::from_weights({2, 1}).prob(1) == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(TargetDistribution::from_weights({}), DomainError);
  CHECK_THROWS_AS(TargetDistribution::from_weights({1.0, 0.0}), DomainError);
}
