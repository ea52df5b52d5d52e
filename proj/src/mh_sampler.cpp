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

#include "hapax/mh_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hapax/error.hpp"
#include "hapax/parallel.hpp"
#include "hapax/stats.hpp"

namespace hapax {
namespace {

constexpr std::uint64_t kChainStream = 3;

void check_rank(const TargetDistribution& target, int r) {
  if (r < 1 || r > target.r_bar())
    throw DomainError("rank " + std::to_string(r) + " outside [1, " +
                      std::to_string(target.r_bar()) + "]");
}

}  // namespace

double acceptance_prob(const TargetDistribution& target, int i, int j) {
  check_rank(target, i);
  check_rank(target, j);
  return std::min(1.0, target.prob(j) / target.prob(i));
}

MHRunResult run_chain(const TargetDistribution& target, const MHConfig& config,
                      Rng& rng) {
  if (config.n_steps < 1) throw DomainError("run_chain: n_steps must be >= 1");
  const std::size_t r_bar = static_cast<std::size_t>(target.r_bar());
  const auto& f = target.probs();

  std::size_t x;
  if (config.initial_state) {
    check_rank(target, *config.initial_state);
    x = static_cast<std::size_t>(*config.initial_state - 1);
  } else {
    x = rng.uniform_index(r_bar);
  }

  MHRunResult out;
  out.samples.alphabet_size = target.r_bar();
  out.samples.values.resize(config.n_steps);
  out.samples.values[0] = static_cast<int>(x + 1);
  for (std::size_t t = 1; t < config.n_steps; ++t) {
    const std::size_t j = rng.uniform_index(r_bar);
    const double a = std::min(1.0, f[j] / f[x]);
    const double u = rng.uniform_open01();
    if (u <= a) {
      x = j;
      ++out.accepted;
    }
    out.samples.values[t] = static_cast<int>(x + 1);
  }
  out.acceptance_rate = config.n_steps > 1 ? static_cast<double>(out.accepted) /
                                                 static_cast<double>(config.n_steps - 1)
                                           : 1.0;
  return out;
}

MHRunResult run_chain(const TargetDistribution& target, const MHConfig& config) {
  Rng rng(config.seed);
  return run_chain(target, config, rng);
}

TransitionMatrix1 mh_transition_matrix(const TargetDistribution& target) {
  const std::size_t k = static_cast<std::size_t>(target.r_bar());
  const auto& f = target.probs();
  const double q = 1.0 / static_cast<double>(k);
  std::vector<double> probs(k * k, 0);
  std::vector<int> states(k);
  for (std::size_t i = 0; i < k; ++i) {
    states[i] = static_cast<int>(i + 1);
    double off = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double p = q * std::min(1.0, f[j] / f[i]);
      probs[i * k + j] = p;
      off += p;
    }
    probs[i * k + i] = 1 - off;
  }
  return TransitionMatrix1::from_probs(std::move(states), std::move(probs), f);
}

double mean_acceptance_probability(const TargetDistribution& target) {
  const auto& f = target.probs();
  const double q = 1.0 / static_cast<double>(f.size());
  double total = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < f.size(); ++j) row += std::min(1.0, f[j] / f[i]);
    total += f[i] * q * row;
  }
  return total;
}

std::vector<double> stationary_oracle(const TransitionMatrix1& tm, double tol,
                                      std::size_t max_iterations) {
  if (!(tol > 0)) throw DomainError("stationary_oracle: tol must be positive");
  const std::size_t k = tm.size();
  std::vector<double> pi(k, 1.0 / static_cast<double>(k)), next(k);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double w = pi[i];
      if (w == 0) continue;
      for (std::size_t j = 0; j < k; ++j) next[j] += w * tm.prob(i, j);
    }
    double sum = 0;
    for (const double v : next) sum += v;
    double diff = 0;
    for (std::size_t j = 0; j < k; ++j) {
      next[j] /= sum;
      diff = std::max(diff, std::abs(next[j] - pi[j]));
    }
    pi.swap(next);
    if (diff < tol) return pi;
  }
  throw ConvergenceError("stationary_oracle: no fixed point within " +
                         std::to_string(max_iterations) + " iterations");
}

std::vector<int> sample_iid(const TargetDistribution& target, std::size_t n, Rng& rng) {
  std::vector<double> cum(target.probs().size());
  double acc = 0;
  for (std::size_t r = 0; r < cum.size(); ++r) {
    acc += target.probs()[r];
    cum[r] = acc;
  }
  cum.back() = 1.0;
  std::vector<int> out(n);
  for (auto& x : out) {
    const double u = rng.uniform_open01();
    x = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()) + 1;
  }
  return out;
}

Rng convergence_run_rng(std::uint64_t master_seed, std::size_t index) {
  return Rng::substream(master_seed, kChainStream, index);
}

ConvergenceReport convergence_study(const TargetDistribution& target,
                                    std::span<const int> reference,
                                    const ConvergenceConfig& config) {
  if (config.runs < 1) throw DomainError("convergence_study: runs must be >= 1");
  if (reference.empty()) throw DomainError("convergence_study: empty reference sample");

  ConvergenceReport rep;
  rep.runs = config.runs;
  rep.n_steps = config.chain.n_steps;
  rep.reference_size = reference.size();
  rep.levels = config.levels;
  for (const double level : config.levels)
    rep.thresholds.push_back(
        ks_threshold(level, rep.n_steps, rep.reference_size, config.halve_alpha));

  rep.ks_statistics.resize(config.runs);
  rep.acceptance_rates.resize(config.runs);
  if (config.keep_samples) rep.samples.resize(config.runs);
  parallel_for(
      config.runs,
      [&](std::size_t k) {
        Rng rng = convergence_run_rng(config.chain.seed, k);
        MHRunResult run = run_chain(target, config.chain, rng);
        rep.ks_statistics[k] = ks_two_sample(run.samples.values, reference);
        rep.acceptance_rates[k] = run.acceptance_rate;
        if (config.keep_samples) rep.samples[k] = std::move(run.samples.values);
      },
      config.threads);

  for (const double t : rep.thresholds) {
    const auto pass = std::count_if(rep.ks_statistics.begin(), rep.ks_statistics.end(),
                                    [&](double s) { return s <= t; });
    rep.pass_fraction.push_back(static_cast<double>(pass) /
                                static_cast<double>(config.runs));
  }
  return rep;
}

}  // namespace hapax
