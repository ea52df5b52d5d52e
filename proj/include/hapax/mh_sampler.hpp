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

#ifndef HAPAX_MH_SAMPLER_HPP_
#define HAPAX_MH_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hapax/corpus.hpp"
#include "hapax/markov.hpp"
#include "hapax/ranksize.hpp"
#include "hapax/rng.hpp"

namespace hapax {

// min(1, F_j / F_i) for the uniform proposal over ranks 1..r_bar.
double acceptance_prob(const TargetDistribution& target, int i, int j);

struct MHConfig {
  std::size_t n_steps = 100000;
  std::uint64_t seed = 20240101;
  std::optional<int> initial_state;  // uniform over ranks when empty
};

struct MHRunResult {
  RankSequence samples;
  std::size_t accepted = 0;
  double acceptance_rate = 0;  // accepted / (n_steps - 1); 1 for a single step
};

// Metropolis-Hastings with proposal j ~ Uniform{1..r_bar} (j == i allowed)
// and acceptance when u <= a(x_t, j). No burn-in or thinning.
MHRunResult run_chain(const TargetDistribution& target, const MHConfig& config);
MHRunResult run_chain(const TargetDistribution& target, const MHConfig& config,
                      Rng& rng);

// Exact kernel of the sampler: pi_ij = a(i,j)/r_bar off the diagonal, the
// diagonal takes the remaining mass. Initial weights are F.
TransitionMatrix1 mh_transition_matrix(const TargetDistribution& target);

// sum_i F_i (1/r_bar) sum_j a(i,j).
double mean_acceptance_probability(const TargetDistribution& target);

// Power iteration from the uniform vector until successive iterates differ
// by less than tol in max-norm. Throws ConvergenceError past max_iterations.
std::vector<double> stationary_oracle(const TransitionMatrix1& tm, double tol,
                                      std::size_t max_iterations = 1000000);

// n independent draws from the target by inversion.
std::vector<int> sample_iid(const TargetDistribution& target, std::size_t n, Rng& rng);

struct ConvergenceConfig {
  std::size_t runs = 100;
  MHConfig chain;  // chain.seed is the master seed of the study
  std::vector<double> levels = {0.05, 0.01, 0.001};
  bool halve_alpha = true;
  unsigned threads = 0;
  bool keep_samples = false;
};

struct ConvergenceReport {
  std::size_t runs = 0;
  std::size_t n_steps = 0;
  std::size_t reference_size = 0;
  std::vector<double> levels;
  std::vector<double> ks_statistics;  // one per run
  std::vector<double> acceptance_rates;
  std::vector<double> thresholds;     // per level
  std::vector<double> pass_fraction;  // per level: share of statistic <= threshold
  std::vector<std::vector<int>> samples;  // only with keep_samples
};

// Generator used for run `index` of a study with the given master seed.
Rng convergence_run_rng(std::uint64_t master_seed, std::size_t index);

ConvergenceReport convergence_study(const TargetDistribution& target,
                                    std::span<const int> reference,
                                    const ConvergenceConfig& config);

}  // namespace hapax

#endif  // HAPAX_MH_SAMPLER_HPP_
