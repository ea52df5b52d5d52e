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

#ifndef HAPAX_MARKOV_HPP_
#define HAPAX_MARKOV_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hapax/corpus.hpp"
#include "hapax/rng.hpp"

namespace hapax {

// First-order transition structure over the observed states (sorted ranks).
// Rows with no outgoing transition carry a self-loop.
class TransitionMatrix1 {
 public:
  // probs is row-major |states| x |states|; each row must sum to 1.
  // initial_weights drives the draw of a starting state.
  static TransitionMatrix1 from_probs(std::vector<int> states,
                                      std::vector<double> probs,
                                      std::vector<double> initial_weights);

  std::size_t size() const { return states_.size(); }
  const std::vector<int>& states() const { return states_; }
  std::optional<std::size_t> index_of(int state) const;

  // By row/column index.
  std::uint64_t count(std::size_t i, std::size_t j) const {
    return counts_.empty() ? 0 : counts_[i * size() + j];
  }
  double prob(std::size_t i, std::size_t j) const { return probs_[i * size() + j]; }
  // By state value; 0 when either state is unknown.
  double transition(int from, int to) const;

  const std::vector<double>& initial_weights() const { return initial_weights_; }

  std::size_t sample_next(std::size_t i, Rng& rng) const;
  std::size_t sample_initial(Rng& rng) const;

 private:
  friend TransitionMatrix1 estimate_order1(const RankSequence& seq);
  void build_cumulative();

  std::vector<int> states_;
  std::unordered_map<int, std::size_t> index_;
  std::vector<std::uint64_t> counts_;  // empty when built from probabilities
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::vector<double> initial_weights_;
  std::vector<double> initial_cumulative_;
};

// Next-state distribution conditioned on an observed ordered pair.
struct PairRow {
  int prev = 0;
  int cur = 0;
  std::vector<int> next_states;  // sorted
  std::vector<std::uint64_t> counts;
  std::vector<double> probs;
  std::vector<double> cumulative;
};

class TransitionMatrix2 {
 public:
  const std::vector<PairRow>& rows() const { return rows_; }
  // nullptr for a pair never followed by a state in the source.
  const PairRow* row(int prev, int cur) const;
  double transition(int prev, int cur, int next) const;

  // Order-1 estimate of the same source, used when a pair is unseen.
  const TransitionMatrix1& fallback() const { return fallback_; }

  // Consecutive pairs of the source with their counts.
  const std::vector<std::pair<int, int>>& initial_pairs() const { return initial_pairs_; }
  std::pair<int, int> sample_initial_pair(Rng& rng) const;

 private:
  friend TransitionMatrix2 estimate_order2(const RankSequence& seq);
  static std::uint64_t key(int prev, int cur) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(prev)) << 32) |
           static_cast<std::uint32_t>(cur);
  }

  std::vector<PairRow> rows_;
  std::unordered_map<std::uint64_t, std::size_t> pair_index_;
  TransitionMatrix1 fallback_;
  std::vector<std::pair<int, int>> initial_pairs_;
  std::vector<double> initial_cumulative_;
};

TransitionMatrix1 estimate_order1(const RankSequence& seq);
TransitionMatrix2 estimate_order2(const RankSequence& seq);

RankSequence simulate_order1(const TransitionMatrix1& tm, std::size_t length,
                             Rng& rng, std::optional<int> initial = std::nullopt);
RankSequence simulate_order1(const TransitionMatrix1& tm, std::size_t length,
                             std::uint64_t seed,
                             std::optional<int> initial = std::nullopt);

RankSequence simulate_order2(const TransitionMatrix2& tm, std::size_t length,
                             Rng& rng,
                             std::optional<std::pair<int, int>> initial = std::nullopt);
RankSequence simulate_order2(const TransitionMatrix2& tm, std::size_t length,
                             std::uint64_t seed,
                             std::optional<std::pair<int, int>> initial = std::nullopt);

struct OrderTestConfig {
  std::size_t replicates = 100;
  std::size_t len1 = 0;  // 0: length of the input sequence
  std::size_t len2 = 0;  // 0: min(100000, input length)
  std::uint64_t seed = 20240101;
  std::vector<double> alpha_levels = {0.05, 0.01, 0.001};
  bool halve_alpha = true;  // KS thresholds, see ks_threshold
  unsigned threads = 0;
};

// Mean, standard deviation, kurtosis, skewness and Shannon entropy of a
// rank series. Undefined moment ratios (constant series) are NaN.
struct Indicators {
  double mean = 0;
  double std_dev = 0;
  double kurtosis = 0;
  double skewness = 0;
  double entropy = 0;
};

struct OrderTestReport {
  OrderTestConfig config;  // with len1/len2 resolved
  std::size_t input_length = 0;
  std::size_t states = 0;

  // First step: replicate k of order 1 against replicate k of order 2.
  std::vector<double> ks_first_vs_second;
  std::vector<double> wmw_p_values;
  std::vector<double> wmw_z;
  // Second step: order-1 replicates against the input sequence.
  std::vector<double> chi_square_stats;
  std::vector<double> ks_vs_empirical;
  std::vector<Indicators> indicators;
  Indicators empirical_indicators;
  std::size_t chi_square_df = 0;

  // Indexed like config.alpha_levels.
  std::vector<double> ks_first_thresholds;
  std::vector<double> ks_empirical_thresholds;
  std::vector<double> chi_square_thresholds;
  std::vector<double> ks_first_pass;      // statistic <= threshold
  std::vector<double> wmw_pass;           // p-value > level
  std::vector<double> chi_square_pass;    // statistic <= threshold
  std::vector<double> ks_empirical_pass;  // statistic <= threshold
};

Indicators compute_indicators(std::span<const int> values);

// Two-step Markovianity battery: order-1 versus order-2 simulations (KS and
// WMW), then order-1 simulations against the source (chi-square, KS and
// descriptive indicators).
OrderTestReport order_test(const RankSequence& seq, const OrderTestConfig& config);

}  // namespace hapax

#endif  // HAPAX_MARKOV_HPP_
