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

#include "hapax/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "hapax/error.hpp"
#include "hapax/parallel.hpp"
#include "hapax/stats.hpp"

namespace hapax {
namespace {

constexpr std::uint64_t kOrder1Stream = 1;
constexpr std::uint64_t kOrder2Stream = 2;

std::vector<double> cumulate(std::span<const double> probs) {
  std::vector<double> cum(probs.size());
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    cum[j] = acc;
    if (probs[j] > 0) last_positive = j;
  }
  // Absorb rounding so that u in (0,1) always lands on a positive entry.
  for (std::size_t j = last_positive; j < cum.size(); ++j) cum[j] = 1.0;
  return cum;
}

std::size_t draw(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform_open01();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<std::size_t>(it - cumulative.begin());
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double fraction(const std::vector<double>& values, auto pass) {
  if (values.empty()) return 0;
  std::size_t k = 0;
  for (const double v : values) k += pass(v) ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(values.size());
}

}  // namespace

TransitionMatrix1 TransitionMatrix1::from_probs(std::vector<int> states,
                                                std::vector<double> probs,
                                                std::vector<double> initial_weights) {
  const std::size_t k = states.size();
  if (k == 0) throw DomainError("transition matrix: no states");
  if (probs.size() != k * k) throw DomainError("transition matrix: probs must be square");
  if (initial_weights.size() != k)
    throw DomainError("transition matrix: one initial weight per state required");
  if (!std::is_sorted(states.begin(), states.end()) ||
      std::adjacent_find(states.begin(), states.end()) != states.end())
    throw DomainError("transition matrix: states must be sorted and distinct");
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = probs[i * k + j];
      if (!(p >= 0)) throw DomainError("transition matrix: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1) > 1e-9)
      throw DomainError("transition matrix: row " + std::to_string(i) + " does not sum to 1");
  }
  double wsum = 0;
  for (const double w : initial_weights) {
    if (!(w >= 0)) throw DomainError("transition matrix: negative initial weight");
    wsum += w;
  }
  if (!(wsum > 0)) throw DomainError("transition matrix: initial weights are all zero");
  for (auto& w : initial_weights) w /= wsum;

  TransitionMatrix1 tm;
  tm.states_ = std::move(states);
  tm.probs_ = std::move(probs);
  tm.initial_weights_ = std::move(initial_weights);
  tm.build_cumulative();
  return tm;
}

void TransitionMatrix1::build_cumulative() {
  const std::size_t k = states_.size();
  index_.clear();
  for (std::size_t i = 0; i < k; ++i) index_.emplace(states_[i], i);
  cumulative_.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto row = cumulate(std::span<const double>(probs_).subspan(i * k, k));
    std::copy(row.begin(), row.end(), cumulative_.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  initial_cumulative_ = cumulate(initial_weights_);
}

std::optional<std::size_t> TransitionMatrix1::index_of(int state) const {
  const auto it = index_.find(state);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double TransitionMatrix1::transition(int from, int to) const {
  const auto i = index_of(from), j = index_of(to);
  if (!i || !j) return 0;
  return prob(*i, *j);
}

std::size_t TransitionMatrix1::sample_next(std::size_t i, Rng& rng) const {
  return draw(std::span<const double>(cumulative_).subspan(i * size(), size()), rng);
}

std::size_t TransitionMatrix1::sample_initial(Rng& rng) const {
  return draw(initial_cumulative_, rng);
}

TransitionMatrix1 estimate_order1(const RankSequence& seq) {
  if (seq.values.size() < 2)
    throw DomainError("estimate_order1: sequence must have at least 2 elements");
  std::vector<int> states(seq.values.begin(), seq.values.end());
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());

  TransitionMatrix1 tm;
  tm.states_ = std::move(states);
  const std::size_t k = tm.states_.size();
  for (std::size_t i = 0; i < k; ++i) tm.index_.emplace(tm.states_[i], i);

  tm.counts_.assign(k * k, 0);
  tm.initial_weights_.assign(k, 0);
  std::size_t prev = tm.index_.at(seq.values[0]);
  tm.initial_weights_[prev] += 1;
  for (std::size_t t = 1; t < seq.values.size(); ++t) {
    const std::size_t cur = tm.index_.at(seq.values[t]);
    ++tm.counts_[prev * k + cur];
    tm.initial_weights_[cur] += 1;
    prev = cur;
  }
  const double n = static_cast<double>(seq.values.size());
  for (auto& w : tm.initial_weights_) w /= n;

  tm.probs_.assign(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t row_sum = 0;
    for (std::size_t j = 0; j < k; ++j) row_sum += tm.counts_[i * k + j];
    if (row_sum == 0) {
      tm.probs_[i * k + i] = 1;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j)
      tm.probs_[i * k + j] = static_cast<double>(tm.counts_[i * k + j]) /
                             static_cast<double>(row_sum);
  }
  tm.build_cumulative();
  return tm;
}

const PairRow* TransitionMatrix2::row(int prev, int cur) const {
  const auto it = pair_index_.find(key(prev, cur));
  return it == pair_index_.end() ? nullptr : &rows_[it->second];
}

double TransitionMatrix2::transition(int prev, int cur, int next) const {
  const PairRow* r = row(prev, cur);
  if (r == nullptr) return 0;
  const auto it = std::lower_bound(r->next_states.begin(), r->next_states.end(), next);
  if (it == r->next_states.end() || *it != next) return 0;
  return r->probs[static_cast<std::size_t>(it - r->next_states.begin())];
}

std::pair<int, int> TransitionMatrix2::sample_initial_pair(Rng& rng) const {
  return initial_pairs_[draw(initial_cumulative_, rng)];
}

TransitionMatrix2 estimate_order2(const RankSequence& seq) {
  if (seq.values.size() < 3)
    throw DomainError("estimate_order2: sequence must have at least 3 elements");
  const auto& v = seq.values;

  std::map<std::pair<int, int>, std::map<int, std::uint64_t>> triples;
  for (std::size_t t = 1; t + 1 < v.size(); ++t) ++triples[{v[t - 1], v[t]}][v[t + 1]];
  std::map<std::pair<int, int>, std::uint64_t> pairs;
  for (std::size_t t = 0; t + 1 < v.size(); ++t) ++pairs[{v[t], v[t + 1]}];

  TransitionMatrix2 tm;
  tm.fallback_ = estimate_order1(seq);
  tm.rows_.reserve(triples.size());
  for (const auto& [pair, nexts] : triples) {
    PairRow r;
    r.prev = pair.first;
    r.cur = pair.second;
    std::uint64_t total = 0;
    for (const auto& [state, c] : nexts) {
      r.next_states.push_back(state);
      r.counts.push_back(c);
      total += c;
    }
    for (const auto c : r.counts)
      r.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
    r.cumulative = cumulate(r.probs);
    tm.pair_index_.emplace(TransitionMatrix2::key(r.prev, r.cur), tm.rows_.size());
    tm.rows_.push_back(std::move(r));
  }
  std::vector<double> weights;
  for (const auto& [pair, c] : pairs) {
    tm.initial_pairs_.push_back(pair);
    weights.push_back(static_cast<double>(c));
  }
  double wsum = 0;
  for (const double w : weights) wsum += w;
  for (auto& w : weights) w /= wsum;
  tm.initial_cumulative_ = cumulate(weights);
  return tm;
}

RankSequence simulate_order1(const TransitionMatrix1& tm, std::size_t length,
                             Rng& rng, std::optional<int> initial) {
  if (length < 1) throw DomainError("simulate_order1: length must be >= 1");
  std::size_t i;
  if (initial) {
    const auto idx = tm.index_of(*initial);
    if (!idx)
      throw DomainError("simulate_order1: state " + std::to_string(*initial) +
                        " not in transition matrix");
    i = *idx;
  } else {
    i = tm.sample_initial(rng);
  }
  RankSequence out;
  out.values.resize(length);
  const auto& states = tm.states();
  out.values[0] = states[i];
  for (std::size_t t = 1; t < length; ++t) {
    i = tm.sample_next(i, rng);
    out.values[t] = states[i];
  }
  out.alphabet_size = states.back();
  return out;
}

RankSequence simulate_order1(const TransitionMatrix1& tm, std::size_t length,
                             std::uint64_t seed, std::optional<int> initial) {
  Rng rng(seed);
  return simulate_order1(tm, length, rng, initial);
}

RankSequence simulate_order2(const TransitionMatrix2& tm, std::size_t length,
                             Rng& rng, std::optional<std::pair<int, int>> initial) {
  if (length < 1) throw DomainError("simulate_order2: length must be >= 1");
  const TransitionMatrix1& fb = tm.fallback();
  std::pair<int, int> start;
  if (initial) {
    for (const int s : {initial->first, initial->second}) {
      if (!fb.index_of(s))
        throw DomainError("simulate_order2: state " + std::to_string(s) +
                          " not in transition matrix");
    }
    start = *initial;
  } else {
    start = tm.sample_initial_pair(rng);
  }
  RankSequence out;
  out.alphabet_size = fb.states().back();
  out.values.resize(length);
  out.values[0] = start.first;
  if (length == 1) return out;
  out.values[1] = start.second;
  int prev = start.first, cur = start.second;
  for (std::size_t t = 2; t < length; ++t) {
    int next;
    if (const PairRow* r = tm.row(prev, cur)) {
      next = r->next_states[draw(r->cumulative, rng)];
    } else {
      next = fb.states()[fb.sample_next(*fb.index_of(cur), rng)];
    }
    out.values[t] = next;
    prev = cur;
    cur = next;
  }
  return out;
}

RankSequence simulate_order2(const TransitionMatrix2& tm, std::size_t length,
                             std::uint64_t seed,
                             std::optional<std::pair<int, int>> initial) {
  Rng rng(seed);
  return simulate_order2(tm, length, rng, initial);
}

Indicators compute_indicators(std::span<const int> values) {
  const DescriptiveStats d = descriptive_stats(values);
  Indicators ind;
  ind.mean = d.mean;
  ind.std_dev = d.std_dev;
  ind.kurtosis = d.kurtosis.value_or(nan());
  ind.skewness = d.skewness.value_or(nan());
  const int lo = static_cast<int>(d.min), hi = static_cast<int>(d.max);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const int x : values) ++counts[static_cast<std::size_t>(x - lo)];
  ind.entropy = shannon_entropy(counts);
  return ind;
}

OrderTestReport order_test(const RankSequence& seq, const OrderTestConfig& config) {
  if (seq.values.size() < 3)
    throw DomainError("order_test: sequence too short for order-2 estimation");
  if (config.replicates < 1) throw DomainError("order_test: replicates must be >= 1");

  OrderTestReport rep;
  rep.config = config;
  rep.input_length = seq.values.size();
  auto& cfg = rep.config;
  if (cfg.len1 == 0) cfg.len1 = seq.values.size();
  if (cfg.len2 == 0) cfg.len2 = std::min<std::size_t>(100000, seq.values.size());
  if (cfg.len1 < 2 || cfg.len2 < 1) throw DomainError("order_test: simulated lengths too short");

  const TransitionMatrix1 tm1 = estimate_order1(seq);
  const TransitionMatrix2 tm2 = estimate_order2(seq);
  const std::size_t k = tm1.size();
  rep.states = k;
  rep.chi_square_df = k - 1;

  std::vector<double> empirical(k, 0);
  for (const int v : seq.values) empirical[*tm1.index_of(v)] += 1;
  for (auto& p : empirical) p /= static_cast<double>(seq.values.size());
  rep.empirical_indicators = compute_indicators(seq.values);

  for (const double level : cfg.alpha_levels) {
    rep.ks_first_thresholds.push_back(ks_threshold(level, cfg.len1, cfg.len2, cfg.halve_alpha));
    rep.ks_empirical_thresholds.push_back(
        ks_threshold(level, cfg.len1, seq.values.size(), cfg.halve_alpha));
    rep.chi_square_thresholds.push_back(chi_square_threshold(level, rep.chi_square_df));
  }

  const std::size_t reps = cfg.replicates;
  rep.ks_first_vs_second.resize(reps);
  rep.wmw_p_values.resize(reps);
  rep.wmw_z.resize(reps);
  rep.chi_square_stats.resize(reps);
  rep.ks_vs_empirical.resize(reps);
  rep.indicators.resize(reps);

  parallel_for(
      reps,
      [&](std::size_t r) {
        Rng rng1 = Rng::substream(cfg.seed, kOrder1Stream, r);
        Rng rng2 = Rng::substream(cfg.seed, kOrder2Stream, r);
        const RankSequence sim1 = simulate_order1(tm1, cfg.len1, rng1);
        const RankSequence sim2 = simulate_order2(tm2, cfg.len2, rng2);

        rep.ks_first_vs_second[r] = ks_two_sample(sim1.values, sim2.values);
        const WmwResult w = wmw_test(sim1.values, sim2.values);
        rep.wmw_p_values[r] = w.p_value;
        rep.wmw_z[r] = w.z;

        std::vector<std::uint64_t> counts(k, 0);
        for (const int v : sim1.values) ++counts[*tm1.index_of(v)];
        rep.chi_square_stats[r] = chi_square_gof(counts, empirical).statistic;
        rep.ks_vs_empirical[r] = ks_two_sample(sim1.values, seq.values);
        rep.indicators[r] = compute_indicators(sim1.values);
      },
      cfg.threads);

  for (std::size_t l = 0; l < cfg.alpha_levels.size(); ++l) {
    const double level = cfg.alpha_levels[l];
    rep.ks_first_pass.push_back(fraction(rep.ks_first_vs_second, [&](double s) {
      return s <= rep.ks_first_thresholds[l];
    }));
    rep.wmw_pass.push_back(fraction(rep.wmw_p_values, [&](double p) { return p > level; }));
    rep.chi_square_pass.push_back(fraction(rep.chi_square_stats, [&](double s) {
      return s <= rep.chi_square_thresholds[l];
    }));
    rep.ks_empirical_pass.push_back(fraction(rep.ks_vs_empirical, [&](double s) {
      return s <= rep.ks_empirical_thresholds[l];
    }));
  }
  return rep;
}

}  // namespace hapax
