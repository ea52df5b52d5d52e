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

#include "hapax/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>

#include "hapax/error.hpp"

namespace hapax {
namespace {

template <typename T>
DescriptiveStats describe(std::span<const T> values) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("descriptive_stats: need at least two values");

  DescriptiveStats s;
  s.n = n;
  double sum = 0, sum_sq = 0;
  s.min = s.max = static_cast<double>(values[0]);
  for (const T v : values) {
    const double x = static_cast<double>(v);
    sum += x;
    sum_sq += x * x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(n);

  double m2 = 0, m3 = 0, m4 = 0;
  for (const T v : values) {
    const double d = static_cast<double>(v) - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double nd = static_cast<double>(n);
  s.variance = m2 / (nd - 1);
  s.std_dev = std::sqrt(s.variance);
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (m2 > 0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
  }

  std::vector<double> sorted(values.begin(), values.end());
  const std::size_t mid = n / 2;
  std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
  s.median = sorted[mid];
  if (n % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + mid);
    s.median = 0.5 * (lower + s.median);
  }

  s.rms = std::sqrt(sum_sq / nd);
  const DerivedIndicators derived =
      derived_indicators(s.mean, s.std_dev, s.median, n);
  s.std_error = derived.std_error;
  s.mean_over_sd = derived.mean_over_sd;
  s.pearson_skew = derived.pearson_skew;
  return s;
}

template <typename T>
double ks_statistic(std::span<const T> a, std::span<const T> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::vector<T> x(a.begin(), a.end());
  std::vector<T> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0;
  while (i < x.size() && j < y.size()) {
    const T v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / n -
                                   static_cast<double>(j) / m));
  }
  return best;
}

WmwResult finish_wmw(double rank_sum_a, double tie_term, std::size_t n, std::size_t m);

template <typename T>
WmwResult wmw(std::span<const T> a, std::span<const T> b) {
  if (a.empty() || b.empty()) throw DomainError("wmw_test: empty sample");
  const std::size_t n = a.size(), m = b.size(), total = n + m;
  std::vector<std::pair<T, bool>> pooled;
  pooled.reserve(total);
  for (const T v : a) pooled.emplace_back(v, true);
  for (const T v : b) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0;
  double tie_term = 0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    std::size_t in_a = 0;
    while (j < total && pooled[j].first == pooled[i].first) {
      in_a += pooled[j].second ? 1 : 0;
      ++j;
    }
    const double t = static_cast<double>(j - i);
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum_a += midrank * static_cast<double>(in_a);
    tie_term += t * t * t - t;
    i = j;
  }

  return finish_wmw(rank_sum_a, tie_term, n, m);
}

// Integer samples over a modest range are histogrammed instead of sorted.
constexpr long long kMaxCountingRange = 1 << 22;

struct Histograms {
  int lo = 0;
  std::vector<std::uint64_t> a, b;
};

std::optional<Histograms> histogram(std::span<const int> a, std::span<const int> b) {
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const long long lo = std::min(*amin, *bmin), hi = std::max(*amax, *bmax);
  if (hi - lo >= kMaxCountingRange) return std::nullopt;
  Histograms h;
  h.lo = static_cast<int>(lo);
  h.a.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  h.b.assign(h.a.size(), 0);
  for (const int v : a) ++h.a[static_cast<std::size_t>(v - h.lo)];
  for (const int v : b) ++h.b[static_cast<std::size_t>(v - h.lo)];
  return h;
}

double ks_counting(const Histograms& h, std::size_t n, std::size_t m) {
  double best = 0;
  std::uint64_t ca = 0, cb = 0;
  for (std::size_t v = 0; v < h.a.size(); ++v) {
    ca += h.a[v];
    cb += h.b[v];
    best = std::max(best, std::abs(static_cast<double>(ca) / static_cast<double>(n) -
                                   static_cast<double>(cb) / static_cast<double>(m)));
  }
  return best;
}

WmwResult finish_wmw(double rank_sum_a, double tie_term, std::size_t n, std::size_t m) {
  WmwResult r;
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double td = nd + md;
  r.u = rank_sum_a - nd * (nd + 1) / 2;
  const double mu = nd * md / 2;
  const double var = nd * md / 12 * ((td + 1) - tie_term / (td * (td - 1)));
  if (!(var > 0)) {
    r.degenerate = true;
    r.z = 0;
    r.p_value = 1;
    return r;
  }
  const double diff = r.u - mu;
  const double corrected =
      std::abs(diff) <= 0.5 ? 0.0 : diff - std::copysign(0.5, diff);
  r.z = corrected / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
  return r;
}

WmwResult wmw_counting(const Histograms& h, std::size_t n, std::size_t m) {
  double rank_sum_a = 0, tie_term = 0, before = 0;
  for (std::size_t v = 0; v < h.a.size(); ++v) {
    const double t = static_cast<double>(h.a[v] + h.b[v]);
    if (t == 0) continue;
    rank_sum_a += static_cast<double>(h.a[v]) * (before + (t + 1) / 2);
    tie_term += t * t * t - t;
    before += t;
  }
  return finish_wmw(rank_sum_a, tie_term, n, m);
}

}  // namespace

DerivedIndicators derived_indicators(double mean, double std_dev, double median,
                                     std::size_t n) {
  if (n < 1) throw DomainError("derived_indicators: n must be positive");
  DerivedIndicators d;
  const double nd = static_cast<double>(n);
  d.std_error = std_dev / std::sqrt(nd);
  d.rms = std::sqrt((nd - 1) / nd * std_dev * std_dev + mean * mean);
  if (std_dev > 0) {
    d.mean_over_sd = mean / std_dev;
    d.pearson_skew = 3 * (mean - median) / std_dev;
  }
  return d;
}

DescriptiveStats descriptive_stats(std::span<const double> values) {
  return describe(values);
}

DescriptiveStats descriptive_stats(std::span<const int> values) {
  return describe(values);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  return ks_statistic(a, b);
}

double ks_two_sample(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  if (const auto h = histogram(a, b)) return ks_counting(*h, a.size(), b.size());
  return ks_statistic(a, b);
}

double ks_threshold(double alpha, std::size_t n, std::size_t m,
                    bool halve_alpha) {
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("ks_threshold: alpha must lie in (0, 1)");
  if (n < 1 || m < 1) throw DomainError("ks_threshold: sample sizes must be >= 1");
  const double a = halve_alpha ? alpha / 2 : alpha;
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  return std::sqrt(-0.5 * std::log(a) * (nd + md) / (nd * md));
}

KSResult ks_test(std::span<const int> a, std::span<const int> b,
                 std::span<const double> levels, bool halve_alpha) {
  KSResult r;
  r.statistic = ks_two_sample(a, b);
  r.n = a.size();
  r.m = b.size();
  r.levels.assign(levels.begin(), levels.end());
  for (const double level : levels) {
    const double t = ks_threshold(level, r.n, r.m, halve_alpha);
    r.thresholds.push_back(t);
    r.reject.push_back(r.statistic > t);
  }
  return r;
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> expected_probs) {
  if (observed.size() != expected_probs.size() || observed.empty())
    throw DomainError("chi_square_gof: observed/expected size mismatch");
  const double total = static_cast<double>(
      std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  if (!(total > 0)) throw DomainError("chi_square_gof: no observations");
  const double psum =
      std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);
  if (std::abs(psum - 1) > 1e-9)
    throw DomainError("chi_square_gof: expected probabilities must sum to 1");

  ChiSquareResult r;
  r.df = observed.size() - 1;
  for (std::size_t s = 0; s < observed.size(); ++s) {
    const double o = static_cast<double>(observed[s]);
    if (expected_probs[s] < 0)
      throw DomainError("chi_square_gof: negative expected probability");
    if (expected_probs[s] == 0) {
      if (o > 0)
        throw DomainError("chi_square_gof: state " + std::to_string(s) +
                          " observed but has zero expected probability");
      continue;
    }
    const double e = expected_probs[s] * total;
    r.statistic += (o - e) * (o - e) / e;
  }
  return r;
}

double chi_square_threshold(double alpha, std::size_t df) {
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("chi_square_threshold: alpha must lie in (0, 1)");
  if (df == 0) return 0;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

WmwResult wmw_test(std::span<const double> a, std::span<const double> b) {
  return wmw(a, b);
}

WmwResult wmw_test(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) throw DomainError("wmw_test: empty sample");
  if (const auto h = histogram(a, b)) return wmw_counting(*h, a.size(), b.size());
  return wmw(a, b);
}

double shannon_entropy(std::span<const std::uint64_t> counts) {
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (!(total > 0)) throw DomainError("shannon_entropy: no observations");
  double h = 0;
  for (const std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace hapax
