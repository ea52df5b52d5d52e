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

#ifndef HAPAX_STATS_HPP_
#define HAPAX_STATS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hapax {

// Summary indicators of a sample. Variance uses the n-1 divisor; skewness and
// kurtosis are moment ratios m3/m2^1.5 and m4/m2^2 (raw kurtosis, no -3).
// Ratios that divide by a zero spread are left empty.
struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0;
  double variance = 0;
  double std_dev = 0;
  std::optional<double> skewness;
  std::optional<double> kurtosis;
  double median = 0;
  double max = 0;
  double min = 0;
  double rms = 0;
  double std_error = 0;
  std::optional<double> mean_over_sd;
  std::optional<double> pearson_skew;  // 3 (mean - median) / sd
};

// Fields of DescriptiveStats that follow from (mean, sd, median, n) alone.
struct DerivedIndicators {
  double std_error = 0;
  double rms = 0;
  std::optional<double> mean_over_sd;
  std::optional<double> pearson_skew;
};

DerivedIndicators derived_indicators(double mean, double std_dev, double median,
                                     std::size_t n);

// Requires at least two values.
DescriptiveStats descriptive_stats(std::span<const double> values);
DescriptiveStats descriptive_stats(std::span<const int> values);

// Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b| evaluated at
// every pooled value, ties handled exactly.
double ks_two_sample(std::span<const double> a, std::span<const double> b);
double ks_two_sample(std::span<const int> a, std::span<const int> b);

// Asymptotic rejection threshold sqrt(-0.5 ln(a*) (n+m)/(n m)), where
// a* = alpha/2 when halve_alpha is set (two-sided convention) and alpha
// otherwise.
double ks_threshold(double alpha, std::size_t n, std::size_t m,
                    bool halve_alpha);

struct KSResult {
  double statistic = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> levels;
  std::vector<double> thresholds;
  std::vector<bool> reject;  // reject[k] == (statistic > thresholds[k])
};

KSResult ks_test(std::span<const int> a, std::span<const int> b,
                 std::span<const double> levels, bool halve_alpha);

struct ChiSquareResult {
  double statistic = 0;
  std::size_t df = 0;
};

// Pearson goodness of fit, E_s = p_s * sum(O); df = #states - 1, no pooling.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> expected_probs);

// Upper `alpha` quantile of the chi-square law with df degrees of freedom.
// df == 0 yields 0.
double chi_square_threshold(double alpha, std::size_t df);

struct WmwResult {
  double u = 0;  // rank-sum U of the first sample
  double z = 0;
  double p_value = 1;
  bool degenerate = false;  // every pooled value identical
};

// Wilcoxon-Mann-Whitney rank-sum test, normal approximation with midranks,
// tie-corrected variance and continuity correction; two-sided p-value.
WmwResult wmw_test(std::span<const double> a, std::span<const double> b);
WmwResult wmw_test(std::span<const int> a, std::span<const int> b);

// -sum p ln p over states with positive count (nats).
double shannon_entropy(std::span<const std::uint64_t> counts);

}  // namespace hapax

#endif  // HAPAX_STATS_HPP_
