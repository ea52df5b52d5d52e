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

#ifndef HAPAX_RANKSIZE_HPP_
#define HAPAX_RANKSIZE_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hapax/error.hpp"

namespace hapax {

// Zipf-Mandelbrot law f(r) = alpha / (beta + r)^gamma.
struct ZMParams {
  double alpha = 1;  // scale, > 0
  double beta = 0;   // shift, > -1
  double gamma = 1;  // decay exponent, > 0

  // Throws DomainError when the law is not defined and positive on r >= 1.
  void validate() const;
};

double zm_eval(const ZMParams& params, int rank);

struct RankSizePoint {
  int rank = 0;
  double size = 0;
};

struct Interval {
  double low = 0;
  double high = 0;
  bool contains(double x) const { return low <= x && x <= high; }
};

struct FitConfig {
  int max_iterations = 500;
  double relative_tolerance = 1e-10;  // on the decrease of the RSS
  double initial_damping = 1e-3;
};

// Everything the interval computation needs from a finished fit.
struct FitInternals {
  ZMParams params;
  // J^T J of the model with respect to (alpha, beta, gamma), row-major.
  std::array<double, 9> jtj{};
  double rss = 0;
  std::size_t n_points = 0;
};

struct FitResult {
  ZMParams params;
  std::array<Interval, 3> ci{};  // alpha, beta, gamma
  double level = 0.95;
  double rss = 0;
  double r_squared = 0;
  std::size_t n_points = 0;
  int iterations = 0;
  bool converged = false;
  bool ill_conditioned = false;
  std::string diagnostic;
  FitInternals internals;
};

// Non-convergence; carries the best parameters reached.
class FitError : public Error {
 public:
  FitError(const std::string& what, FitResult best)
      : Error(what), best_(std::move(best)) {}
  const FitResult& best_so_far() const { return best_; }

 private:
  FitResult best_;
};

class UnidentifiableParameter : public Error {
 public:
  using Error::Error;
};

// Damped Gauss-Newton (Levenberg-Marquardt) on the raw residuals
// size - f(rank), optimizing (log alpha, log(1+beta), log gamma).
// Starts from beta = 0, gamma = minus the log-log regression slope and alpha
// matching the first point.
FitResult fit_zm(std::span<const RankSizePoint> points, double level = 0.95,
                 const FitConfig& config = {});

// Symmetric Student-t intervals from s^2 (J^T J)^-1 with n-3 degrees of
// freedom.
std::array<Interval, 3> confidence_intervals(const FitInternals& internals,
                                             double level);

// Discrete law over ranks 1..r_bar; positive and summing to 1. Laws built
// from Zipf-Mandelbrot parameters are also strictly decreasing.
class TargetDistribution {
 public:
  static TargetDistribution from_params(const ZMParams& params, int r_bar);
  // Normalizes arbitrary positive weights (used for generic sampler targets).
  static TargetDistribution from_weights(std::vector<double> weights);

  bool strictly_decreasing() const;

  int r_bar() const { return static_cast<int>(probs_.size()); }
  const std::vector<double>& probs() const { return probs_; }
  // 1-based.
  double prob(int rank) const { return probs_[static_cast<std::size_t>(rank - 1)]; }

 private:
  explicit TargetDistribution(std::vector<double> probs);
  std::vector<double> probs_;
};

inline constexpr int kDefaultRBar = 300;

}  // namespace hapax

#endif  // HAPAX_RANKSIZE_HPP_
