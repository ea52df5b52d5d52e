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

#include "hapax/ranksize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace hapax {
namespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

ZMParams from_theta(const Vec3& theta) {
  return {std::exp(theta(0)), std::expm1(theta(1)), std::exp(theta(2))};
}

Vec3 to_theta(const ZMParams& p) {
  return {std::log(p.alpha), std::log1p(p.beta), std::log(p.gamma)};
}

double model(const ZMParams& p, double rank) {
  return p.alpha * std::exp(-p.gamma * std::log(p.beta + rank));
}

double residual_sum(std::span<const RankSizePoint> pts, const ZMParams& p) {
  double rss = 0;
  for (const auto& pt : pts) {
    const double e = pt.size - model(p, pt.rank);
    rss += e * e;
  }
  return rss;
}

// Normal equations in theta coordinates: J^T J and J^T e.
void normal_equations(std::span<const RankSizePoint> pts, const ZMParams& p,
                      Mat3& jtj, Vec3& jte) {
  jtj.setZero();
  jte.setZero();
  for (const auto& pt : pts) {
    const double shifted = p.beta + pt.rank;
    const double f = model(p, pt.rank);
    const Vec3 g(f, -p.gamma * f / shifted * (1 + p.beta),
                 -p.gamma * f * std::log(shifted));
    jtj.noalias() += g * g.transpose();
    jte.noalias() += g * (pt.size - f);
  }
}

std::array<double, 9> raw_jtj(std::span<const RankSizePoint> pts,
                              const ZMParams& p) {
  Mat3 m = Mat3::Zero();
  for (const auto& pt : pts) {
    const double shifted = p.beta + pt.rank;
    const double f = model(p, pt.rank);
    const Vec3 g(f / p.alpha, -p.gamma * f / shifted, -f * std::log(shifted));
    m.noalias() += g * g.transpose();
  }
  std::array<double, 9> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(3 * i + j)] = m(i, j);
  return out;
}

ZMParams initial_guess(std::span<const RankSizePoint> pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : pts) {
    const double x = std::log(static_cast<double>(pt.rank));
    const double y = std::log(pt.size);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  ZMParams p;
  p.beta = 0;
  p.gamma = std::max(-slope, 1e-3);
  p.alpha = pts.front().size * std::pow(static_cast<double>(pts.front().rank), p.gamma);
  return p;
}

void validate_points(std::span<const RankSizePoint> pts) {
  if (pts.size() < 4) throw DomainError("fit_zm: need at least 4 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].rank < 1) throw DomainError("fit_zm: ranks must be positive");
    if (i > 0 && pts[i].rank <= pts[i - 1].rank)
      throw DomainError("fit_zm: ranks must be strictly increasing");
    if (!(pts[i].size > 0) || !std::isfinite(pts[i].size))
      throw DomainError("fit_zm: sizes must be positive and finite");
  }
}

std::array<Interval, 3> unbounded_intervals() {
  const double inf = std::numeric_limits<double>::infinity();
  return {Interval{-inf, inf}, Interval{-inf, inf}, Interval{-inf, inf}};
}

}  // namespace

void ZMParams::validate() const {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw DomainError("Zipf-Mandelbrot: alpha must be positive");
  if (!(gamma > 0) || !std::isfinite(gamma))
    throw DomainError("Zipf-Mandelbrot: gamma must be positive");
  if (!(beta > -1) || !std::isfinite(beta))
    throw DomainError("Zipf-Mandelbrot: beta must exceed -1");
}

double zm_eval(const ZMParams& params, int rank) {
  params.validate();
  if (rank < 1) throw DomainError("zm_eval: rank must be >= 1");
  return params.alpha / std::pow(params.beta + rank, params.gamma);
}

std::array<Interval, 3> confidence_intervals(const FitInternals& internals,
                                             double level) {
  if (!(level > 0 && level < 1))
    throw DomainError("confidence_intervals: level must lie in (0, 1)");
  if (internals.n_points <= 3)
    throw UnidentifiableParameter("confidence_intervals: no residual degrees of freedom");

  Mat3 jtj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) jtj(i, j) = internals.jtj[static_cast<std::size_t>(3 * i + j)];
  // Jacobi scaling: alpha is often eight orders of magnitude above gamma.
  Vec3 scale;
  for (int i = 0; i < 3; ++i) {
    if (!(jtj(i, i) > 0))
      throw UnidentifiableParameter("confidence_intervals: parameter has no influence on the fit");
    scale(i) = 1 / std::sqrt(jtj(i, i));
  }
  const Mat3 scaled = scale.asDiagonal() * jtj * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(scaled);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev(0) > 1e-14 * ev(2)))
    throw UnidentifiableParameter("confidence_intervals: singular covariance");
  const Mat3 cov_scaled = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();

  const double dof = static_cast<double>(internals.n_points - 3);
  const double s2 = internals.rss / dof;
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, (1 - level) / 2));

  const std::array<double, 3> est = {internals.params.alpha, internals.params.beta,
                                     internals.params.gamma};
  std::array<Interval, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double var = s2 * cov_scaled(i, i) * scale(i) * scale(i);
    const double half = t * std::sqrt(std::max(var, 0.0));
    out[static_cast<std::size_t>(i)] = {est[static_cast<std::size_t>(i)] - half,
                                        est[static_cast<std::size_t>(i)] + half};
  }
  return out;
}

FitResult fit_zm(std::span<const RankSizePoint> points, double level,
                 const FitConfig& config) {
  validate_points(points);
  if (!(level > 0 && level < 1)) throw DomainError("fit_zm: level must lie in (0, 1)");

  FitResult result;
  result.level = level;
  result.n_points = points.size();

  double mean = 0;
  for (const auto& pt : points) mean += pt.size;
  mean /= static_cast<double>(points.size());
  double sst = 0;
  for (const auto& pt : points) sst += (pt.size - mean) * (pt.size - mean);

  const auto finish = [&](const ZMParams& p, double rss) {
    result.params = p;
    result.rss = rss;
    result.r_squared = sst > 0 ? 1 - rss / sst : std::numeric_limits<double>::quiet_NaN();
    result.internals = {p, raw_jtj(points, p), rss, points.size()};
  };

  if (!(sst > 0)) {
    // Constant sizes: any tiny gamma fits, the exponent is not identifiable.
    ZMParams p{points.front().size, 0, std::numeric_limits<double>::min()};
    finish(p, residual_sum(points, p));
    result.ci = unbounded_intervals();
    result.ill_conditioned = true;
    result.diagnostic = "constant sizes: decay exponent is not identifiable";
    return result;
  }

  Vec3 theta = to_theta(initial_guess(points));
  double rss = residual_sum(points, from_theta(theta));
  double damping = config.initial_damping;
  const double exact_floor = 1e-30 * (sst + mean * mean * static_cast<double>(points.size()));

  Mat3 jtj;
  Vec3 jte;
  bool converged = false;
  int iter = 0;
  for (; iter < config.max_iterations && !converged; ++iter) {
    normal_equations(points, from_theta(theta), jtj, jte);
    bool accepted = false;
    while (!accepted) {
      Mat3 lhs = jtj;
      lhs.diagonal() += damping * jtj.diagonal().cwiseMax(1e-300);
      const Vec3 step = lhs.ldlt().solve(jte);
      const Vec3 candidate = theta + step;
      const ZMParams cp = from_theta(candidate);
      const double crss = cp.beta > -1 && std::isfinite(cp.alpha) && cp.gamma > 0
                              ? residual_sum(points, cp)
                              : std::numeric_limits<double>::infinity();
      if (std::isfinite(crss) && crss < rss) {
        const double decrease = (rss - crss) / rss;
        theta = candidate;
        rss = crss;
        damping = std::max(damping / 10, 1e-12);
        accepted = true;
        if (decrease < config.relative_tolerance || rss <= exact_floor) converged = true;
      } else {
        damping *= 10;
        if (damping > 1e16) {
          // No direction lowers the RSS at working precision.
          converged = true;
          break;
        }
      }
    }
  }

  result.iterations = iter;
  finish(from_theta(theta), rss);
  if (!converged) {
    result.converged = false;
    result.ci = unbounded_intervals();
    result.diagnostic = "no convergence within " + std::to_string(config.max_iterations) +
                        " iterations";
    throw FitError("fit_zm: " + result.diagnostic, result);
  }
  result.converged = true;
  try {
    result.ci = confidence_intervals(result.internals, level);
  } catch (const UnidentifiableParameter& e) {
    result.ci = unbounded_intervals();
    result.ill_conditioned = true;
    result.diagnostic = e.what();
  }
  return result;
}

TargetDistribution::TargetDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {}

TargetDistribution TargetDistribution::from_params(const ZMParams& params, int r_bar) {
  params.validate();
  if (r_bar < 1) throw DomainError("target_distribution: r_bar must be >= 1");
  // Relative to f(1) so that alpha cannot overflow or underflow the sum.
  std::vector<double> w(static_cast<std::size_t>(r_bar));
  for (int r = 1; r <= r_bar; ++r) {
    w[static_cast<std::size_t>(r - 1)] =
        std::exp(-params.gamma * std::log((params.beta + r) / (params.beta + 1)));
  }
  TargetDistribution t = from_weights(std::move(w));
  if (!t.strictly_decreasing())
    throw DomainError("target_distribution: probabilities must strictly decrease");
  return t;
}

TargetDistribution TargetDistribution::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("target_distribution: no states");
  double total = 0;
  for (const double w : weights) {
    if (!(w > 0) || !std::isfinite(w))
      throw DomainError("target_distribution: weights must be positive and finite");
    total += w;
  }
  if (!(total > 0) || !std::isfinite(total))
    throw DomainError("target_distribution: normalizer underflow");
  for (auto& w : weights) w /= total;
  return TargetDistribution(std::move(weights));
}

bool TargetDistribution::strictly_decreasing() const {
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (!(probs_[i] < probs_[i - 1])) return false;
  }
  return true;
}

}  // namespace hapax
