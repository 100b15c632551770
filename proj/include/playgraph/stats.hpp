/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "playgraph/error.hpp"

namespace playgraph {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ContractError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);

  // the fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 1000; ++m) {
    const double dm = static_cast<double>(m);
    // even step
    double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    // odd step
    num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::exp(log_front) * f / a;
}

/// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw ContractError("student_t_upper_tail: df must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

struct TTestResult {
  double t_statistic = 0.0;
  /// One-sided, alternative mean(baseline - model) > 0.
  double p_value = 0.5;
  double p_two_sided = 1.0;
  std::size_t df = 0;
  double mean_difference = 0.0;
};

/// Paired one-sided t-test on d_i = baseline_i - model_i.
inline TTestResult paired_t_test(std::span<const double> baseline, std::span<const double> model) {
  if (baseline.size() != model.size())
    throw ContractError("paired_t_test: " + std::to_string(baseline.size()) + " baseline vs " +
                        std::to_string(model.size()) + " model values");
  const std::size_t n = baseline.size();
  if (n < 2) throw ContractError("paired_t_test: needs at least 2 pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += baseline[i] - model[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = baseline[i] - model[i] - mean;
    ss += e * e;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw UndefinedMetric("paired_t_test: differences have zero variance");
  TTestResult r;
  r.df = n - 1;
  r.mean_difference = mean;
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_upper_tail(r.t_statistic, static_cast<double>(r.df));
  const double df = static_cast<double>(r.df);
  r.p_two_sided = incomplete_beta(0.5 * df, 0.5, df / (df + r.t_statistic * r.t_statistic));
  return r;
}

}  // namespace playgraph
