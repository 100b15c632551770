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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "playgraph/error.hpp"

namespace playgraph {

inline constexpr double kProbabilityClamp = 1e-7;

namespace detail {
inline void require_pair(std::span<const double> pred, std::span<const double> target,
                         const char* what) {
  if (pred.empty()) throw ContractError(std::string(what) + ": empty input");
  if (pred.size() != target.size())
    throw ContractError(std::string(what) + ": length mismatch (" +
                        std::to_string(pred.size()) + " predictions, " +
                        std::to_string(target.size()) + " targets)");
}
}  // namespace detail

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

inline double loss_mse(std::span<const double> pred, std::span<const double> target) {
  detail::require_pair(pred, target, "loss_mse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

inline double loss_mae(std::span<const double> pred, std::span<const double> target) {
  detail::require_pair(pred, target, "loss_mae");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

/// Mean binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7].
inline double loss_bce(std::span<const double> prob, std::span<const double> label) {
  detail::require_pair(prob, label, "loss_bce");
  double s = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = clamp_probability(prob[i]);
    s += label[i] * std::log(p) + (1.0 - label[i]) * std::log(1.0 - p);
  }
  return -s / static_cast<double>(prob.size());
}

/// Probability that a random positive outranks a random negative, ties 0.5.
/// Rank-based, O(n log n).
inline double metric_auc(std::span<const double> scores, std::span<const double> labels) {
  detail::require_pair(scores, labels, "metric_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double n_pos = 0.0;
  double n_neg = 0.0;
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // average 1-based rank of the tie block [i, j)
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0.5) {
        n_pos += 1.0;
        pos_rank_sum += rank;
      } else {
        n_neg += 1.0;
      }
    }
    i = j;
  }
  if (n_pos == 0.0 || n_neg == 0.0)
    throw UndefinedMetric("metric_auc: needs at least one positive and one negative label");
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace playgraph
