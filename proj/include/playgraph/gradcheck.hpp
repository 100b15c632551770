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
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "playgraph/optim.hpp"

namespace playgraph {

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace detail

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
  /// Entries accepted because |a - n| was below the roundoff level.
  std::size_t roundoff_accepted = 0;
  std::string message;
};

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-5;
  /// Denominator floor of the relative error |a - n| / max(|a| + |n|, floor),
  /// so entries whose true gradient is ~0 are judged on absolute error.
  double floor = 1e-6;
  /// Central differences cannot resolve |a - n| below about
  /// eps * max(1, |L|) / step. Differences under this many multiples of that
  /// level count as agreement, which matters for structurally zero gradients.
  double roundoff_multiple = 10.0;
};

/// Compares the gradients already accumulated in `params[*].grad` against
/// central differences of `loss`. `loss` must read the current parameter
/// values and must not touch the grad buffers.
inline GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                         std::span<ParamTensor* const> params,
                                         GradCheckOptions opt = {}) {
  GradCheckReport r;
  const double base = loss();
  if (!std::isfinite(base)) {
    r.message = "loss is not finite at the unperturbed point";
    return r;
  }
  const double resolvable = opt.roundoff_multiple * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(base)) / opt.step;
  for (ParamTensor* p : params) {
    auto& w = p->value.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + opt.step;
      const double up = loss();
      w[i] = saved - opt.step;
      const double down = loss();
      w[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        r.message = "non-finite loss while perturbing '" + p->name + "'[" +
                    std::to_string(i) + "]";
        r.worst_param = p->name;
        r.worst_index = i;
        return r;
      }
      const double numeric = (up - down) / (2.0 * opt.step);
      const double analytic = p->grad.values()[i];
      const double denom = std::max(std::abs(analytic) + std::abs(numeric), opt.floor);
      const double diff = std::abs(analytic - numeric);
      const bool unresolvable = diff <= resolvable && diff / denom >= opt.tolerance;
      const double rel = unresolvable ? 0.0 : diff / denom;
      ++r.entries_checked;
      if (unresolvable) ++r.roundoff_accepted;
      if (r.entries_checked == 1 || rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst_param = p->name;
        r.worst_index = i;
        r.worst_analytic = analytic;
        r.worst_numeric = numeric;
      }
    }
  }
  r.passed = r.max_rel_error < opt.tolerance;
  r.message = (r.passed ? "passed" : "FAILED") + std::string(": max relative error ") +
              detail::sci(r.max_rel_error) + " at '" + r.worst_param + "'[" +
              std::to_string(r.worst_index) + "] (analytic " + detail::sci(r.worst_analytic) +
              ", numeric " + detail::sci(r.worst_numeric) + "), " +
              std::to_string(r.roundoff_accepted) + " of " + std::to_string(r.entries_checked) +
              " entries within roundoff";
  return r;
}

}  // namespace playgraph
