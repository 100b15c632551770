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
#include <cstdint>
#include <string>
#include <utility>

#include "playgraph/random.hpp"
#include "playgraph/tensor.hpp"

namespace playgraph {

/// A trainable tensor with its gradient accumulator.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moment estimates for one ParamTensor.
struct AdamState {
  Matrix m;
  Matrix v;
  std::uint64_t step_count = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(const ParamTensor& p, AdamConfig cfg = {})
      : m(p.value.rows(), p.value.cols()), v(p.value.rows(), p.value.cols()), config(cfg) {}
};

/// One bias-corrected Adam update of `param` from its accumulated gradient.
inline void adam_step(ParamTensor& param, AdamState& state) {
  if (!state.m.same_shape(param.value) || !state.v.same_shape(param.value))
    throw ShapeError("adam_step: optimizer state " + state.m.shape() +
                     " does not match parameter '" + param.name + "' " +
                     param.value.shape());
  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  auto& w = param.value.values();
  const auto& g = param.grad.values();
  auto& m = state.m.values();
  auto& v = state.v.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    w[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

/// Xavier/Glorot uniform initialisation, U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
inline Matrix xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix out(rows, cols);
  for (double& v : out.values()) v = rng.uniform(-bound, bound);
  return out;
}

}  // namespace playgraph
