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

#include "playgraph/optim.hpp"
#include "playgraph/tensor.hpp"

namespace playgraph {

/// Values saved by dense_forward for the backward pass.
struct DenseTape {
  Matrix input;
  Matrix pre;
};

/// act(h W + b). `bias` may be null.
inline Matrix dense_forward(const Matrix& h, const ParamTensor& weight,
                            const ParamTensor* bias, Activation act,
                            DenseTape* tape = nullptr) {
  if (h.cols() != weight.value.rows())
    throw ShapeError("dense_forward: input " + h.shape() + " vs weight " +
                     weight.value.shape() + " ('" + weight.name + "')");
  Matrix pre = matmul(h, weight.value);
  if (bias) {
    if (bias->value.rows() != 1 || bias->value.cols() != pre.cols())
      throw ShapeError("dense_forward: bias " + bias->value.shape() + " vs output " +
                       pre.shape());
    for (std::size_t i = 0; i < pre.rows(); ++i)
      for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) += bias->value(0, j);
  }
  Matrix out = act.apply(pre);
  if (tape) {
    tape->input = h;
    tape->pre = std::move(pre);
  }
  return out;
}

/// Accumulates dL/dW and dL/db into the parameters' grad buffers and returns dL/dh.
inline Matrix dense_backward(const DenseTape& tape, const Matrix& grad_out,
                             ParamTensor& weight, ParamTensor* bias, Activation act) {
  if (!grad_out.same_shape(tape.pre))
    throw ShapeError("dense_backward: gradient " + grad_out.shape() + " vs output " +
                     tape.pre.shape());
  const Matrix dpre = act.backward(tape.pre, grad_out);
  weight.grad += matmul_tn(tape.input, dpre);
  if (bias) {
    for (std::size_t i = 0; i < dpre.rows(); ++i)
      for (std::size_t j = 0; j < dpre.cols(); ++j) bias->grad(0, j) += dpre(i, j);
  }
  return matmul_nt(dpre, weight.value);
}

}  // namespace playgraph
