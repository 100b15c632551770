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

// Dense row-major matrices of doubles and the handful of elementwise
// functions the models need. Every routine uses a fixed summation order so
// that identical inputs give bitwise-identical outputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "playgraph/error.hpp"

namespace playgraph {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_)
      throw ShapeError("Matrix: " + std::to_string(values_.size()) +
                       " values for shape " + shape_string(rows, cols));
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
      values_.insert(values_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix row_vector(std::span<const double> v) {
    return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  std::string shape() const { return shape_string(rows_, cols_); }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  static std::string shape_string(std::size_t r, std::size_t c) {
    return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
  }

 private:
  void require_same_shape(const Matrix& o, const char* what) const {
    if (!same_shape(o))
      throw ShapeError(std::string(what) + ": " + shape() + " vs " + o.shape());
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }

/// a[m x k] * b[k x n]
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree, " + a.shape() + " * " +
                     b.shape());
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* br = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

/// a^T * b, with a[k x m] and b[k x n].
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: row counts disagree, " + a.shape() + "^T * " +
                     b.shape());
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* br = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aki * br[j];
    }
  }
  return out;
}

/// a * b^T, with a[m x k] and b[n x k].
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: column counts disagree, " + a.shape() + " * " +
                     b.shape() + "^T");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

/// Horizontal concatenation [a | b]; row counts must agree.
inline Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("hconcat: " + a.shape() + " | " + b.shape());
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row(i).begin(), a.row(i).end(), out.row(i).begin());
    std::copy(b.row(i).begin(), b.row(i).end(), out.row(i).begin() + a.cols());
  }
  return out;
}

/// Columns [first, first + count) of a.
inline Matrix column_slice(const Matrix& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols())
    throw ShapeError("column_slice: [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") outside " + a.shape());
  Matrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a(i, first + j);
  return out;
}

// ---------------------------------------------------------------------------
// Activations

inline constexpr double kDefaultLeakySlope = 0.2;

inline double leaky_relu(double x, double slope = kDefaultLeakySlope) {
  return x >= 0.0 ? x : slope * x;
}

/// Derivative of leaky_relu; taken as 1 at exactly 0.
inline double leaky_relu_grad(double x, double slope = kDefaultLeakySlope) {
  return x >= 0.0 ? 1.0 : slope;
}

inline Matrix leaky_relu(const Matrix& x, double slope = kDefaultLeakySlope) {
  if (!(slope > 0.0 && slope < 1.0))
    throw ContractError("leaky_relu: slope must lie in (0,1)");
  Matrix out = x;
  for (double& v : out.values()) v = leaky_relu(v, slope);
  return out;
}

inline Matrix leaky_relu_grad(const Matrix& x, double slope = kDefaultLeakySlope) {
  Matrix out = x;
  for (double& v : out.values()) v = leaky_relu_grad(v, slope);
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Max-subtracted softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("softmax: empty input");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

/// Activation selector used by dense and graph layers.
struct Activation {
  enum class Kind { identity, leaky_relu, sigmoid };
  Kind kind = Kind::identity;
  double slope = kDefaultLeakySlope;

  static Activation identity() { return {Kind::identity, kDefaultLeakySlope}; }
  static Activation leaky(double slope = kDefaultLeakySlope) {
    return {Kind::leaky_relu, slope};
  }
  static Activation logistic() { return {Kind::sigmoid, kDefaultLeakySlope}; }

  double apply(double x) const {
    switch (kind) {
      case Kind::leaky_relu: return leaky_relu(x, slope);
      case Kind::sigmoid: return sigmoid(x);
      case Kind::identity: break;
    }
    return x;
  }
  /// Derivative evaluated at the pre-activation value.
  double derivative(double pre) const {
    switch (kind) {
      case Kind::leaky_relu: return leaky_relu_grad(pre, slope);
      case Kind::sigmoid: {
        const double s = sigmoid(pre);
        return s * (1.0 - s);
      }
      case Kind::identity: break;
    }
    return 1.0;
  }

  Matrix apply(const Matrix& pre) const {
    Matrix out = pre;
    for (double& v : out.values()) v = apply(v);
    return out;
  }
  /// grad_out (elementwise) * f'(pre)
  Matrix backward(const Matrix& pre, const Matrix& grad_out) const {
    Matrix out = grad_out;
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values()[i] *= derivative(pre.values()[i]);
    return out;
  }

  friend bool operator==(const Activation&, const Activation&) = default;
};

inline std::string to_string(Activation::Kind k) {
  switch (k) {
    case Activation::Kind::leaky_relu: return "leaky_relu";
    case Activation::Kind::sigmoid: return "sigmoid";
    case Activation::Kind::identity: break;
  }
  return "identity";
}

}  // namespace playgraph
