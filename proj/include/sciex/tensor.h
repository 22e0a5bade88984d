// Copyright 2026 The Sciex Authors.
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

// Dense double-precision storage for trainable parameters and the handful of
// matrix-vector kernels the model needs.

#ifndef SCIEX_TENSOR_H_
#define SCIEX_TENSOR_H_

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sciex/rng.h"

namespace sciex {

// Row-major matrix.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }
  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

// A named trainable tensor with its gradient accumulator. Shapes are at most
// two-dimensional; vectors use {n}.
struct Parameter {
  std::string name;
  std::vector<size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<size_t> s);

  size_t size() const { return value.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  std::span<double> row(size_t r) { return {value.data() + r * cols(), cols()}; }
  std::span<const double> row(size_t r) const { return {value.data() + r * cols(), cols()}; }
  std::span<double> grad_row(size_t r) { return {grad.data() + r * cols(), cols()}; }

  void ZeroGrad();
  void InitUniform(Rng& rng, double scale);
};

// y = W x + b (b may be empty). W is rows x cols with x.size() == cols.
void MatVec(const Parameter& w, std::span<const double> x, std::span<const double> b,
            std::span<double> y);

// x_grad += W^T y_grad
void MatTVecAccum(const Parameter& w, std::span<const double> y_grad,
                  std::span<double> x_grad);

// W.grad += y_grad x^T
void OuterAccum(Parameter& w, std::span<const double> y_grad, std::span<const double> x);

inline void AddTo(std::span<double> dst, std::span<const double> src, double scale = 1.0) {
  assert(dst.size() == src.size());
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

}  // namespace sciex

#endif  // SCIEX_TENSOR_H_
