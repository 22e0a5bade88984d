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

#include "sciex/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

namespace sciex {

Parameter::Parameter(std::string n, std::vector<size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
  const size_t count =
      std::accumulate(shape.begin(), shape.end(), size_t{1}, std::multiplies<>());
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
}

void Parameter::ZeroGrad() { std::fill(grad.begin(), grad.end(), 0.0); }

void Parameter::InitUniform(Rng& rng, double scale) {
  for (double& v : value) v = rng.Uniform(-scale, scale);
}

void MatVec(const Parameter& w, std::span<const double> x, std::span<const double> b,
            std::span<double> y) {
  const size_t rows = w.rows();
  const size_t cols = w.cols();
  assert(x.size() == cols && y.size() == rows);
  for (size_t r = 0; r < rows; ++r) {
    const double* wr = w.value.data() + r * cols;
    double acc = b.empty() ? 0.0 : b[r];
    for (size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

void MatTVecAccum(const Parameter& w, std::span<const double> y_grad,
                  std::span<double> x_grad) {
  const size_t rows = w.rows();
  const size_t cols = w.cols();
  assert(y_grad.size() == rows && x_grad.size() == cols);
  for (size_t r = 0; r < rows; ++r) {
    const double g = y_grad[r];
    if (g == 0.0) continue;
    const double* wr = w.value.data() + r * cols;
    for (size_t c = 0; c < cols; ++c) x_grad[c] += wr[c] * g;
  }
}

void OuterAccum(Parameter& w, std::span<const double> y_grad, std::span<const double> x) {
  const size_t rows = w.rows();
  const size_t cols = w.cols();
  assert(y_grad.size() == rows && x.size() == cols);
  for (size_t r = 0; r < rows; ++r) {
    const double g = y_grad[r];
    if (g == 0.0) continue;
    double* gr = w.grad.data() + r * cols;
    for (size_t c = 0; c < cols; ++c) gr[c] += g * x[c];
  }
}

}  // namespace sciex
