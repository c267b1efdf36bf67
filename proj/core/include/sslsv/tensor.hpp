// Copyright 2026 The sslsv Authors
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

#ifndef SSLSV_TENSOR_HPP_
#define SSLSV_TENSOR_HPP_

#include <cstddef>
#include <vector>

#include "sslsv/common.hpp"

namespace sslsv {

// Dense row-major matrix of doubles. All training mathematics runs in double
// precision so finite-difference gradient checks are sharp.
struct Tensor2 {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Tensor2 zeros(size_t r, size_t c) { return Tensor2(r, c); }

  void resize(size_t r, size_t c) {
    rows = r;
    cols = c;
    data.assign(r * c, 0.0);
  }

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  double* row(size_t r) { return data.data() + r * cols; }
  const double* row(size_t r) const { return data.data() + r * cols; }

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const {
    return rows == o.rows && cols == o.cols;
  }

  void fill(double v) { data.assign(data.size(), v); }
  bool all_finite() const;
};

// C = A * B
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C = A * B^T
void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C = A^T * B
void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& c);

// C += A^T * B (accumulating form used for weight gradients)
void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);

void add_inplace(Tensor2& a, const Tensor2& b, double scale = 1.0);

// Column-wise mean over rows.
std::vector<double> col_mean(const Tensor2& a);

}  // namespace sslsv

#endif  // SSLSV_TENSOR_HPP_
