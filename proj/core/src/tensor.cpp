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

#include "sslsv/tensor.hpp"

#include <cmath>

namespace sslsv {

bool Tensor2::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// i-k-j loop order keeps both B and C rows contiguous in the inner loop.
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  SSLSV_REQUIRE(a.cols == b.rows, "matmul: inner dims differ: ", a.cols,
                " vs ", b.rows);
  c.resize(a.rows, b.cols);
  const size_t n = b.cols;
  for (size_t i = 0; i < a.rows; ++i) {
    double* crow = c.row(i);
    const double* arow = a.row(i);
    for (size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b.row(k);
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  SSLSV_REQUIRE(a.cols == b.cols, "matmul_nt: inner dims differ: ", a.cols,
                " vs ", b.cols);
  c.resize(a.rows, b.rows);
  const size_t k = a.cols;
  for (size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (size_t t = 0; t < k; ++t) s += arow[t] * brow[t];
      crow[j] = s;
    }
  }
}

void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  c.resize(a.cols, b.cols);
  matmul_tn_acc(a, b, c);
}

void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  SSLSV_REQUIRE(a.rows == b.rows, "matmul_tn: inner dims differ: ", a.rows,
                " vs ", b.rows);
  SSLSV_REQUIRE(c.rows == a.cols && c.cols == b.cols,
                "matmul_tn_acc: bad output shape");
  const size_t n = b.cols;
  for (size_t t = 0; t < a.rows; ++t) {
    const double* arow = a.row(t);
    const double* brow = b.row(t);
    for (size_t i = 0; i < a.cols; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.row(i);
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_inplace(Tensor2& a, const Tensor2& b, double scale) {
  SSLSV_REQUIRE(a.same_shape(b), "add_inplace: shape mismatch");
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += scale * b.data[i];
}

std::vector<double> col_mean(const Tensor2& a) {
  SSLSV_REQUIRE(a.rows > 0, "col_mean: empty matrix");
  std::vector<double> m(a.cols, 0.0);
  for (size_t i = 0; i < a.rows; ++i) {
    const double* row = a.row(i);
    for (size_t j = 0; j < a.cols; ++j) m[j] += row[j];
  }
  for (double& v : m) v /= static_cast<double>(a.rows);
  return m;
}

}  // namespace sslsv
