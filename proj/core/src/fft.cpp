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

#include "sslsv/fft.hpp"

#include <cmath>

#include "sslsv/common.hpp"

namespace sslsv {

bool is_power_of_two(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

size_t next_power_of_two(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  SSLSV_REQUIRE(is_power_of_two(n), "fft: size must be a power of two, got ", n);

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= inv_n;
  }
}

std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h) {
  SSLSV_REQUIRE(!x.empty() && !h.empty(), "fft_convolve: empty input");
  const size_t out_len = x.size() + h.size() - 1;
  const size_t n = next_power_of_two(out_len);

  // Pack both real signals into one complex transform.
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (size_t i = 0; i < x.size(); ++i) a[i].real(x[i]);
  for (size_t i = 0; i < h.size(); ++i) a[i].imag(h[i]);
  fft_inplace(a, false);

  // X[k] = (A[k] + conj(A[n-k]))/2, H[k] = (A[k] - conj(A[n-k]))/(2i)
  std::vector<std::complex<double>> prod(n);
  for (size_t k = 0; k < n; ++k) {
    const std::complex<double> ak = a[k];
    const std::complex<double> ank = std::conj(a[(n - k) & (n - 1)]);
    const std::complex<double> xk = 0.5 * (ak + ank);
    const std::complex<double> hk = std::complex<double>(0.0, -0.5) * (ak - ank);
    prod[k] = xk * hk;
  }
  fft_inplace(prod, true);

  std::vector<double> out(out_len);
  for (size_t i = 0; i < out_len; ++i) out[i] = prod[i].real();
  return out;
}

}  // namespace sslsv
