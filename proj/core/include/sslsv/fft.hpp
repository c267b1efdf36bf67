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

#ifndef SSLSV_FFT_HPP_
#define SSLSV_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace sslsv {

// In-place iterative radix-2 FFT. a.size() must be a power of two.
// inverse=true applies the 1/N scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

bool is_power_of_two(size_t n);
size_t next_power_of_two(size_t n);

// Full linear convolution (length x.size() + h.size() - 1) computed by
// frequency-domain multiplication.
std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h);

}  // namespace sslsv

#endif  // SSLSV_FFT_HPP_
