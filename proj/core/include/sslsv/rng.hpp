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
//
// Self-contained random streams. Reproducibility is part of the product
// contract, so we do not rely on std:: distributions (their output is not
// pinned by the standard). Every consumer takes an explicit Rng; derived
// per-item streams come from mixing (seed, epoch, utterance_id) so results
// do not depend on iteration or thread order.

#ifndef SSLSV_RNG_HPP_
#define SSLSV_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sslsv {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// FNV-1a, used to hash utterance ids into stream keys.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-free splitmix64 generator. Small state, cheap to fork, identical
// output on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). n must be > 0.
  uint64_t uniform_index(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller (cosine branch only).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Derived independent stream; keyed fork, does not advance this stream.
  Rng fork(uint64_t key) const { return Rng(mix64(state_, key)); }

 private:
  uint64_t state_;
};

// Stream key for one utterance in one epoch: hash(seed, epoch, utterance_id).
inline uint64_t item_stream_key(uint64_t seed, uint64_t epoch,
                                std::string_view utterance_id) {
  return mix64(mix64(seed, epoch), fnv1a64(utterance_id));
}

}  // namespace sslsv

#endif  // SSLSV_RNG_HPP_
