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

#include <benchmark/benchmark.h>

#include "sslsv/losses.hpp"
#include "sslsv/rng.hpp"

namespace {

using namespace sslsv;

Tensor2 batch(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  Tensor2 t(n, d);
  for (double& v : t.data) v = rng.normal();
  return t;
}

void BM_InfoNce(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const Tensor2 a = batch(n, 2048, 1);
  const Tensor2 b = batch(n, 2048, 2);
  const InfoNceConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(info_nce(a, b, cfg));
  }
}
BENCHMARK(BM_InfoNce)->Arg(64)->Arg(256);

void BM_Vicreg(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const Tensor2 a = batch(n, 256, 3);
  const Tensor2 b = batch(n, 256, 4);
  const VicregWeights w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vicreg(a, b, w));
  }
}
BENCHMARK(BM_Vicreg)->Arg(64)->Arg(256);

void BM_BarlowTwins(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const Tensor2 a = batch(n, 256, 5);
  const Tensor2 b = batch(n, 256, 6);
  const BarlowConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(barlow_twins(a, b, cfg));
  }
}
BENCHMARK(BM_BarlowTwins)->Arg(64)->Arg(256);

}  // namespace
