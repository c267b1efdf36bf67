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

#include "sslsv/augment.hpp"
#include "sslsv/features.hpp"
#include "sslsv/fft.hpp"
#include "sslsv/rng.hpp"

namespace {

using namespace sslsv;

Waveform random_wave(size_t n, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(n);
  for (double& v : w.samples) v = 0.5 * rng.uniform(-1.0, 1.0);
  return w;
}

void BM_LogMel2s(benchmark::State& state) {
  const Waveform w = random_wave(32000, 1);
  const SpectrogramConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_mel(w, cfg));
  }
}
BENCHMARK(BM_LogMel2s);

void BM_InstanceMvn(benchmark::State& state) {
  const Waveform w = random_wave(32000, 2);
  const SpectrogramConfig cfg;
  const FeatureMatrix f = log_mel(w, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(instance_mvn(f));
  }
}
BENCHMARK(BM_InstanceMvn);

void BM_FftConvolve(benchmark::State& state) {
  const Waveform x = random_wave(32000, 3);
  const Waveform h = random_wave(static_cast<size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fft_convolve(x.samples, h.samples));
  }
}
BENCHMARK(BM_FftConvolve)->Arg(512)->Arg(768)->Arg(4096);

void BM_MixAtSnr(benchmark::State& state) {
  const Waveform clean = random_wave(32000, 5);
  const Waveform noise = random_wave(32000, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mix_at_snr(clean, noise, 10.0));
  }
}
BENCHMARK(BM_MixAtSnr);

}  // namespace
