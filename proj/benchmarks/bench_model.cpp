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

#include "sslsv/nn.hpp"
#include "sslsv/optim.hpp"
#include "sslsv/rng.hpp"

namespace {

using namespace sslsv;

ModelConfig desk_model() {
  ModelConfig cfg;
  cfg.encoder_hidden = {128, 128};
  cfg.rep_dim = 64;
  cfg.proj_dim = 256;
  return cfg;
}

FeatureBatch random_features(size_t n, size_t t, size_t d, uint64_t seed) {
  Rng rng(seed);
  FeatureBatch b;
  b.reserve(n, t, d);
  for (double& v : b.stacked.data) v = rng.normal();
  return b;
}

void BM_EncoderForward(benchmark::State& state) {
  Rng rng(1);
  Model model(desk_model(), rng);
  const FeatureBatch x =
      random_features(static_cast<size_t>(state.range(0)), 198, 40, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encoder_forward(x, nullptr));
  }
}
BENCHMARK(BM_EncoderForward)->Arg(8)->Arg(32);

void BM_EncoderForwardBackward(benchmark::State& state) {
  Rng rng(3);
  Model model(desk_model(), rng);
  const FeatureBatch x =
      random_features(static_cast<size_t>(state.range(0)), 198, 40, 4);
  for (auto _ : state) {
    Model::EncoderCache cache;
    const Tensor2 y = model.encoder_forward(x, &cache);
    Tensor2 dy(y.rows, y.cols);
    dy.fill(1.0);
    model.zero_grad();
    model.encoder_backward(cache, dy);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(8)->Arg(32);

void BM_AdamStep(benchmark::State& state) {
  Rng rng(5);
  Model model(desk_model(), rng);
  AdamState adam;
  adam.init(model.num_parameters());
  std::vector<ParamRef> params = model.parameters();
  for (ParamRef& p : params) {
    for (size_t i = 0; i < p.size; ++i) p.grad[i] = rng.normal();
  }
  for (auto _ : state) {
    adam_step(params, adam, 1e-3);
    benchmark::DoNotOptimize(adam);
  }
}
BENCHMARK(BM_AdamStep);

}  // namespace
