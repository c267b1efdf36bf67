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

#include "sslsv/optim.hpp"

#include <cmath>

#include "sslsv/common.hpp"

namespace sslsv {

namespace {

void adam_update_range(double* params, const double* grads, size_t n,
                       AdamState& state, size_t offset, double lr,
                       double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    SSLSV_REQUIRE(std::isfinite(g), "adam_step: non-finite gradient at index ",
                  offset + i);
    double& m = state.m[offset + i];
    double& v = state.v[offset + i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace

void adam_step(double* params, const double* grads, size_t n, AdamState& state,
               double lr) {
  SSLSV_REQUIRE(state.size() == n, "adam_step: state size ", state.size(),
                " does not match parameter count ", n);
  SSLSV_REQUIRE(lr > 0.0, "adam_step: lr must be positive");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  adam_update_range(params, grads, n, state, 0, lr, bc1, bc2);
}

void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr) {
  size_t total = 0;
  for (const auto& p : params) total += p.size;
  SSLSV_REQUIRE(state.size() == total, "adam_step: state size ", state.size(),
                " does not match parameter count ", total);
  SSLSV_REQUIRE(lr > 0.0, "adam_step: lr must be positive");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  size_t offset = 0;
  for (const auto& p : params) {
    adam_update_range(p.value, p.grad, p.size, state, offset, lr, bc1, bc2);
    offset += p.size;
  }
}

void LrSchedule::validate() const {
  SSLSV_REQUIRE(initial > 0.0, "lr schedule: initial must be positive");
  SSLSV_REQUIRE(decay_factor > 0.0 && decay_factor <= 1.0,
                "lr schedule: decay_factor must be in (0, 1]");
  SSLSV_REQUIRE(decay_every > 0, "lr schedule: decay_every must be positive");
}

double lr_at_epoch(const LrSchedule& sched, int epoch) {
  sched.validate();
  SSLSV_REQUIRE(epoch >= 0, "lr_at_epoch: epoch must be >= 0");
  return sched.initial *
         std::pow(sched.decay_factor, static_cast<double>(epoch / sched.decay_every));
}

EarlyStop::Decision EarlyStop::update(double eval_eer) {
  SSLSV_REQUIRE(eval_eer >= 0.0 && eval_eer <= 100.0,
                "early_stop: EER must be in [0, 100], got ", eval_eer);
  if (eval_eer < best_metric) {
    best_metric = eval_eer;
    epochs_since_best = 0;
  } else {
    epochs_since_best += 1;
  }
  return epochs_since_best > patience ? Decision::kStop : Decision::kContinue;
}

}  // namespace sslsv
