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

#ifndef SSLSV_OPTIM_HPP_
#define SSLSV_OPTIM_HPP_

#include <cstdint>
#include <limits>
#include <vector>

#include "sslsv/nn.hpp"

namespace sslsv {

// Bias-corrected Adam moments over one flat parameter vector.
struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }
  size_t size() const { return m.size(); }
};

// One Adam update over a flat parameter/gradient array. Non-finite gradients
// are a hard error, never a silent skip. Increments state.t.
void adam_step(double* params, const double* grads, size_t n, AdamState& state,
               double lr);

// Same update applied across a parameter list; the state covers the
// concatenation of all refs in order.
void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr);

// initial * decay_factor^floor(epoch / decay_every)
struct LrSchedule {
  double initial = 0.001;
  double decay_factor = 0.95;
  int decay_every = 10;

  void validate() const;
};

double lr_at_epoch(const LrSchedule& sched, int epoch);

// EER-monitoring early stop: a strictly lower value resets the counter, ties
// consume patience, and training stops once the counter exceeds patience.
struct EarlyStop {
  int patience = 50;
  double best_metric = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  enum class Decision { kContinue, kStop };
  Decision update(double eval_eer);
};

}  // namespace sslsv

#endif  // SSLSV_OPTIM_HPP_
