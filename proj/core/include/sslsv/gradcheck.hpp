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
// Central finite-difference verification of every analytic gradient: all
// training losses, every network layer, and the full model end to end.
// h = 1e-5 in double precision; the pass bar is a 1e-5 max relative error
// (relative to max(|analytic|, |numeric|, 1)). Variance-hinge kinks are kept
// out of the sampled points.

#ifndef SSLSV_GRADCHECK_HPP_
#define SSLSV_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sslsv {

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 1e-5;
  bool pass = false;
};

double gradcheck_rel_error(double analytic, double numeric);

// Central difference (f(x+h) - f(x-h)) / 2h over `n` values at `x`,
// compared entry-wise against `analytic`. Returns the max relative error.
double finite_diff_max_err(const std::function<double()>& f, double* x,
                           const double* analytic, size_t n, double h = 1e-5);

// The whole suite: losses on random N in {4,8} x D in {8,16} batches, each
// layer under a fixed random output projection, and a full-model two-stage
// composite check. Deterministic given the seed.
std::vector<GradCheckResult> run_gradcheck(uint64_t seed);

bool all_passed(const std::vector<GradCheckResult>& results);

}  // namespace sslsv

#endif  // SSLSV_GRADCHECK_HPP_
