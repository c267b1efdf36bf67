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
// Training objectives over paired embedding batches: InfoNCE, Barlow Twins,
// VICReg (invariance / variance / covariance), the two-stage composites, and
// the VICReg-regularized contrastive losses. Every loss returns both its
// scalar value and the exact gradients with respect to its input batches.

#ifndef SSLSV_LOSSES_HPP_
#define SSLSV_LOSSES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sslsv/tensor.hpp"

namespace sslsv {

struct InfoNceConfig {
  double tau = 0.07;
  // The cross-view denominator sum_j exp(a_i . b_j / tau) is the default;
  // literal_within_view instead uses the same-view products a_i . a_j.
  enum class Denominator { kCrossView, kLiteralWithinView };
  Denominator denominator = Denominator::kCrossView;
};

struct VicregWeights {
  double lambda = 1.0;  // invariance
  double mu = 1.0;      // variance
  double nu = 0.04;     // covariance
  double eps_var = 1e-4;
};

struct BarlowConfig {
  double lambda = 0.05;  // off-diagonal weight
  double eps_std = 1e-8;
};

struct CompositeConfig {
  double alpha = 0.1;  // regularization weight for the reg losses
  InfoNceConfig infonce;
  VicregWeights vicreg;
};

// One named loss term with the weight it enters the total with.
struct LossTerm {
  std::string name;
  double weight = 1.0;
  double value = 0.0;
};

struct LossOutput {
  double value = 0.0;
  Tensor2 grad_a, grad_b;
  std::vector<LossTerm> terms;
  std::optional<Tensor2> correlation;  // C when the loss computes one

  // Weighted term sum; matches value to ~1e-10.
  double terms_total() const;
};

// Gradients for the four stage inputs of the composite losses.
struct CompositeOutput {
  double value = 0.0;
  Tensor2 grad_y, grad_yp, grad_z, grad_zp;
  std::vector<LossTerm> terms;

  double terms_total() const;
};

// InfoNCE with internal row l2-normalization (gradient flows through it).
// Requires N >= 2 and no zero rows.
LossOutput info_nce(const Tensor2& a, const Tensor2& b, const InfoNceConfig& cfg);

// Barlow Twins: columns of each batch standardized over the batch
// (population std + eps_std), C = A_std^T B_std / N, then
// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2.
LossOutput barlow_twins(const Tensor2& a, const Tensor2& b, const BarlowConfig& cfg);

// VICReg components. Variance and covariance use the 1/(N-1) convention.
// Gradients are written into the out parameters when non-null (accumulated
// with the given weight).
double vicreg_variance(const Tensor2& a, double eps_var, Tensor2* grad,
                       double weight = 1.0);
double vicreg_invariance(const Tensor2& a, const Tensor2& b, Tensor2* grad_a,
                         Tensor2* grad_b, double weight = 1.0);
double vicreg_covariance(const Tensor2& a, Tensor2* grad, double weight = 1.0,
                         Tensor2* cov_out = nullptr);

// lambda * s(A,B) + mu * (v(A) + v(B)) + nu * (c(A) + c(B)).
// Inputs are not l2-normalized.
LossOutput vicreg(const Tensor2& a, const Tensor2& b, const VicregWeights& w);

// VICReg on representations plus InfoNCE on embeddings.
CompositeOutput comp1(const Tensor2& y, const Tensor2& yp, const Tensor2& z,
                      const Tensor2& zp, const CompositeConfig& cfg);
// InfoNCE on representations plus VICReg on embeddings.
CompositeOutput comp2(const Tensor2& y, const Tensor2& yp, const Tensor2& z,
                      const Tensor2& zp, const CompositeConfig& cfg);

// InfoNCE(A, B) + alpha * VICReg(A, B) on one pair; applied at the Y stage
// this is reg_y, at the Z stage reg_z. alpha = 0 reduces to pure InfoNCE
// bit-exactly.
LossOutput reg_infonce_vicreg(const Tensor2& a, const Tensor2& b,
                              const CompositeConfig& cfg);

}  // namespace sslsv

#endif  // SSLSV_LOSSES_HPP_
