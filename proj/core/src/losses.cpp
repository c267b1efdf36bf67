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

#include "sslsv/losses.hpp"

#include <cmath>

#include "sslsv/nn.hpp"

namespace sslsv {

namespace {

void require_pair(const Tensor2& a, const Tensor2& b, const char* who) {
  SSLSV_REQUIRE(a.same_shape(b), who, ": batch shapes differ (", a.rows, "x",
                a.cols, " vs ", b.rows, "x", b.cols, ")");
  SSLSV_REQUIRE(a.all_finite() && b.all_finite(), who,
                ": non-finite input batch");
}

void require_batch_stats(const Tensor2& a, const char* who) {
  SSLSV_REQUIRE(a.rows >= 2, who, ": batch statistics need N >= 2, got N = ",
                a.rows);
}

double term_total(const std::vector<LossTerm>& terms) {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.weight * t.value;
  return acc;
}

}  // namespace

double LossOutput::terms_total() const { return term_total(terms); }
double CompositeOutput::terms_total() const { return term_total(terms); }

// ---------------------------------------------------------------------------
// InfoNCE

LossOutput info_nce(const Tensor2& a, const Tensor2& b, const InfoNceConfig& cfg) {
  require_pair(a, b, "info_nce");
  require_batch_stats(a, "info_nce");  // negatives come from the batch
  SSLSV_REQUIRE(cfg.tau > 0.0, "info_nce: tau must be positive");

  const size_t n = a.rows;
  const double inv_tau = 1.0 / cfg.tau;
  const double inv_n = 1.0 / static_cast<double>(n);

  const Tensor2 an = l2_normalize(a);
  const Tensor2 bn = l2_normalize(b);

  // Similarities feeding the denominator.
  Tensor2 sims;  // n x n, sims_ij = key_i . ref_j / tau
  const bool cross = cfg.denominator == InfoNceConfig::Denominator::kCrossView;
  if (cross) {
    matmul_nt(an, bn, sims);
  } else {
    matmul_nt(an, an, sims);
  }
  for (double& v : sims.data) v *= inv_tau;

  // Positive similarities a_i . b_i / tau.
  std::vector<double> pos(n);
  for (size_t i = 0; i < n; ++i) {
    const double* ar = an.row(i);
    const double* br = bn.row(i);
    double acc = 0.0;
    for (size_t j = 0; j < a.cols; ++j) acc += ar[j] * br[j];
    pos[i] = acc * inv_tau;
  }

  // Row-wise log-sum-exp and softmax.
  Tensor2 p(n, n);
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* srow = sims.row(i);
    double mx = srow[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, srow[j]);
    double z = 0.0;
    for (size_t j = 0; j < n; ++j) z += std::exp(srow[j] - mx);
    const double lse = mx + std::log(z);
    loss += lse - pos[i];
    double* prow = p.row(i);
    for (size_t j = 0; j < n; ++j) prow[j] = std::exp(srow[j] - lse);
  }
  loss *= inv_n;

  // Gradients w.r.t. the normalized batches.
  Tensor2 dan(n, a.cols), dbn(n, a.cols);
  const double c = inv_n * inv_tau;
  if (cross) {
    // dL/dS = (P - I)/N with S = An Bn^T / tau
    Tensor2 g = p;
    for (size_t i = 0; i < n; ++i) g.at(i, i) -= 1.0;
    Tensor2 tmp;
    matmul(g, bn, tmp);       // (P - I) Bn
    dan = tmp;
    matmul_tn(g, an, tmp);    // (P - I)^T An
    dbn = tmp;
    for (double& v : dan.data) v *= c;
    for (double& v : dbn.data) v *= c;
  } else {
    // L_i = -a_i.b_i/tau + lse_j(a_i.a_j/tau)
    Tensor2 tmp1, tmp2;
    matmul(p, an, tmp1);      // sum_j P_ij a_j
    matmul_tn(p, an, tmp2);   // sum_i P_ik a_i (row k)
    for (size_t i = 0; i < n; ++i) {
      double* out = dan.row(i);
      const double* t1 = tmp1.row(i);
      const double* t2 = tmp2.row(i);
      const double* br = bn.row(i);
      for (size_t j = 0; j < a.cols; ++j) out[j] = c * (t1[j] + t2[j] - br[j]);
    }
    for (size_t i = 0; i < n; ++i) {
      double* out = dbn.row(i);
      const double* ar = an.row(i);
      for (size_t j = 0; j < a.cols; ++j) out[j] = -c * ar[j];
    }
  }

  LossOutput out;
  out.value = loss;
  out.grad_a = l2_normalize_backward(a, an, dan);
  out.grad_b = l2_normalize_backward(b, bn, dbn);
  out.terms = {{"infonce", 1.0, loss}};
  return out;
}

// ---------------------------------------------------------------------------
// Barlow Twins

namespace {

struct Standardized {
  Tensor2 y;
  std::vector<double> mean, std;  // population std (no eps)
};

Standardized standardize_columns(const Tensor2& x, double eps) {
  const size_t n = x.rows, d = x.cols;
  Standardized s;
  s.y.resize(n, d);
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double t = x.at(i, j) - mean;
      var += t * t;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    const double inv = 1.0 / (sd + eps);
    for (size_t i = 0; i < n; ++i) s.y.at(i, j) = (x.at(i, j) - mean) * inv;
    s.mean[j] = mean;
    s.std[j] = sd;
  }
  return s;
}

// Backward through per-column standardization y = (x - mu) / (sd + eps).
Tensor2 standardize_backward(const Tensor2& x, const Standardized& s,
                             const Tensor2& g, double eps) {
  const size_t n = x.rows, d = x.cols;
  Tensor2 dx(n, d);
  for (size_t j = 0; j < d; ++j) {
    const double sd = s.std[j];
    const double denom = sd + eps;
    double g_mean = 0.0;
    double g_dot_c = 0.0;  // sum_i g_i (x_i - mu)
    for (size_t i = 0; i < n; ++i) {
      g_mean += g.at(i, j);
      g_dot_c += g.at(i, j) * (x.at(i, j) - s.mean[j]);
    }
    g_mean /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      double v = (g.at(i, j) - g_mean) / denom;
      if (sd > 0.0) {
        v -= (x.at(i, j) - s.mean[j]) * g_dot_c /
             (static_cast<double>(n) * sd * denom * denom);
      }
      dx.at(i, j) = v;
    }
  }
  return dx;
}

}  // namespace

LossOutput barlow_twins(const Tensor2& a, const Tensor2& b, const BarlowConfig& cfg) {
  require_pair(a, b, "barlow_twins");
  require_batch_stats(a, "barlow_twins");
  SSLSV_REQUIRE(cfg.lambda >= 0.0, "barlow_twins: lambda must be >= 0");

  const size_t n = a.rows, d = a.cols;
  const Standardized sa = standardize_columns(a, cfg.eps_std);
  const Standardized sb = standardize_columns(b, cfg.eps_std);

  Tensor2 corr;  // C = A_std^T B_std / N
  matmul_tn(sa.y, sb.y, corr);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : corr.data) v *= inv_n;

  double invariance = 0.0, redundancy = 0.0;
  Tensor2 g(d, d);  // dL/dC
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) {
      const double cij = corr.at(i, j);
      if (i == j) {
        invariance += (1.0 - cij) * (1.0 - cij);
        g.at(i, j) = -2.0 * (1.0 - cij);
      } else {
        redundancy += cij * cij;
        g.at(i, j) = 2.0 * cfg.lambda * cij;
      }
    }
  }
  const double loss = invariance + cfg.lambda * redundancy;

  // dL/dA_std = B_std G^T / N ; dL/dB_std = A_std G / N
  Tensor2 ga, gb;
  matmul_nt(sb.y, g, ga);
  matmul(sa.y, g, gb);
  for (double& v : ga.data) v *= inv_n;
  for (double& v : gb.data) v *= inv_n;

  LossOutput out;
  out.value = loss;
  out.grad_a = standardize_backward(a, sa, ga, cfg.eps_std);
  out.grad_b = standardize_backward(b, sb, gb, cfg.eps_std);
  out.terms = {{"invariance", 1.0, invariance},
               {"redundancy", cfg.lambda, redundancy}};
  out.correlation = std::move(corr);
  return out;
}

// ---------------------------------------------------------------------------
// VICReg

double vicreg_variance(const Tensor2& a, double eps_var, Tensor2* grad,
                       double weight) {
  require_batch_stats(a, "vicreg_variance");
  SSLSV_REQUIRE(eps_var > 0.0, "vicreg_variance: eps_var must be positive");
  const size_t n = a.rows, d = a.cols;
  if (grad != nullptr && grad->size() == 0) grad->resize(n, d);

  double value = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double t = a.at(i, j) - mean;
      var += t * t;
    }
    var /= static_cast<double>(n - 1);
    const double sd = std::sqrt(var + eps_var);
    if (sd < 1.0) {  // hinge active; subgradient at sd == 1 taken as zero
      value += 1.0 - sd;
      if (grad != nullptr) {
        const double coef =
            -weight / (static_cast<double>(d) * static_cast<double>(n - 1) * sd);
        for (size_t i = 0; i < n; ++i) {
          grad->at(i, j) += coef * (a.at(i, j) - mean);
        }
      }
    }
  }
  return value / static_cast<double>(d);
}

double vicreg_invariance(const Tensor2& a, const Tensor2& b, Tensor2* grad_a,
                         Tensor2* grad_b, double weight) {
  require_pair(a, b, "vicreg_invariance");
  const size_t n = a.rows;
  if (grad_a != nullptr && grad_a->size() == 0) grad_a->resize(a.rows, a.cols);
  if (grad_b != nullptr && grad_b->size() == 0) grad_b->resize(a.rows, a.cols);

  double value = 0.0;
  const double coef = 2.0 * weight / static_cast<double>(n);
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double diff = a.data[i] - b.data[i];
    value += diff * diff;
    if (grad_a != nullptr) grad_a->data[i] += coef * diff;
    if (grad_b != nullptr) grad_b->data[i] -= coef * diff;
  }
  return value / static_cast<double>(n);
}

double vicreg_covariance(const Tensor2& a, Tensor2* grad, double weight,
                         Tensor2* cov_out) {
  require_batch_stats(a, "vicreg_covariance");
  const size_t n = a.rows, d = a.cols;
  if (grad != nullptr && grad->size() == 0) grad->resize(n, d);

  const std::vector<double> mean = col_mean(a);
  Tensor2 centered(n, d);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) centered.at(i, j) = a.at(i, j) - mean[j];
  }
  Tensor2 cov;
  matmul_tn(centered, centered, cov);
  const double inv_nm1 = 1.0 / static_cast<double>(n - 1);
  for (double& v : cov.data) v *= inv_nm1;

  double value = 0.0;
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) {
      if (i != j) value += cov.at(i, j) * cov.at(i, j);
    }
  }
  value /= static_cast<double>(d);

  if (grad != nullptr) {
    // dL/dCov has zero diagonal and 2 Cov_ij / D off it; with G symmetric,
    // dL/dCentered = 2 Centered G / (N-1), then re-center per column.
    Tensor2 g(d, d);
    const double s = 2.0 / static_cast<double>(d);
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j < d; ++j) g.at(i, j) = (i == j) ? 0.0 : s * cov.at(i, j);
    }
    Tensor2 dc;
    matmul(centered, g, dc);
    for (double& v : dc.data) v *= 2.0 * inv_nm1;
    const std::vector<double> dc_mean = col_mean(dc);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < d; ++j) {
        grad->at(i, j) += weight * (dc.at(i, j) - dc_mean[j]);
      }
    }
  }
  if (cov_out != nullptr) *cov_out = std::move(cov);
  return value;
}

LossOutput vicreg(const Tensor2& a, const Tensor2& b, const VicregWeights& w) {
  require_pair(a, b, "vicreg");
  SSLSV_REQUIRE(w.lambda >= 0.0 && w.mu >= 0.0 && w.nu >= 0.0,
                "vicreg: weights must be >= 0");

  LossOutput out;
  out.grad_a.resize(a.rows, a.cols);
  out.grad_b.resize(a.rows, a.cols);

  const double s = vicreg_invariance(a, b, &out.grad_a, &out.grad_b, w.lambda);
  const double va = vicreg_variance(a, w.eps_var, &out.grad_a, w.mu);
  const double vb = vicreg_variance(b, w.eps_var, &out.grad_b, w.mu);
  Tensor2 cov;
  const double ca = vicreg_covariance(a, &out.grad_a, w.nu, &cov);
  const double cb = vicreg_covariance(b, &out.grad_b, w.nu);

  out.value = w.lambda * s + w.mu * (va + vb) + w.nu * (ca + cb);
  out.terms = {{"invariance", w.lambda, s},
               {"variance", w.mu, va + vb},
               {"covariance", w.nu, ca + cb}};
  out.correlation = std::move(cov);
  return out;
}

// ---------------------------------------------------------------------------
// Composites (Y-stage and Z-stage losses combined)

namespace {

CompositeOutput combine_two_stage(LossOutput y_loss, LossOutput z_loss,
                                  const char* y_name, const char* z_name) {
  CompositeOutput out;
  out.value = y_loss.value + z_loss.value;
  out.grad_y = std::move(y_loss.grad_a);
  out.grad_yp = std::move(y_loss.grad_b);
  out.grad_z = std::move(z_loss.grad_a);
  out.grad_zp = std::move(z_loss.grad_b);
  out.terms.push_back({y_name, 1.0, y_loss.value});
  out.terms.push_back({z_name, 1.0, z_loss.value});
  return out;
}

}  // namespace

CompositeOutput comp1(const Tensor2& y, const Tensor2& yp, const Tensor2& z,
                      const Tensor2& zp, const CompositeConfig& cfg) {
  return combine_two_stage(vicreg(y, yp, cfg.vicreg), info_nce(z, zp, cfg.infonce),
                           "vicreg_y", "infonce_z");
}

CompositeOutput comp2(const Tensor2& y, const Tensor2& yp, const Tensor2& z,
                      const Tensor2& zp, const CompositeConfig& cfg) {
  return combine_two_stage(info_nce(y, yp, cfg.infonce), vicreg(z, zp, cfg.vicreg),
                           "infonce_y", "vicreg_z");
}

LossOutput reg_infonce_vicreg(const Tensor2& a, const Tensor2& b,
                              const CompositeConfig& cfg) {
  SSLSV_REQUIRE(cfg.alpha >= 0.0, "reg loss: alpha must be >= 0");
  LossOutput nce = info_nce(a, b, cfg.infonce);
  LossOutput vic = vicreg(a, b, cfg.vicreg);

  LossOutput out;
  out.terms = {{"infonce", 1.0, nce.value}, {"vicreg", cfg.alpha, vic.value}};
  if (cfg.alpha == 0.0) {
    // Bit-exact reduction to the pure contrastive loss.
    out.value = nce.value;
    out.grad_a = std::move(nce.grad_a);
    out.grad_b = std::move(nce.grad_b);
    return out;
  }
  out.value = nce.value + cfg.alpha * vic.value;
  out.grad_a = std::move(nce.grad_a);
  out.grad_b = std::move(nce.grad_b);
  add_inplace(out.grad_a, vic.grad_a, cfg.alpha);
  add_inplace(out.grad_b, vic.grad_b, cfg.alpha);
  return out;
}

}  // namespace sslsv
