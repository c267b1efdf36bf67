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

#include "sslsv/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sslsv/eval.hpp"
#include "sslsv/losses.hpp"
#include "sslsv/nn.hpp"
#include "sslsv/rng.hpp"
#include "sslsv/tensor.hpp"

namespace sslsv {

double gradcheck_rel_error(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1.0});
  return std::fabs(analytic - numeric) / denom;
}

double finite_diff_max_err(const std::function<double()>& f, double* x,
                           const double* analytic, size_t n, double h) {
  double worst = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, gradcheck_rel_error(analytic[i], numeric));
  }
  return worst;
}

namespace {

Tensor2 random_batch(size_t n, size_t d, Rng& rng, double scale = 1.0) {
  Tensor2 t(n, d);
  for (double& v : t.data) v = scale * rng.normal();
  return t;
}

// Push every column's sample std away from the variance hinge at 1.
void avoid_variance_hinge(Tensor2& t) {
  for (size_t j = 0; j < t.cols; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < t.rows; ++i) mean += t.at(i, j);
    mean /= static_cast<double>(t.rows);
    double var = 0.0;
    for (size_t i = 0; i < t.rows; ++i) {
      const double d = t.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(t.rows - 1);
    const double sd = std::sqrt(var);
    if (sd > 0.85 && sd < 1.15) {
      for (size_t i = 0; i < t.rows; ++i) t.at(i, j) *= 0.5;
    }
  }
}

struct Suite {
  std::vector<GradCheckResult> results;

  void record(const std::string& name, double err, double tol = 1e-5) {
    results.push_back({name, err, tol, err < tol});
  }
};

using PairLoss = std::function<LossOutput(const Tensor2&, const Tensor2&)>;

void check_pair_loss(Suite& suite, const std::string& name, const PairLoss& loss,
                     size_t n, size_t d, Rng& rng, bool hinge_sensitive) {
  Tensor2 a = random_batch(n, d, rng);
  Tensor2 b = random_batch(n, d, rng);
  if (hinge_sensitive) {
    avoid_variance_hinge(a);
    avoid_variance_hinge(b);
  }
  const LossOutput out = loss(a, b);
  auto f = [&]() { return loss(a, b).value; };
  double err = finite_diff_max_err(f, a.data.data(), out.grad_a.data.data(),
                                   a.data.size());
  err = std::max(err, finite_diff_max_err(f, b.data.data(),
                                          out.grad_b.data.data(), b.data.size()));
  suite.record(detail::str_cat(name, "[N=", n, ",D=", d, "]"), err);
}

void check_losses(Suite& suite, Rng& rng) {
  const InfoNceConfig nce_cross;
  InfoNceConfig nce_literal;
  nce_literal.denominator = InfoNceConfig::Denominator::kLiteralWithinView;
  const VicregWeights vw;
  const BarlowConfig bc;
  CompositeConfig comp;

  const size_t sizes[2][2] = {{4, 8}, {8, 16}};
  for (const auto& s : sizes) {
    const size_t n = s[0], d = s[1];
    check_pair_loss(suite, "info_nce.cross", [&](const Tensor2& a, const Tensor2& b) {
      return info_nce(a, b, nce_cross);
    }, n, d, rng, false);
    check_pair_loss(suite, "info_nce.literal", [&](const Tensor2& a, const Tensor2& b) {
      return info_nce(a, b, nce_literal);
    }, n, d, rng, false);
    check_pair_loss(suite, "barlow_twins", [&](const Tensor2& a, const Tensor2& b) {
      return barlow_twins(a, b, bc);
    }, n, d, rng, false);
    check_pair_loss(suite, "vicreg", [&](const Tensor2& a, const Tensor2& b) {
      return vicreg(a, b, vw);
    }, n, d, rng, true);
    check_pair_loss(suite, "reg_infonce_vicreg",
                    [&](const Tensor2& a, const Tensor2& b) {
                      return reg_infonce_vicreg(a, b, comp);
                    }, n, d, rng, true);

    // Individual VICReg components.
    {
      Tensor2 a = random_batch(n, d, rng);
      avoid_variance_hinge(a);
      Tensor2 grad(n, d);
      vicreg_variance(a, vw.eps_var, &grad);
      auto f = [&]() { return vicreg_variance(a, vw.eps_var, nullptr); };
      suite.record(detail::str_cat("vicreg.variance[N=", n, ",D=", d, "]"),
                   finite_diff_max_err(f, a.data.data(), grad.data.data(),
                                       a.data.size()));
    }
    {
      Tensor2 a = random_batch(n, d, rng);
      Tensor2 b = random_batch(n, d, rng);
      Tensor2 ga(n, d), gb(n, d);
      vicreg_invariance(a, b, &ga, &gb);
      auto f = [&]() { return vicreg_invariance(a, b, nullptr, nullptr); };
      double err = finite_diff_max_err(f, a.data.data(), ga.data.data(), a.data.size());
      err = std::max(err, finite_diff_max_err(f, b.data.data(), gb.data.data(),
                                              b.data.size()));
      suite.record(detail::str_cat("vicreg.invariance[N=", n, ",D=", d, "]"), err);
    }
    {
      Tensor2 a = random_batch(n, d, rng);
      Tensor2 grad(n, d);
      vicreg_covariance(a, &grad);
      auto f = [&]() { return vicreg_covariance(a, nullptr); };
      suite.record(detail::str_cat("vicreg.covariance[N=", n, ",D=", d, "]"),
                   finite_diff_max_err(f, a.data.data(), grad.data.data(),
                                       a.data.size()));
    }

    // Composites over four stage inputs.
    for (int which = 0; which < 2; ++which) {
      Tensor2 y = random_batch(n, d, rng);
      Tensor2 yp = random_batch(n, d, rng);
      Tensor2 z = random_batch(n, d + 2, rng);
      Tensor2 zp = random_batch(n, d + 2, rng);
      avoid_variance_hinge(y);
      avoid_variance_hinge(yp);
      avoid_variance_hinge(z);
      avoid_variance_hinge(zp);
      auto run = [&]() {
        return which == 0 ? comp1(y, yp, z, zp, comp) : comp2(y, yp, z, zp, comp);
      };
      const CompositeOutput out = run();
      auto f = [&]() { return run().value; };
      double err = finite_diff_max_err(f, y.data.data(), out.grad_y.data.data(),
                                       y.data.size());
      err = std::max(err, finite_diff_max_err(f, yp.data.data(),
                                              out.grad_yp.data.data(), yp.data.size()));
      err = std::max(err, finite_diff_max_err(f, z.data.data(),
                                              out.grad_z.data.data(), z.data.size()));
      err = std::max(err, finite_diff_max_err(f, zp.data.data(),
                                              out.grad_zp.data.data(), zp.data.size()));
      suite.record(detail::str_cat(which == 0 ? "comp1" : "comp2", "[N=", n,
                                   ",D=", d, "]"), err);
    }
  }
}

// Scalar objective sum(output .* projection) for layer checks.
double dot_all(const Tensor2& out, const Tensor2& proj) {
  double acc = 0.0;
  for (size_t i = 0; i < out.data.size(); ++i) acc += out.data[i] * proj.data[i];
  return acc;
}

void check_layers(Suite& suite, Rng& rng) {
  // Linear: input, weight, bias gradients.
  {
    const size_t n = 5, in = 7, out_dim = 6;
    LinearLayer layer;
    layer.init(out_dim, in, rng);
    Tensor2 x = random_batch(n, in, rng);
    Tensor2 proj = random_batch(n, out_dim, rng);
    auto f = [&]() {
      Tensor2 y;
      layer.forward(x, y);
      return dot_all(y, proj);
    };
    layer.zero_grad();
    Tensor2 y, dx;
    layer.forward(x, y);
    layer.backward(x, proj, &dx);
    double err = finite_diff_max_err(f, x.data.data(), dx.data.data(), x.data.size());
    err = std::max(err, finite_diff_max_err(f, layer.weight.data.data(),
                                            layer.grad_weight.data.data(),
                                            layer.weight.size()));
    err = std::max(err, finite_diff_max_err(f, layer.bias.data(),
                                            layer.grad_bias.data(),
                                            layer.bias.size()));
    suite.record("layer.linear", err);
  }

  // BatchNorm in train mode: input, gamma, beta.
  {
    const size_t n = 6, d = 5;
    BatchNormLayer bn;
    bn.init(d);
    Rng prng = rng.fork(1);
    for (double& g : bn.gamma) g = prng.uniform(0.5, 1.5);
    for (double& b : bn.beta) b = prng.uniform(-0.5, 0.5);
    Tensor2 x = random_batch(n, d, rng, 2.0);
    Tensor2 proj = random_batch(n, d, rng);
    auto f = [&]() {
      Tensor2 y;
      bn.forward(x, /*train=*/true, y, nullptr);
      return dot_all(y, proj);
    };
    bn.zero_grad();
    Tensor2 y, dx;
    BatchNormLayer::Cache cache;
    bn.forward(x, true, y, &cache);
    bn.backward(cache, proj, dx);
    double err = finite_diff_max_err(f, x.data.data(), dx.data.data(), x.data.size());
    err = std::max(err, finite_diff_max_err(f, bn.gamma.data(),
                                            bn.grad_gamma.data(), bn.gamma.size()));
    err = std::max(err, finite_diff_max_err(f, bn.beta.data(),
                                            bn.grad_beta.data(), bn.beta.size()));
    suite.record("layer.batchnorm", err);
  }

  // ReLU via a linear layer to keep inputs away from the kink at 0.
  {
    const size_t n = 6, d = 8;
    Tensor2 x = random_batch(n, d, rng);
    for (double& v : x.data) {
      if (std::fabs(v) < 1e-3) v += 0.01;  // keep clear of the kink
    }
    Tensor2 proj = random_batch(n, d, rng);
    auto f = [&]() {
      double acc = 0.0;
      for (size_t i = 0; i < x.data.size(); ++i) {
        acc += std::max(0.0, x.data[i]) * proj.data[i];
      }
      return acc;
    };
    Tensor2 grad(n, d);
    for (size_t i = 0; i < x.data.size(); ++i) {
      grad.data[i] = x.data[i] > 0.0 ? proj.data[i] : 0.0;
    }
    suite.record("layer.relu",
                 finite_diff_max_err(f, x.data.data(), grad.data.data(),
                                     x.data.size()));
  }

  // SAP: input and all three parameter groups.
  {
    const size_t t = 7, feat = 6, hidden = 5;
    SapLayer sap;
    sap.init(hidden, feat, rng);
    Tensor2 h = random_batch(t, feat, rng);
    std::vector<double> proj(feat);
    for (double& v : proj) v = rng.normal();
    auto f = [&]() {
      std::vector<double> pooled(feat);
      sap.forward(h.data.data(), t, feat, pooled.data(), nullptr);
      double acc = 0.0;
      for (size_t j = 0; j < feat; ++j) acc += pooled[j] * proj[j];
      return acc;
    };
    sap.zero_grad();
    std::vector<double> pooled(feat);
    SapLayer::Cache cache;
    sap.forward(h.data.data(), t, feat, pooled.data(), &cache);
    Tensor2 dh(t, feat);
    sap.backward(h.data.data(), cache, proj.data(), dh.data.data(), t, feat);
    double err = finite_diff_max_err(f, h.data.data(), dh.data.data(), h.data.size());
    err = std::max(err, finite_diff_max_err(f, sap.attn_weight.data.data(),
                                            sap.grad_attn_weight.data.data(),
                                            sap.attn_weight.size()));
    err = std::max(err, finite_diff_max_err(f, sap.attn_bias.data(),
                                            sap.grad_attn_bias.data(),
                                            sap.attn_bias.size()));
    err = std::max(err, finite_diff_max_err(f, sap.context.data(),
                                            sap.grad_context.data(),
                                            sap.context.size()));
    suite.record("layer.sap", err);
  }

  // Row l2 normalization.
  {
    const size_t n = 5, d = 6;
    Tensor2 x = random_batch(n, d, rng);
    Tensor2 proj = random_batch(n, d, rng);
    auto f = [&]() { return dot_all(l2_normalize(x), proj); };
    const Tensor2 y = l2_normalize(x);
    const Tensor2 dx = l2_normalize_backward(x, y, proj);
    suite.record("layer.l2_normalize",
                 finite_diff_max_err(f, x.data.data(), dx.data.data(),
                                     x.data.size()));
  }

  // Softmax cross-entropy over logits.
  {
    const size_t n = 6, k = 5;
    Tensor2 logits = random_batch(n, k, rng);
    std::vector<int> targets(n);
    for (auto& t : targets) t = static_cast<int>(rng.uniform_index(k));
    auto f = [&]() { return softmax_cross_entropy(logits, targets, nullptr); };
    Tensor2 dlogits;
    softmax_cross_entropy(logits, targets, &dlogits);
    suite.record("layer.softmax_ce",
                 finite_diff_max_err(f, logits.data.data(), dlogits.data.data(),
                                     logits.data.size()));
  }
}

void check_full_model(Suite& suite, Rng& rng) {
  ModelConfig cfg;
  cfg.n_mels = 10;
  cfg.encoder_hidden = {16};
  cfg.rep_dim = 8;
  cfg.sap_hidden = 8;
  cfg.proj_dim = 12;
  Model model(cfg, rng);

  const size_t n = 4, t = 8;
  FeatureBatch va, vb;
  va.reserve(n, t, static_cast<size_t>(cfg.n_mels));
  vb.reserve(n, t, static_cast<size_t>(cfg.n_mels));
  for (double& v : va.stacked.data) v = rng.normal();
  for (double& v : vb.stacked.data) v = rng.normal();

  CompositeConfig comp;
  auto forward_value = [&]() {
    const Tensor2 y = model.encoder_forward(va, nullptr);
    const Tensor2 yp = model.encoder_forward(vb, nullptr);
    const Tensor2 z = model.projector_forward(y, true, nullptr);
    const Tensor2 zp = model.projector_forward(yp, true, nullptr);
    return comp2(y, yp, z, zp, comp).value;
  };

  model.zero_grad();
  Model::EncoderCache enc_a, enc_b;
  Model::ProjectorCache proj_a, proj_b;
  const Tensor2 y = model.encoder_forward(va, &enc_a);
  const Tensor2 yp = model.encoder_forward(vb, &enc_b);
  const Tensor2 z = model.projector_forward(y, true, &proj_a);
  const Tensor2 zp = model.projector_forward(yp, true, &proj_b);
  CompositeOutput out = comp2(y, yp, z, zp, comp);
  Tensor2 dy = model.projector_backward(proj_a, out.grad_z);
  Tensor2 dyp = model.projector_backward(proj_b, out.grad_zp);
  add_inplace(dy, out.grad_y);
  add_inplace(dyp, out.grad_yp);
  model.encoder_backward(enc_a, dy);
  model.encoder_backward(enc_b, dyp);

  double err = 0.0;
  for (const ParamRef& p : model.parameters()) {
    err = std::max(err, finite_diff_max_err(forward_value, p.value, p.grad, p.size));
  }
  suite.record("model.full_comp2", err);
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(uint64_t seed) {
  Suite suite;
  Rng rng(mix64(seed, fnv1a64("gradcheck")));
  check_losses(suite, rng);
  check_layers(suite, rng);
  check_full_model(suite, rng);
  return suite.results;
}

bool all_passed(const std::vector<GradCheckResult>& results) {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return !results.empty();
}

}  // namespace sslsv
