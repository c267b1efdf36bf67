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

#include "sslsv/nn.hpp"

#include <cmath>
#include <fstream>

#include "sslsv/serialize.hpp"

namespace sslsv {

namespace {

constexpr char kModelMagic[8] = {'S', 'S', 'L', 'S', 'V', 'M', 'D', '1'};
constexpr uint32_t kModelVersion = 1;

double xavier_bound(size_t fan_in, size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void relu_inplace(Tensor2& x) {
  for (double& v : x.data) v = v > 0.0 ? v : 0.0;
}

// Zero the gradient wherever the cached post-ReLU activation is zero.
void relu_backward_inplace(const Tensor2& post, Tensor2& dy) {
  SSLSV_REQUIRE(post.same_shape(dy), "relu backward: shape mismatch");
  for (size_t i = 0; i < dy.data.size(); ++i) {
    if (post.data[i] <= 0.0) dy.data[i] = 0.0;
  }
}

}  // namespace

void ModelConfig::validate() const {
  SSLSV_REQUIRE(n_mels >= 1, "model: n_mels must be >= 1");
  SSLSV_REQUIRE(rep_dim >= 1, "model: rep_dim must be >= 1");
  SSLSV_REQUIRE(proj_dim >= 1, "model: proj_dim must be >= 1");
  SSLSV_REQUIRE(sap_hidden >= 0, "model: sap_hidden must be >= 0");
  for (int h : encoder_hidden) SSLSV_REQUIRE(h >= 1, "model: encoder_hidden entries must be >= 1");
}

void FeatureBatch::reserve(size_t items, size_t t, size_t d) {
  num_items = items;
  frames = t;
  bins = d;
  stacked.resize(items * t, d);
}

void FeatureBatch::set_item(size_t index, const FeatureMatrix& f) {
  SSLSV_REQUIRE(index < num_items, "FeatureBatch: index out of range");
  SSLSV_REQUIRE(f.num_frames() == frames && f.num_bins() == bins,
                "FeatureBatch: inconsistent shape (", f.num_frames(), "x",
                f.num_bins(), " vs ", frames, "x", bins, ")");
  std::copy(f.values.data.begin(), f.values.data.end(),
            stacked.data.begin() + static_cast<std::ptrdiff_t>(index * frames * bins));
}

void FeatureBatch::add_item(const FeatureMatrix& f) {
  if (num_items == 0 && stacked.size() == 0) {
    frames = f.num_frames();
    bins = f.num_bins();
  }
  const size_t idx = num_items;
  num_items += 1;
  stacked.data.resize(num_items * frames * bins);
  stacked.rows = num_items * frames;
  stacked.cols = bins;
  set_item(idx, f);
}

// ---------------------------------------------------------------------------
// LinearLayer

void LinearLayer::init(size_t out, size_t in, Rng& rng) {
  weight.resize(out, in);
  const double a = xavier_bound(in, out);
  for (double& v : weight.data) v = rng.uniform(-a, a);
  bias.assign(out, 0.0);
  grad_weight.resize(out, in);
  grad_bias.assign(out, 0.0);
}

void LinearLayer::zero_grad() {
  grad_weight.fill(0.0);
  grad_bias.assign(grad_bias.size(), 0.0);
}

void LinearLayer::forward(const Tensor2& x, Tensor2& y) const {
  SSLSV_REQUIRE(x.cols == weight.cols, "linear: input dim ", x.cols,
                " does not match weight in-dim ", weight.cols);
  matmul_nt(x, weight, y);
  for (size_t i = 0; i < y.rows; ++i) {
    double* row = y.row(i);
    for (size_t j = 0; j < y.cols; ++j) row[j] += bias[j];
  }
}

void LinearLayer::backward(const Tensor2& x, const Tensor2& dy, Tensor2* dx) {
  SSLSV_REQUIRE(dy.rows == x.rows && dy.cols == weight.rows,
                "linear backward: shape mismatch");
  matmul_tn_acc(dy, x, grad_weight);
  for (size_t i = 0; i < dy.rows; ++i) {
    const double* row = dy.row(i);
    for (size_t j = 0; j < dy.cols; ++j) grad_bias[j] += row[j];
  }
  if (dx != nullptr) matmul(dy, weight, *dx);
}

// ---------------------------------------------------------------------------
// BatchNormLayer

void BatchNormLayer::init(size_t dim) {
  gamma.assign(dim, 1.0);
  beta.assign(dim, 0.0);
  running_mean.assign(dim, 0.0);
  running_var.assign(dim, 1.0);
  grad_gamma.assign(dim, 0.0);
  grad_beta.assign(dim, 0.0);
}

void BatchNormLayer::zero_grad() {
  grad_gamma.assign(grad_gamma.size(), 0.0);
  grad_beta.assign(grad_beta.size(), 0.0);
}

void BatchNormLayer::forward(const Tensor2& x, bool train, Tensor2& y,
                             Cache* cache) {
  const size_t n = x.rows, d = x.cols;
  SSLSV_REQUIRE(d == gamma.size(), "batchnorm: feature dim mismatch");
  y.resize(n, d);

  if (!train) {
    for (size_t j = 0; j < d; ++j) {
      const double inv = 1.0 / std::sqrt(running_var[j] + epsilon);
      for (size_t i = 0; i < n; ++i) {
        y.at(i, j) = gamma[j] * (x.at(i, j) - running_mean[j]) * inv + beta[j];
      }
    }
    return;
  }

  SSLSV_REQUIRE(n >= 2, "batchnorm: train mode needs a batch of >= 2, got ", n);
  if (cache != nullptr) {
    cache->x_hat.resize(n, d);
    cache->inv_std.assign(d, 0.0);
  }
  for (size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double t = x.at(i, j) - mean;
      var += t * t;
    }
    var /= static_cast<double>(n);  // biased

    const double inv = 1.0 / std::sqrt(var + epsilon);
    for (size_t i = 0; i < n; ++i) {
      const double xh = (x.at(i, j) - mean) * inv;
      if (cache != nullptr) cache->x_hat.at(i, j) = xh;
      y.at(i, j) = gamma[j] * xh + beta[j];
    }
    if (cache != nullptr) cache->inv_std[j] = inv;
    running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mean;
    running_var[j] = (1.0 - momentum) * running_var[j] + momentum * var;
  }
}

void BatchNormLayer::backward(const Cache& cache, const Tensor2& dy,
                              Tensor2& dx) {
  const size_t n = dy.rows, d = dy.cols;
  SSLSV_REQUIRE(cache.x_hat.rows == n && cache.x_hat.cols == d,
                "batchnorm backward: stale cache");
  dx.resize(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t j = 0; j < d; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double g = dy.at(i, j);
      sum_dy += g;
      sum_dy_xhat += g * cache.x_hat.at(i, j);
    }
    grad_gamma[j] += sum_dy_xhat;
    grad_beta[j] += sum_dy;
    const double scale = gamma[j] * cache.inv_std[j];
    for (size_t i = 0; i < n; ++i) {
      dx.at(i, j) = scale * (dy.at(i, j) - inv_n * sum_dy -
                             cache.x_hat.at(i, j) * inv_n * sum_dy_xhat);
    }
  }
}

// ---------------------------------------------------------------------------
// SapLayer

void SapLayer::init(size_t hidden, size_t feat, Rng& rng) {
  attn_weight.resize(hidden, feat);
  double a = xavier_bound(feat, hidden);
  for (double& v : attn_weight.data) v = rng.uniform(-a, a);
  attn_bias.assign(hidden, 0.0);
  context.assign(hidden, 0.0);
  a = xavier_bound(hidden, 1);
  for (double& v : context) v = rng.uniform(-a, a);
  grad_attn_weight.resize(hidden, feat);
  grad_attn_bias.assign(hidden, 0.0);
  grad_context.assign(hidden, 0.0);
}

void SapLayer::zero_grad() {
  grad_attn_weight.fill(0.0);
  grad_attn_bias.assign(grad_attn_bias.size(), 0.0);
  grad_context.assign(grad_context.size(), 0.0);
}

void SapLayer::forward(const double* h, size_t t, size_t feat, double* pooled,
                       Cache* cache) const {
  SSLSV_REQUIRE(t >= 1, "sap: need at least one frame");
  SSLSV_REQUIRE(feat == attn_weight.cols, "sap: feature dim mismatch");
  const size_t hidden = attn_weight.rows;

  Tensor2 u(t, hidden);
  std::vector<double> scores(t);
  for (size_t i = 0; i < t; ++i) {
    const double* hrow = h + i * feat;
    double* urow = u.row(i);
    double e = 0.0;
    for (size_t k = 0; k < hidden; ++k) {
      const double* wrow = attn_weight.row(k);
      double acc = attn_bias[k];
      for (size_t j = 0; j < feat; ++j) acc += wrow[j] * hrow[j];
      const double uv = std::tanh(acc);
      urow[k] = uv;
      e += context[k] * uv;
    }
    scores[i] = e;
  }

  // softmax over frames
  double mx = scores[0];
  for (size_t i = 1; i < t; ++i) mx = std::max(mx, scores[i]);
  double z = 0.0;
  for (size_t i = 0; i < t; ++i) {
    scores[i] = std::exp(scores[i] - mx);
    z += scores[i];
  }
  for (size_t i = 0; i < t; ++i) scores[i] /= z;

  for (size_t j = 0; j < feat; ++j) pooled[j] = 0.0;
  for (size_t i = 0; i < t; ++i) {
    const double a = scores[i];
    const double* hrow = h + i * feat;
    for (size_t j = 0; j < feat; ++j) pooled[j] += a * hrow[j];
  }

  if (cache != nullptr) {
    cache->u = std::move(u);
    cache->attn = std::move(scores);
  }
}

void SapLayer::backward(const double* h, const Cache& cache,
                        const double* dpooled, double* dh, size_t t,
                        size_t feat) {
  const size_t hidden = attn_weight.rows;
  SSLSV_REQUIRE(cache.attn.size() == t && cache.u.rows == t,
                "sap backward: stale cache");

  // pooled = sum_t a_t h_t
  std::vector<double> da(t);
  for (size_t i = 0; i < t; ++i) {
    const double* hrow = h + i * feat;
    double acc = 0.0;
    for (size_t j = 0; j < feat; ++j) acc += dpooled[j] * hrow[j];
    da[i] = acc;
    double* dhrow = dh + i * feat;
    const double a = cache.attn[i];
    for (size_t j = 0; j < feat; ++j) dhrow[j] = a * dpooled[j];
  }

  // softmax backward: de_i = a_i (da_i - sum_s a_s da_s)
  double dot = 0.0;
  for (size_t i = 0; i < t; ++i) dot += cache.attn[i] * da[i];
  std::vector<double> de(t);
  for (size_t i = 0; i < t; ++i) de[i] = cache.attn[i] * (da[i] - dot);

  // e_i = context . u_i, u_i = tanh(W h_i + b)
  for (size_t i = 0; i < t; ++i) {
    const double* urow = cache.u.row(i);
    const double* hrow = h + i * feat;
    double* dhrow = dh + i * feat;
    const double dei = de[i];
    for (size_t k = 0; k < hidden; ++k) {
      const double uv = urow[k];
      grad_context[k] += dei * uv;
      const double dpre = dei * context[k] * (1.0 - uv * uv);
      if (dpre == 0.0) continue;
      grad_attn_bias[k] += dpre;
      double* gwrow = grad_attn_weight.row(k);
      const double* wrow = attn_weight.row(k);
      for (size_t j = 0; j < feat; ++j) {
        gwrow[j] += dpre * hrow[j];
        dhrow[j] += dpre * wrow[j];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Model

void Model::init(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  config_ = cfg;

  encoder_.clear();
  size_t in = static_cast<size_t>(cfg.n_mels);
  for (int h : cfg.encoder_hidden) {
    LinearLayer l;
    l.init(static_cast<size_t>(h), in, rng);
    encoder_.push_back(std::move(l));
    in = static_cast<size_t>(h);
  }
  LinearLayer last;
  last.init(static_cast<size_t>(cfg.rep_dim), in, rng);
  encoder_.push_back(std::move(last));

  pool_.init(static_cast<size_t>(cfg.sap_hidden_resolved()),
             static_cast<size_t>(cfg.rep_dim), rng);

  proj1_.init(static_cast<size_t>(cfg.proj_dim), static_cast<size_t>(cfg.rep_dim), rng);
  bn1_.init(static_cast<size_t>(cfg.proj_dim));
  proj2_.init(static_cast<size_t>(cfg.proj_dim), static_cast<size_t>(cfg.proj_dim), rng);
  bn2_.init(static_cast<size_t>(cfg.proj_dim));
  proj3_.init(static_cast<size_t>(cfg.proj_dim), static_cast<size_t>(cfg.proj_dim), rng);
}

Tensor2 Model::encoder_forward(const FeatureBatch& x, EncoderCache* cache) const {
  SSLSV_REQUIRE(x.num_items >= 1, "encoder: empty batch");
  SSLSV_REQUIRE(x.bins == static_cast<size_t>(config_.n_mels),
                "encoder: feature dim ", x.bins, " does not match n_mels ",
                config_.n_mels);
  SSLSV_REQUIRE(x.stacked.rows == x.num_items * x.frames,
                "encoder: inconsistent batch");

  std::vector<Tensor2> acts(encoder_.size());
  const Tensor2* cur = &x.stacked;
  for (size_t l = 0; l < encoder_.size(); ++l) {
    encoder_[l].forward(*cur, acts[l]);
    if (l + 1 < encoder_.size()) relu_inplace(acts[l]);
    cur = &acts[l];
  }

  const size_t rep = static_cast<size_t>(config_.rep_dim);
  Tensor2 y(x.num_items, rep);
  std::vector<SapLayer::Cache> sap_caches(cache != nullptr ? x.num_items : 0);
  for (size_t i = 0; i < x.num_items; ++i) {
    const double* h = cur->row(i * x.frames);
    pool_.forward(h, x.frames, rep, y.row(i),
                  cache != nullptr ? &sap_caches[i] : nullptr);
  }
  SSLSV_REQUIRE(y.all_finite(), "encoder: non-finite representation");

  if (cache != nullptr) {
    cache->input = x.stacked;
    cache->acts = std::move(acts);
    cache->sap = std::move(sap_caches);
    cache->num_items = x.num_items;
    cache->frames = x.frames;
  }
  return y;
}

void Model::encoder_backward(const EncoderCache& cache, const Tensor2& dy) {
  const size_t rep = static_cast<size_t>(config_.rep_dim);
  SSLSV_REQUIRE(dy.rows == cache.num_items && dy.cols == rep,
                "encoder backward: bad upstream gradient shape");

  const Tensor2& last_act = cache.acts.back();
  Tensor2 dlast(last_act.rows, last_act.cols);
  for (size_t i = 0; i < cache.num_items; ++i) {
    const double* h = last_act.row(i * cache.frames);
    double* dh = dlast.row(i * cache.frames);
    pool_.backward(h, cache.sap[i], dy.row(i), dh, cache.frames, rep);
  }

  Tensor2 dcur = std::move(dlast);
  for (size_t l = encoder_.size(); l-- > 0;) {
    const Tensor2& input = (l == 0) ? cache.input : cache.acts[l - 1];
    if (l > 0) {
      Tensor2 dprev;
      encoder_[l].backward(input, dcur, &dprev);
      relu_backward_inplace(cache.acts[l - 1], dprev);
      dcur = std::move(dprev);
    } else {
      encoder_[l].backward(input, dcur, nullptr);
    }
  }
}

Tensor2 Model::projector_forward(const Tensor2& y, bool train,
                                 ProjectorCache* cache) {
  SSLSV_REQUIRE(y.cols == static_cast<size_t>(config_.rep_dim),
                "projector: input dim mismatch");
  if (train) {
    SSLSV_REQUIRE(y.rows >= 2,
                  "projector: train mode needs batch statistics (N >= 2), got N = ",
                  y.rows);
  }

  Tensor2 z1, r1, z2, r2, z;
  proj1_.forward(y, z1);
  Tensor2 b1;
  bn1_.forward(z1, train, b1, (train && cache) ? &cache->bn1 : nullptr);
  r1 = std::move(b1);
  relu_inplace(r1);
  proj2_.forward(r1, z2);
  Tensor2 b2;
  bn2_.forward(z2, train, b2, (train && cache) ? &cache->bn2 : nullptr);
  r2 = std::move(b2);
  relu_inplace(r2);
  proj3_.forward(r2, z);
  SSLSV_REQUIRE(z.all_finite(), "projector: non-finite embedding");

  if (cache != nullptr) {
    SSLSV_REQUIRE(train, "projector: backward cache is only valid in train mode");
    cache->input = y;
    cache->r1 = std::move(r1);
    cache->r2 = std::move(r2);
  }
  return z;
}

Tensor2 Model::projector_forward_eval(const Tensor2& y) const {
  // Running statistics make eval mode a pure function; const_cast is safe
  // because train=false never touches layer state.
  return const_cast<Model*>(this)->projector_forward(y, /*train=*/false, nullptr);
}

Tensor2 Model::projector_backward(const ProjectorCache& cache, const Tensor2& dz) {
  Tensor2 dr2;
  proj3_.backward(cache.r2, dz, &dr2);
  relu_backward_inplace(cache.r2, dr2);
  Tensor2 dz2;
  bn2_.backward(cache.bn2, dr2, dz2);
  Tensor2 dr1;
  proj2_.backward(cache.r1, dz2, &dr1);
  relu_backward_inplace(cache.r1, dr1);
  Tensor2 dz1;
  bn1_.backward(cache.bn1, dr1, dz1);
  Tensor2 dy;
  proj1_.backward(cache.input, dz1, &dy);
  return dy;
}

void Model::zero_grad() {
  for (auto& l : encoder_) l.zero_grad();
  pool_.zero_grad();
  proj1_.zero_grad();
  proj2_.zero_grad();
  proj3_.zero_grad();
  bn1_.zero_grad();
  bn2_.zero_grad();
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> refs;
  auto add = [&refs](const std::string& name, std::vector<double>& v,
                     std::vector<double>& g) {
    refs.push_back({name, v.data(), g.data(), v.size()});
  };
  auto add_t = [&refs](const std::string& name, Tensor2& v, Tensor2& g) {
    refs.push_back({name, v.data.data(), g.data.data(), v.size()});
  };
  for (size_t l = 0; l < encoder_.size(); ++l) {
    add_t(detail::str_cat("encoder.", l, ".weight"), encoder_[l].weight,
          encoder_[l].grad_weight);
    add(detail::str_cat("encoder.", l, ".bias"), encoder_[l].bias,
        encoder_[l].grad_bias);
  }
  add_t("sap.attn_weight", pool_.attn_weight, pool_.grad_attn_weight);
  add("sap.attn_bias", pool_.attn_bias, pool_.grad_attn_bias);
  add("sap.context", pool_.context, pool_.grad_context);
  add_t("projector.0.weight", proj1_.weight, proj1_.grad_weight);
  add("projector.0.bias", proj1_.bias, proj1_.grad_bias);
  add("projector.bn0.gamma", bn1_.gamma, bn1_.grad_gamma);
  add("projector.bn0.beta", bn1_.beta, bn1_.grad_beta);
  add_t("projector.1.weight", proj2_.weight, proj2_.grad_weight);
  add("projector.1.bias", proj2_.bias, proj2_.grad_bias);
  add("projector.bn1.gamma", bn2_.gamma, bn2_.grad_gamma);
  add("projector.bn1.beta", bn2_.beta, bn2_.grad_beta);
  add_t("projector.2.weight", proj3_.weight, proj3_.grad_weight);
  add("projector.2.bias", proj3_.bias, proj3_.grad_bias);
  return refs;
}

size_t Model::num_parameters() const {
  // Closed form: documented and asserted in tests.
  size_t count = 0;
  size_t in = static_cast<size_t>(config_.n_mels);
  for (int h : config_.encoder_hidden) {
    count += static_cast<size_t>(h) * in + static_cast<size_t>(h);
    in = static_cast<size_t>(h);
  }
  const size_t rep = static_cast<size_t>(config_.rep_dim);
  count += rep * in + rep;
  const size_t hidden = static_cast<size_t>(config_.sap_hidden_resolved());
  count += hidden * rep + hidden + hidden;
  const size_t proj = static_cast<size_t>(config_.proj_dim);
  count += proj * rep + proj;        // proj1
  count += 2 * proj;                 // bn1 gamma/beta
  count += proj * proj + proj;       // proj2
  count += 2 * proj;                 // bn2
  count += proj * proj + proj;       // proj3
  return count;
}

std::vector<uint8_t> Model::serialize() const {
  ByteWriter w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelVersion);
  w.u32(static_cast<uint32_t>(config_.n_mels));
  w.u32(static_cast<uint32_t>(config_.encoder_hidden.size()));
  for (int h : config_.encoder_hidden) w.u32(static_cast<uint32_t>(h));
  w.u32(static_cast<uint32_t>(config_.rep_dim));
  w.u32(static_cast<uint32_t>(config_.sap_hidden_resolved()));
  w.u32(static_cast<uint32_t>(config_.proj_dim));

  auto dump = [&w](const LinearLayer& l) {
    w.f64_array(l.weight.data.data(), l.weight.size());
    w.f64_array(l.bias.data(), l.bias.size());
  };
  for (const auto& l : encoder_) dump(l);
  w.f64_array(pool_.attn_weight.data.data(), pool_.attn_weight.size());
  w.f64_array(pool_.attn_bias.data(), pool_.attn_bias.size());
  w.f64_array(pool_.context.data(), pool_.context.size());
  auto dump_bn = [&w](const BatchNormLayer& bn) {
    w.f64_array(bn.gamma.data(), bn.gamma.size());
    w.f64_array(bn.beta.data(), bn.beta.size());
    w.f64_array(bn.running_mean.data(), bn.running_mean.size());
    w.f64_array(bn.running_var.data(), bn.running_var.size());
  };
  dump(proj1_);
  dump_bn(bn1_);
  dump(proj2_);
  dump_bn(bn2_);
  dump(proj3_);
  return w.take();
}

namespace {

ModelConfig read_model_header(ByteReader& r) {
  char magic[8];
  for (char& c : magic) c = static_cast<char>(r.u8());
  SSLSV_REQUIRE(std::memcmp(magic, kModelMagic, 8) == 0,
                "model deserialize: bad magic bytes (not a model checkpoint)");
  const uint32_t version = r.u32();
  SSLSV_REQUIRE(version == kModelVersion,
                "model deserialize: unsupported version ", version);
  ModelConfig cfg;
  cfg.n_mels = static_cast<int>(r.u32());
  const uint32_t n_hidden = r.u32();
  SSLSV_REQUIRE(n_hidden <= 64, "model deserialize: implausible layer count");
  cfg.encoder_hidden.clear();
  for (uint32_t i = 0; i < n_hidden; ++i)
    cfg.encoder_hidden.push_back(static_cast<int>(r.u32()));
  cfg.rep_dim = static_cast<int>(r.u32());
  cfg.sap_hidden = static_cast<int>(r.u32());
  cfg.proj_dim = static_cast<int>(r.u32());
  return cfg;
}

}  // namespace

Model Model::deserialize(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  const ModelConfig cfg = read_model_header(r);
  Rng rng(0);  // values are overwritten below
  Model m(cfg, rng);
  m.read_params_(r);
  SSLSV_REQUIRE(r.done(), "model deserialize: ", r.remaining(),
                " trailing bytes");
  return m;
}

void Model::deserialize_into(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  const ModelConfig cfg = read_model_header(r);
  SSLSV_REQUIRE(cfg.n_mels == config_.n_mels &&
                    cfg.encoder_hidden == config_.encoder_hidden &&
                    cfg.rep_dim == config_.rep_dim &&
                    cfg.sap_hidden == config_.sap_hidden_resolved() &&
                    cfg.proj_dim == config_.proj_dim,
                "model deserialize: checkpoint shapes do not match the "
                "configured model (e.g. rep_dim ", cfg.rep_dim, " vs ",
                config_.rep_dim, ", proj_dim ", cfg.proj_dim, " vs ",
                config_.proj_dim, ")");
  read_params_(r);
  SSLSV_REQUIRE(r.done(), "model deserialize: ", r.remaining(),
                " trailing bytes");
}

void Model::read_params_(ByteReader& r) {
  auto fill = [&r](LinearLayer& l) {
    r.f64_array(l.weight.data.data(), l.weight.size());
    r.f64_array(l.bias.data(), l.bias.size());
  };
  for (auto& l : encoder_) fill(l);
  r.f64_array(pool_.attn_weight.data.data(), pool_.attn_weight.size());
  r.f64_array(pool_.attn_bias.data(), pool_.attn_bias.size());
  r.f64_array(pool_.context.data(), pool_.context.size());
  auto fill_bn = [&r](BatchNormLayer& bn) {
    r.f64_array(bn.gamma.data(), bn.gamma.size());
    r.f64_array(bn.beta.data(), bn.beta.size());
    r.f64_array(bn.running_mean.data(), bn.running_mean.size());
    r.f64_array(bn.running_var.data(), bn.running_var.size());
  };
  fill(proj1_);
  fill_bn(bn1_);
  fill(proj2_);
  fill_bn(bn2_);
  fill(proj3_);
}

void Model::save(const std::string& path) const {
  write_file_bytes(path, serialize());
}

Model Model::load(const std::string& path) {
  return deserialize(read_file_bytes(path));
}

// ---------------------------------------------------------------------------

Tensor2 l2_normalize(const Tensor2& v) {
  Tensor2 y(v.rows, v.cols);
  for (size_t i = 0; i < v.rows; ++i) {
    const double* row = v.row(i);
    double norm2 = 0.0;
    for (size_t j = 0; j < v.cols; ++j) norm2 += row[j] * row[j];
    SSLSV_REQUIRE(norm2 > 0.0, "l2_normalize: row ", i, " is all-zero");
    const double inv = 1.0 / std::sqrt(norm2);
    double* out = y.row(i);
    for (size_t j = 0; j < v.cols; ++j) out[j] = row[j] * inv;
  }
  return y;
}

Tensor2 l2_normalize_backward(const Tensor2& v, const Tensor2& y,
                              const Tensor2& dy) {
  SSLSV_REQUIRE(v.same_shape(y) && v.same_shape(dy),
                "l2_normalize_backward: shape mismatch");
  Tensor2 dv(v.rows, v.cols);
  for (size_t i = 0; i < v.rows; ++i) {
    const double* vrow = v.row(i);
    const double* yrow = y.row(i);
    const double* grow = dy.row(i);
    double norm2 = 0.0;
    for (size_t j = 0; j < v.cols; ++j) norm2 += vrow[j] * vrow[j];
    const double inv = 1.0 / std::sqrt(norm2);
    double dot = 0.0;
    for (size_t j = 0; j < v.cols; ++j) dot += yrow[j] * grow[j];
    double* out = dv.row(i);
    for (size_t j = 0; j < v.cols; ++j) out[j] = (grow[j] - yrow[j] * dot) * inv;
  }
  return dv;
}

}  // namespace sslsv
