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
// The trainable network: a per-frame MLP encoder, self-attentive pooling
// producing the utterance representation y, and a Linear-BN-ReLU projector
// producing the embedding z. Forward and backward passes are written out
// explicitly and every analytic gradient is checked against central finite
// differences in the test suite.

#ifndef SSLSV_NN_HPP_
#define SSLSV_NN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sslsv/features.hpp"
#include "sslsv/rng.hpp"
#include "sslsv/tensor.hpp"

namespace sslsv {

struct ModelConfig {
  int n_mels = 40;
  std::vector<int> encoder_hidden = {128, 128};
  int rep_dim = 64;    // representation dimensionality (y)
  int sap_hidden = 0;  // attention hidden size; 0 means rep_dim
  int proj_dim = 2048; // embedding dimensionality (z)

  int sap_hidden_resolved() const { return sap_hidden > 0 ? sap_hidden : rep_dim; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// A batch of feature matrices sharing T and n_mels, stored as one
// (num_items * frames) x bins matrix so the per-frame MLP runs as a single
// matrix product.
struct FeatureBatch {
  size_t num_items = 0;
  size_t frames = 0;
  size_t bins = 0;
  Tensor2 stacked;

  void reserve(size_t items, size_t t, size_t d);
  // Copies one feature matrix into slot `index`.
  void set_item(size_t index, const FeatureMatrix& f);
  void add_item(const FeatureMatrix& f);
};

// Named view into one parameter (or gradient) tensor; parameters() returns
// these in the fixed serialization order.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  size_t size = 0;
};

struct LinearLayer {
  Tensor2 weight;  // out x in
  std::vector<double> bias;
  Tensor2 grad_weight;
  std::vector<double> grad_bias;

  void init(size_t out, size_t in, Rng& rng);
  void zero_grad();
  // y = x * W^T + b
  void forward(const Tensor2& x, Tensor2& y) const;
  // Accumulates grad_weight/grad_bias; writes dL/dx into dx when non-null.
  void backward(const Tensor2& x, const Tensor2& dy, Tensor2* dx);
  size_t num_params() const { return weight.size() + bias.size(); }
};

struct BatchNormLayer {
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  std::vector<double> grad_gamma, grad_beta;
  double momentum = 0.1;
  double epsilon = 1e-5;

  struct Cache {
    Tensor2 x_hat;
    std::vector<double> inv_std;
  };

  void init(size_t dim);
  void zero_grad();
  // Train mode uses biased batch statistics (divide by N, N >= 2) and updates
  // the running estimates; eval mode applies the stored running statistics.
  void forward(const Tensor2& x, bool train, Tensor2& y, Cache* cache);
  void backward(const Cache& cache, const Tensor2& dy, Tensor2& dx);
  size_t num_params() const { return gamma.size() + beta.size(); }
};

// Self-attentive pooling: e_t = context . tanh(W h_t + b), a = softmax(e),
// pooled = sum_t a_t h_t. Attention weights form a distribution over frames.
struct SapLayer {
  Tensor2 attn_weight;  // hidden x feat
  std::vector<double> attn_bias;
  std::vector<double> context;
  Tensor2 grad_attn_weight;
  std::vector<double> grad_attn_bias;
  std::vector<double> grad_context;

  struct Cache {
    Tensor2 u;  // T x hidden, tanh activations
    std::vector<double> attn;
  };

  void init(size_t hidden, size_t feat, Rng& rng);
  void zero_grad();
  // h: row-major T x feat block; pooled: feat values.
  void forward(const double* h, size_t t, size_t feat, double* pooled,
               Cache* cache) const;
  // Assigns dL/dh into dh (T x feat block) and accumulates parameter grads.
  void backward(const double* h, const Cache& cache, const double* dpooled,
                double* dh, size_t t, size_t feat);
  size_t num_params() const {
    return attn_weight.size() + attn_bias.size() + context.size();
  }
};

class Model {
 public:
  struct EncoderCache {
    Tensor2 input;                // stacked features
    std::vector<Tensor2> acts;    // per layer outputs (post-ReLU except last)
    std::vector<SapLayer::Cache> sap;
    size_t num_items = 0;
    size_t frames = 0;
  };
  struct ProjectorCache {
    Tensor2 input;  // Y
    Tensor2 r1, r2; // post-ReLU activations
    BatchNormLayer::Cache bn1, bn2;
  };

  Model() = default;
  Model(const ModelConfig& cfg, Rng& rng) { init(cfg, rng); }
  void init(const ModelConfig& cfg, Rng& rng);

  const ModelConfig& config() const { return config_; }

  // Per-frame MLP then SAP pooling; rows of the result are utterance-level
  // representations (N x rep_dim). Pure given parameters.
  Tensor2 encoder_forward(const FeatureBatch& x, EncoderCache* cache) const;

  // Linear-BN-ReLU x2 then Linear (N x proj_dim). Train mode requires N >= 2
  // and updates BN running statistics; eval mode is a pure function.
  Tensor2 projector_forward(const Tensor2& y, bool train,
                            ProjectorCache* cache);
  Tensor2 projector_forward_eval(const Tensor2& y) const;

  // Accumulate parameter gradients from the cached forward pass.
  void encoder_backward(const EncoderCache& cache, const Tensor2& dy);
  // Returns dL/dY.
  Tensor2 projector_backward(const ProjectorCache& cache, const Tensor2& dz);

  void zero_grad();
  std::vector<ParamRef> parameters();
  size_t num_parameters() const;  // closed-form from the config

  // Versioned binary checkpoint: header {magic, version, config shapes},
  // then parameters and BN running statistics in parameters() order as
  // little-endian 64-bit floats.
  std::vector<uint8_t> serialize() const;
  static Model deserialize(const std::vector<uint8_t>& bytes);
  // Errors (rather than truncating) when the stream's shapes do not match
  // this model's config.
  void deserialize_into(const std::vector<uint8_t>& bytes);

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  void read_params_(class ByteReader& r);

  ModelConfig config_;
  std::vector<LinearLayer> encoder_;
  SapLayer pool_;
  LinearLayer proj1_, proj2_, proj3_;
  BatchNormLayer bn1_, bn2_;

  friend struct ModelTestAccess;
};

// Row-wise l2 normalization; every row of the result has unit norm.
// Errors on an all-zero row.
Tensor2 l2_normalize(const Tensor2& v);
// Backward through row normalization: given the input v, its normalized
// rows y and upstream dy, returns dL/dv.
Tensor2 l2_normalize_backward(const Tensor2& v, const Tensor2& y,
                              const Tensor2& dy);

}  // namespace sslsv

#endif  // SSLSV_NN_HPP_
