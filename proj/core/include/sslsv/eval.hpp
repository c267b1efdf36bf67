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
// Speaker-verification evaluation: representation extraction from evenly
// spaced crops, cosine trial scoring, EER and minDCF, plus the
// label-efficiency mechanisms (linear probe on frozen representations and
// whole-network fine-tuning).

#ifndef SSLSV_EVAL_HPP_
#define SSLSV_EVAL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "sslsv/audio.hpp"
#include "sslsv/features.hpp"
#include "sslsv/nn.hpp"
#include "sslsv/optim.hpp"

namespace sslsv {

struct Trial {
  int label = 0;  // 1 = target (same speaker), 0 = nontarget
  std::string enroll_path;
  std::string test_path;
};

struct TrialList {
  std::vector<Trial> trials;

  size_t size() const { return trials.size(); }
};

// One trial per line: `label path1 path2` with label in {0, 1}. Relative
// paths are resolved against the trial file's directory.
TrialList load_trial_list(const std::string& path);
void save_trial_list(const TrialList& t, const std::string& path);

struct DcfConfig {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void validate() const;
};

struct EvalResult {
  double eer_percent = 0.0;
  double eer_threshold = 0.0;
  double min_dcf = 0.0;      // normalized by min(c_miss*p, c_fa*(1-p))
  double dcf_threshold = 0.0;
  double min_dcf_raw = 0.0;  // unnormalized detection cost
};

// Utterance representation: n_crops chunk-length crops with starts evenly
// spaced from 0 to len-chunk (short files are repeat-padded), each run
// through features and the encoder, then averaged. Output lives in Y space
// (rep_dim), never the projector output.
std::vector<double> extract_embedding(const Model& model, const Waveform& w,
                                      const SpectrogramConfig& features,
                                      size_t chunk_len, int n_crops);

// a . b / (|a| |b|); errors on zero vectors.
double cosine_score(const std::vector<double>& a, const std::vector<double>& b);

// EER from a threshold sweep over the sorted unique scores with the accept
// rule score >= t; the crossing of FAR and FRR is linearly interpolated
// between adjacent operating points. Returns (eer percent, threshold).
std::pair<double, double> compute_eer(const std::vector<double>& scores,
                                      const std::vector<int>& labels);

struct MinDcfResult {
  double value = 0.0;  // normalized
  double threshold = 0.0;
  double raw = 0.0;
};

// DCF(t) = c_miss*p*P_miss(t) + c_fa*(1-p)*P_fa(t) minimized over all
// thresholds including the accept-all / reject-all endpoints. The returned
// value is normalized by min(c_miss*p, c_fa*(1-p)); `raw` keeps the
// unnormalized cost.
MinDcfResult compute_min_dcf(const std::vector<double>& scores,
                             const std::vector<int>& labels,
                             const DcfConfig& cfg);

struct ScoredTrial {
  std::string enroll_path;
  std::string test_path;
  double score = 0.0;
  int label = 0;
};

struct ScoreSet {
  std::vector<ScoredTrial> scored;
  size_t unique_embeddings = 0;
  size_t cache_hits = 0;
};

// Embeds each unique path once, scores every trial with cosine similarity,
// and computes EER / minDCF. Missing files are reported together.
std::pair<ScoreSet, EvalResult> run_trials(const Model& model,
                                           const TrialList& trials,
                                           const SpectrogramConfig& features,
                                           size_t chunk_len, int n_crops,
                                           const DcfConfig& dcf = {});

void save_scores_tsv(const ScoreSet& scores, const std::string& path);

// Mean cross-entropy of row-wise softmax against integer targets; writes
// dL/dlogits when requested.
double softmax_cross_entropy(const Tensor2& logits,
                             const std::vector<int>& targets,
                             Tensor2* dlogits);

struct ProbeConfig {
  double lr = 0.001;
  int epochs = 100;  // full-batch Adam
  uint64_t seed = 0;
};

struct ProbeModel {
  Tensor2 weight;  // classes x rep_dim
  std::vector<double> bias;
  std::vector<std::string> classes;

  // Linear transform of a representation (logit vector, no softmax).
  std::vector<double> transform(const std::vector<double>& rep) const;
  int predict(const std::vector<double>& rep) const;
};

struct ProbeResult {
  ProbeModel model;
  double train_accuracy = 0.0;
  double eer_percent = 0.0;  // all-pairs EER over probe-transformed reps
  size_t used_rows = 0;
};

// Multinomial logistic regression on a labeled fraction of frozen
// representations. The representations are never updated. The reported EER
// scores every pair of input rows by cosine similarity of their probe logit
// vectors (target = same speaker).
ProbeResult linear_probe(const Tensor2& reps,
                         const std::vector<std::string>& labels,
                         double fraction, const ProbeConfig& cfg);

// Scores a trial list in probe space: frozen representations mapped through
// the probe's linear layer, then cosine-scored.
EvalResult score_trials_with_probe(const Model& model, const ProbeModel& probe,
                                   const TrialList& trials,
                                   const SpectrogramConfig& features,
                                   size_t chunk_len, int n_crops,
                                   const DcfConfig& dcf = {});

struct FineTuneConfig {
  double fraction = 1.0;
  int epochs = 40;
  int batch_size = 32;
  LrSchedule schedule;
  uint64_t seed = 0;
  bool freeze_backbone = false;  // reduces to the linear probe
  SpectrogramConfig features;
  double chunk_seconds = 2.0;
  int probe_epochs = 100;  // frozen path
  int embed_n_crops = 5;   // frozen path representation extraction
};

struct FineTuneResult {
  Model model;
  Tensor2 head_weight;
  std::vector<double> head_bias;
  std::vector<std::string> classes;
  double train_accuracy = 0.0;
};

// Attaches a softmax classification head to the representation and trains on
// the labeled fraction of the manifest. With freeze_backbone the encoder is
// fixed and the head update is exactly the linear probe's.
FineTuneResult fine_tune(const Model& base, const Manifest& labeled,
                         const FineTuneConfig& cfg);

}  // namespace sslsv

#endif  // SSLSV_EVAL_HPP_
