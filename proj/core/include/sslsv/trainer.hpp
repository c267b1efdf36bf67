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
// End-to-end training orchestration: dual-view batch assembly, the Siamese
// forward/backward (one shared parameter set), the Adam step, per-epoch
// evaluation with early stopping, metrics, and resumable checkpoints.
// Given (seed, config, data) the whole trajectory is bit-reproducible; all
// per-item randomness derives from hash(seed, epoch, utterance_id) so worker
// count cannot reorder it.

#ifndef SSLSV_TRAINER_HPP_
#define SSLSV_TRAINER_HPP_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sslsv/audio.hpp"
#include "sslsv/config.hpp"
#include "sslsv/eval.hpp"
#include "sslsv/losses.hpp"
#include "sslsv/nn.hpp"
#include "sslsv/optim.hpp"

namespace sslsv {

struct MetricsRow {
  int epoch = 0;
  double loss = 0.0;
  std::vector<LossTerm> terms;  // epoch means of the per-term diagnostics
  double emb_std = 0.0;         // collapse monitor
  bool has_eval = false;
  double eval_eer = 0.0;
  double eval_min_dcf = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
  int steps = 0;  // optimizer steps taken this epoch
};

struct TrainMetrics {
  std::vector<MetricsRow> rows;
};

// One TSV row per epoch:
//   epoch loss term:<name>... emb_std eval_eer eval_mindcf lr seconds
// Eval columns are `nan` on epochs without an evaluation.
void write_metrics_tsv(const TrainMetrics& metrics, const std::string& path);

struct StepStats {
  double loss = 0.0;
  std::vector<LossTerm> terms;
  double emb_std = 0.0;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, Manifest manifest);

  // Held-out verification trials for per-epoch evaluation / early stopping.
  void set_trials(TrialList trials);
  // Directory for metrics.tsv, checkpoints and the resolved config; empty
  // disables file output.
  void set_out_dir(std::string dir);

  // Two aligned feature batches (views) for the given manifest rows:
  // disjoint chunk pair, independent augmentation per view, log-mel,
  // instance MVN. Parallel across items when cfg.workers > 1.
  std::pair<FeatureBatch, FeatureBatch> build_batch(
      const std::vector<size_t>& items, int epoch);
  // Sampling form: batch_size distinct utterances drawn without replacement.
  std::pair<FeatureBatch, FeatureBatch> build_batch(Rng& rng, int epoch);

  // Forward both views through the shared parameters, evaluate the selected
  // loss at its stage(s), backpropagate both views into the single gradient
  // set, and apply one Adam step. Non-finite losses abort with diagnostics.
  StepStats train_step(const FeatureBatch& view_a, const FeatureBatch& view_b,
                       double lr);

  // Epoch loop with the lr schedule, per-epoch evaluation, early stopping,
  // and best-EER retention.
  void fit();
  // Runs the same loop but stops after `epoch_end` completed epochs
  // (clamped to max_epochs); resuming afterwards reproduces an
  // uninterrupted run bit-exactly.
  void fit_until(int epoch_end);

  // Explicit extension of a resumed run (changes the stored config).
  void override_max_epochs(int max_epochs);

  void save_checkpoint(const std::string& path) const;
  // Rebuilds a trainer mid-run; the stored config wins. If expected is given
  // and its hash differs, a one-line warning goes to stderr and
  // *config_mismatch (when non-null) is set.
  static Trainer resume(const std::string& path, Manifest manifest,
                        const TrainConfig* expected = nullptr,
                        bool* config_mismatch = nullptr);

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  // Best-eval checkpoint when an evaluation ever ran, else the final model.
  const Model& best_model() const { return has_best_ ? best_model_ : model_; }
  const TrainMetrics& metrics() const { return metrics_; }
  const TrainConfig& config() const { return cfg_; }
  int epochs_completed() const { return epoch_; }
  double best_eer() const { return best_eer_; }

 private:
  void evaluate_and_update(MetricsRow& row);
  const Waveform& wav_for(const ManifestEntry& entry);

  TrainConfig cfg_;
  Manifest manifest_;
  AugmentPolicy policy_;
  Model model_;
  AdamState adam_;
  EarlyStop early_stop_;
  Model best_model_;
  bool has_best_ = false;
  double best_eer_ = 0.0;
  int epoch_ = 0;
  bool stopped_early_ = false;
  TrainMetrics metrics_;
  TrialList trials_;
  bool has_trials_ = false;
  std::string out_dir_;
  std::unordered_map<std::string, Waveform> wav_cache_;
};

struct FitResult {
  Model model;  // best-EER checkpoint
  TrainMetrics metrics;
};

// Loads either a bare model file or a trainer checkpoint (current model).
// When the file is a trainer checkpoint and cfg_out is non-null, the stored
// config is written there and *has_cfg set.
Model load_model_any(const std::string& path, TrainConfig* cfg_out = nullptr,
                     bool* has_cfg = nullptr);

// Convenience wrapper over Trainer::fit.
FitResult fit(const Manifest& manifest, const TrainConfig& cfg,
              const TrialList* trials = nullptr,
              const std::string& out_dir = "");

}  // namespace sslsv

#endif  // SSLSV_TRAINER_HPP_
