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
// Training configuration and its `key = value` file format (dotted keys,
// '#' comments). Unknown keys are hard errors so typos cannot silently fall
// back to defaults.

#ifndef SSLSV_CONFIG_HPP_
#define SSLSV_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "sslsv/augment.hpp"
#include "sslsv/features.hpp"
#include "sslsv/losses.hpp"
#include "sslsv/nn.hpp"
#include "sslsv/optim.hpp"

namespace sslsv {

enum class LossKind { kInfoNce, kBarlow, kVicreg, kComp1, kComp2, kRegY, kRegZ };

LossKind loss_kind_from_string(const std::string& s);
std::string loss_kind_to_string(LossKind k);
// Whether the loss needs projector embeddings (Z) at all.
bool loss_uses_projector(LossKind k);

struct TrainConfig {
  int batch_size = 64;  // paper-scale default is 256; 64 fits desk runs
  double chunk_seconds = 2.0;
  int max_epochs = 500;
  LossKind loss = LossKind::kVicreg;
  uint64_t seed = 0;
  int workers = 1;

  int eval_every = 1;   // epochs between trial-list evaluations; 0 = never
  int eval_n_crops = 2; // crops per utterance during training-time eval
  int patience = 50;

  double p_noise = 0.75;
  double p_reverb = 0.5;
  std::string noise_dir;  // empty disables the noise branch
  std::string rir_dir;    // empty disables the reverb branch
  SnrRange snr_speech{13.0, 20.0};
  SnrRange snr_music{5.0, 15.0};
  SnrRange snr_noise{0.0, 15.0};

  SpectrogramConfig features;
  ModelConfig model;
  InfoNceConfig infonce;
  VicregWeights vicreg;
  BarlowConfig barlow;
  double composite_alpha = 0.1;
  LrSchedule schedule;

  void validate() const;
  size_t chunk_samples() const;
  // Augmentation policy with corpora loaded from noise_dir / rir_dir.
  // Branches without a directory get probability zero.
  AugmentPolicy make_policy() const;
};

// Parses config text; every assignment must name a known key.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// Canonical one-key-per-line rendering; parse(render(c)) == c.
std::string config_to_text(const TrainConfig& cfg);
uint64_t config_hash(const TrainConfig& cfg);

}  // namespace sslsv

#endif  // SSLSV_CONFIG_HPP_
