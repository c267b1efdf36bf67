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
// Deterministic synthetic speaker corpus for desk-scale experiments. Each
// speaker is a fixed fundamental plus three formant-like resonances drawn
// from a seeded per-speaker stream; utterances add white noise at 20 dB SNR.
// The generator also writes a small synthetic noise corpus (speech / music /
// noise), synthetic room impulse responses, a set of channel-corrupted
// evaluation utterances, and a verification trial list over them.

#ifndef SSLSV_SYNTH_HPP_
#define SSLSV_SYNTH_HPP_

#include <string>

#include "sslsv/audio.hpp"
#include "sslsv/eval.hpp"

namespace sslsv {

struct SynthConfig {
  int speakers = 10;
  int utts_per_speaker = 20;
  int eval_utts_per_speaker = 5;
  int n_trials = 200;  // half target, half nontarget
  uint64_t seed = 7;
  int sample_rate = 16000;
  double train_min_seconds = 4.0;
  double train_max_seconds = 6.0;
  double eval_min_seconds = 2.5;
  double eval_max_seconds = 4.0;
  bool with_aug_corpus = true;   // noise/ and rir/ directories
  bool corrupt_eval = true;      // channel-corrupt the eval utterances
  double eval_snr_low_db = 5.0;  // corruption SNR range
  double eval_snr_high_db = 15.0;
  double eval_reverb_prob = 1.0;

  void validate() const;
};

struct SynthSummary {
  std::string manifest_path;   // labeled training manifest
  std::string trials_path;
  std::string noise_dir;       // empty when not generated
  std::string rir_dir;
  size_t train_utterances = 0;
  size_t eval_utterances = 0;
  size_t trials = 0;
};

SynthSummary generate_synth_corpus(const SynthConfig& cfg,
                                   const std::string& out_dir);

}  // namespace sslsv

#endif  // SSLSV_SYNTH_HPP_
