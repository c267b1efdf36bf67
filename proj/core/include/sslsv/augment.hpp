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
// Waveform-domain augmentation: additive noise at a sampled SNR from a
// MUSAN-style corpus (speech / music / noise categories), then reverberation
// by convolution with a room impulse response. Noise is always applied
// before reverb.

#ifndef SSLSV_AUGMENT_HPP_
#define SSLSV_AUGMENT_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sslsv/audio.hpp"
#include "sslsv/rng.hpp"

namespace sslsv {

struct SnrRange {
  double low_db = 0.0;
  double high_db = 0.0;
};

// Per-category noise inventory with its SNR sampling range.
struct NoiseCategory {
  std::vector<std::string> files;
  SnrRange snr;
};

struct NoiseCorpus {
  // Keyed by category name; the standard categories are
  // "speech" (13..20 dB), "music" (5..15 dB) and "noise" (0..15 dB).
  std::map<std::string, NoiseCategory> categories;

  bool empty() const { return categories.empty(); }
};

struct RirCorpus {
  std::vector<std::string> files;

  bool empty() const { return files.empty(); }
};

struct AugmentPolicy {
  double p_noise = 0.75;
  double p_reverb = 0.5;
  NoiseCorpus noise;
  RirCorpus rir;

  void validate() const;
};

// What apply_policy actually did, for diagnostics and tests.
struct AugmentLog {
  bool noise_applied = false;
  std::string noise_category;
  std::string noise_file;
  double snr_db = 0.0;
  double noise_gain = 0.0;
  bool reverb_applied = false;
  std::string rir_file;
};

// clean + g * noise with g chosen so 10*log10(P_clean / P_scaled_noise) equals
// snr_db; powers are mean squared amplitude over the full chunk. The sum is
// peak-normalized only if it exceeds full scale. Lengths and rates must match;
// a zero-power clean or noise signal is an error (SNR undefined).
// If gain_out is non-null the applied noise gain is written there.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db, double* gain_out = nullptr);

// Full linear convolution of x with rir, truncated to len(x) samples starting
// at the rir's peak-amplitude index so the output stays time-aligned with the
// input. The result is rescaled to the input's max-abs.
Waveform reverberate(const Waveform& x, const Waveform& rir);

// Tiles or uniformly crops `w` to exactly `length` samples.
Waveform fit_to_length(const Waveform& w, size_t length, Rng& rng);

// With probability p_noise: pick a category uniformly among those present,
// a file uniformly within it, an SNR uniformly within the category range,
// and mix. Then with probability p_reverb: pick an RIR uniformly and
// reverberate. Deterministic given the stream.
Waveform apply_policy(const Waveform& x, const AugmentPolicy& policy, Rng& rng,
                      AugmentLog* log = nullptr);

// Loads a noise corpus from a directory with speech/ music/ noise/
// subdirectories of WAV files (categories may be absent). Default SNR ranges
// are attached to the standard category names.
NoiseCorpus load_noise_corpus(const std::string& dir,
                              int expected_rate = 16000);

// Loads a flat directory of RIR WAV files.
RirCorpus load_rir_corpus(const std::string& dir, int expected_rate = 16000);

}  // namespace sslsv

#endif  // SSLSV_AUGMENT_HPP_
