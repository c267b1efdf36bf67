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
// Log-mel feature extraction: Hamming-windowed STFT power, triangular mel
// filterbank (HTK scale), natural log, and per-utterance mean/variance
// normalization. Deterministic: identical input gives bit-identical output.

#ifndef SSLSV_FEATURES_HPP_
#define SSLSV_FEATURES_HPP_

#include "sslsv/audio.hpp"
#include "sslsv/tensor.hpp"

namespace sslsv {

struct SpectrogramConfig {
  int sample_rate = 16000;
  int win_length = 400;  // 25 ms
  int hop_length = 160;  // 10 ms
  int n_fft = 512;
  int n_mels = 40;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;

  void validate() const;
  // T = floor((len - win) / hop) + 1
  size_t num_frames(size_t num_samples) const;
};

// T x n_mels feature matrix; `normalized` records whether instance MVN ran.
struct FeatureMatrix {
  Tensor2 values;
  bool normalized = false;

  size_t num_frames() const { return values.rows; }
  size_t num_bins() const { return values.cols; }
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Power spectrogram, T x (n_fft/2 + 1). Frame t covers samples
// [t*hop, t*hop + win); each frame is Hamming-windowed and zero-padded to
// n_fft before the transform.
Tensor2 stft_power(const Waveform& w, const SpectrogramConfig& cfg);

// Triangular filterbank, n_mels x (n_fft/2 + 1), centers equally spaced on
// the mel scale between f_min and f_max. Rows are unnormalized triangles
// ordered by ascending center frequency. Errors if any filter covers no bin.
Tensor2 mel_filterbank(const SpectrogramConfig& cfg);

// log(filterbank * power + log_floor), natural log. Not yet normalized.
FeatureMatrix log_mel(const Waveform& w, const SpectrogramConfig& cfg);

// Per mel bin over frames: subtract mean, divide by population std (+1e-8).
// Requires at least two frames.
FeatureMatrix instance_mvn(const FeatureMatrix& f);

}  // namespace sslsv

#endif  // SSLSV_FEATURES_HPP_
