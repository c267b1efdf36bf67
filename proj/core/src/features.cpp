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

#include "sslsv/features.hpp"

#include <cmath>

#include "sslsv/common.hpp"
#include "sslsv/fft.hpp"

namespace sslsv {

void SpectrogramConfig::validate() const {
  SSLSV_REQUIRE(sample_rate > 0, "features: sample_rate must be positive");
  SSLSV_REQUIRE(win_length > 1 && hop_length > 0,
                "features: bad window/hop lengths");
  SSLSV_REQUIRE(win_length <= n_fft, "features: win_length (", win_length,
                ") must not exceed n_fft (", n_fft, ")");
  SSLSV_REQUIRE(n_mels >= 1, "features: n_mels must be >= 1");
  SSLSV_REQUIRE(f_min >= 0.0 && f_min < f_max &&
                    f_max <= sample_rate / 2.0,
                "features: need 0 <= f_min < f_max <= sample_rate/2");
  SSLSV_REQUIRE(log_floor > 0.0, "features: log_floor must be positive");
}

size_t SpectrogramConfig::num_frames(size_t num_samples) const {
  SSLSV_REQUIRE(num_samples >= static_cast<size_t>(win_length),
                "features: waveform shorter than one window (", num_samples,
                " < ", win_length, ")");
  return (num_samples - static_cast<size_t>(win_length)) /
             static_cast<size_t>(hop_length) +
         1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Tensor2 stft_power(const Waveform& w, const SpectrogramConfig& cfg) {
  cfg.validate();
  const size_t win = static_cast<size_t>(cfg.win_length);
  const size_t hop = static_cast<size_t>(cfg.hop_length);
  const size_t n_fft = static_cast<size_t>(cfg.n_fft);
  const size_t t_frames = cfg.num_frames(w.samples.size());
  const size_t n_bins = n_fft / 2 + 1;

  std::vector<double> window(win);
  for (size_t n = 0; n < win; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                                       static_cast<double>(win - 1));
  }

  Tensor2 power(t_frames, n_bins);
  std::vector<std::complex<double>> buf(n_fft);
  const bool pow2 = is_power_of_two(n_fft);
  for (size_t t = 0; t < t_frames; ++t) {
    const double* frame = w.samples.data() + t * hop;
    if (pow2) {
      for (size_t n = 0; n < n_fft; ++n) {
        buf[n] = {n < win ? frame[n] * window[n] : 0.0, 0.0};
      }
      fft_inplace(buf, false);
      double* out = power.row(t);
      for (size_t k = 0; k < n_bins; ++k) out[k] = std::norm(buf[k]);
    } else {
      // Non power-of-two n_fft is allowed but rare; direct transform.
      double* out = power.row(t);
      for (size_t k = 0; k < n_bins; ++k) {
        double re = 0.0, im = 0.0;
        for (size_t n = 0; n < win; ++n) {
          const double ang = -2.0 * M_PI * static_cast<double>(k * n) /
                             static_cast<double>(n_fft);
          const double v = frame[n] * window[n];
          re += v * std::cos(ang);
          im += v * std::sin(ang);
        }
        out[k] = re * re + im * im;
      }
    }
  }
  return power;
}

Tensor2 mel_filterbank(const SpectrogramConfig& cfg) {
  cfg.validate();
  const size_t n_bins = static_cast<size_t>(cfg.n_fft) / 2 + 1;
  const size_t n_mels = static_cast<size_t>(cfg.n_mels);

  // n_mels + 2 edge points equally spaced in mel.
  std::vector<double> hz(n_mels + 2);
  const double mel_lo = hz_to_mel(cfg.f_min);
  const double mel_hi = hz_to_mel(cfg.f_max);
  for (size_t m = 0; m < n_mels + 2; ++m) {
    hz[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                   static_cast<double>(n_mels + 1));
  }

  Tensor2 fb(n_mels, n_bins);
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.n_fft;
  for (size_t m = 0; m < n_mels; ++m) {
    const double left = hz[m], center = hz[m + 1], right = hz[m + 2];
    bool nonempty = false;
    for (size_t k = 0; k < n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      double v = 0.0;
      if (f > left && f < right) {
        v = (f <= center) ? (f - left) / (center - left)
                          : (right - f) / (right - center);
      }
      fb.at(m, k) = v;
      nonempty = nonempty || v > 0.0;
    }
    SSLSV_REQUIRE(nonempty, "mel_filterbank: filter ", m,
                  " covers no FFT bin; n_mels too large for n_fft resolution");
  }
  return fb;
}

FeatureMatrix log_mel(const Waveform& w, const SpectrogramConfig& cfg) {
  const Tensor2 power = stft_power(w, cfg);
  const Tensor2 fb = mel_filterbank(cfg);
  const size_t n_mels = fb.rows;

  FeatureMatrix out;
  out.values.resize(power.rows, n_mels);
  out.normalized = false;
  for (size_t t = 0; t < power.rows; ++t) {
    const double* p = power.row(t);
    double* o = out.values.row(t);
    for (size_t m = 0; m < n_mels; ++m) {
      const double* f = fb.row(m);
      double acc = 0.0;
      for (size_t k = 0; k < power.cols; ++k) acc += f[k] * p[k];
      o[m] = std::log(acc + cfg.log_floor);
    }
  }
  return out;
}

FeatureMatrix instance_mvn(const FeatureMatrix& f) {
  const size_t t_frames = f.num_frames();
  const size_t n_bins = f.num_bins();
  SSLSV_REQUIRE(t_frames >= 2, "instance_mvn: need at least 2 frames, got ",
                t_frames);

  FeatureMatrix out;
  out.values.resize(t_frames, n_bins);
  out.normalized = true;
  for (size_t m = 0; m < n_bins; ++m) {
    double mean = 0.0;
    for (size_t t = 0; t < t_frames; ++t) mean += f.values.at(t, m);
    mean /= static_cast<double>(t_frames);
    double var = 0.0;
    for (size_t t = 0; t < t_frames; ++t) {
      const double d = f.values.at(t, m) - mean;
      var += d * d;
    }
    var /= static_cast<double>(t_frames);
    const double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (size_t t = 0; t < t_frames; ++t) {
      out.values.at(t, m) = (f.values.at(t, m) - mean) * inv;
    }
  }
  return out;
}

}  // namespace sslsv
