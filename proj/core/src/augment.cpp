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

#include "sslsv/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "sslsv/common.hpp"
#include "sslsv/fft.hpp"

namespace sslsv {

namespace {

// Read-through cache for noise/RIR files, which are re-drawn every step.
// Values are immutable once inserted, so concurrent readers are safe.
std::shared_ptr<const Waveform> cached_wav(const std::string& path, int rate) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const Waveform>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(path);
    if (it != cache.end()) return it->second;
  }
  auto loaded = std::make_shared<const Waveform>(load_wav(path, rate));
  std::lock_guard<std::mutex> lock(mu);
  return cache.try_emplace(path, std::move(loaded)).first->second;
}

double mean_square(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

std::vector<std::string> list_wavs(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".wav") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

void AugmentPolicy::validate() const {
  SSLSV_REQUIRE(p_noise >= 0.0 && p_noise <= 1.0,
                "augment: p_noise must be in [0,1], got ", p_noise);
  SSLSV_REQUIRE(p_reverb >= 0.0 && p_reverb <= 1.0,
                "augment: p_reverb must be in [0,1], got ", p_reverb);
  for (const auto& [name, cat] : noise.categories) {
    SSLSV_REQUIRE(cat.snr.low_db <= cat.snr.high_db, "augment: category '",
                  name, "' has inverted SNR range");
  }
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db, double* gain_out) {
  SSLSV_REQUIRE(clean.sample_rate == noise.sample_rate,
                "mix_at_snr: sample rates differ (", clean.sample_rate, " vs ",
                noise.sample_rate, ")");
  SSLSV_REQUIRE(clean.size() == noise.size(),
                "mix_at_snr: lengths differ (", clean.size(), " vs ",
                noise.size(), "); fit the noise to the chunk first");

  const double p_clean = mean_square(clean.samples);
  const double p_noise = mean_square(noise.samples);
  SSLSV_REQUIRE(p_clean > 0.0, "mix_at_snr: clean signal has zero power");
  SSLSV_REQUIRE(p_noise > 0.0, "mix_at_snr: noise signal has zero power");

  // 10*log10(p_clean / (g^2 * p_noise)) = snr_db
  const double g = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  if (gain_out != nullptr) *gain_out = g;

  Waveform out;
  out.sample_rate = clean.sample_rate;
  out.samples.resize(clean.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    out.samples[i] = clean.samples[i] + g * noise.samples[i];
  }
  const double peak = max_abs(out.samples);
  if (peak > 1.0) {
    for (double& v : out.samples) v /= peak;
  }
  return out;
}

Waveform reverberate(const Waveform& x, const Waveform& rir) {
  SSLSV_REQUIRE(x.sample_rate == rir.sample_rate,
                "reverberate: sample rates differ");
  SSLSV_REQUIRE(!rir.samples.empty(), "reverberate: empty rir");
  SSLSV_REQUIRE(!x.samples.empty(), "reverberate: empty input");

  size_t peak_idx = 0;
  double peak_val = 0.0;
  for (size_t i = 0; i < rir.samples.size(); ++i) {
    const double a = std::fabs(rir.samples[i]);
    if (a > peak_val) {
      peak_val = a;
      peak_idx = i;
    }
  }
  SSLSV_REQUIRE(peak_val > 0.0, "reverberate: all-zero rir");

  const std::vector<double> full = fft_convolve(x.samples, rir.samples);

  Waveform out;
  out.sample_rate = x.sample_rate;
  out.samples.resize(x.size());
  // Align the direct path: take len(x) samples starting at the rir peak.
  for (size_t i = 0; i < x.size(); ++i) {
    const size_t j = peak_idx + i;
    out.samples[i] = j < full.size() ? full[j] : 0.0;
  }

  const double in_peak = max_abs(x.samples);
  const double out_peak = max_abs(out.samples);
  if (out_peak > 0.0) {
    const double s = in_peak / out_peak;
    for (double& v : out.samples) v *= s;
  }
  return out;
}

Waveform fit_to_length(const Waveform& w, size_t length, Rng& rng) {
  SSLSV_REQUIRE(!w.samples.empty(), "fit_to_length: empty waveform");
  if (w.size() == length) return w;
  if (w.size() > length) {
    const size_t start = rng.uniform_index(w.size() - length + 1);
    return crop(w, start, length);
  }
  return crop(w, 0, length);  // shorter: tiled
}

Waveform apply_policy(const Waveform& x, const AugmentPolicy& policy, Rng& rng,
                      AugmentLog* log) {
  policy.validate();
  Waveform out = x;
  if (log != nullptr) *log = AugmentLog{};

  if (rng.uniform() < policy.p_noise) {
    SSLSV_REQUIRE(!policy.noise.empty(),
                  "apply_policy: noise branch fired but the corpus is empty");
    const size_t cat_idx = rng.uniform_index(policy.noise.categories.size());
    auto it = policy.noise.categories.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(cat_idx));
    const NoiseCategory& cat = it->second;
    SSLSV_REQUIRE(!cat.files.empty(), "apply_policy: category '", it->first,
                  "' has no files");

    const std::string& file = cat.files[rng.uniform_index(cat.files.size())];
    const std::shared_ptr<const Waveform> noise_raw = cached_wav(file, x.sample_rate);
    const Waveform noise = fit_to_length(*noise_raw, x.size(), rng);
    const double snr = rng.uniform(cat.snr.low_db, cat.snr.high_db);

    double gain = 0.0;
    out = mix_at_snr(out, noise, snr, &gain);
    if (log != nullptr) {
      log->noise_applied = true;
      log->noise_category = it->first;
      log->noise_file = file;
      log->snr_db = snr;
      log->noise_gain = gain;
    }
  }

  if (rng.uniform() < policy.p_reverb) {
    SSLSV_REQUIRE(!policy.rir.empty(),
                  "apply_policy: reverb branch fired but the rir corpus is empty");
    const std::string& file =
        policy.rir.files[rng.uniform_index(policy.rir.files.size())];
    const std::shared_ptr<const Waveform> rir = cached_wav(file, x.sample_rate);
    out = reverberate(out, *rir);
    if (log != nullptr) {
      log->reverb_applied = true;
      log->rir_file = file;
    }
  }
  return out;
}

NoiseCorpus load_noise_corpus(const std::string& dir, int expected_rate) {
  SSLSV_REQUIRE(std::filesystem::is_directory(dir),
                "load_noise_corpus: '", dir, "' is not a directory");
  (void)expected_rate;  // rates are validated lazily at load time
  static const std::array<std::pair<const char*, SnrRange>, 3> kCategories = {{
      {"speech", {13.0, 20.0}},
      {"music", {5.0, 15.0}},
      {"noise", {0.0, 15.0}},
  }};

  NoiseCorpus corpus;
  for (const auto& [name, snr] : kCategories) {
    const std::filesystem::path sub = std::filesystem::path(dir) / name;
    if (!std::filesystem::is_directory(sub)) continue;
    NoiseCategory cat;
    cat.files = list_wavs(sub.string());
    cat.snr = snr;
    if (!cat.files.empty()) corpus.categories.emplace(name, std::move(cat));
  }
  SSLSV_REQUIRE(!corpus.empty(), "load_noise_corpus: no WAV files under '",
                dir, "' (expected speech/, music/ or noise/ subdirectories)");
  return corpus;
}

RirCorpus load_rir_corpus(const std::string& dir, int expected_rate) {
  SSLSV_REQUIRE(std::filesystem::is_directory(dir),
                "load_rir_corpus: '", dir, "' is not a directory");
  (void)expected_rate;
  RirCorpus corpus;
  corpus.files = list_wavs(dir);
  SSLSV_REQUIRE(!corpus.empty(), "load_rir_corpus: no WAV files under '", dir,
                "'");
  return corpus;
}

}  // namespace sslsv
