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

#include "sslsv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "sslsv/augment.hpp"
#include "sslsv/common.hpp"

namespace sslsv {

namespace {

namespace fs = std::filesystem;

struct SpeakerVoice {
  double f0 = 0.0;
  double formants[3] = {0.0, 0.0, 0.0};
  double bandwidths[3] = {0.0, 0.0, 0.0};
};

SpeakerVoice draw_voice(Rng& rng) {
  SpeakerVoice v;
  v.f0 = rng.uniform(90.0, 240.0);
  v.formants[0] = rng.uniform(300.0, 900.0);
  v.formants[1] = rng.uniform(1000.0, 2200.0);
  v.formants[2] = rng.uniform(2400.0, 3600.0);
  for (double& b : v.bandwidths) b = rng.uniform(80.0, 200.0);
  return v;
}

// Adds sin(2*pi*freq*t + phase) * amp via a rotating phasor (no per-sample
// trig calls; drift over a few hundred thousand samples is negligible).
void add_tone(std::vector<double>& x, int rate, double freq, double phase,
              double amp) {
  const double ang = 2.0 * M_PI * freq / static_cast<double>(rate);
  const double cr = std::cos(ang), ci = std::sin(ang);
  double re = std::cos(phase), im = std::sin(phase);
  for (double& v : x) {
    v += amp * im;  // sin component
    const double nr = re * cr - im * ci;
    im = re * ci + im * cr;
    re = nr;
  }
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

void scale_to_peak(std::vector<double>& x, double target) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak <= 0.0) return;
  const double s = target / peak;
  for (double& v : x) v *= s;
}

// Harmonic source shaped by the speaker's formant envelope, plus white noise
// 20 dB below the harmonic part.
Waveform synth_utterance(const SpeakerVoice& voice, double seconds, int rate,
                         Rng& rng) {
  const size_t n = static_cast<size_t>(seconds * rate + 0.5);
  std::vector<double> x(n, 0.0);

  const int harmonics = static_cast<int>(4000.0 / voice.f0);
  for (int h = 1; h <= harmonics; ++h) {
    const double f = voice.f0 * h;
    double envelope = 0.05;
    for (int k = 0; k < 3; ++k) {
      const double d = (f - voice.formants[k]) / voice.bandwidths[k];
      envelope += std::exp(-0.5 * d * d);
    }
    const double amp = envelope / std::sqrt(static_cast<double>(h));
    add_tone(x, rate, f, rng.uniform(0.0, 2.0 * M_PI), amp);
  }

  const double sigma = rms(x) / 10.0;  // 20 dB SNR
  for (double& v : x) v += sigma * rng.normal();
  scale_to_peak(x, 0.8);

  Waveform w;
  w.sample_rate = rate;
  w.samples = std::move(x);
  return w;
}

Waveform synth_noise_file(int kind, double seconds, int rate, Rng& rng) {
  const size_t n = static_cast<size_t>(seconds * rate + 0.5);
  std::vector<double> x(n, 0.0);
  switch (kind) {
    case 0: {  // colored noise: one-pole lowpass (or its complement)
      const double a = rng.uniform(0.5, 0.97);
      const bool high = rng.uniform() < 0.5;
      double y = 0.0;
      for (double& v : x) {
        const double white = rng.normal();
        y = a * y + (1.0 - a) * white;
        v = high ? white - y : y;
      }
      break;
    }
    case 1: {  // music-like: triad with slow tremolo
      const double root = rng.uniform(110.0, 440.0);
      const double ratios[3] = {1.0, 1.25, 1.5};
      for (double ratio : ratios) {
        add_tone(x, rate, root * ratio, rng.uniform(0.0, 2.0 * M_PI), 1.0);
        add_tone(x, rate, 2.0 * root * ratio, rng.uniform(0.0, 2.0 * M_PI), 0.3);
      }
      const double am = rng.uniform(0.5, 2.0);
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      for (size_t t = 0; t < n; ++t) {
        x[t] *= 1.0 + 0.4 * std::sin(2.0 * M_PI * am * static_cast<double>(t) / rate + ph);
      }
      break;
    }
    default: {  // babble: several voices with syllabic amplitude modulation
      for (int v = 0; v < 4; ++v) {
        SpeakerVoice voice = draw_voice(rng);
        std::vector<double> one(n, 0.0);
        const int harmonics = static_cast<int>(3000.0 / voice.f0);
        for (int h = 1; h <= harmonics; ++h) {
          const double f = voice.f0 * h;
          double envelope = 0.05;
          for (int k = 0; k < 3; ++k) {
            const double d = (f - voice.formants[k]) / voice.bandwidths[k];
            envelope += std::exp(-0.5 * d * d);
          }
          add_tone(one, rate, f, rng.uniform(0.0, 2.0 * M_PI),
                   envelope / std::sqrt(static_cast<double>(h)));
        }
        const double syl = rng.uniform(2.0, 5.0);
        const double ph = rng.uniform(0.0, 2.0 * M_PI);
        for (size_t t = 0; t < n; ++t) {
          const double mod =
              0.3 + 0.7 * (0.5 + 0.5 * std::sin(2.0 * M_PI * syl * static_cast<double>(t) / rate + ph));
          x[t] += one[t] * mod;
        }
      }
      break;
    }
  }
  scale_to_peak(x, 0.7);
  Waveform w;
  w.sample_rate = rate;
  w.samples = std::move(x);
  return w;
}

// Direct-path spike after a short pre-delay, a few early reflections, and an
// exponentially decaying noise tail. Kept under 768 samples so a 2 s chunk
// convolution still fits a 32768-point transform.
Waveform synth_rir(int rate, Rng& rng) {
  const size_t delay = 80 + rng.uniform_index(161);  // 5..15 ms at 16 kHz
  const double tau = rng.uniform(80.0, 130.0);       // samples
  const size_t len = delay + static_cast<size_t>(4.0 * tau);
  std::vector<double> h(len, 0.0);
  h[delay] = 1.0;
  for (int k = 0; k < 6; ++k) {
    const size_t at = delay + 1 + rng.uniform_index(std::min<size_t>(500, len - delay - 1));
    h[at] += rng.uniform(-0.6, 0.6);
  }
  for (size_t t = delay + 1; t < len; ++t) {
    double v = 0.3 * rng.normal() * std::exp(-static_cast<double>(t - delay) / tau);
    v = std::clamp(v, -0.8, 0.8);
    h[t] += v;
    h[t] = std::clamp(h[t], -0.95, 0.95);
  }
  Waveform w;
  w.sample_rate = rate;
  w.samples = std::move(h);
  return w;
}

std::string spk_name(int s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", s);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  SSLSV_REQUIRE(speakers >= 2, "synth: need at least 2 speakers");
  SSLSV_REQUIRE(utts_per_speaker >= 1, "synth: utts_per_speaker must be >= 1");
  SSLSV_REQUIRE(eval_utts_per_speaker >= 2,
                "synth: eval_utts_per_speaker must be >= 2 (target pairs)");
  SSLSV_REQUIRE(n_trials >= 2 && n_trials % 2 == 0,
                "synth: n_trials must be even and >= 2");
  SSLSV_REQUIRE(sample_rate > 0, "synth: sample_rate must be positive");
  SSLSV_REQUIRE(train_min_seconds > 0 && train_min_seconds <= train_max_seconds,
                "synth: bad train duration range");
  SSLSV_REQUIRE(eval_min_seconds > 0 && eval_min_seconds <= eval_max_seconds,
                "synth: bad eval duration range");
}

SynthSummary generate_synth_corpus(const SynthConfig& cfg,
                                   const std::string& out_dir) {
  cfg.validate();
  const fs::path root(out_dir);
  fs::create_directories(root / "wav");
  fs::create_directories(root / "eval");

  const Rng master(cfg.seed);
  SynthSummary summary;

  // Synthetic augmentation corpora first so eval corruption can reuse them.
  if (cfg.with_aug_corpus) {
    const char* cats[3] = {"noise", "music", "speech"};
    for (int kind = 0; kind < 3; ++kind) {
      fs::create_directories(root / "noise" / cats[kind]);
      for (int i = 0; i < 6; ++i) {
        Rng rng = master.fork(mix64(fnv1a64("noise_corpus"),
                                    static_cast<uint64_t>(kind * 100 + i)));
        const Waveform w = synth_noise_file(kind, 4.0, cfg.sample_rate, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "%s%02d.wav", cats[kind], i);
        save_wav(w, (root / "noise" / cats[kind] / name).string());
      }
    }
    fs::create_directories(root / "rir");
    for (int i = 0; i < 8; ++i) {
      Rng rng = master.fork(mix64(fnv1a64("rir_corpus"), static_cast<uint64_t>(i)));
      char name[32];
      std::snprintf(name, sizeof(name), "rir%02d.wav", i);
      save_wav(synth_rir(cfg.sample_rate, rng), (root / "rir" / name).string());
    }
    summary.noise_dir = (root / "noise").string();
    summary.rir_dir = (root / "rir").string();
  }

  // Speaker voices.
  std::vector<SpeakerVoice> voices(static_cast<size_t>(cfg.speakers));
  for (int s = 0; s < cfg.speakers; ++s) {
    Rng rng = master.fork(mix64(fnv1a64("speaker"), static_cast<uint64_t>(s)));
    voices[static_cast<size_t>(s)] = draw_voice(rng);
  }

  // Training utterances + manifest (with speaker labels; the self-supervised
  // trainer ignores them, probe/fine-tune use them).
  Manifest manifest;
  for (int s = 0; s < cfg.speakers; ++s) {
    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      Rng rng = master.fork(mix64(fnv1a64("train_utt"),
                                  static_cast<uint64_t>(s) * 100003ULL +
                                      static_cast<uint64_t>(u)));
      const double seconds = rng.uniform(cfg.train_min_seconds, cfg.train_max_seconds);
      const Waveform w =
          synth_utterance(voices[static_cast<size_t>(s)], seconds, cfg.sample_rate, rng);
      char name[48];
      std::snprintf(name, sizeof(name), "%s_utt%03d.wav", spk_name(s).c_str(), u);
      const fs::path path = root / "wav" / name;
      save_wav(w, path.string());
      ManifestEntry e;
      e.utterance_id = std::string(name, std::strlen(name) - 4);  // drop .wav
      e.file_path = path.string();
      e.speaker_id = spk_name(s);
      manifest.entries.push_back(std::move(e));
      ++summary.train_utterances;
    }
  }
  summary.manifest_path = (root / "manifest.tsv").string();
  save_manifest(manifest, summary.manifest_path);

  // Channel-corrupted evaluation utterances: every eval file gets its own
  // noise/reverb condition so verification rewards channel-invariant
  // representations the way the full-scale protocol does.
  AugmentPolicy corrupt;
  if (cfg.corrupt_eval && cfg.with_aug_corpus) {
    corrupt.p_noise = 1.0;
    corrupt.p_reverb = cfg.eval_reverb_prob;
    corrupt.noise = load_noise_corpus(summary.noise_dir, cfg.sample_rate);
    for (auto& [name, cat] : corrupt.noise.categories) {
      cat.snr = {cfg.eval_snr_low_db, cfg.eval_snr_high_db};
    }
    corrupt.rir = load_rir_corpus(summary.rir_dir, cfg.sample_rate);
  }

  std::vector<std::vector<std::string>> eval_paths(static_cast<size_t>(cfg.speakers));
  for (int s = 0; s < cfg.speakers; ++s) {
    for (int u = 0; u < cfg.eval_utts_per_speaker; ++u) {
      Rng rng = master.fork(mix64(fnv1a64("eval_utt"),
                                  static_cast<uint64_t>(s) * 100003ULL +
                                      static_cast<uint64_t>(u)));
      const double seconds = rng.uniform(cfg.eval_min_seconds, cfg.eval_max_seconds);
      Waveform w =
          synth_utterance(voices[static_cast<size_t>(s)], seconds, cfg.sample_rate, rng);
      if (cfg.corrupt_eval && cfg.with_aug_corpus) {
        Rng crng = rng.fork(fnv1a64("corrupt"));
        w = apply_policy(w, corrupt, crng);
      }
      char name[48];
      std::snprintf(name, sizeof(name), "%s_eval%02d.wav", spk_name(s).c_str(), u);
      const fs::path path = root / "eval" / name;
      save_wav(w, path.string());
      eval_paths[static_cast<size_t>(s)].push_back(path.string());
      ++summary.eval_utterances;
    }
  }

  // Trial list: all same-speaker pairs form the target pool, cross-speaker
  // pairs the nontarget pool; n_trials/2 drawn from each.
  std::vector<std::pair<std::string, std::string>> target_pool, nontarget_pool;
  for (int s = 0; s < cfg.speakers; ++s) {
    const auto& paths = eval_paths[static_cast<size_t>(s)];
    for (size_t i = 0; i < paths.size(); ++i) {
      for (size_t j = i + 1; j < paths.size(); ++j) {
        target_pool.emplace_back(paths[i], paths[j]);
      }
    }
  }
  for (int s1 = 0; s1 < cfg.speakers; ++s1) {
    for (int s2 = s1 + 1; s2 < cfg.speakers; ++s2) {
      for (const auto& p1 : eval_paths[static_cast<size_t>(s1)]) {
        for (const auto& p2 : eval_paths[static_cast<size_t>(s2)]) {
          nontarget_pool.emplace_back(p1, p2);
        }
      }
    }
  }
  const size_t half = static_cast<size_t>(cfg.n_trials) / 2;
  SSLSV_REQUIRE(target_pool.size() >= half, "synth: only ", target_pool.size(),
                " same-speaker pairs available, need ", half,
                " (raise eval_utts_per_speaker or lower n_trials)");
  SSLSV_REQUIRE(nontarget_pool.size() >= half, "synth: not enough nontarget pairs");

  Rng trial_rng = master.fork(fnv1a64("trials"));
  auto draw = [&trial_rng](std::vector<std::pair<std::string, std::string>>& pool,
                           size_t count) {
    for (size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[trial_rng.uniform_index(i)]);
    }
    pool.resize(count);
  };
  draw(target_pool, half);
  draw(nontarget_pool, half);

  TrialList trials;
  for (const auto& [a, b] : target_pool) trials.trials.push_back({1, a, b});
  for (const auto& [a, b] : nontarget_pool) trials.trials.push_back({0, a, b});
  summary.trials_path = (root / "trials.txt").string();
  save_trial_list(trials, summary.trials_path);
  summary.trials = trials.size();
  return summary;
}

}  // namespace sslsv
