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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "sslsv/augment.hpp"
#include "sslsv/common.hpp"
#include "sslsv/fft.hpp"
#include "testing_util.hpp"

using namespace sslsv;
using testing::TempDir;

namespace {

Waveform make_wave(std::vector<double> samples, int rate = 16000) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = rate;
  return w;
}

double mean_square(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

Waveform random_wave(size_t n, Rng& rng, double amp = 0.3) {
  std::vector<double> x(n);
  for (double& v : x) v = amp * rng.uniform(-1.0, 1.0);
  return make_wave(std::move(x));
}

}  // namespace

TEST_CASE("mix at 0 dB equalizes powers") {
  Rng rng(1);
  const Waveform clean = random_wave(4000, rng);
  const Waveform noise = random_wave(4000, rng, 0.9);
  double gain = 0.0;
  mix_at_snr(clean, noise, 0.0, &gain);
  const double p_clean = mean_square(clean.samples);
  const double p_scaled = gain * gain * mean_square(noise.samples);
  CHECK(p_scaled == doctest::Approx(p_clean).epsilon(1e-12));
}

TEST_CASE("worked example: powers 1 and 4 at 20 dB give gain 0.05") {
  // clean alternates +-1 (power 1), noise alternates +-2 (power 4)
  std::vector<double> c(1000), n(1000);
  for (size_t i = 0; i < c.size(); ++i) {
    c[i] = (i % 2 == 0) ? 1.0 : -1.0;
    n[i] = (i % 2 == 0) ? 2.0 : -2.0;
  }
  double gain = 0.0;
  mix_at_snr(make_wave(c), make_wave(n), 20.0, &gain);
  CHECK(gain == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("measured SNR matches the request within a millidecibel") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform clean = random_wave(3000, rng);
    const Waveform noise = random_wave(3000, rng, rng.uniform(0.05, 1.0));
    const double snr = rng.uniform(-5.0, 25.0);
    double gain = 0.0;
    mix_at_snr(clean, noise, snr, &gain);
    const double measured =
        10.0 * std::log10(mean_square(clean.samples) /
                          (gain * gain * mean_square(noise.samples)));
    CHECK(std::fabs(measured - snr) < 1e-3);
  }
}

TEST_CASE("mixing rejects degenerate signals") {
  const Waveform silent = make_wave(std::vector<double>(100, 0.0));
  Rng rng(3);
  const Waveform live = random_wave(100, rng);
  CHECK_THROWS_WITH_AS(mix_at_snr(silent, live, 10.0),
                       doctest::Contains("zero power"), Error);
  CHECK_THROWS_WITH_AS(mix_at_snr(live, silent, 10.0),
                       doctest::Contains("zero power"), Error);
  CHECK_THROWS_AS(mix_at_snr(live, random_wave(50, rng), 0.0), Error);
}

TEST_CASE("mix clips only when needed") {
  std::vector<double> c(100, 0.9), n(100, 0.9);
  const Waveform out = mix_at_snr(make_wave(c), make_wave(n), 0.0);
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::fabs(v));
  CHECK(peak == doctest::Approx(1.0));
}

TEST_CASE("reverberation with a unit impulse is the identity") {
  Rng rng(4);
  const Waveform x = random_wave(2000, rng);

  SUBCASE("impulse at zero") {
    Waveform rir = make_wave({1.0});
    const Waveform y = reverberate(x, rir);
    REQUIRE(y.size() == x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(std::fabs(y.samples[i] - x.samples[i]) < 1e-12);
    }
  }
  SUBCASE("delayed impulse: alignment cancels the delay") {
    std::vector<double> h(50, 0.0);
    h[37] = 0.8;
    const Waveform y = reverberate(x, make_wave(std::move(h)));
    REQUIRE(y.size() == x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(std::fabs(y.samples[i] - x.samples[i]) < 1e-12);
    }
  }
}

TEST_CASE("fft convolution matches the direct form") {
  Rng rng(5);
  std::vector<double> x(1000), h(100);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : h) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> fast = fft_convolve(x, h);
  const std::vector<double> direct = testing::convolve_oracle(x, h);
  REQUIRE(fast.size() == direct.size());
  for (size_t i = 0; i < fast.size(); ++i) {
    CHECK(std::fabs(fast[i] - direct[i]) < 1e-10);
  }
}

TEST_CASE("reverberation preserves max-abs and rejects a silent rir") {
  Rng rng(6);
  const Waveform x = random_wave(1500, rng);
  std::vector<double> h(200);
  for (double& v : h) v = rng.uniform(-0.2, 0.2);
  h[20] = 1.0;
  const Waveform y = reverberate(x, make_wave(std::move(h)));
  double px = 0.0, py = 0.0;
  for (double v : x.samples) px = std::max(px, std::fabs(v));
  for (double v : y.samples) py = std::max(py, std::fabs(v));
  CHECK(py == doctest::Approx(px).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(reverberate(x, make_wave(std::vector<double>(10, 0.0))),
                       doctest::Contains("all-zero"), Error);
}

namespace {

// A small on-disk corpus: one file per noise category plus two rirs.
struct DiskCorpus {
  TempDir dir{"augcorpus"};
  AugmentPolicy policy;

  explicit DiskCorpus(uint64_t seed) {
    namespace fs = std::filesystem;
    Rng rng(seed);
    for (const char* cat : {"speech", "music", "noise"}) {
      fs::create_directories(dir.path() / "noise" / cat);
      for (int i = 0; i < 2; ++i) {
        const Waveform w = random_wave(8000, rng, 0.4);
        save_wav(w, (dir.path() / "noise" / cat /
                     (std::string(cat) + std::to_string(i) + ".wav")).string());
      }
    }
    fs::create_directories(dir.path() / "rir");
    for (int i = 0; i < 2; ++i) {
      std::vector<double> h(400, 0.0);
      h[30 + 10 * i] = 1.0;
      for (size_t t = 31 + 10 * i; t < h.size(); ++t) {
        h[t] = 0.2 * rng.normal() * std::exp(-static_cast<double>(t) / 100.0);
      }
      save_wav(make_wave(std::move(h)),
               (dir.path() / "rir" / ("r" + std::to_string(i) + ".wav")).string());
    }
    policy.noise = load_noise_corpus((dir.path() / "noise").string());
    policy.rir = load_rir_corpus((dir.path() / "rir").string());
  }
};

}  // namespace

TEST_CASE("apply_policy behavior") {
  DiskCorpus corpus(42);
  Rng rng(10);
  const Waveform x = random_wave(4000, rng);

  SUBCASE("no-op policy returns the input") {
    AugmentPolicy off;
    off.p_noise = 0.0;
    off.p_reverb = 0.0;
    Rng r(1);
    const Waveform y = apply_policy(x, off, r);
    CHECK(y.samples == x.samples);
  }
  SUBCASE("deterministic given the stream") {
    corpus.policy.p_noise = 1.0;
    corpus.policy.p_reverb = 1.0;
    Rng r1(77), r2(77);
    const Waveform y1 = apply_policy(x, corpus.policy, r1);
    const Waveform y2 = apply_policy(x, corpus.policy, r2);
    CHECK(y1.samples == y2.samples);
  }
  SUBCASE("independent streams give distinct views") {
    corpus.policy.p_noise = 1.0;
    corpus.policy.p_reverb = 0.0;
    Rng r1(1), r2(2);
    const Waveform y1 = apply_policy(x, corpus.policy, r1);
    const Waveform y2 = apply_policy(x, corpus.policy, r2);
    CHECK(y1.samples != y2.samples);
  }
  SUBCASE("length and rate never change") {
    corpus.policy.p_noise = 1.0;
    corpus.policy.p_reverb = 1.0;
    Rng r(5);
    for (int i = 0; i < 10; ++i) {
      const Waveform y = apply_policy(x, corpus.policy, r);
      CHECK(y.size() == x.size());
      CHECK(y.sample_rate == x.sample_rate);
    }
  }
  SUBCASE("logged SNR stays inside the category range") {
    corpus.policy.p_noise = 1.0;
    corpus.policy.p_reverb = 1.0;
    Rng r(6);
    for (int i = 0; i < 25; ++i) {
      AugmentLog log;
      apply_policy(x, corpus.policy, r, &log);
      REQUIRE(log.noise_applied);
      const SnrRange range = corpus.policy.noise.categories.at(log.noise_category).snr;
      CHECK(log.snr_db >= range.low_db);
      CHECK(log.snr_db <= range.high_db);
      CHECK(log.noise_gain > 0.0);
    }
  }
  SUBCASE("empty corpus is an error when the branch fires") {
    AugmentPolicy broken;
    broken.p_noise = 1.0;
    Rng r(3);
    CHECK_THROWS_WITH_AS(apply_policy(x, broken, r),
                         doctest::Contains("corpus"), Error);
  }
}

TEST_CASE("noise corpus loader picks up category directories") {
  DiskCorpus corpus(43);
  CHECK(corpus.policy.noise.categories.size() == 3);
  CHECK(corpus.policy.noise.categories.at("speech").snr.low_db == 13.0);
  CHECK(corpus.policy.noise.categories.at("speech").snr.high_db == 20.0);
  CHECK(corpus.policy.noise.categories.at("music").snr.low_db == 5.0);
  CHECK(corpus.policy.noise.categories.at("noise").snr.high_db == 15.0);
  CHECK(corpus.policy.rir.files.size() == 2);

  TempDir empty("empty_corpus");
  CHECK_THROWS_AS(load_noise_corpus(empty.str()), Error);
  CHECK_THROWS_AS(load_rir_corpus(empty.str()), Error);
}
