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

#include <cstring>
#include <fstream>

#include "sslsv/audio.hpp"
#include "sslsv/common.hpp"
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

// Hand-built WAV with arbitrary fmt fields, for the error paths.
void write_raw_wav(const std::string& path, uint16_t format_tag,
                   uint16_t channels, uint32_t rate, uint16_t bits,
                   const std::vector<int16_t>& data) {
  std::ofstream out(path, std::ios::binary);
  auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  const uint32_t data_len = static_cast<uint32_t>(data.size() * 2);
  out.write("RIFF", 4);
  u32(36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(format_tag);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<uint16_t>(channels * bits / 8));
  u16(bits);
  out.write("data", 4);
  u32(data_len);
  out.write(reinterpret_cast<const char*>(data.data()), data_len);
}

}  // namespace

TEST_CASE("wav int16 scaling") {
  TempDir dir("wav_scale");
  write_raw_wav(dir.str("a.wav"), 1, 1, 16000, 16, {16384, 0, -32768});
  const Waveform w = load_wav(dir.str("a.wav"));
  CHECK(w.sample_rate == 16000);
  REQUIRE(w.size() == 3);
  CHECK(w.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.samples[1] == 0.0);
  CHECK(w.samples[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("wav duration from header rate") {
  TempDir dir("wav_dur");
  save_wav(make_wave(std::vector<double>(32000, 0.1)), dir.str("two_sec.wav"));
  const Waveform w = load_wav(dir.str("two_sec.wav"));
  CHECK(w.duration_seconds() == doctest::Approx(2.0));
}

TEST_CASE("wav round trip stays within one quantization step") {
  TempDir dir("wav_rt");
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> samples(1000);
    for (double& v : samples) v = rng.uniform(-1.0, 1.0);
    const Waveform w = make_wave(samples);
    save_wav(w, dir.str("t.wav"));
    const Waveform back = load_wav(dir.str("t.wav"));
    REQUIRE(back.size() == w.size());
    for (size_t i = 0; i < w.size(); ++i) {
      CHECK(std::fabs(back.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
    }
  }
}

TEST_CASE("wav full scale clamps to 32767") {
  TempDir dir("wav_clamp");
  save_wav(make_wave({1.0, -1.0}), dir.str("c.wav"));
  const Waveform w = load_wav(dir.str("c.wav"));
  CHECK(w.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(w.samples[1] == doctest::Approx(-1.0));
}

TEST_CASE("empty waveform round trips") {
  TempDir dir("wav_empty");
  save_wav(make_wave({}), dir.str("e.wav"));
  const Waveform w = load_wav(dir.str("e.wav"));
  CHECK(w.size() == 0);
  CHECK(w.sample_rate == 16000);
}

TEST_CASE("wav loader rejects bad inputs") {
  TempDir dir("wav_bad");
  CHECK_THROWS_AS(load_wav(dir.str("missing.wav")), Error);

  write_raw_wav(dir.str("stereo.wav"), 1, 2, 16000, 16, {0, 0});
  CHECK_THROWS_WITH_AS(load_wav(dir.str("stereo.wav")),
                       doctest::Contains("channels"), Error);

  write_raw_wav(dir.str("alaw.wav"), 6, 1, 16000, 16, {0});
  CHECK_THROWS_WITH_AS(load_wav(dir.str("alaw.wav")),
                       doctest::Contains("PCM"), Error);

  write_raw_wav(dir.str("low.wav"), 1, 1, 8000, 16, {0});
  CHECK_THROWS_WITH_AS(load_wav(dir.str("low.wav"), 16000),
                       doctest::Contains("sample rate"), Error);

  std::ofstream junk(dir.str("junk.wav"), std::ios::binary);
  junk << "not a wav at all";
  junk.close();
  CHECK_THROWS_AS(load_wav(dir.str("junk.wav")), Error);
}

TEST_CASE("crop slices and tiles") {
  std::vector<double> ramp(64000);
  for (size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 64000.0;
  const Waveform w = make_wave(ramp);

  SUBCASE("prefix") {
    const Waveform c = crop(w, 0, 32000);
    REQUIRE(c.size() == 32000);
    CHECK(c.samples[0] == w.samples[0]);
    CHECK(c.samples[31999] == w.samples[31999]);
  }
  SUBCASE("second half of a 2 s file") {
    const Waveform half = crop(make_wave(std::vector<double>(
                                    w.samples.begin(), w.samples.begin() + 32000)),
                                16000, 16000);
    CHECK(half.samples[0] == w.samples[16000]);
    CHECK(half.samples[15999] == w.samples[31999]);
  }
  SUBCASE("tiling a short source") {
    const Waveform one = make_wave(std::vector<double>(w.samples.begin(),
                                                       w.samples.begin() + 16000));
    const Waveform two = crop(one, 0, 32000);
    REQUIRE(two.size() == 32000);
    for (size_t i = 0; i < 16000; ++i) {
      CHECK(two.samples[i] == one.samples[i]);
      CHECK(two.samples[16000 + i] == one.samples[i]);
    }
  }
  SUBCASE("idempotent under identical calls") {
    const Waveform a = crop(w, 123, 5000);
    const Waveform b = crop(w, 123, 5000);
    CHECK(a.samples == b.samples);
  }
  SUBCASE("zero length is an error") {
    CHECK_THROWS_AS(crop(w, 0, 0), Error);
  }
}

TEST_CASE("disjoint pair sampling never overlaps when long enough") {
  const size_t chunk = 2000;
  const Waveform w = make_wave(std::vector<double>(10000, 0.0));
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    // Re-derive the intervals by instrumenting through a copy of the stream:
    // identical draws, so reconstruct starts from the crops via content.
    std::vector<double> tagged(10000);
    for (size_t t = 0; t < tagged.size(); ++t) tagged[t] = static_cast<double>(t);
    const Waveform ww = make_wave(tagged);
    auto [a, b] = sample_disjoint_pair(ww, chunk, rng);
    const size_t start_a = static_cast<size_t>(a.samples[0]);
    const size_t start_b = static_cast<size_t>(b.samples[0]);
    const bool disjoint =
        start_a + chunk <= start_b || start_b + chunk <= start_a;
    REQUIRE(disjoint);
    // crops must be contiguous slices
    CHECK(a.samples[chunk - 1] == doctest::Approx(start_a + chunk - 1.0));
    CHECK(b.samples[chunk - 1] == doctest::Approx(start_b + chunk - 1.0));
  }
}

TEST_CASE("exactly double-length utterance yields the two halves") {
  // All disjoint placements at sample granularity lie in {[0,c), [c,2c)}.
  const size_t chunk = 500;
  std::vector<double> tagged(2 * chunk);
  for (size_t t = 0; t < tagged.size(); ++t) tagged[t] = static_cast<double>(t);
  const Waveform w = make_wave(tagged);
  Rng rng(7);
  bool saw_first = false, saw_second = false;
  for (int i = 0; i < 200; ++i) {
    auto [a, b] = sample_disjoint_pair(w, chunk, rng);
    const size_t sa = static_cast<size_t>(a.samples[0]);
    const size_t sb = static_cast<size_t>(b.samples[0]);
    CHECK((sa == 0 || sa == chunk));
    CHECK((sb == 0 || sb == chunk));
    CHECK(sa != sb);
    saw_first = saw_first || sa == 0;
    saw_second = saw_second || sa == chunk;
  }
  CHECK(saw_first);
  CHECK(saw_second);
}

TEST_CASE("short utterances fall back to independent crops") {
  Rng rng(3);
  SUBCASE("between one and two chunks: overlap allowed, exact length") {
    const Waveform w = make_wave(std::vector<double>(3000, 0.25));
    auto [a, b] = sample_disjoint_pair(w, 2000, rng);
    CHECK(a.size() == 2000);
    CHECK(b.size() == 2000);
  }
  SUBCASE("shorter than one chunk: tiled") {
    const Waveform w = make_wave(std::vector<double>(1500, 0.25));
    auto [a, b] = sample_disjoint_pair(w, 2000, rng);
    CHECK(a.size() == 2000);
    CHECK(b.size() == 2000);
  }
}

TEST_CASE("manifest parsing") {
  TempDir dir("manifest");
  {
    std::ofstream out(dir.str("manifest.tsv"));
    out << "# comment line\n"
        << "utt1\twav/a.wav\tspk1\n"
        << "utt2\twav/b.wav\n"
        << "\n"
        << "utt3\t/abs/c.wav\tspk2\n";
  }
  const Manifest m = load_manifest(dir.str("manifest.tsv"));
  REQUIRE(m.size() == 3);
  CHECK(m.entries[0].utterance_id == "utt1");
  CHECK(m.entries[0].file_path == dir.str("wav/a.wav"));
  CHECK(m.entries[0].speaker_id == "spk1");
  CHECK_FALSE(m.entries[1].speaker_id.has_value());
  CHECK(m.entries[2].file_path == "/abs/c.wav");
  CHECK_FALSE(m.has_labels());  // utt2 lacks one

  SUBCASE("duplicate utterance ids rejected") {
    std::ofstream out(dir.str("dup.tsv"));
    out << "u\ta.wav\nu\tb.wav\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_manifest(dir.str("dup.tsv")),
                         doctest::Contains("duplicate"), Error);
  }
  SUBCASE("save and reload") {
    save_manifest(m, dir.str("copy.tsv"));
    const Manifest back = load_manifest(dir.str("copy.tsv"));
    REQUIRE(back.size() == m.size());
    for (size_t i = 0; i < m.size(); ++i) {
      CHECK(back.entries[i].utterance_id == m.entries[i].utterance_id);
      CHECK(back.entries[i].file_path == m.entries[i].file_path);
      CHECK(back.entries[i].speaker_id == m.entries[i].speaker_id);
    }
  }
}
