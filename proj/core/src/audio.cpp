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

#include "sslsv/audio.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "sslsv/common.hpp"

namespace sslsv {

namespace {

constexpr double kInt16Scale = 32768.0;

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

Waveform load_wav(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  SSLSV_REQUIRE(in.good(), "load_wav: cannot open '", path, "'");

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  SSLSV_REQUIRE(bytes.size() >= 44, "load_wav: '", path,
                "' too short to be a WAV file");
  SSLSV_REQUIRE(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                    std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
                "load_wav: '", path, "' is not a RIFF/WAVE file");

  // Walk the chunk list; we need fmt then data.
  bool have_fmt = false;
  uint16_t format_tag = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data_ptr = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const uint32_t chunk_len = read_u32(hdr + 4);
    const size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      SSLSV_REQUIRE(chunk_len >= 16 && body + 16 <= bytes.size(),
                    "load_wav: '", path, "' has a malformed fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format_tag = read_u16(f + 0);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      SSLSV_REQUIRE(body + chunk_len <= bytes.size(), "load_wav: '", path,
                    "' data chunk truncated");
      data_ptr = bytes.data() + body;
      data_len = chunk_len;
      break;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  SSLSV_REQUIRE(have_fmt && data_ptr != nullptr, "load_wav: '", path,
                "' missing fmt or data chunk");
  SSLSV_REQUIRE(format_tag == 1, "load_wav: '", path,
                "' is not uncompressed PCM (format tag ", format_tag, ")");
  SSLSV_REQUIRE(channels == 1, "load_wav: '", path, "' has ", channels,
                " channels; only mono is supported (no silent downmix)");
  SSLSV_REQUIRE(bits == 16, "load_wav: '", path, "' has ", bits,
                "-bit samples; only 16-bit PCM is supported");
  SSLSV_REQUIRE(rate > 0, "load_wav: '", path, "' has zero sample rate");
  if (expected_rate > 0) {
    SSLSV_REQUIRE(static_cast<int>(rate) == expected_rate, "load_wav: '", path,
                  "' has sample rate ", rate, ", expected ", expected_rate,
                  " (resampling is not supported)");
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  const size_t n = data_len / 2;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const int16_t s = static_cast<int16_t>(
        static_cast<uint16_t>(data_ptr[2 * i] | (data_ptr[2 * i + 1] << 8)));
    w.samples[i] = static_cast<double>(s) / kInt16Scale;
  }
  return w;
}

void save_wav(const Waveform& w, const std::string& path) {
  SSLSV_REQUIRE(w.sample_rate > 0, "save_wav: sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  SSLSV_REQUIRE(out.good(), "save_wav: cannot open '", path, "' for writing");

  const uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(w.sample_rate));
  write_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  write_u16(out, 2);                                         // block align
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_len);

  for (double v : w.samples) {
    double q = std::round(v * kInt16Scale);
    if (q > 32767.0) q = 32767.0;
    if (q < -32768.0) q = -32768.0;
    const int16_t s = static_cast<int16_t>(q);
    write_u16(out, static_cast<uint16_t>(s));
  }
  SSLSV_REQUIRE(out.good(), "save_wav: write to '", path, "' failed");
}

Waveform crop(const Waveform& w, size_t start, size_t length) {
  SSLSV_REQUIRE(length > 0, "crop: length must be positive");
  SSLSV_REQUIRE(!w.samples.empty(), "crop: empty waveform");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(length);
  const size_t n = w.samples.size();
  if (start + length <= n) {
    std::copy(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
              w.samples.begin() + static_cast<std::ptrdiff_t>(start + length),
              out.samples.begin());
  } else {
    for (size_t i = 0; i < length; ++i) out.samples[i] = w.samples[(start + i) % n];
  }
  return out;
}

std::pair<Waveform, Waveform> sample_disjoint_pair(const Waveform& w,
                                                   size_t chunk_len, Rng& rng) {
  SSLSV_REQUIRE(chunk_len > 0, "sample_disjoint_pair: chunk_len must be positive");
  SSLSV_REQUIRE(!w.samples.empty(), "sample_disjoint_pair: empty waveform");
  const size_t n = w.samples.size();

  if (n >= 2 * chunk_len) {
    // First start is uniform over positions that still admit a disjoint
    // second placement; skipping the dead band keeps the procedure free of
    // rejection loops. A position a is viable iff a <= n-2c or a >= c.
    const size_t c = chunk_len;
    const size_t last = n - c;                      // max start
    const size_t dead = (n + 1 < 3 * c) ? (3 * c - n - 1) : 0;
    const size_t viable = last + 1 - dead;
    size_t a = rng.uniform_index(viable);
    if (a > n - 2 * c) a += dead;

    const size_t left = (a >= c) ? (a - c + 1) : 0;              // b in [0, a-c]
    const size_t right = (a + 2 * c <= n) ? (n - 2 * c - a + 1) : 0;  // b in [a+c, n-c]
    const size_t j = rng.uniform_index(left + right);
    const size_t b = (j < left) ? j : (a + c + (j - left));
    return {crop(w, a, c), crop(w, b, c)};
  }

  if (n >= chunk_len) {
    // Too short for disjoint chunks: two independent crops that may overlap.
    const size_t a = rng.uniform_index(n - chunk_len + 1);
    const size_t b = rng.uniform_index(n - chunk_len + 1);
    return {crop(w, a, chunk_len), crop(w, b, chunk_len)};
  }

  // Shorter than one chunk: crop the tiled signal at two random phases.
  const size_t a = rng.uniform_index(n);
  const size_t b = rng.uniform_index(n);
  return {crop(w, a, chunk_len), crop(w, b, chunk_len)};
}

bool Manifest::has_labels() const {
  for (const auto& e : entries) {
    if (!e.speaker_id.has_value()) return false;
  }
  return !entries.empty();
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  SSLSV_REQUIRE(in.good(), "load_manifest: cannot open '", path, "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  Manifest m;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    SSLSV_REQUIRE(fields.size() == 2 || fields.size() == 3, "load_manifest: '",
                  path, "' line ", line_no,
                  ": expected 2 or 3 tab-separated fields, got ", fields.size());
    SSLSV_REQUIRE(!fields[0].empty() && !fields[1].empty(), "load_manifest: '",
                  path, "' line ", line_no, ": empty field");
    SSLSV_REQUIRE(seen.insert(fields[0]).second, "load_manifest: '", path,
                  "' line ", line_no, ": duplicate utterance_id '", fields[0],
                  "'");

    ManifestEntry e;
    e.utterance_id = fields[0];
    std::filesystem::path p(fields[1]);
    e.file_path =
        p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
    if (fields.size() == 3 && !fields[2].empty()) e.speaker_id = fields[2];
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path);
  SSLSV_REQUIRE(out.good(), "save_manifest: cannot open '", path,
                "' for writing");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (const auto& e : m.entries) {
    const std::filesystem::path p(e.file_path);
    std::string rel = p.lexically_proximate(base).string();
    // Paths outside the manifest tree stay absolute rather than up-walking.
    if (rel.rfind("..", 0) == 0) rel = p.string();
    out << e.utterance_id << '\t' << rel;
    if (e.speaker_id.has_value()) out << '\t' << *e.speaker_id;
    out << '\n';
  }
  SSLSV_REQUIRE(out.good(), "save_manifest: write to '", path, "' failed");
}

}  // namespace sslsv
