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
// Waveform ingestion and the chunk sampling that feeds two-view training.
// Only 16-bit little-endian mono PCM WAV files are supported; there is no
// resampling, so the pipeline rejects files whose rate differs from the
// configured one.

#ifndef SSLSV_AUDIO_HPP_
#define SSLSV_AUDIO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sslsv/rng.hpp"

namespace sslsv {

// Mono PCM audio. Samples live in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

// Loads a RIFF/WAVE file. Requires PCM (format tag 1), 16-bit, mono.
// If expected_rate > 0, a differing sample rate is a hard error.
Waveform load_wav(const std::string& path, int expected_rate = 0);

// Writes 16-bit mono PCM. Samples are clamped to [-1, 1] and quantized with
// round-to-nearest; a round trip reproduces samples within 1/32768.
void save_wav(const Waveform& w, const std::string& path);

// Returns exactly `length` samples starting at `start`. Reads past the end
// wrap around (repeat padding), so sources shorter than the requested span
// are tiled rather than zero-padded.
Waveform crop(const Waveform& w, size_t start, size_t length);

// Two chunk_len crops of w for the two training views.
//  - duration >= 2*chunk_len: the two sample intervals are disjoint.
//  - chunk_len <= duration < 2*chunk_len: two independent crops (may overlap).
//  - duration < chunk_len: two independent crops of the tiled signal.
std::pair<Waveform, Waveform> sample_disjoint_pair(const Waveform& w,
                                                   size_t chunk_len, Rng& rng);

struct ManifestEntry {
  std::string utterance_id;
  std::string file_path;  // resolved against the manifest's directory
  std::optional<std::string> speaker_id;
};

// Utterance inventory. Speaker labels are optional by construction: the
// self-supervised trainer never reads them.
struct Manifest {
  std::vector<ManifestEntry> entries;

  size_t size() const { return entries.size(); }
  bool has_labels() const;
};

// Parses the tab-separated manifest format:
//   utterance_id<TAB>relative/path.wav<TAB>speaker_id
// The third field is optional; lines starting with '#' are ignored.
// Relative paths are resolved against the manifest file's directory.
Manifest load_manifest(const std::string& path);

void save_manifest(const Manifest& m, const std::string& path);

}  // namespace sslsv

#endif  // SSLSV_AUDIO_HPP_
