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

#include "sslsv/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sslsv/common.hpp"

namespace sslsv {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "infonce") return LossKind::kInfoNce;
  if (s == "barlow") return LossKind::kBarlow;
  if (s == "vicreg") return LossKind::kVicreg;
  if (s == "comp1") return LossKind::kComp1;
  if (s == "comp2") return LossKind::kComp2;
  if (s == "reg_y") return LossKind::kRegY;
  if (s == "reg_z") return LossKind::kRegZ;
  SSLSV_FAIL("config: unknown loss '", s,
             "' (expected infonce|barlow|vicreg|comp1|comp2|reg_y|reg_z)");
}

std::string loss_kind_to_string(LossKind k) {
  switch (k) {
    case LossKind::kInfoNce: return "infonce";
    case LossKind::kBarlow: return "barlow";
    case LossKind::kVicreg: return "vicreg";
    case LossKind::kComp1: return "comp1";
    case LossKind::kComp2: return "comp2";
    case LossKind::kRegY: return "reg_y";
    case LossKind::kRegZ: return "reg_z";
  }
  SSLSV_FAIL("config: bad loss kind");
}

bool loss_uses_projector(LossKind k) {
  return k != LossKind::kRegY;
}

void TrainConfig::validate() const {
  SSLSV_REQUIRE(batch_size >= 2, "config: batch_size must be >= 2 (batch "
                "statistics), got ", batch_size);
  SSLSV_REQUIRE(chunk_seconds > 0.0, "config: chunk_seconds must be positive");
  SSLSV_REQUIRE(max_epochs >= 1, "config: max_epochs must be >= 1");
  SSLSV_REQUIRE(workers >= 1, "config: workers must be >= 1");
  SSLSV_REQUIRE(eval_every >= 0, "config: eval.every must be >= 0");
  SSLSV_REQUIRE(eval_n_crops >= 1, "config: eval.n_crops must be >= 1");
  SSLSV_REQUIRE(patience >= 0, "config: optim.patience must be >= 0");
  SSLSV_REQUIRE(p_noise >= 0.0 && p_noise <= 1.0 && p_reverb >= 0.0 &&
                    p_reverb <= 1.0,
                "config: augment probabilities must be in [0,1]");
  SSLSV_REQUIRE(infonce.tau > 0.0, "config: loss.infonce.tau must be positive");
  SSLSV_REQUIRE(composite_alpha >= 0.0, "config: loss.composite.alpha must be >= 0");
  features.validate();
  model.validate();
  schedule.validate();
  SSLSV_REQUIRE(features.n_mels == model.n_mels,
                "config: features.n_mels (", features.n_mels,
                ") and model.n_mels (", model.n_mels, ") must agree");
}

size_t TrainConfig::chunk_samples() const {
  return static_cast<size_t>(chunk_seconds * features.sample_rate + 0.5);
}

AugmentPolicy TrainConfig::make_policy() const {
  AugmentPolicy policy;
  policy.p_noise = noise_dir.empty() ? 0.0 : p_noise;
  policy.p_reverb = rir_dir.empty() ? 0.0 : p_reverb;
  if (!noise_dir.empty()) {
    policy.noise = load_noise_corpus(noise_dir, features.sample_rate);
    auto set_range = [&policy](const char* name, SnrRange r) {
      auto it = policy.noise.categories.find(name);
      if (it != policy.noise.categories.end()) it->second.snr = r;
    };
    set_range("speech", snr_speech);
    set_range("music", snr_music);
    set_range("noise", snr_noise);
  }
  if (!rir_dir.empty()) policy.rir = load_rir_corpus(rir_dir, features.sample_rate);
  policy.validate();
  return policy;
}

namespace {

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int out = std::stoi(v, &pos);
    SSLSV_REQUIRE(pos == v.size(), "config: key '", key,
                  "' has trailing characters in value '", v, "'");
    return out;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    SSLSV_FAIL("config: key '", key, "' expects an integer, got '", v, "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t out = std::stoull(v, &pos);
    SSLSV_REQUIRE(pos == v.size(), "config: key '", key,
                  "' has trailing characters in value '", v, "'");
    return out;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    SSLSV_FAIL("config: key '", key, "' expects an unsigned integer, got '", v, "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    SSLSV_REQUIRE(pos == v.size(), "config: key '", key,
                  "' has trailing characters in value '", v, "'");
    return out;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    SSLSV_FAIL("config: key '", key, "' expects a number, got '", v, "'");
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  SSLSV_REQUIRE(!out.empty(), "config: key '", key, "' expects a comma list");
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

using Setter = std::function<void(TrainConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = {
      {"batch_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_int(k, v); }},
      {"chunk_seconds", [](TrainConfig& c, const std::string& k, const std::string& v) { c.chunk_seconds = parse_double(k, v); }},
      {"max_epochs", [](TrainConfig& c, const std::string& k, const std::string& v) { c.max_epochs = parse_int(k, v); }},
      {"loss", [](TrainConfig& c, const std::string&, const std::string& v) { c.loss = loss_kind_from_string(v); }},
      {"seed", [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); }},
      {"workers", [](TrainConfig& c, const std::string& k, const std::string& v) { c.workers = parse_int(k, v); }},
      {"eval.every", [](TrainConfig& c, const std::string& k, const std::string& v) { c.eval_every = parse_int(k, v); }},
      {"eval.n_crops", [](TrainConfig& c, const std::string& k, const std::string& v) { c.eval_n_crops = parse_int(k, v); }},
      {"augment.p_noise", [](TrainConfig& c, const std::string& k, const std::string& v) { c.p_noise = parse_double(k, v); }},
      {"augment.p_reverb", [](TrainConfig& c, const std::string& k, const std::string& v) { c.p_reverb = parse_double(k, v); }},
      {"augment.noise_dir", [](TrainConfig& c, const std::string&, const std::string& v) { c.noise_dir = v; }},
      {"augment.rir_dir", [](TrainConfig& c, const std::string&, const std::string& v) { c.rir_dir = v; }},
      {"augment.snr_speech_low", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_speech.low_db = parse_double(k, v); }},
      {"augment.snr_speech_high", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_speech.high_db = parse_double(k, v); }},
      {"augment.snr_music_low", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_music.low_db = parse_double(k, v); }},
      {"augment.snr_music_high", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_music.high_db = parse_double(k, v); }},
      {"augment.snr_noise_low", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_noise.low_db = parse_double(k, v); }},
      {"augment.snr_noise_high", [](TrainConfig& c, const std::string& k, const std::string& v) { c.snr_noise.high_db = parse_double(k, v); }},
      {"features.sample_rate", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.sample_rate = parse_int(k, v); }},
      {"features.win_length", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.win_length = parse_int(k, v); }},
      {"features.hop_length", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.hop_length = parse_int(k, v); }},
      {"features.n_fft", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.n_fft = parse_int(k, v); }},
      {"features.n_mels", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.features.n_mels = parse_int(k, v);
         c.model.n_mels = c.features.n_mels;
       }},
      {"features.f_min", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.f_min = parse_double(k, v); }},
      {"features.f_max", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.f_max = parse_double(k, v); }},
      {"features.log_floor", [](TrainConfig& c, const std::string& k, const std::string& v) { c.features.log_floor = parse_double(k, v); }},
      {"model.encoder_hidden", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder_hidden = parse_int_list(k, v); }},
      {"model.rep_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.rep_dim = parse_int(k, v); }},
      {"model.sap_hidden", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.sap_hidden = parse_int(k, v); }},
      {"model.proj_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.proj_dim = parse_int(k, v); }},
      {"loss.infonce.tau", [](TrainConfig& c, const std::string& k, const std::string& v) { c.infonce.tau = parse_double(k, v); }},
      {"loss.infonce.denominator", [](TrainConfig& c, const std::string& k, const std::string& v) {
         if (v == "cross_view") {
           c.infonce.denominator = InfoNceConfig::Denominator::kCrossView;
         } else if (v == "literal_within_view") {
           c.infonce.denominator = InfoNceConfig::Denominator::kLiteralWithinView;
         } else {
           SSLSV_FAIL("config: key '", k,
                      "' expects cross_view|literal_within_view, got '", v, "'");
         }
       }},
      {"loss.vicreg.lambda", [](TrainConfig& c, const std::string& k, const std::string& v) { c.vicreg.lambda = parse_double(k, v); }},
      {"loss.vicreg.mu", [](TrainConfig& c, const std::string& k, const std::string& v) { c.vicreg.mu = parse_double(k, v); }},
      {"loss.vicreg.nu", [](TrainConfig& c, const std::string& k, const std::string& v) { c.vicreg.nu = parse_double(k, v); }},
      {"loss.vicreg.eps_var", [](TrainConfig& c, const std::string& k, const std::string& v) { c.vicreg.eps_var = parse_double(k, v); }},
      {"loss.barlow.lambda", [](TrainConfig& c, const std::string& k, const std::string& v) { c.barlow.lambda = parse_double(k, v); }},
      {"loss.barlow.eps_std", [](TrainConfig& c, const std::string& k, const std::string& v) { c.barlow.eps_std = parse_double(k, v); }},
      {"loss.composite.alpha", [](TrainConfig& c, const std::string& k, const std::string& v) { c.composite_alpha = parse_double(k, v); }},
      {"optim.lr", [](TrainConfig& c, const std::string& k, const std::string& v) { c.schedule.initial = parse_double(k, v); }},
      {"optim.decay_factor", [](TrainConfig& c, const std::string& k, const std::string& v) { c.schedule.decay_factor = parse_double(k, v); }},
      {"optim.decay_every", [](TrainConfig& c, const std::string& k, const std::string& v) { c.schedule.decay_every = parse_int(k, v); }},
      {"optim.patience", [](TrainConfig& c, const std::string& k, const std::string& v) { c.patience = parse_int(k, v); }},
  };
  return table;
}

std::string hidden_to_string(const std::vector<int>& hidden) {
  std::string out;
  for (size_t i = 0; i < hidden.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(hidden[i]);
  }
  return out;
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    SSLSV_REQUIRE(eq != std::string::npos, "config: line ", line_no,
                  " is not a `key = value` assignment: '", stripped, "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = key_table().find(key);
    SSLSV_REQUIRE(it != key_table().end(), "config: unknown key '", key,
                  "' on line ", line_no);
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  SSLSV_REQUIRE(in.good(), "load_config_file: cannot open '", path, "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "batch_size = " << cfg.batch_size << '\n'
      << "chunk_seconds = " << cfg.chunk_seconds << '\n'
      << "max_epochs = " << cfg.max_epochs << '\n'
      << "loss = " << loss_kind_to_string(cfg.loss) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "workers = " << cfg.workers << '\n'
      << "eval.every = " << cfg.eval_every << '\n'
      << "eval.n_crops = " << cfg.eval_n_crops << '\n'
      << "augment.p_noise = " << cfg.p_noise << '\n'
      << "augment.p_reverb = " << cfg.p_reverb << '\n'
      << "augment.noise_dir = " << cfg.noise_dir << '\n'
      << "augment.rir_dir = " << cfg.rir_dir << '\n'
      << "augment.snr_speech_low = " << cfg.snr_speech.low_db << '\n'
      << "augment.snr_speech_high = " << cfg.snr_speech.high_db << '\n'
      << "augment.snr_music_low = " << cfg.snr_music.low_db << '\n'
      << "augment.snr_music_high = " << cfg.snr_music.high_db << '\n'
      << "augment.snr_noise_low = " << cfg.snr_noise.low_db << '\n'
      << "augment.snr_noise_high = " << cfg.snr_noise.high_db << '\n'
      << "features.sample_rate = " << cfg.features.sample_rate << '\n'
      << "features.win_length = " << cfg.features.win_length << '\n'
      << "features.hop_length = " << cfg.features.hop_length << '\n'
      << "features.n_fft = " << cfg.features.n_fft << '\n'
      << "features.n_mels = " << cfg.features.n_mels << '\n'
      << "features.f_min = " << cfg.features.f_min << '\n'
      << "features.f_max = " << cfg.features.f_max << '\n'
      << "features.log_floor = " << cfg.features.log_floor << '\n'
      << "model.encoder_hidden = " << hidden_to_string(cfg.model.encoder_hidden) << '\n'
      << "model.rep_dim = " << cfg.model.rep_dim << '\n'
      << "model.sap_hidden = " << cfg.model.sap_hidden << '\n'
      << "model.proj_dim = " << cfg.model.proj_dim << '\n'
      << "loss.infonce.tau = " << cfg.infonce.tau << '\n'
      << "loss.infonce.denominator = "
      << (cfg.infonce.denominator == InfoNceConfig::Denominator::kCrossView
              ? "cross_view"
              : "literal_within_view")
      << '\n'
      << "loss.vicreg.lambda = " << cfg.vicreg.lambda << '\n'
      << "loss.vicreg.mu = " << cfg.vicreg.mu << '\n'
      << "loss.vicreg.nu = " << cfg.vicreg.nu << '\n'
      << "loss.vicreg.eps_var = " << cfg.vicreg.eps_var << '\n'
      << "loss.barlow.lambda = " << cfg.barlow.lambda << '\n'
      << "loss.barlow.eps_std = " << cfg.barlow.eps_std << '\n'
      << "loss.composite.alpha = " << cfg.composite_alpha << '\n'
      << "optim.lr = " << cfg.schedule.initial << '\n'
      << "optim.decay_factor = " << cfg.schedule.decay_factor << '\n'
      << "optim.decay_every = " << cfg.schedule.decay_every << '\n'
      << "optim.patience = " << cfg.patience << '\n';
  return out.str();
}

uint64_t config_hash(const TrainConfig& cfg) {
  return fnv1a64(config_to_text(cfg));
}

}  // namespace sslsv
