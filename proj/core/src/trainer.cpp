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

#include "sslsv/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "sslsv/serialize.hpp"

namespace sslsv {

namespace {

constexpr char kCkptMagic[8] = {'S', 'S', 'L', 'S', 'V', 'C', 'K', '1'};
constexpr uint32_t kCkptVersion = 1;

// Mean over dimensions of the per-dimension sample std across both views.
double embedding_std(const Tensor2& a, const Tensor2& b) {
  const size_t n = a.rows + b.rows;
  const size_t d = a.cols;
  double acc = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < a.rows; ++i) mean += a.at(i, j);
    for (size_t i = 0; i < b.rows; ++i) mean += b.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < a.rows; ++i) {
      const double t = a.at(i, j) - mean;
      var += t * t;
    }
    for (size_t i = 0; i < b.rows; ++i) {
      const double t = b.at(i, j) - mean;
      var += t * t;
    }
    var /= static_cast<double>(n - 1);
    acc += std::sqrt(var);
  }
  return acc / static_cast<double>(d);
}

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  }
}

}  // namespace

void write_metrics_tsv(const TrainMetrics& metrics, const std::string& path) {
  std::ofstream out(path);
  SSLSV_REQUIRE(out.good(), "write_metrics_tsv: cannot open '", path, "'");
  out.precision(10);
  out << "epoch\tloss";
  if (!metrics.rows.empty()) {
    for (const auto& t : metrics.rows.front().terms) out << "\tterm:" << t.name;
  }
  out << "\temb_std\teval_eer\teval_mindcf\tlr\tseconds\n";
  for (const auto& r : metrics.rows) {
    out << r.epoch << '\t' << r.loss;
    for (const auto& t : r.terms) out << '\t' << t.value;
    out << '\t' << r.emb_std << '\t';
    if (r.has_eval) {
      out << r.eval_eer << '\t' << r.eval_min_dcf;
    } else {
      out << "nan\tnan";
    }
    out << '\t' << r.lr << '\t' << r.seconds << '\n';
  }
  SSLSV_REQUIRE(out.good(), "write_metrics_tsv: write failed");
}

Trainer::Trainer(TrainConfig cfg, Manifest manifest)
    : cfg_(std::move(cfg)), manifest_(std::move(manifest)) {
  cfg_.validate();
  SSLSV_REQUIRE(!manifest_.entries.empty(), "trainer: empty manifest");
  policy_ = cfg_.make_policy();
  Rng rng(mix64(cfg_.seed, fnv1a64("model_init")));
  model_.init(cfg_.model, rng);
  adam_.init(model_.num_parameters());
  early_stop_.patience = cfg_.patience;
  best_eer_ = std::numeric_limits<double>::infinity();
}

void Trainer::set_trials(TrialList trials) {
  SSLSV_REQUIRE(!trials.trials.empty(), "trainer: empty trial list");
  trials_ = std::move(trials);
  has_trials_ = true;
}

void Trainer::set_out_dir(std::string dir) {
  out_dir_ = std::move(dir);
  if (!out_dir_.empty()) std::filesystem::create_directories(out_dir_);
}

const Waveform& Trainer::wav_for(const ManifestEntry& entry) {
  auto it = wav_cache_.find(entry.file_path);
  if (it != wav_cache_.end()) return it->second;
  Waveform w = load_wav(entry.file_path, cfg_.features.sample_rate);
  return wav_cache_.emplace(entry.file_path, std::move(w)).first->second;
}

std::pair<FeatureBatch, FeatureBatch> Trainer::build_batch(
    const std::vector<size_t>& items, int epoch) {
  SSLSV_REQUIRE(!items.empty(), "build_batch: no items");
  const size_t chunk = cfg_.chunk_samples();
  const size_t t_frames = cfg_.features.num_frames(chunk);
  const size_t n_mels = static_cast<size_t>(cfg_.features.n_mels);

  // Load serially so the parallel phase only reads shared state.
  std::vector<const Waveform*> wavs(items.size());
  for (size_t b = 0; b < items.size(); ++b) {
    SSLSV_REQUIRE(items[b] < manifest_.size(), "build_batch: item out of range");
    wavs[b] = &wav_for(manifest_.entries[items[b]]);
  }

  FeatureBatch va, vb;
  va.reserve(items.size(), t_frames, n_mels);
  vb.reserve(items.size(), t_frames, n_mels);

  auto process = [&](size_t b) {
    const ManifestEntry& entry = manifest_.entries[items[b]];
    Rng base(item_stream_key(cfg_.seed, static_cast<uint64_t>(epoch),
                             entry.utterance_id));
    auto [c1, c2] = sample_disjoint_pair(*wavs[b], chunk, base);
    Rng r1 = base.fork(1);
    Rng r2 = base.fork(2);
    const Waveform w1 = apply_policy(c1, policy_, r1);
    const Waveform w2 = apply_policy(c2, policy_, r2);
    va.set_item(b, instance_mvn(log_mel(w1, cfg_.features)));
    vb.set_item(b, instance_mvn(log_mel(w2, cfg_.features)));
  };

  const size_t workers =
      std::min<size_t>(static_cast<size_t>(cfg_.workers), items.size());
  if (workers <= 1) {
    for (size_t b = 0; b < items.size(); ++b) process(b);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (size_t b = w; b < items.size(); b += workers) process(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return {std::move(va), std::move(vb)};
}

std::pair<FeatureBatch, FeatureBatch> Trainer::build_batch(Rng& rng, int epoch) {
  SSLSV_REQUIRE(manifest_.size() >= static_cast<size_t>(cfg_.batch_size),
                "build_batch: manifest has ", manifest_.size(),
                " utterances, need >= batch_size = ", cfg_.batch_size);
  std::vector<size_t> all(manifest_.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  shuffle_indices(all, rng);
  all.resize(static_cast<size_t>(cfg_.batch_size));
  return build_batch(all, epoch);
}

StepStats Trainer::train_step(const FeatureBatch& view_a,
                              const FeatureBatch& view_b, double lr) {
  SSLSV_REQUIRE(view_a.num_items == view_b.num_items,
                "train_step: view batch sizes differ");

  Model::EncoderCache enc_a, enc_b;
  const Tensor2 y = model_.encoder_forward(view_a, &enc_a);
  const Tensor2 yp = model_.encoder_forward(view_b, &enc_b);

  const bool use_z = loss_uses_projector(cfg_.loss);
  Tensor2 z, zp;
  Model::ProjectorCache proj_a, proj_b;
  if (use_z) {
    z = model_.projector_forward(y, /*train=*/true, &proj_a);
    zp = model_.projector_forward(yp, /*train=*/true, &proj_b);
  }

  const CompositeConfig composite{cfg_.composite_alpha, cfg_.infonce, cfg_.vicreg};
  double value = 0.0;
  std::vector<LossTerm> terms;
  Tensor2 dy, dyp, dz, dzp;
  switch (cfg_.loss) {
    case LossKind::kInfoNce: {
      LossOutput out = info_nce(z, zp, cfg_.infonce);
      value = out.value;
      terms = std::move(out.terms);
      dz = std::move(out.grad_a);
      dzp = std::move(out.grad_b);
      break;
    }
    case LossKind::kBarlow: {
      LossOutput out = barlow_twins(z, zp, cfg_.barlow);
      value = out.value;
      terms = std::move(out.terms);
      dz = std::move(out.grad_a);
      dzp = std::move(out.grad_b);
      break;
    }
    case LossKind::kVicreg: {
      LossOutput out = vicreg(z, zp, cfg_.vicreg);
      value = out.value;
      terms = std::move(out.terms);
      dz = std::move(out.grad_a);
      dzp = std::move(out.grad_b);
      break;
    }
    case LossKind::kComp1: {
      CompositeOutput out = comp1(y, yp, z, zp, composite);
      value = out.value;
      terms = std::move(out.terms);
      dy = std::move(out.grad_y);
      dyp = std::move(out.grad_yp);
      dz = std::move(out.grad_z);
      dzp = std::move(out.grad_zp);
      break;
    }
    case LossKind::kComp2: {
      CompositeOutput out = comp2(y, yp, z, zp, composite);
      value = out.value;
      terms = std::move(out.terms);
      dy = std::move(out.grad_y);
      dyp = std::move(out.grad_yp);
      dz = std::move(out.grad_z);
      dzp = std::move(out.grad_zp);
      break;
    }
    case LossKind::kRegY: {
      LossOutput out = reg_infonce_vicreg(y, yp, composite);
      value = out.value;
      terms = std::move(out.terms);
      dy = std::move(out.grad_a);
      dyp = std::move(out.grad_b);
      break;
    }
    case LossKind::kRegZ: {
      LossOutput out = reg_infonce_vicreg(z, zp, composite);
      value = out.value;
      terms = std::move(out.terms);
      dz = std::move(out.grad_a);
      dzp = std::move(out.grad_b);
      break;
    }
  }

  if (!std::isfinite(value)) {
    std::string dump;
    for (const auto& t : terms) {
      dump += detail::str_cat(" ", t.name, "=", t.value);
    }
    SSLSV_FAIL("train_step: non-finite loss at epoch ", epoch_, ";", dump);
  }

  // Both views accumulate into the single shared gradient set. The Y-stage
  // gradient is the sum of the direct Y-loss gradient and the one chained
  // back through the projector.
  model_.zero_grad();
  if (dz.size() != 0) {
    Tensor2 from_proj_a = model_.projector_backward(proj_a, dz);
    Tensor2 from_proj_b = model_.projector_backward(proj_b, dzp);
    if (dy.size() == 0) {
      dy = std::move(from_proj_a);
      dyp = std::move(from_proj_b);
    } else {
      add_inplace(dy, from_proj_a);
      add_inplace(dyp, from_proj_b);
    }
  }
  model_.encoder_backward(enc_a, dy);
  model_.encoder_backward(enc_b, dyp);
  adam_step(model_.parameters(), adam_, lr);

  StepStats stats;
  stats.loss = value;
  stats.terms = std::move(terms);
  stats.emb_std = use_z ? embedding_std(z, zp) : embedding_std(y, yp);
  return stats;
}

void Trainer::evaluate_and_update(MetricsRow& row) {
  auto [scores, result] =
      run_trials(model_, trials_, cfg_.features, cfg_.chunk_samples(),
                 cfg_.eval_n_crops);
  (void)scores;
  row.has_eval = true;
  row.eval_eer = result.eer_percent;
  row.eval_min_dcf = result.min_dcf;
  if (result.eer_percent < best_eer_) {
    best_eer_ = result.eer_percent;
    best_model_ = model_;
    has_best_ = true;
    if (!out_dir_.empty()) {
      best_model_.save((std::filesystem::path(out_dir_) / "model_best.mdl").string());
    }
  }
  if (early_stop_.update(result.eer_percent) == EarlyStop::Decision::kStop) {
    stopped_early_ = true;
  }
}

void Trainer::fit() { fit_until(cfg_.max_epochs); }

void Trainer::override_max_epochs(int max_epochs) {
  SSLSV_REQUIRE(max_epochs >= 1, "override_max_epochs: must be >= 1");
  cfg_.max_epochs = max_epochs;
}

void Trainer::fit_until(int epoch_end) {
  epoch_end = std::min(epoch_end, cfg_.max_epochs);
  if (!out_dir_.empty()) {
    std::ofstream cfg_out(std::filesystem::path(out_dir_) / "config.resolved");
    cfg_out << config_to_text(cfg_);
  }

  for (int epoch = epoch_; epoch < epoch_end; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at_epoch(cfg_.schedule, epoch);

    std::vector<size_t> order(manifest_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix64(mix64(cfg_.seed, fnv1a64("epoch_shuffle")),
                          static_cast<uint64_t>(epoch)));
    shuffle_indices(order, shuffle_rng);

    MetricsRow row;
    row.epoch = epoch;
    row.lr = lr;
    size_t steps = 0;
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(cfg_.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg_.batch_size));
      if (end - begin < 2) break;  // batch statistics need >= 2 items
      const std::vector<size_t> items(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
      auto [va, vb] = build_batch(items, epoch);
      const StepStats stats = train_step(va, vb, lr);
      row.loss += stats.loss;
      row.emb_std += stats.emb_std;
      if (row.terms.empty()) {
        row.terms = stats.terms;
      } else {
        for (size_t i = 0; i < row.terms.size(); ++i) {
          row.terms[i].value += stats.terms[i].value;
        }
      }
      ++steps;
    }
    SSLSV_REQUIRE(steps > 0, "fit: no full batch could be formed (manifest of ",
                  manifest_.size(), " items, batch_size ", cfg_.batch_size, ")");
    row.loss /= static_cast<double>(steps);
    row.emb_std /= static_cast<double>(steps);
    for (auto& t : row.terms) t.value /= static_cast<double>(steps);
    row.steps = static_cast<int>(steps);

    if (has_trials_ && cfg_.eval_every > 0 && (epoch + 1) % cfg_.eval_every == 0) {
      evaluate_and_update(row);
    }

    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0).count();
    metrics_.rows.push_back(row);
    epoch_ = epoch + 1;

    if (!out_dir_.empty()) {
      write_metrics_tsv(metrics_, (std::filesystem::path(out_dir_) / "metrics.tsv").string());
      save_checkpoint((std::filesystem::path(out_dir_) / "last.ckpt").string());
    }
    if (stopped_early_) break;
  }

  if (!out_dir_.empty()) {
    model_.save((std::filesystem::path(out_dir_) / "model_last.mdl").string());
    if (!has_best_) {
      model_.save((std::filesystem::path(out_dir_) / "model_best.mdl").string());
    }
  }
}

void Trainer::save_checkpoint(const std::string& path) const {
  ByteWriter w;
  w.raw(kCkptMagic, sizeof(kCkptMagic));
  w.u32(kCkptVersion);
  const std::string cfg_text = config_to_text(cfg_);
  w.str(cfg_text);
  w.u64(config_hash(cfg_));
  w.u64(static_cast<uint64_t>(epoch_));

  const std::vector<uint8_t> model_bytes = model_.serialize();
  w.u32(static_cast<uint32_t>(model_bytes.size()));
  w.raw(model_bytes.data(), model_bytes.size());

  w.u8(has_best_ ? 1 : 0);
  if (has_best_) {
    const std::vector<uint8_t> best_bytes = best_model_.serialize();
    w.u32(static_cast<uint32_t>(best_bytes.size()));
    w.raw(best_bytes.data(), best_bytes.size());
    w.f64(best_eer_);
  }

  w.f64(early_stop_.best_metric);
  w.u32(static_cast<uint32_t>(early_stop_.epochs_since_best));

  w.u64(static_cast<uint64_t>(adam_.t));
  w.u64(adam_.size());
  w.f64_array(adam_.m.data(), adam_.m.size());
  w.f64_array(adam_.v.data(), adam_.v.size());

  w.u32(static_cast<uint32_t>(metrics_.rows.size()));
  for (const auto& r : metrics_.rows) {
    w.u32(static_cast<uint32_t>(r.epoch));
    w.f64(r.loss);
    w.u32(static_cast<uint32_t>(r.terms.size()));
    for (const auto& t : r.terms) {
      w.str(t.name);
      w.f64(t.weight);
      w.f64(t.value);
    }
    w.f64(r.emb_std);
    w.u8(r.has_eval ? 1 : 0);
    w.f64(r.eval_eer);
    w.f64(r.eval_min_dcf);
    w.f64(r.lr);
    w.f64(r.seconds);
    w.u32(static_cast<uint32_t>(r.steps));
  }

  write_file_bytes(path, w.bytes());
}

Trainer Trainer::resume(const std::string& path, Manifest manifest,
                        const TrainConfig* expected, bool* config_mismatch) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  char magic[8];
  for (char& c : magic) c = static_cast<char>(r.u8());
  SSLSV_REQUIRE(std::memcmp(magic, kCkptMagic, 8) == 0,
                "resume: '", path, "' is not a trainer checkpoint");
  const uint32_t version = r.u32();
  SSLSV_REQUIRE(version == kCkptVersion, "resume: unsupported checkpoint version ",
                version);

  const std::string cfg_text = r.str();
  const uint64_t stored_hash = r.u64();
  const TrainConfig cfg = parse_config_text(cfg_text);
  SSLSV_REQUIRE(config_hash(cfg) == stored_hash,
                "resume: checkpoint config hash mismatch (corrupt file?)");
  if (config_mismatch != nullptr) *config_mismatch = false;
  if (expected != nullptr && config_hash(*expected) != stored_hash) {
    std::cerr << "warning: provided config does not match the checkpoint "
                 "config; resuming with the stored one\n";
    if (config_mismatch != nullptr) *config_mismatch = true;
  }

  Trainer t(cfg, std::move(manifest));
  t.epoch_ = static_cast<int>(r.u64());

  const uint32_t model_len = r.u32();
  std::vector<uint8_t> model_bytes(model_len);
  for (auto& b : model_bytes) b = r.u8();
  t.model_ = Model::deserialize(model_bytes);

  if (r.u8() != 0) {
    const uint32_t best_len = r.u32();
    std::vector<uint8_t> best_bytes(best_len);
    for (auto& b : best_bytes) b = r.u8();
    t.best_model_ = Model::deserialize(best_bytes);
    t.has_best_ = true;
    t.best_eer_ = r.f64();
  }

  t.early_stop_.best_metric = r.f64();
  t.early_stop_.epochs_since_best = static_cast<int>(r.u32());

  t.adam_.t = static_cast<int64_t>(r.u64());
  const uint64_t n = r.u64();
  SSLSV_REQUIRE(n == t.model_.num_parameters(),
                "resume: optimizer state size ", n,
                " does not match model parameter count ",
                t.model_.num_parameters());
  t.adam_.m.resize(n);
  t.adam_.v.resize(n);
  r.f64_array(t.adam_.m.data(), n);
  r.f64_array(t.adam_.v.data(), n);

  const uint32_t n_rows = r.u32();
  for (uint32_t i = 0; i < n_rows; ++i) {
    MetricsRow row;
    row.epoch = static_cast<int>(r.u32());
    row.loss = r.f64();
    const uint32_t n_terms = r.u32();
    for (uint32_t k = 0; k < n_terms; ++k) {
      LossTerm term;
      term.name = r.str();
      term.weight = r.f64();
      term.value = r.f64();
      row.terms.push_back(std::move(term));
    }
    row.emb_std = r.f64();
    row.has_eval = r.u8() != 0;
    row.eval_eer = r.f64();
    row.eval_min_dcf = r.f64();
    row.lr = r.f64();
    row.seconds = r.f64();
    row.steps = static_cast<int>(r.u32());
    t.metrics_.rows.push_back(std::move(row));
  }
  SSLSV_REQUIRE(r.done(), "resume: trailing bytes in checkpoint");
  return t;
}

Model load_model_any(const std::string& path, TrainConfig* cfg_out,
                     bool* has_cfg) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  SSLSV_REQUIRE(bytes.size() >= 8, "load_model_any: '", path, "' too short");
  if (has_cfg != nullptr) *has_cfg = false;
  if (std::memcmp(bytes.data(), kCkptMagic, 8) == 0) {
    ByteReader r(bytes);
    for (int i = 0; i < 8; ++i) (void)r.u8();
    const uint32_t version = r.u32();
    SSLSV_REQUIRE(version == kCkptVersion,
                  "load_model_any: unsupported checkpoint version ", version);
    const std::string cfg_text = r.str();
    (void)r.u64();  // config hash
    (void)r.u64();  // epoch
    const uint32_t model_len = r.u32();
    std::vector<uint8_t> model_bytes(model_len);
    for (auto& b : model_bytes) b = r.u8();
    if (cfg_out != nullptr) {
      *cfg_out = parse_config_text(cfg_text);
      if (has_cfg != nullptr) *has_cfg = true;
    }
    return Model::deserialize(model_bytes);
  }
  return Model::load(path);
}

FitResult fit(const Manifest& manifest, const TrainConfig& cfg,
              const TrialList* trials, const std::string& out_dir) {
  Trainer trainer(cfg, manifest);
  if (trials != nullptr) trainer.set_trials(*trials);
  trainer.set_out_dir(out_dir);
  trainer.fit();
  return {trainer.best_model(), trainer.metrics()};
}

}  // namespace sslsv
