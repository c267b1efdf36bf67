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
#include <fstream>

#include "sslsv/common.hpp"
#include "sslsv/trainer.hpp"
#include "testing_util.hpp"

using namespace sslsv;
using testing::TempDir;

namespace {

Waveform tone(double freq, double seconds, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = 16000;
  const size_t n = static_cast<size_t>(seconds * 16000);
  w.samples.resize(n);
  for (size_t t = 0; t < n; ++t) {
    w.samples[t] = 0.4 * std::sin(2.0 * M_PI * freq * static_cast<double>(t) / 16000.0) +
                   0.05 * rng.normal();
  }
  return w;
}

// Eight tonal utterances from four pitch classes, long enough for two
// disjoint chunks at the test chunk length.
struct MiniCorpus {
  TempDir dir{"trainer_corpus"};
  Manifest manifest;

  explicit MiniCorpus(double seconds = 0.5) {
    for (int i = 0; i < 8; ++i) {
      const std::string name = "utt" + std::to_string(i) + ".wav";
      save_wav(tone(180.0 + 90.0 * (i % 4), seconds, static_cast<uint64_t>(i)),
               dir.str(name));
      ManifestEntry e;
      e.utterance_id = "utt" + std::to_string(i);
      e.file_path = dir.str(name);
      e.speaker_id = "spk" + std::to_string(i % 4);
      manifest.entries.push_back(e);
    }
  }
};

// Small fast config: 0.2 s chunks give 8 frames per view.
TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.chunk_seconds = 0.2;
  cfg.max_epochs = 2;
  cfg.loss = LossKind::kVicreg;
  cfg.seed = 5;
  cfg.eval_every = 0;
  cfg.model.encoder_hidden = {16};
  cfg.model.rep_dim = 8;
  cfg.model.proj_dim = 12;
  cfg.patience = 50;
  return cfg;
}

}  // namespace

TEST_CASE("build_batch produces aligned 198x40 feature pairs at 2 s") {
  MiniCorpus corpus(4.2);
  TrainConfig cfg = fast_config();
  cfg.chunk_seconds = 2.0;
  Trainer trainer(cfg, corpus.manifest);
  auto [va, vb] = trainer.build_batch({0, 1, 2, 3}, 0);
  CHECK(va.num_items == 4);
  CHECK(vb.num_items == 4);
  CHECK(va.frames == 198);
  CHECK(va.bins == 40);
  CHECK(vb.frames == 198);
}

TEST_CASE("a double-length utterance with augmentation off yields the halves") {
  TempDir dir("halves");
  const Waveform whole = tone(440.0, 0.4, 7);  // exactly 2 chunks of 0.2 s
  save_wav(whole, dir.str("u.wav"));
  Manifest manifest;
  manifest.entries.push_back({"u", dir.str("u.wav"), std::nullopt});

  TrainConfig cfg = fast_config();
  Trainer trainer(cfg, manifest);
  auto [va, vb] = trainer.build_batch({0}, 0);

  // Expected features of both halves (through the save/load quantization).
  const Waveform saved = load_wav(dir.str("u.wav"));
  const FeatureMatrix first = instance_mvn(log_mel(crop(saved, 0, 3200), cfg.features));
  const FeatureMatrix second =
      instance_mvn(log_mel(crop(saved, 3200, 3200), cfg.features));

  const bool a_is_first = va.stacked.data == first.values.data;
  const bool a_is_second = va.stacked.data == second.values.data;
  REQUIRE((a_is_first || a_is_second));
  if (a_is_first) {
    CHECK(vb.stacked.data == second.values.data);
  } else {
    CHECK(vb.stacked.data == first.values.data);
  }
}

TEST_CASE("identical seeds give bit-identical batches") {
  MiniCorpus corpus;
  const TrainConfig cfg = fast_config();
  Trainer t1(cfg, corpus.manifest);
  Trainer t2(cfg, corpus.manifest);
  auto [a1, b1] = t1.build_batch({1, 3, 5, 7}, 2);
  auto [a2, b2] = t2.build_batch({1, 3, 5, 7}, 2);
  CHECK(a1.stacked.data == a2.stacked.data);
  CHECK(b1.stacked.data == b2.stacked.data);

  TrainConfig other = cfg;
  other.seed = 6;
  Trainer t3(other, corpus.manifest);
  auto [a3, b3] = t3.build_batch({1, 3, 5, 7}, 2);
  (void)b3;
  CHECK(a1.stacked.data != a3.stacked.data);
}

TEST_CASE("worker count does not change batch contents") {
  MiniCorpus corpus;
  TrainConfig cfg = fast_config();
  Trainer serial(cfg, corpus.manifest);
  cfg.workers = 2;
  Trainer parallel(cfg, corpus.manifest);
  auto [a1, b1] = serial.build_batch({0, 1, 2, 3, 4, 5}, 1);
  auto [a2, b2] = parallel.build_batch({0, 1, 2, 3, 4, 5}, 1);
  CHECK(a1.stacked.data == a2.stacked.data);
  CHECK(b1.stacked.data == b2.stacked.data);
}

TEST_CASE("identical views zero the vicreg invariance term") {
  TempDir dir("chunklen");
  // Utterance exactly one chunk long: both crops are the whole signal.
  save_wav(tone(330.0, 0.2, 11), dir.str("a.wav"));
  save_wav(tone(550.0, 0.2, 12), dir.str("b.wav"));
  Manifest manifest;
  manifest.entries.push_back({"a", dir.str("a.wav"), std::nullopt});
  manifest.entries.push_back({"b", dir.str("b.wav"), std::nullopt});

  TrainConfig cfg = fast_config();
  cfg.batch_size = 2;
  Trainer trainer(cfg, manifest);
  auto [va, vb] = trainer.build_batch({0, 1}, 0);
  CHECK(va.stacked.data == vb.stacked.data);

  const StepStats stats = trainer.train_step(va, vb, 1e-4);
  REQUIRE(stats.terms.size() == 3);
  CHECK(stats.terms[0].name == "invariance");
  CHECK(stats.terms[0].value == 0.0);
}

TEST_CASE("composite diagnostics add up inside train_step") {
  MiniCorpus corpus;
  TrainConfig cfg = fast_config();
  cfg.loss = LossKind::kComp2;
  Trainer trainer(cfg, corpus.manifest);
  auto [va, vb] = trainer.build_batch({0, 1, 2, 3}, 0);
  const StepStats stats = trainer.train_step(va, vb, 1e-4);
  double total = 0.0;
  for (const auto& t : stats.terms) total += t.weight * t.value;
  CHECK(std::fabs(total - stats.loss) < 1e-10);
}

TEST_CASE("one small step descends on the same batch") {
  MiniCorpus corpus;
  int descended = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    TrainConfig cfg = fast_config();
    cfg.seed = static_cast<uint64_t>(100 + trial);
    Trainer trainer(cfg, corpus.manifest);
    auto [va, vb] = trainer.build_batch({0, 1, 2, 3}, trial);
    const StepStats before = trainer.train_step(va, vb, 1e-4);
    const StepStats after = trainer.train_step(va, vb, 1e-4);
    if (after.loss < before.loss) ++descended;
  }
  CHECK(descended >= 19);  // >= 95% of trials
}

TEST_CASE("fit runs ceil(manifest/batch) steps per epoch") {
  MiniCorpus corpus;  // 8 utterances
  TrainConfig cfg = fast_config();
  cfg.batch_size = 3;  // 3 + 3 + 2 -> 3 steps
  cfg.max_epochs = 1;
  TempDir out("fit_steps");
  Trainer trainer(cfg, corpus.manifest);
  trainer.set_out_dir(out.str());
  trainer.fit();
  REQUIRE(trainer.metrics().rows.size() == 1);
  CHECK(trainer.metrics().rows[0].steps == 3);

  // metrics.tsv: header plus one row per epoch
  std::ifstream in(out.str("metrics.tsv"));
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("a trailing singleton batch is dropped") {
  MiniCorpus corpus;  // 8 utterances
  TrainConfig cfg = fast_config();
  cfg.batch_size = 7;  // 7 + 1 -> the singleton cannot form batch statistics
  cfg.max_epochs = 1;
  Trainer trainer(cfg, corpus.manifest);
  trainer.fit();
  CHECK(trainer.metrics().rows[0].steps == 1);
}

TEST_CASE("early stopping fires when evaluations stop improving") {
  MiniCorpus corpus;
  TrialList trials;
  trials.trials.push_back({1, corpus.dir.str("utt0.wav"), corpus.dir.str("utt4.wav")});
  trials.trials.push_back({1, corpus.dir.str("utt1.wav"), corpus.dir.str("utt5.wav")});
  trials.trials.push_back({0, corpus.dir.str("utt0.wav"), corpus.dir.str("utt1.wav")});
  trials.trials.push_back({0, corpus.dir.str("utt2.wav"), corpus.dir.str("utt3.wav")});

  TrainConfig cfg = fast_config();
  cfg.max_epochs = 30;
  cfg.eval_every = 1;
  cfg.eval_n_crops = 1;
  cfg.patience = 0;              // any tie stops immediately
  cfg.schedule.initial = 1e-12;  // parameters barely move, so EER ties
  Trainer trainer(cfg, corpus.manifest);
  trainer.set_trials(trials);
  trainer.fit();
  CHECK(trainer.epochs_completed() == 2);  // best at epoch 0, tie at epoch 1
  CHECK(trainer.metrics().rows.back().has_eval);
}

TEST_CASE("checkpoint resume reproduces an uninterrupted run bit-exactly") {
  MiniCorpus corpus;
  TrainConfig cfg = fast_config();
  cfg.max_epochs = 4;
  TempDir out("resume");

  Trainer full(cfg, corpus.manifest);
  full.fit();

  Trainer part(cfg, corpus.manifest);
  part.fit_until(2);
  part.save_checkpoint(out.str("mid.ckpt"));
  Trainer resumed = Trainer::resume(out.str("mid.ckpt"), corpus.manifest);
  CHECK(resumed.epochs_completed() == 2);
  resumed.fit();

  CHECK(resumed.model().serialize() == full.model().serialize());
  CHECK(resumed.metrics().rows.size() == full.metrics().rows.size());
}

TEST_CASE("resume flags a differing config") {
  MiniCorpus corpus;
  TrainConfig cfg = fast_config();
  TempDir out("resume_mismatch");
  Trainer trainer(cfg, corpus.manifest);
  trainer.fit_until(1);
  trainer.save_checkpoint(out.str("t.ckpt"));

  TrainConfig altered = cfg;
  altered.loss = LossKind::kBarlow;
  bool mismatch = false;
  Trainer resumed = Trainer::resume(out.str("t.ckpt"), corpus.manifest, &altered,
                                    &mismatch);
  CHECK(mismatch);
  CHECK(resumed.config().loss == LossKind::kVicreg);  // stored config wins

  bool ok_same = true;
  Trainer resumed2 = Trainer::resume(out.str("t.ckpt"), corpus.manifest, &cfg,
                                     &ok_same);
  CHECK_FALSE(ok_same);
}

TEST_CASE("corrupt checkpoints are rejected") {
  MiniCorpus corpus;
  TempDir out("corrupt");
  Trainer trainer(fast_config(), corpus.manifest);
  trainer.fit_until(1);
  trainer.save_checkpoint(out.str("t.ckpt"));

  std::fstream f(out.str("t.ckpt"), std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(2);
  f.put('X');
  f.close();
  CHECK_THROWS_AS(Trainer::resume(out.str("t.ckpt"), corpus.manifest), Error);
}

TEST_CASE("config file format") {
  SUBCASE("dotted keys parse into nested settings") {
    const TrainConfig cfg = parse_config_text(
        "# comment\n"
        "batch_size = 16\n"
        "loss = comp2\n"
        "loss.vicreg.nu = 0.04\n"
        "loss.infonce.tau = 0.05\n"
        "model.encoder_hidden = 32,24\n"
        "optim.decay_every = 7\n");
    CHECK(cfg.batch_size == 16);
    CHECK(cfg.loss == LossKind::kComp2);
    CHECK(cfg.vicreg.nu == 0.04);
    CHECK(cfg.infonce.tau == 0.05);
    CHECK(cfg.model.encoder_hidden == std::vector<int>{32, 24});
    CHECK(cfg.schedule.decay_every == 7);
  }
  SUBCASE("unknown keys are hard errors") {
    CHECK_THROWS_WITH_AS(parse_config_text("loss.vicreg.nuu = 0.04\n"),
                         doctest::Contains("unknown key"), Error);
  }
  SUBCASE("malformed lines are hard errors") {
    CHECK_THROWS_AS(parse_config_text("batch_size 16\n"), Error);
    CHECK_THROWS_AS(parse_config_text("batch_size = sixteen\n"), Error);
  }
  SUBCASE("validation rejects impossible settings") {
    CHECK_THROWS_AS(parse_config_text("batch_size = 1\n"), Error);
    CHECK_THROWS_AS(parse_config_text("loss.infonce.tau = 0\n"), Error);
  }
  SUBCASE("canonical text round-trips") {
    TrainConfig cfg = fast_config();
    cfg.noise_dir = "/some/dir";
    const std::string text = config_to_text(cfg);
    const TrainConfig back = parse_config_text(text);
    CHECK(config_to_text(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));
  }
}
