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
// sslsv command-line front end. Exit codes: 0 success, 1 validation or
// runtime failure (single-line diagnostic on stderr), 2 bad usage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "sslsv/audio.hpp"
#include "sslsv/augment.hpp"
#include "sslsv/config.hpp"
#include "sslsv/eval.hpp"
#include "sslsv/gradcheck.hpp"
#include "sslsv/synth.hpp"
#include "sslsv/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sslsv;

// flag > SSLSV_SEED environment variable > built-in default.
uint64_t resolve_seed(const CLI::Option* opt, uint64_t flag_value,
                      uint64_t builtin) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("SSLSV_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      SSLSV_FAIL("SSLSV_SEED is not an unsigned integer: '", env, "'");
    }
  }
  return builtin;
}

Manifest manifest_from_data_arg(const std::string& data) {
  if (fs::is_directory(data)) {
    const fs::path p = fs::path(data) / "manifest.tsv";
    SSLSV_REQUIRE(fs::exists(p), "no manifest.tsv under '", data, "'");
    return load_manifest(p.string());
  }
  return load_manifest(data);
}

struct TrainArgs {
  std::string config_path, data, out, trials, resume_path;
  std::string loss_override, noise_dir, rir_dir;
  uint64_t seed = 0;
  int workers = 0;
  int epochs = 0;
};

int cmd_train(const TrainArgs& args, const CLI::Option* seed_opt,
              const CLI::Option* workers_opt, const CLI::Option* epochs_opt,
              const CLI::Option* loss_opt, const CLI::Option* noise_opt,
              const CLI::Option* rir_opt) {
  Manifest manifest = manifest_from_data_arg(args.data);

  if (!args.resume_path.empty()) {
    std::optional<TrainConfig> expected;
    if (!args.config_path.empty()) expected = load_config_file(args.config_path);
    Trainer trainer = Trainer::resume(args.resume_path, std::move(manifest),
                                      expected ? &*expected : nullptr);
    if (!args.trials.empty()) trainer.set_trials(load_trial_list(args.trials));
    if (epochs_opt->count() > 0) trainer.override_max_epochs(args.epochs);
    trainer.set_out_dir(args.out);
    trainer.fit();
    std::cout << "resumed training complete: " << trainer.epochs_completed()
              << " epochs, best EER "
              << (trainer.best_eer() == std::numeric_limits<double>::infinity()
                      ? -1.0
                      : trainer.best_eer())
              << "\n";
    return 0;
  }

  TrainConfig cfg;
  bool config_sets_seed = false;
  if (!args.config_path.empty()) {
    cfg = load_config_file(args.config_path);
    std::ifstream in(args.config_path);
    std::string line;
    while (std::getline(in, line)) {
      const size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      if (key == "seed") config_sets_seed = true;
    }
  }
  // flag > explicit config seed > SSLSV_SEED > 0
  if (seed_opt->count() > 0) {
    cfg.seed = args.seed;
  } else if (!config_sets_seed) {
    cfg.seed = resolve_seed(seed_opt, args.seed, cfg.seed);
  }
  if (workers_opt->count() > 0) cfg.workers = args.workers;
  if (epochs_opt->count() > 0) cfg.max_epochs = args.epochs;
  if (loss_opt->count() > 0) cfg.loss = loss_kind_from_string(args.loss_override);
  if (noise_opt->count() > 0) cfg.noise_dir = args.noise_dir;
  if (rir_opt->count() > 0) cfg.rir_dir = args.rir_dir;
  cfg.validate();

  Trainer trainer(cfg, std::move(manifest));
  if (!args.trials.empty()) trainer.set_trials(load_trial_list(args.trials));
  trainer.set_out_dir(args.out);
  trainer.fit();

  std::cout << "training complete: " << trainer.epochs_completed() << " epochs";
  if (trainer.best_eer() != std::numeric_limits<double>::infinity()) {
    std::cout << ", best EER " << trainer.best_eer() << "%";
  }
  std::cout << "\nartifacts in " << args.out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& trials_path,
                 int n_crops, const std::string& config_path,
                 const std::string& scores_out) {
  TrainConfig cfg;
  bool has_cfg = false;
  Model model = load_model_any(checkpoint, &cfg, &has_cfg);
  if (!config_path.empty()) {
    cfg = load_config_file(config_path);
    has_cfg = true;
    // A bare model must match the configured shapes exactly.
    Rng rng(0);
    Model expected(cfg.model, rng);
    expected.deserialize_into(model.serialize());
    model = std::move(expected);
  }
  if (!has_cfg) cfg = TrainConfig{};  // standard 16 kHz front end

  const TrialList trials = load_trial_list(trials_path);
  auto [scores, result] =
      run_trials(model, trials, cfg.features, cfg.chunk_samples(), n_crops);
  if (!scores_out.empty()) save_scores_tsv(scores, scores_out);

  std::printf("trials: %zu (unique embeddings %zu, cache hits %zu)\n",
              trials.size(), scores.unique_embeddings, scores.cache_hits);
  std::printf("EER: %.4f%% (threshold %.6f)\n", result.eer_percent,
              result.eer_threshold);
  std::printf("minDCF(p_target=0.01): %.4f (raw %.6f, threshold %.6f)\n",
              result.min_dcf, result.min_dcf_raw, result.dcf_threshold);
  return 0;
}

int cmd_extract(const std::string& checkpoint, const std::string& wav_path,
                int n_crops, const std::string& config_path,
                const std::string& features_out) {
  TrainConfig cfg;
  bool has_cfg = false;
  Model model = load_model_any(checkpoint, &cfg, &has_cfg);
  if (!config_path.empty()) cfg = load_config_file(config_path);

  const Waveform w = load_wav(wav_path, cfg.features.sample_rate);
  if (!features_out.empty()) {
    // Inspection hook: the normalized feature matrix of the whole file.
    const FeatureMatrix f = instance_mvn(log_mel(w, cfg.features));
    std::ofstream out(features_out);
    SSLSV_REQUIRE(out.good(), "cannot open '", features_out, "' for writing");
    out.precision(10);
    for (size_t t = 0; t < f.num_frames(); ++t) {
      for (size_t b = 0; b < f.num_bins(); ++b) {
        out << (b > 0 ? "\t" : "") << f.values.at(t, b);
      }
      out << "\n";
    }
  }
  const std::vector<double> rep =
      extract_embedding(model, w, cfg.features, cfg.chunk_samples(), n_crops);
  std::cout.precision(10);
  for (size_t i = 0; i < rep.size(); ++i) {
    std::cout << (i > 0 ? " " : "") << rep[i];
  }
  std::cout << "\n";
  return 0;
}

int cmd_probe(const std::string& checkpoint, const std::string& data,
              double fraction, const std::string& trials_path, uint64_t seed,
              int epochs, double lr, int n_crops) {
  TrainConfig cfg;
  bool has_cfg = false;
  Model model = load_model_any(checkpoint, &cfg, &has_cfg);
  Manifest manifest = manifest_from_data_arg(data);
  SSLSV_REQUIRE(manifest.has_labels(),
                "probe: the manifest must carry speaker labels");

  Tensor2 reps(manifest.size(), static_cast<size_t>(model.config().rep_dim));
  std::vector<std::string> labels;
  for (size_t i = 0; i < manifest.size(); ++i) {
    const Waveform w =
        load_wav(manifest.entries[i].file_path, cfg.features.sample_rate);
    const std::vector<double> rep =
        extract_embedding(model, w, cfg.features, cfg.chunk_samples(), n_crops);
    std::copy(rep.begin(), rep.end(), reps.row(i));
    labels.push_back(*manifest.entries[i].speaker_id);
  }

  ProbeConfig pc;
  pc.seed = seed;
  pc.epochs = epochs;
  pc.lr = lr;
  const ProbeResult probe = linear_probe(reps, labels, fraction, pc);
  std::printf("probe: %zu labeled rows (fraction %.3f), %zu classes\n",
              probe.used_rows, fraction, probe.model.classes.size());
  std::printf("train accuracy: %.4f\n", probe.train_accuracy);
  std::printf("all-pairs EER (probe space): %.4f%%\n", probe.eer_percent);

  if (!trials_path.empty()) {
    const TrialList trials = load_trial_list(trials_path);
    const EvalResult res = score_trials_with_probe(
        model, probe.model, trials, cfg.features, cfg.chunk_samples(), n_crops);
    std::printf("trial EER (probe space): %.4f%%  minDCF: %.4f\n",
                res.eer_percent, res.min_dcf);
  }
  return 0;
}

int cmd_finetune(const std::string& checkpoint, const std::string& data,
                 double fraction, const std::string& out,
                 const std::string& trials_path, uint64_t seed, int epochs,
                 double lr, bool freeze, int n_crops) {
  TrainConfig cfg;
  bool has_cfg = false;
  Model model = load_model_any(checkpoint, &cfg, &has_cfg);
  Manifest manifest = manifest_from_data_arg(data);

  FineTuneConfig ft;
  ft.fraction = fraction;
  ft.epochs = epochs;
  ft.schedule.initial = lr;
  ft.seed = seed;
  ft.freeze_backbone = freeze;
  ft.features = cfg.features;
  ft.chunk_seconds = cfg.chunk_seconds;
  ft.embed_n_crops = n_crops;
  const FineTuneResult result = fine_tune(model, manifest, ft);
  std::printf("fine-tune: fraction %.3f, %zu classes, train accuracy %.4f\n",
              fraction, result.classes.size(), result.train_accuracy);

  if (!out.empty()) {
    fs::create_directories(out);
    const std::string path = (fs::path(out) / "model_finetuned.mdl").string();
    result.model.save(path);
    std::printf("saved %s\n", path.c_str());
  }
  if (!trials_path.empty()) {
    const TrialList trials = load_trial_list(trials_path);
    auto [scores, res] = run_trials(result.model, trials, cfg.features,
                                    cfg.chunk_samples(), n_crops);
    (void)scores;
    std::printf("trial EER: %.4f%%  minDCF: %.4f\n", res.eer_percent, res.min_dcf);
  }
  return 0;
}

int cmd_gradcheck(uint64_t seed) {
  const std::vector<GradCheckResult> results = run_gradcheck(seed);
  std::printf("%-34s %14s %10s %s\n", "check", "max_rel_err", "tolerance", "status");
  for (const auto& r : results) {
    std::printf("%-34s %14.3e %10.0e %s\n", r.name.c_str(), r.max_rel_err,
                r.tolerance, r.pass ? "ok" : "FAIL");
  }
  if (!all_passed(results)) {
    std::fprintf(stderr, "error: gradient check failed\n");
    return 1;
  }
  return 0;
}

int cmd_augment_preview(const std::string& in_path, const std::string& out_path,
                        uint64_t seed, const std::string& noise_dir,
                        const std::string& rir_dir, double p_noise,
                        double p_reverb) {
  const Waveform w = load_wav(in_path);
  AugmentPolicy policy;
  policy.p_noise = noise_dir.empty() ? 0.0 : p_noise;
  policy.p_reverb = rir_dir.empty() ? 0.0 : p_reverb;
  if (!noise_dir.empty()) policy.noise = load_noise_corpus(noise_dir, w.sample_rate);
  if (!rir_dir.empty()) policy.rir = load_rir_corpus(rir_dir, w.sample_rate);

  Rng rng(seed);
  AugmentLog log;
  const Waveform out = apply_policy(w, policy, rng, &log);
  save_wav(out, out_path);

  if (log.noise_applied) {
    std::printf("noise: %s (%s) at %.2f dB SNR, gain %.5f\n",
                log.noise_file.c_str(), log.noise_category.c_str(), log.snr_db,
                log.noise_gain);
  } else {
    std::printf("noise: not applied\n");
  }
  if (log.reverb_applied) {
    std::printf("reverb: %s\n", log.rir_file.c_str());
  } else {
    std::printf("reverb: not applied\n");
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_synth_data(const SynthConfig& cfg, const std::string& out) {
  const SynthSummary summary = generate_synth_corpus(cfg, out);
  std::printf("synthetic corpus in %s\n", out.c_str());
  std::printf("  train utterances: %zu (%s)\n", summary.train_utterances,
              summary.manifest_path.c_str());
  std::printf("  eval utterances: %zu, trials: %zu (%s)\n",
              summary.eval_utterances, summary.trials,
              summary.trials_path.c_str());
  if (!summary.noise_dir.empty()) {
    std::printf("  noise corpus: %s\n  rir corpus: %s\n",
                summary.noise_dir.c_str(), summary.rir_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sslsv: self-supervised speaker-embedding toolkit"};
  app.require_subcommand(1);

  // train
  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a model on a manifest of WAVs");
  train->add_option("--config", train_args.config_path, "Config file (key = value lines)");
  train->add_option("--data", train_args.data, "Data directory with manifest.tsv (or a manifest path)")->required();
  train->add_option("--out", train_args.out, "Output directory for checkpoints and metrics")->required();
  train->add_option("--trials", train_args.trials, "Trial list for per-epoch evaluation");
  CLI::Option* train_seed = train->add_option("--seed", train_args.seed, "Training seed (overrides config)");
  CLI::Option* train_workers = train->add_option("--workers", train_args.workers, "Batch-assembly worker threads");
  CLI::Option* train_epochs = train->add_option("--epochs", train_args.epochs, "Override max epochs");
  CLI::Option* train_loss = train->add_option("--loss", train_args.loss_override, "Override loss (infonce|barlow|vicreg|comp1|comp2|reg_y|reg_z)");
  CLI::Option* train_noise = train->add_option("--noise-dir", train_args.noise_dir, "MUSAN-style noise corpus directory");
  CLI::Option* train_rir = train->add_option("--rir-dir", train_args.rir_dir, "RIR corpus directory");
  train->add_option("--resume", train_args.resume_path, "Resume from a trainer checkpoint");

  // evaluate
  std::string eval_ckpt, eval_trials, eval_config, eval_scores;
  int eval_crops = 5;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a trial list and report EER/minDCF");
  evaluate->add_option("--checkpoint", eval_ckpt, "Model (.mdl) or trainer checkpoint (.ckpt)")->required();
  evaluate->add_option("--trials", eval_trials, "Trial list file")->required();
  evaluate->add_option("--n-crops", eval_crops, "Evenly spaced crops per utterance");
  evaluate->add_option("--config", eval_config, "Config for the feature front end");
  evaluate->add_option("--scores-out", eval_scores, "Write per-trial scores TSV here");

  // extract
  std::string ext_ckpt, ext_wav, ext_config, ext_features;
  int ext_crops = 5;
  CLI::App* extract = app.add_subcommand("extract", "Print the representation of one WAV");
  extract->add_option("--checkpoint", ext_ckpt, "Model or trainer checkpoint")->required();
  extract->add_option("--wav", ext_wav, "Input WAV file")->required();
  extract->add_option("--n-crops", ext_crops, "Evenly spaced crops per utterance");
  extract->add_option("--config", ext_config, "Config for the feature front end");
  extract->add_option("--features-out", ext_features, "Also dump the normalized feature matrix as TSV");

  // probe
  std::string probe_ckpt, probe_data, probe_trials;
  double probe_fraction = 1.0;
  uint64_t probe_seed = 0;
  double probe_lr = 0.001;
  int probe_epochs = 100, probe_crops = 5;
  CLI::App* probe = app.add_subcommand("probe", "Linear probe on frozen representations");
  probe->add_option("--checkpoint", probe_ckpt, "Model or trainer checkpoint")->required();
  probe->add_option("--data", probe_data, "Labeled manifest (directory or file)")->required();
  probe->add_option("--label-fraction", probe_fraction, "Labeled fraction in (0,1]");
  probe->add_option("--trials", probe_trials, "Optional trial list scored in probe space");
  CLI::Option* probe_seed_opt = probe->add_option("--seed", probe_seed, "Probe seed");
  probe->add_option("--epochs", probe_epochs, "Full-batch Adam epochs");
  probe->add_option("--lr", probe_lr, "Probe learning rate");
  probe->add_option("--n-crops", probe_crops, "Crops per utterance for representations");

  // finetune
  std::string ft_ckpt, ft_data, ft_out, ft_trials;
  double ft_fraction = 1.0;
  uint64_t ft_seed = 0;
  double ft_lr = 0.001;
  int ft_epochs = 40, ft_crops = 5;
  bool ft_freeze = false;
  CLI::App* finetune = app.add_subcommand("finetune", "Fine-tune the whole network with labels");
  finetune->add_option("--checkpoint", ft_ckpt, "Pre-trained model or trainer checkpoint")->required();
  finetune->add_option("--data", ft_data, "Labeled manifest (directory or file)")->required();
  finetune->add_option("--label-fraction", ft_fraction, "Labeled fraction in (0,1]");
  finetune->add_option("--out", ft_out, "Directory for the fine-tuned model");
  finetune->add_option("--trials", ft_trials, "Optional trial list to evaluate after");
  CLI::Option* ft_seed_opt = finetune->add_option("--seed", ft_seed, "Fine-tune seed");
  finetune->add_option("--epochs", ft_epochs, "Fine-tune epochs");
  finetune->add_option("--lr", ft_lr, "Initial fine-tune learning rate");
  finetune->add_flag("--freeze", ft_freeze, "Freeze all but the head (reduces to the probe)");
  finetune->add_option("--n-crops", ft_crops, "Crops per utterance for evaluation");

  // gradcheck
  uint64_t gc_seed = 0;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  CLI::Option* gc_seed_opt = gradcheck->add_option("--seed", gc_seed, "Gradcheck seed");

  // augment-preview
  std::string ap_in, ap_out, ap_noise, ap_rir;
  uint64_t ap_seed = 0;
  double ap_p_noise = 0.75, ap_p_reverb = 0.5;
  CLI::App* augment_preview = app.add_subcommand("augment-preview", "Write one augmented copy of a WAV");
  augment_preview->add_option("--in", ap_in, "Input WAV")->required();
  augment_preview->add_option("--out", ap_out, "Output WAV")->required();
  CLI::Option* ap_seed_opt = augment_preview->add_option("--seed", ap_seed, "Augmentation seed");
  augment_preview->add_option("--noise-dir", ap_noise, "Noise corpus directory");
  augment_preview->add_option("--rir-dir", ap_rir, "RIR corpus directory");
  augment_preview->add_option("--p-noise", ap_p_noise, "Noise probability");
  augment_preview->add_option("--p-reverb", ap_p_reverb, "Reverb probability");

  // synth-data
  SynthConfig synth_cfg;
  std::string synth_out;
  bool synth_no_aug = false, synth_no_corrupt = false;
  CLI::App* synth = app.add_subcommand("synth-data", "Generate the deterministic synthetic corpus");
  synth->add_option("--speakers", synth_cfg.speakers, "Number of synthetic speakers");
  synth->add_option("--utts-per-speaker", synth_cfg.utts_per_speaker, "Training utterances per speaker");
  synth->add_option("--eval-utts-per-speaker", synth_cfg.eval_utts_per_speaker, "Evaluation utterances per speaker");
  synth->add_option("--trials", synth_cfg.n_trials, "Number of verification trials (even)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  CLI::Option* synth_seed_opt = synth->add_option("--seed", synth_cfg.seed, "Corpus seed");
  synth->add_flag("--no-aug-corpus", synth_no_aug, "Skip the synthetic noise/RIR corpora");
  synth->add_flag("--no-eval-corruption", synth_no_corrupt, "Keep evaluation utterances clean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) {
      return cmd_train(train_args, train_seed, train_workers, train_epochs,
                       train_loss, train_noise, train_rir);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_ckpt, eval_trials, eval_crops, eval_config,
                          eval_scores);
    }
    if (extract->parsed()) {
      return cmd_extract(ext_ckpt, ext_wav, ext_crops, ext_config, ext_features);
    }
    if (probe->parsed()) {
      return cmd_probe(probe_ckpt, probe_data, probe_fraction, probe_trials,
                       resolve_seed(probe_seed_opt, probe_seed, 0), probe_epochs,
                       probe_lr, probe_crops);
    }
    if (finetune->parsed()) {
      return cmd_finetune(ft_ckpt, ft_data, ft_fraction, ft_out, ft_trials,
                          resolve_seed(ft_seed_opt, ft_seed, 0), ft_epochs,
                          ft_lr, ft_freeze, ft_crops);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(resolve_seed(gc_seed_opt, gc_seed, 0));
    }
    if (augment_preview->parsed()) {
      return cmd_augment_preview(ap_in, ap_out,
                                 resolve_seed(ap_seed_opt, ap_seed, 0), ap_noise,
                                 ap_rir, ap_p_noise, ap_p_reverb);
    }
    if (synth->parsed()) {
      synth_cfg.seed = resolve_seed(synth_seed_opt, synth_cfg.seed, synth_cfg.seed);
      synth_cfg.with_aug_corpus = !synth_no_aug;
      synth_cfg.corrupt_eval = !synth_no_corrupt;
      return cmd_synth_data(synth_cfg, synth_out);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 1;
  }
  return 2;
}
