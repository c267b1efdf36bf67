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

#include "sslsv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sslsv/common.hpp"

namespace sslsv {

TrialList load_trial_list(const std::string& path) {
  std::ifstream in(path);
  SSLSV_REQUIRE(in.good(), "load_trial_list: cannot open '", path, "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  TrialList out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int label;
    std::string p1, p2;
    SSLSV_REQUIRE(static_cast<bool>(ss >> label >> p1 >> p2),
                  "load_trial_list: '", path, "' line ", line_no,
                  ": expected `label path1 path2`");
    SSLSV_REQUIRE(label == 0 || label == 1, "load_trial_list: '", path,
                  "' line ", line_no, ": label must be 0 or 1, got ", label);
    auto resolve = [&base](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    out.trials.push_back({label, resolve(p1), resolve(p2)});
  }
  return out;
}

void save_trial_list(const TrialList& t, const std::string& path) {
  std::ofstream out(path);
  SSLSV_REQUIRE(out.good(), "save_trial_list: cannot open '", path, "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (const auto& trial : t.trials) {
    auto rel = [&base](const std::string& p) {
      return std::filesystem::path(p).lexically_proximate(base).string();
    };
    out << trial.label << ' ' << rel(trial.enroll_path) << ' '
        << rel(trial.test_path) << '\n';
  }
  SSLSV_REQUIRE(out.good(), "save_trial_list: write failed");
}

void DcfConfig::validate() const {
  SSLSV_REQUIRE(p_target > 0.0 && p_target < 1.0,
                "dcf: p_target must be in (0, 1)");
  SSLSV_REQUIRE(c_miss > 0.0 && c_fa > 0.0, "dcf: costs must be positive");
}

std::vector<double> extract_embedding(const Model& model, const Waveform& w,
                                      const SpectrogramConfig& features,
                                      size_t chunk_len, int n_crops) {
  SSLSV_REQUIRE(!w.samples.empty(), "extract_embedding: empty waveform");
  SSLSV_REQUIRE(n_crops >= 1, "extract_embedding: n_crops must be >= 1");
  SSLSV_REQUIRE(chunk_len > 0, "extract_embedding: chunk_len must be positive");

  // Evenly spaced start positions from 0 to len - chunk (0 when shorter;
  // crop() repeat-pads short files).
  std::vector<size_t> starts;
  const size_t span = w.size() > chunk_len ? w.size() - chunk_len : 0;
  if (n_crops == 1 || span == 0) {
    starts.assign(static_cast<size_t>(n_crops), 0);
  } else {
    for (int i = 0; i < n_crops; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(n_crops - 1);
      starts.push_back(static_cast<size_t>(std::llround(frac * static_cast<double>(span))));
    }
  }

  FeatureBatch batch;
  for (size_t i = 0; i < starts.size(); ++i) {
    const Waveform chunk = crop(w, starts[i], chunk_len);
    FeatureMatrix f = instance_mvn(log_mel(chunk, features));
    if (i == 0) batch.reserve(starts.size(), f.num_frames(), f.num_bins());
    batch.set_item(i, f);
  }

  const Tensor2 y = model.encoder_forward(batch, nullptr);
  std::vector<double> rep(y.cols, 0.0);
  for (size_t i = 0; i < y.rows; ++i) {
    const double* row = y.row(i);
    for (size_t j = 0; j < y.cols; ++j) rep[j] += row[j];
  }
  for (double& v : rep) v /= static_cast<double>(y.rows);
  return rep;
}

double cosine_score(const std::vector<double>& a, const std::vector<double>& b) {
  SSLSV_REQUIRE(a.size() == b.size(), "cosine_score: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  SSLSV_REQUIRE(na > 0.0 && nb > 0.0, "cosine_score: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// Operating points of the accept-iff-score>=t rule, one per unique score
// plus a reject-all sentinel, in ascending threshold order.
struct SweepPoint {
  double threshold;
  double far;  // nontargets accepted
  double frr;  // targets rejected
};

std::vector<SweepPoint> threshold_sweep(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        const char* who) {
  SSLSV_REQUIRE(scores.size() == labels.size(), who,
                ": scores/labels size mismatch");
  size_t n_target = 0, n_nontarget = 0;
  for (int l : labels) {
    SSLSV_REQUIRE(l == 0 || l == 1, who, ": labels must be 0 or 1");
    if (l == 1) ++n_target; else ++n_nontarget;
  }
  SSLSV_REQUIRE(n_target > 0 && n_nontarget > 0, who,
                ": need at least one target and one nontarget trial");

  std::vector<std::pair<double, int>> sorted(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    SSLSV_REQUIRE(std::isfinite(scores[i]), who, ": non-finite score");
    sorted[i] = {scores[i], labels[i]};
  }
  std::sort(sorted.begin(), sorted.end());

  std::vector<SweepPoint> points;
  size_t targets_below = 0, nontargets_below = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].first;
    points.push_back({t,
                      static_cast<double>(n_nontarget - nontargets_below) /
                          static_cast<double>(n_nontarget),
                      static_cast<double>(targets_below) /
                          static_cast<double>(n_target)});
    while (i < sorted.size() && sorted[i].first == t) {
      if (sorted[i].second == 1) ++targets_below; else ++nontargets_below;
      ++i;
    }
  }
  // Reject-all endpoint, just above the top score.
  points.push_back({sorted.back().first + 1.0, 0.0, 1.0});
  return points;
}

}  // namespace

std::pair<double, double> compute_eer(const std::vector<double>& scores,
                                      const std::vector<int>& labels) {
  const std::vector<SweepPoint> pts = threshold_sweep(scores, labels, "compute_eer");

  // FAR decreases and FRR increases along the sweep; find the sign change of
  // FAR - FRR and interpolate linearly between the bracketing points.
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    const double d1 = pts[k].far - pts[k].frr;
    const double d2 = pts[k + 1].far - pts[k + 1].frr;
    if (d1 == 0.0) return {100.0 * pts[k].far, pts[k].threshold};
    if (d1 > 0.0 && d2 <= 0.0) {
      const double alpha = d1 / (d1 - d2);
      const double eer = pts[k].far + alpha * (pts[k + 1].far - pts[k].far);
      const double thr =
          pts[k].threshold + alpha * (pts[k + 1].threshold - pts[k].threshold);
      return {100.0 * eer, thr};
    }
  }
  const SweepPoint& last = pts.back();
  return {100.0 * last.far, last.threshold};
}

MinDcfResult compute_min_dcf(const std::vector<double>& scores,
                             const std::vector<int>& labels,
                             const DcfConfig& cfg) {
  cfg.validate();
  const std::vector<SweepPoint> pts =
      threshold_sweep(scores, labels, "compute_min_dcf");

  const double w_miss = cfg.c_miss * cfg.p_target;
  const double w_fa = cfg.c_fa * (1.0 - cfg.p_target);

  // Accept-all endpoint below every score, then the sweep (whose final entry
  // is the reject-all endpoint).
  double best = w_fa;  // P_miss = 0, P_fa = 1
  double best_thr = pts.front().threshold - 1.0;
  for (const auto& p : pts) {
    const double dcf = w_miss * p.frr + w_fa * p.far;
    if (dcf < best) {
      best = dcf;
      best_thr = p.threshold;
    }
  }

  MinDcfResult out;
  out.raw = best;
  out.threshold = best_thr;
  out.value = best / std::min(w_miss, w_fa);
  return out;
}

std::pair<ScoreSet, EvalResult> run_trials(const Model& model,
                                           const TrialList& trials,
                                           const SpectrogramConfig& features,
                                           size_t chunk_len, int n_crops,
                                           const DcfConfig& dcf) {
  SSLSV_REQUIRE(!trials.trials.empty(), "run_trials: empty trial list");

  std::set<std::string> unique_paths;
  for (const auto& t : trials.trials) {
    unique_paths.insert(t.enroll_path);
    unique_paths.insert(t.test_path);
  }
  std::vector<std::string> missing;
  for (const auto& p : unique_paths) {
    if (!std::filesystem::exists(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string joined;
    for (const auto& p : missing) joined += "\n  " + p;
    SSLSV_FAIL("run_trials: ", missing.size(), " referenced file(s) missing:",
               joined);
  }

  std::map<std::string, std::vector<double>> cache;
  for (const auto& p : unique_paths) {
    const Waveform w = load_wav(p, features.sample_rate);
    cache.emplace(p, extract_embedding(model, w, features, chunk_len, n_crops));
  }

  ScoreSet set;
  set.unique_embeddings = unique_paths.size();
  set.cache_hits = 2 * trials.trials.size() - unique_paths.size();
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& t : trials.trials) {
    const double s = cosine_score(cache.at(t.enroll_path), cache.at(t.test_path));
    set.scored.push_back({t.enroll_path, t.test_path, s, t.label});
    scores.push_back(s);
    labels.push_back(t.label);
  }

  EvalResult res;
  const auto [eer, thr] = compute_eer(scores, labels);
  res.eer_percent = eer;
  res.eer_threshold = thr;
  const MinDcfResult dc = compute_min_dcf(scores, labels, dcf);
  res.min_dcf = dc.value;
  res.dcf_threshold = dc.threshold;
  res.min_dcf_raw = dc.raw;
  return {std::move(set), res};
}

void save_scores_tsv(const ScoreSet& scores, const std::string& path) {
  std::ofstream out(path);
  SSLSV_REQUIRE(out.good(), "save_scores_tsv: cannot open '", path, "'");
  out.precision(17);
  for (const auto& s : scores.scored) {
    out << s.enroll_path << '\t' << s.test_path << '\t' << s.score << '\t'
        << s.label << '\n';
  }
}

// ---------------------------------------------------------------------------
// Label-efficiency mechanisms

double softmax_cross_entropy(const Tensor2& logits,
                             const std::vector<int>& targets,
                             Tensor2* dlogits) {
  const size_t n = logits.rows, k = logits.cols;
  SSLSV_REQUIRE(targets.size() == n, "softmax_ce: target count mismatch");
  if (dlogits != nullptr) dlogits->resize(n, k);

  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const int y = targets[i];
    SSLSV_REQUIRE(y >= 0 && static_cast<size_t>(y) < k,
                  "softmax_ce: target out of range");
    const double* row = logits.row(i);
    double mx = row[0];
    for (size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    loss += lse - row[y];
    if (dlogits != nullptr) {
      double* drow = dlogits->row(i);
      for (size_t j = 0; j < k; ++j) drow[j] = std::exp(row[j] - lse) * inv_n;
      drow[y] -= inv_n;
    }
  }
  return loss * inv_n;
}

std::vector<double> ProbeModel::transform(const std::vector<double>& rep) const {
  SSLSV_REQUIRE(rep.size() == weight.cols, "probe: rep dim mismatch");
  std::vector<double> out(weight.rows);
  for (size_t c = 0; c < weight.rows; ++c) {
    const double* wrow = weight.row(c);
    double acc = bias[c];
    for (size_t j = 0; j < rep.size(); ++j) acc += wrow[j] * rep[j];
    out[c] = acc;
  }
  return out;
}

int ProbeModel::predict(const std::vector<double>& rep) const {
  const std::vector<double> logits = transform(rep);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

namespace {

struct HeadTrainResult {
  Tensor2 weight;
  std::vector<double> bias;
  double accuracy = 0.0;
};

// Full-batch Adam on a softmax head over fixed inputs. Shared by the linear
// probe and the frozen fine-tune path so the two produce identical updates.
HeadTrainResult train_softmax_head(const Tensor2& x,
                                   const std::vector<int>& targets,
                                   size_t n_classes, int epochs, double lr,
                                   uint64_t seed) {
  HeadTrainResult head;
  Rng rng(mix64(seed, fnv1a64("probe_head")));
  LinearLayer layer;
  layer.init(n_classes, x.cols, rng);

  AdamState adam;
  adam.init(layer.num_params());
  std::vector<ParamRef> refs = {
      {"weight", layer.weight.data.data(), layer.grad_weight.data.data(),
       layer.weight.size()},
      {"bias", layer.bias.data(), layer.grad_bias.data(), layer.bias.size()}};

  Tensor2 logits, dlogits;
  for (int e = 0; e < epochs; ++e) {
    layer.zero_grad();
    layer.forward(x, logits);
    softmax_cross_entropy(logits, targets, &dlogits);
    layer.backward(x, dlogits, nullptr);
    adam_step(refs, adam, lr);
  }

  layer.forward(x, logits);
  size_t correct = 0;
  for (size_t i = 0; i < x.rows; ++i) {
    const double* row = logits.row(i);
    const size_t arg = static_cast<size_t>(
        std::max_element(row, row + logits.cols) - row);
    if (static_cast<int>(arg) == targets[i]) ++correct;
  }
  head.weight = std::move(layer.weight);
  head.bias = std::move(layer.bias);
  head.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows);
  return head;
}

std::vector<std::string> index_classes(const std::vector<std::string>& labels,
                                       std::vector<int>* ids) {
  std::vector<std::string> classes;
  std::map<std::string, int> lookup;
  ids->clear();
  for (const auto& l : labels) {
    auto [it, inserted] = lookup.emplace(l, static_cast<int>(classes.size()));
    if (inserted) classes.push_back(l);
    ids->push_back(it->second);
  }
  return classes;
}

std::vector<size_t> sample_fraction(size_t n, double fraction, uint64_t seed,
                                    const char* who) {
  SSLSV_REQUIRE(fraction > 0.0 && fraction <= 1.0, who,
                ": fraction must be in (0, 1], got ", fraction);
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  if (fraction >= 1.0) return idx;
  Rng rng(mix64(seed, fnv1a64("label_fraction")));
  for (size_t i = n; i > 1; --i) {  // Fisher-Yates
    const size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
  const size_t keep = std::max<size_t>(1, static_cast<size_t>(
      std::llround(fraction * static_cast<double>(n))));
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

ProbeResult linear_probe(const Tensor2& reps,
                         const std::vector<std::string>& labels,
                         double fraction, const ProbeConfig& cfg) {
  SSLSV_REQUIRE(reps.rows == labels.size(),
                "linear_probe: reps/labels size mismatch");
  SSLSV_REQUIRE(reps.rows >= 2, "linear_probe: need at least two rows");

  const std::vector<size_t> keep =
      sample_fraction(reps.rows, fraction, cfg.seed, "linear_probe");

  std::vector<std::string> kept_labels;
  Tensor2 x(keep.size(), reps.cols);
  for (size_t i = 0; i < keep.size(); ++i) {
    std::copy(reps.row(keep[i]), reps.row(keep[i]) + reps.cols, x.row(i));
    kept_labels.push_back(labels[keep[i]]);
  }

  std::vector<int> ids;
  std::vector<std::string> classes = index_classes(kept_labels, &ids);
  SSLSV_REQUIRE(classes.size() >= 2,
                "linear_probe: sampled fraction contains a single speaker");

  HeadTrainResult head = train_softmax_head(x, ids, classes.size(), cfg.epochs,
                                            cfg.lr, cfg.seed);

  ProbeResult out;
  out.model.weight = std::move(head.weight);
  out.model.bias = std::move(head.bias);
  out.model.classes = std::move(classes);
  out.train_accuracy = head.accuracy;
  out.used_rows = keep.size();

  // All-pairs verification over the full input set, scored in probe-logit
  // space.
  std::vector<std::vector<double>> transformed(reps.rows);
  for (size_t i = 0; i < reps.rows; ++i) {
    std::vector<double> rep(reps.row(i), reps.row(i) + reps.cols);
    transformed[i] = out.model.transform(rep);
  }
  std::vector<double> scores;
  std::vector<int> pair_labels;
  for (size_t i = 0; i < reps.rows; ++i) {
    for (size_t j = i + 1; j < reps.rows; ++j) {
      scores.push_back(cosine_score(transformed[i], transformed[j]));
      pair_labels.push_back(labels[i] == labels[j] ? 1 : 0);
    }
  }
  out.eer_percent = compute_eer(scores, pair_labels).first;
  return out;
}

EvalResult score_trials_with_probe(const Model& model, const ProbeModel& probe,
                                   const TrialList& trials,
                                   const SpectrogramConfig& features,
                                   size_t chunk_len, int n_crops,
                                   const DcfConfig& dcf) {
  SSLSV_REQUIRE(!trials.trials.empty(), "score_trials_with_probe: empty trial list");
  std::map<std::string, std::vector<double>> cache;
  auto transformed = [&](const std::string& path) -> const std::vector<double>& {
    auto it = cache.find(path);
    if (it != cache.end()) return it->second;
    const Waveform w = load_wav(path, features.sample_rate);
    const std::vector<double> rep =
        extract_embedding(model, w, features, chunk_len, n_crops);
    return cache.emplace(path, probe.transform(rep)).first->second;
  };

  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& t : trials.trials) {
    scores.push_back(
        cosine_score(transformed(t.enroll_path), transformed(t.test_path)));
    labels.push_back(t.label);
  }
  EvalResult res;
  const auto [eer, thr] = compute_eer(scores, labels);
  res.eer_percent = eer;
  res.eer_threshold = thr;
  const MinDcfResult dc = compute_min_dcf(scores, labels, dcf);
  res.min_dcf = dc.value;
  res.dcf_threshold = dc.threshold;
  res.min_dcf_raw = dc.raw;
  return res;
}

FineTuneResult fine_tune(const Model& base, const Manifest& labeled,
                         const FineTuneConfig& cfg) {
  SSLSV_REQUIRE(!labeled.entries.empty(), "fine_tune: empty manifest");
  cfg.schedule.validate();

  const std::vector<size_t> keep =
      sample_fraction(labeled.size(), cfg.fraction, cfg.seed, "fine_tune");
  std::vector<std::string> kept_labels;
  for (size_t i : keep) {
    const auto& e = labeled.entries[i];
    SSLSV_REQUIRE(e.speaker_id.has_value(), "fine_tune: utterance '",
                  e.utterance_id, "' has no speaker label");
    kept_labels.push_back(*e.speaker_id);
  }
  std::vector<int> ids;
  std::vector<std::string> classes = index_classes(kept_labels, &ids);
  SSLSV_REQUIRE(classes.size() >= 2,
                "fine_tune: sampled fraction contains a single speaker");

  const size_t chunk_len = static_cast<size_t>(
      std::llround(cfg.chunk_seconds * cfg.features.sample_rate));

  FineTuneResult out;
  out.model = base;
  out.classes = classes;

  if (cfg.freeze_backbone) {
    // Frozen representations once, then exactly the probe's head update.
    Tensor2 reps(keep.size(), static_cast<size_t>(base.config().rep_dim));
    for (size_t i = 0; i < keep.size(); ++i) {
      const Waveform w =
          load_wav(labeled.entries[keep[i]].file_path, cfg.features.sample_rate);
      const std::vector<double> rep =
          extract_embedding(base, w, cfg.features, chunk_len, cfg.embed_n_crops);
      std::copy(rep.begin(), rep.end(), reps.row(i));
    }
    HeadTrainResult head = train_softmax_head(
        reps, ids, classes.size(), cfg.probe_epochs, cfg.schedule.initial,
        cfg.seed);
    out.head_weight = std::move(head.weight);
    out.head_bias = std::move(head.bias);
    out.train_accuracy = head.accuracy;
    return out;
  }

  Model& model = out.model;
  Rng init_rng(mix64(cfg.seed, fnv1a64("finetune_head")));
  LinearLayer head;
  head.init(classes.size(), static_cast<size_t>(base.config().rep_dim), init_rng);

  std::vector<ParamRef> refs = model.parameters();
  refs.push_back({"head.weight", head.weight.data.data(),
                  head.grad_weight.data.data(), head.weight.size()});
  refs.push_back({"head.bias", head.bias.data(), head.grad_bias.data(),
                  head.bias.size()});
  size_t total = 0;
  for (const auto& r : refs) total += r.size;
  AdamState adam;
  adam.init(total);

  // Pre-load the sampled utterances once.
  std::vector<Waveform> wavs(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    wavs[i] = load_wav(labeled.entries[keep[i]].file_path, cfg.features.sample_rate);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.schedule, epoch);
    std::vector<size_t> order(keep.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix64(mix64(cfg.seed, fnv1a64("finetune_epoch")), epoch));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    }

    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      const size_t n = end - begin;

      FeatureBatch batch;
      std::vector<int> targets(n);
      for (size_t b = 0; b < n; ++b) {
        const size_t item = order[begin + b];
        const Waveform& w = wavs[item];
        Rng rng(item_stream_key(cfg.seed, static_cast<uint64_t>(epoch),
                                labeled.entries[keep[item]].utterance_id));
        const size_t start = w.size() > chunk_len
                                 ? rng.uniform_index(w.size() - chunk_len + 1)
                                 : 0;
        FeatureMatrix f =
            instance_mvn(log_mel(crop(w, start, chunk_len), cfg.features));
        if (b == 0) batch.reserve(n, f.num_frames(), f.num_bins());
        batch.set_item(b, f);
        targets[b] = ids[item];
      }

      Model::EncoderCache cache;
      const Tensor2 y = model.encoder_forward(batch, &cache);
      Tensor2 logits;
      head.forward(y, logits);
      Tensor2 dlogits;
      softmax_cross_entropy(logits, targets, &dlogits);

      model.zero_grad();
      head.zero_grad();
      Tensor2 dy;
      head.backward(y, dlogits, &dy);
      model.encoder_backward(cache, dy);
      adam_step(refs, adam, lr);
    }
  }

  // Final training accuracy over the whole labeled subset.
  size_t correct = 0;
  for (size_t i = 0; i < keep.size(); ++i) {
    const std::vector<double> rep = extract_embedding(
        model, wavs[i], cfg.features, chunk_len, cfg.embed_n_crops);
    Tensor2 one(1, rep.size());
    std::copy(rep.begin(), rep.end(), one.row(0));
    Tensor2 logits;
    head.forward(one, logits);
    const double* row = logits.row(0);
    const size_t arg = static_cast<size_t>(
        std::max_element(row, row + logits.cols) - row);
    if (static_cast<int>(arg) == ids[i]) ++correct;
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(keep.size());
  out.head_weight = std::move(head.weight);
  out.head_bias = std::move(head.bias);
  return out;
}

}  // namespace sslsv
