/**
 * Copyright 2026 The Aesthetics Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Staged training (head-only, then top-conv fine-tuning), evaluation,
// prediction and checkpointing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "aesthetics/ava.hpp"
#include "aesthetics/backbones.hpp"
#include "aesthetics/error.hpp"
#include "aesthetics/image_io.hpp"
#include "aesthetics/multicolumn.hpp"
#include "aesthetics/nn/archive.hpp"
#include "aesthetics/nn/layers.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics::train {

using backbones::Model;
using backbones::TrainablePolicy;

inline constexpr int kLow = 0;
inline constexpr int kHigh = 1;

struct TrainStage {
  std::string name;
  int epochs = 1;
  TrainablePolicy policy = TrainablePolicy::head_only;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double momentum = 0.9;
};

inline void validate(const TrainStage& s) {
  if (s.epochs < 1) throw Error(Errc::bad_config, "stage " + s.name + ": epochs must be >= 1");
  if (!(s.learning_rate > 0)) throw Error(Errc::bad_config, "stage " + s.name + ": learning rate must be > 0");
  if (s.batch_size < 1) throw Error(Errc::bad_config, "stage " + s.name + ": batch size must be >= 1");
}

struct ScheduleParams {
  int head_epochs = 300;
  int finetune_epochs = 100;
  double epoch_multiplier = 1.0;
  int min_stage_epochs = 1;
  double lr_head = 1e-3;
  double lr_finetune = 1e-4;
  int batch_size = 32;
  double momentum = 0.9;

  int scaled(int epochs) const {
    const auto e = static_cast<int>(std::llround(epochs * epoch_multiplier));
    return std::max({1, min_stage_epochs, e});
  }
};

/// Head-only training followed by fine-tuning with the top convolutions
/// unfrozen. A single-column AlexNet is trained from scratch in one stage.
inline std::vector<TrainStage> default_schedule(backbones::Kind kind, int columns, const ScheduleParams& p = {}) {
  std::vector<TrainStage> stages;
  if (kind == backbones::Kind::alexnet && columns == 1) {
    stages.push_back({"scratch", p.scaled(p.head_epochs), TrainablePolicy::all, p.lr_head, p.batch_size, p.momentum});
  } else {
    stages.push_back({"head", p.scaled(p.head_epochs), TrainablePolicy::head_only, p.lr_head, p.batch_size, p.momentum});
    stages.push_back({"finetune", p.scaled(p.finetune_epochs), TrainablePolicy::head_plus_top_conv, p.lr_finetune,
                      p.batch_size, p.momentum});
  }
  for (const auto& s : stages) validate(s);
  return stages;
}

// ---------------------------------------------------------------------------
// Data

struct Example {
  std::string id;
  int label = kLow;
  std::string path;
  /// In-memory pixels; when absent the image is decoded from `path`.
  std::optional<Image> image;
};

inline int label_index(ava::Label l) {
  switch (l) {
    case ava::Label::low: return kLow;
    case ava::Label::high: return kHigh;
    case ava::Label::excluded: break;
  }
  throw Error(Errc::bad_label, "EXCLUDED records carry no class");
}

/// Examples of one split with lazily built, cached variant sets.
class Dataset {
 public:
  Dataset(std::vector<Example> examples, multicolumn::PreprocessParams params, std::uint64_t seed)
      : examples_(std::move(examples)), params_(std::move(params)), seed_(seed), cache_(examples_.size()) {}

  static Dataset from_records(const std::vector<ava::ImageRecord>& records, ava::Split split,
                              multicolumn::PreprocessParams params, std::uint64_t seed) {
    std::vector<Example> ex;
    for (const auto& r : records)
      if (r.split == split && r.label && *r.label != ava::Label::excluded)
        ex.push_back({r.id, label_index(*r.label), r.path, std::nullopt});
    return Dataset(std::move(ex), std::move(params), seed);
  }

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const Example& example(std::size_t i) const { return examples_.at(i); }
  std::uint64_t seed() const { return seed_; }

  multicolumn::VariantSet& variants(std::size_t i) {
    auto& slot = cache_.at(i);
    if (!slot) {
      const auto& e = examples_[i];
      Image img = e.image ? *e.image : load_image(e.path);
      slot = std::make_unique<multicolumn::VariantSet>(std::move(img), multicolumn::crop_seed(seed_, e.id), params_);
    }
    return *slot;
  }

  /// Same examples with every label flipped.
  Dataset flipped() const {
    auto ex = examples_;
    for (auto& e : ex) e.label = 1 - e.label;
    return Dataset(std::move(ex), params_, seed_);
  }

 private:
  std::vector<Example> examples_;
  multicolumn::PreprocessParams params_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<multicolumn::VariantSet>> cache_;
};

// ---------------------------------------------------------------------------
// Training

struct EpochStat {
  std::string stage;
  int epoch = 0;  // 1-based within the stage
  int steps = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // running accuracy of the training forward passes
  std::vector<double> step_losses;
};

struct StageContext {
  std::uint64_t seed = 0;
  int stage_index = 0;
  bool class_weighted = false;
  /// Called after every epoch; returning false stops training there.
  std::function<bool(const EpochStat&, const Model&)> on_epoch_end;
};

struct StageResult {
  std::vector<EpochStat> epochs;
  bool interrupted = false;
};

inline std::map<std::string, std::uint64_t> frozen_checksums(const Model& m) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [name, p] : m.named_params())
    if (!p->trainable) out[name] = nn::checksum(p->value);
  return out;
}

inline std::vector<double> class_weights(const Dataset& data) {
  std::array<double, 2> count{0, 0};
  for (std::size_t i = 0; i < data.size(); ++i) count[data.example(i).label] += 1;
  const double n = count[0] + count[1];
  std::vector<double> w(2, 1.0);
  for (int c = 0; c < 2; ++c)
    if (count[c] > 0) w[c] = n / (2.0 * count[c]);
  return w;
}

/// Runs epochs [first_epoch, stage.epochs) of one stage. Parameters outside
/// the stage policy are never written; this is re-checked by checksum when
/// the stage returns.
inline StageResult run_stage(Model& model, const TrainStage& stage, const std::vector<multicolumn::ColumnConfig>& columns,
                             Dataset& data, const StageContext& ctx, int first_epoch = 0) {
  validate(stage);
  if (data.empty()) throw Error(Errc::empty_split, "training split is empty");
  backbones::set_trainable(model, stage.policy);
  if (first_epoch == 0)
    for (auto* p : model.params()) p->velocity = {};
  const auto frozen_before = frozen_checksums(model);
  const nn::SgdMomentum opt{stage.learning_rate, stage.momentum};
  const auto weights = ctx.class_weighted ? class_weights(data) : std::vector<double>{};

  StageResult result;
  std::vector<std::size_t> order(data.size());
  for (int epoch = first_epoch; epoch < stage.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(ctx.seed, "shuffle", ctx.stage_index, epoch));
    shuffle(order, rng);
    const int variant_epoch = ctx.stage_index * 1'000'000 + epoch;

    EpochStat stat{stage.name, epoch + 1, 0, 0.0, 0.0, {}};
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += stage.batch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(stage.batch_size));
      std::vector<std::vector<nn::Tensor>> per_column(columns.size());
      std::vector<int> targets;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& ex = data.example(order[k]);
        auto inputs = multicolumn::select_variants(data.variants(order[k]), columns, multicolumn::Mode::train, ctx.seed,
                                                   ex.id, variant_epoch);
        for (std::size_t c = 0; c < columns.size(); ++c) per_column[c].push_back(std::move(inputs[c]));
        targets.push_back(ex.label);
      }
      std::vector<nn::Tensor> batch;
      for (auto& col : per_column) batch.push_back(nn::stack(col));

      model.zero_grad();
      const auto logits = model.forward(batch, true);
      auto loss = nn::cross_entropy(logits, targets, weights);
      if (!std::isfinite(loss.loss))
        throw Error(Errc::diverged, "stage " + stage.name + ", epoch " + std::to_string(epoch + 1) + ", batch " +
                                        std::to_string(stat.steps + 1));
      model.backward(loss.grad);
      opt.step(model.params());

      for (std::size_t s = 0; s < targets.size(); ++s) {
        const auto z = logits.row(static_cast<int>(s));
        const int pred = z[1] > z[0] ? kHigh : kLow;
        correct += pred == targets[s];
      }
      loss_sum += loss.loss * static_cast<double>(targets.size());
      stat.step_losses.push_back(loss.loss);
      ++stat.steps;
    }
    stat.loss = loss_sum / static_cast<double>(order.size());
    stat.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    result.epochs.push_back(stat);
    if (ctx.on_epoch_end && !ctx.on_epoch_end(stat, model)) {
      result.interrupted = epoch + 1 < stage.epochs;
      break;
    }
  }
  if (frozen_checksums(model) != frozen_before)
    throw std::logic_error("frozen parameters changed during stage " + stage.name);
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation and prediction

struct Prediction {
  int label = kLow;
  double confidence = 0.5;
  std::vector<double> probabilities;
};

/// Argmax of the class probabilities; ties resolve to LOW.
inline Prediction decide(std::vector<double> probs) {
  Prediction p;
  p.label = probs[kHigh] > probs[kLow] ? kHigh : kLow;
  p.confidence = probs[p.label];
  p.probabilities = std::move(probs);
  return p;
}

inline Prediction predict_logits(std::span<const float> logits) { return decide(nn::softmax(logits)); }

/// Canonical EVAL pick, or with `averaging` the mean class probability over
/// every combination of available menu entries.
inline Prediction predict(Model& model, multicolumn::VariantSet& set, const std::vector<multicolumn::ColumnConfig>& columns,
                          bool averaging) {
  std::vector<std::vector<multicolumn::ColumnVariant>> combos;
  auto available = [&](multicolumn::ColumnVariant v) { return set.available(v); };
  if (averaging)
    combos = multicolumn::all_combinations(columns, available);
  else
    combos.push_back(multicolumn::choose_variants(columns, multicolumn::Mode::eval, 0, "", 0, available));
  std::vector<double> mean(2, 0.0);
  for (const auto& combo : combos) {
    std::vector<nn::Tensor> inputs;
    for (auto v : combo) {
      nn::Tensor t = *set.tensor(v);
      auto shape = t.shape();
      shape.insert(shape.begin(), 1);
      t.reshape(shape);
      inputs.push_back(std::move(t));
    }
    const auto logits = model.forward(inputs, false);
    const auto p = nn::softmax(logits.row(0));
    for (int c = 0; c < 2; ++c) mean[c] += p[c] / static_cast<double>(combos.size());
  }
  return decide(std::move(mean));
}

inline Prediction predict(Model& model, const Image& image, const std::vector<multicolumn::ColumnConfig>& columns,
                          const multicolumn::PreprocessParams& params, std::uint64_t seed, const std::string& id,
                          bool averaging) {
  multicolumn::VariantSet set(image, multicolumn::crop_seed(seed, id), params);
  return predict(model, set, columns, averaging);
}

/// Fraction of correctly classified examples.
inline double evaluate(Model& model, Dataset& data, const std::vector<multicolumn::ColumnConfig>& columns,
                       bool averaging = false) {
  if (data.empty()) throw Error(Errc::empty_split, "evaluation split is empty");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    correct += predict(model, data.variants(i), columns, averaging).label == data.example(i).label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Checkpoints: parameters under their model names, momentum buffers under
// "<name>@velocity", and string metadata.

struct CheckpointInfo {
  std::string stage_name;
  int stage_index = 0;
  int epoch = 0;  // completed epochs of the stage
  std::string fingerprint;
  std::map<std::string, std::string> extra;
};

inline void save_checkpoint(const std::string& path, const Model& model, const CheckpointInfo& info) {
  nn::Archive a;
  a.meta = info.extra;
  a.meta["stage"] = info.stage_name;
  a.meta["stage_index"] = std::to_string(info.stage_index);
  a.meta["epoch"] = std::to_string(info.epoch);
  a.meta["fingerprint"] = info.fingerprint;
  a.meta["columns"] = std::to_string(model.columns.size());
  for (const auto& [name, p] : model.named_params()) {
    a.tensors.emplace_back(name, p->value);
    if (!p->velocity.empty()) a.tensors.emplace_back(name + "@velocity", p->velocity);
  }
  nn::save_archive(path, a);
}

inline CheckpointInfo read_checkpoint_info(const nn::Archive& a) {
  CheckpointInfo info;
  info.extra = a.meta;
  info.stage_name = a.meta_or("stage");
  info.stage_index = std::stoi(a.meta_or("stage_index", "0"));
  info.epoch = std::stoi(a.meta_or("epoch", "0"));
  info.fingerprint = a.meta_or("fingerprint");
  return info;
}

/// Restores parameter values (bitwise) and momentum buffers.
inline CheckpointInfo load_checkpoint(const std::string& path, Model& model) {
  const auto a = nn::load_archive(path);
  auto named = model.named_params();
  for (const auto& [name, p] : named) {
    const auto* t = a.find(name);
    if (!t) throw Error(Errc::weights_incompatible, path + ": missing " + name);
    if (t->shape() != p->value.shape()) throw Error(Errc::weights_incompatible, path + ": shape of " + name);
  }
  for (auto& [name, p] : named) {
    p->value = *a.find(name);
    const auto* v = a.find(name + "@velocity");
    p->velocity = v ? *v : nn::Tensor{};
    p->grad = {};
  }
  return read_checkpoint_info(a);
}

// ---------------------------------------------------------------------------
// Whole-schedule driver with checkpoint/resume.

struct EpochHistory {
  std::vector<EpochStat> epochs;

  std::string to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : epochs)
      j.push_back({{"stage", e.stage}, {"epoch", e.epoch}, {"steps", e.steps}, {"loss", e.loss}, {"accuracy", e.accuracy},
                   {"step_losses", e.step_losses}});
    return j.dump();
  }
  static EpochHistory from_json(const std::string& text) {
    EpochHistory h;
    if (text.empty()) return h;
    for (const auto& e : nlohmann::json::parse(text))
      h.epochs.push_back({e.at("stage").get<std::string>(), e.at("epoch").get<int>(), e.at("steps").get<int>(),
                          e.at("loss").get<double>(), e.at("accuracy").get<double>(),
                          e.at("step_losses").get<std::vector<double>>()});
    return h;
  }
};

struct ScheduleOptions {
  std::uint64_t seed = 0;
  bool class_weighted = false;
  /// Directory for "latest.ckpt" and per-stage checkpoints; empty disables
  /// checkpointing.
  std::string run_dir;
  int checkpoint_interval = 1;
  bool resume = false;
  std::string fingerprint;
  std::map<std::string, std::string> checkpoint_meta;
  /// Stop (as if killed) after this many epochs have run in this call.
  std::optional<int> stop_after_epochs;
  /// Observes every finished epoch, including those before a failure.
  std::function<void(const EpochStat&)> on_epoch;
};

struct ScheduleResult {
  EpochHistory history;
  bool interrupted = false;
  bool resumed = false;
};

inline ScheduleResult run_schedule(Model& model, const std::vector<TrainStage>& stages,
                                   const std::vector<multicolumn::ColumnConfig>& columns, Dataset& data,
                                   const ScheduleOptions& opt) {
  namespace fs = std::filesystem;
  ScheduleResult result;
  int start_stage = 0, start_epoch = 0;
  const std::string latest = opt.run_dir.empty() ? "" : (fs::path(opt.run_dir) / "latest.ckpt").string();
  if (opt.resume && !latest.empty() && fs::exists(latest)) {
    const auto info = load_checkpoint(latest, model);
    if (!opt.fingerprint.empty() && info.fingerprint != opt.fingerprint)
      throw Error(Errc::bad_config, "checkpoint fingerprint " + info.fingerprint + " does not match run " + opt.fingerprint);
    result.history = EpochHistory::from_json(info.extra.count("history") ? info.extra.at("history") : "");
    start_stage = info.stage_index;
    start_epoch = info.epoch;
    result.resumed = true;
    if (start_stage < static_cast<int>(stages.size()) && start_epoch >= stages[start_stage].epochs) {
      ++start_stage;
      start_epoch = 0;
    }
  }

  int epochs_this_call = 0;
  for (int s = start_stage; s < static_cast<int>(stages.size()); ++s) {
    const auto& stage = stages[s];
    StageContext ctx;
    ctx.seed = opt.seed;
    ctx.stage_index = s;
    ctx.class_weighted = opt.class_weighted;
    ctx.on_epoch_end = [&](const EpochStat& stat, const Model& m) {
      result.history.epochs.push_back(stat);
      ++epochs_this_call;
      if (opt.on_epoch) opt.on_epoch(stat);
      const bool stage_done = stat.epoch == stage.epochs;
      const bool stopping = opt.stop_after_epochs && epochs_this_call >= *opt.stop_after_epochs;
      if (!latest.empty() && (stage_done || stopping || stat.epoch % std::max(1, opt.checkpoint_interval) == 0)) {
        CheckpointInfo info{stage.name, s, stat.epoch, opt.fingerprint, opt.checkpoint_meta};
        info.extra["history"] = result.history.to_json();
        save_checkpoint(latest, m, info);
        if (stage_done)
          save_checkpoint((fs::path(opt.run_dir) / ("stage" + std::to_string(s + 1) + "_" + stage.name + ".ckpt")).string(),
                          m, info);
      }
      return !stopping;
    };
    const auto r = run_stage(model, stage, columns, data, ctx, s == start_stage ? start_epoch : 0);
    const bool last_epoch_of_stage = !r.epochs.empty() && r.epochs.back().epoch == stage.epochs;
    if (opt.stop_after_epochs && epochs_this_call >= *opt.stop_after_epochs &&
        !(last_epoch_of_stage && s + 1 == static_cast<int>(stages.size()))) {
      result.interrupted = true;
      return result;
    }
  }
  return result;
}

}  // namespace aesthetics::train
