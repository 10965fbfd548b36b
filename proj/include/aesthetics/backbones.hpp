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

// Convolutional feature extractors (AlexNet, VGG19, a tiny test backbone),
// the dense classification head that replaces the ImageNet classifier, and
// the freeze/fine-tune policies applied to them.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/nn/archive.hpp"
#include "aesthetics/nn/layers.hpp"
#include "aesthetics/nn/tensor.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics::backbones {

enum class Kind { alexnet, vgg19, tiny };

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::alexnet: return "ALEXNET";
    case Kind::vgg19: return "VGG19";
    case Kind::tiny: return "TINY";
  }
  throw Error(Errc::bad_spec, "unknown backbone kind");
}

inline Kind parse_kind(const std::string& s) {
  if (s == "ALEXNET" || s == "alexnet") return Kind::alexnet;
  if (s == "VGG19" || s == "vgg19") return Kind::vgg19;
  if (s == "TINY" || s == "tiny") return Kind::tiny;
  throw Error(Errc::bad_spec, "unknown backbone kind '" + s + "'");
}

struct ConvSpec {
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
};

struct BlockSpec {
  std::vector<ConvSpec> convs;
  int pool_kernel = 2;
  int pool_stride = 2;
};

struct BackboneSpec {
  Kind kind = Kind::tiny;
  std::vector<BlockSpec> blocks;
  int input_channels = 3;
  int input_size = 224;
  bool pretrained = false;
  std::optional<std::string> weights_path;
  /// 1-based global index of the first convolution unfrozen by
  /// HEAD_PLUS_TOP_CONV.
  int top_conv_start = 1;
  nn::Init dense_init = nn::Init::he_uniform;

  int conv_count() const {
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.convs.size());
    return n;
  }
};

/// 16 convolutions in blocks of 2/2/4/4/4, each block closed by a 2x2 pool.
/// Fine-tuning unfreezes blocks 4 and 5.
inline BackboneSpec vgg19_spec() {
  BackboneSpec s;
  s.kind = Kind::vgg19;
  const int widths[] = {64, 128, 256, 512, 512};
  const int counts[] = {2, 2, 4, 4, 4};
  for (int b = 0; b < 5; ++b) s.blocks.push_back({std::vector<ConvSpec>(counts[b], ConvSpec{widths[b], 3, 1, 1}), 2, 2});
  s.top_conv_start = 2 + 2 + 4 + 1;
  s.pretrained = true;
  return s;
}

/// Five convolutions (11/5/3/3/3) with overlapping 3x3/2 pools; the three
/// fully connected layers live in the head. Fine-tuning unfreezes conv 4-5.
inline BackboneSpec alexnet_spec() {
  BackboneSpec s;
  s.kind = Kind::alexnet;
  s.blocks = {
      {{{64, 11, 4, 2}}, 3, 2},
      {{{192, 5, 1, 2}}, 3, 2},
      {{{384, 3, 1, 1}, {256, 3, 1, 1}, {256, 3, 1, 1}}, 3, 2},
  };
  s.top_conv_start = 4;
  s.dense_init = nn::Init::normal_001;
  return s;
}

/// Two single-convolution blocks, 224 -> 7 spatially; F = c2 * 49.
inline BackboneSpec tiny_spec(int c1 = 8, int c2 = 16) {
  BackboneSpec s;
  s.kind = Kind::tiny;
  s.blocks = {{{{c1, 3, 2, 1}}, 4, 4}, {{{c2, 3, 1, 1}}, 4, 4}};
  s.top_conv_start = 2;
  return s;
}

inline void validate(const BackboneSpec& s) {
  std::vector<int> counts;
  for (const auto& b : s.blocks) {
    if (b.convs.empty()) throw Error(Errc::bad_spec, "block without convolutions");
    counts.push_back(static_cast<int>(b.convs.size()));
  }
  switch (s.kind) {
    case Kind::vgg19:
      if (counts != std::vector<int>{2, 2, 4, 4, 4}) throw Error(Errc::bad_spec, "VGG19 needs conv blocks 2/2/4/4/4");
      break;
    case Kind::alexnet:
      if (s.conv_count() != 5) throw Error(Errc::bad_spec, "AlexNet needs 5 convolutions");
      break;
    case Kind::tiny:
      if (counts != std::vector<int>{1, 1}) throw Error(Errc::bad_spec, "TINY needs two single-conv blocks");
      break;
    default:
      throw Error(Errc::bad_spec, "unknown backbone kind");
  }
  if (s.top_conv_start < 1 || s.top_conv_start > s.conv_count()) throw Error(Errc::bad_spec, "top_conv_start out of range");
}

struct ConvInfo {
  std::size_t layer = 0;  // index in the Sequential
  int block = 0;          // 1-based
  int index_in_block = 0; // 1-based
  int global_index = 0;   // 1-based
};

/// Feature extractor: (B, 3, 224, 224) -> (B, feature_width).
struct Backbone {
  BackboneSpec spec;
  nn::Sequential features;
  std::vector<ConvInfo> convs;
  int feature_width = 0;

  nn::Conv2d& conv(int global_index) {
    return dynamic_cast<nn::Conv2d&>(features.layer(convs.at(static_cast<std::size_t>(global_index - 1)).layer));
  }
  const nn::Conv2d& conv(int global_index) const {
    return dynamic_cast<const nn::Conv2d&>(features.layer(convs.at(static_cast<std::size_t>(global_index - 1)).layer));
  }
};

inline Backbone build_backbone(const BackboneSpec& spec, std::uint64_t seed) {
  validate(spec);
  Backbone bb;
  bb.spec = spec;
  int channels = spec.input_channels;
  int global = 0;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& block = spec.blocks[b];
    const std::string prefix = "block" + std::to_string(b + 1);
    for (std::size_t j = 0; j < block.convs.size(); ++j) {
      const auto& c = block.convs[j];
      const std::string n = prefix + ".conv" + std::to_string(j + 1);
      bb.convs.push_back({bb.features.size(), static_cast<int>(b + 1), static_cast<int>(j + 1), ++global});
      bb.features.add<nn::Conv2d>(n, channels, c.out_channels, c.kernel, c.stride, c.pad);
      bb.features.add<nn::ReLU>(prefix + ".relu" + std::to_string(j + 1));
      channels = c.out_channels;
    }
    bb.features.add<nn::MaxPool2d>(prefix + ".pool", block.pool_kernel, block.pool_stride);
  }
  bb.features.add<nn::Flatten>("flatten");
  bb.feature_width = bb.features.output_shape({spec.input_channels, spec.input_size, spec.input_size})[0];
  bb.features.initialize(seed);
  return bb;
}

// ---------------------------------------------------------------------------
// Head

struct HeadSpec {
  /// Dense layer widths; ReLU after every layer but the last, which emits
  /// the two class logits.
  std::vector<int> widths;
  nn::Init init = nn::Init::he_uniform;
};

/// Nine dense layers tapering from 4096 for VGG19, the classic
/// 4096-4096-2 classifier for AlexNet, a 32-2 head for TINY.
inline HeadSpec default_head(const BackboneSpec& spec) {
  switch (spec.kind) {
    case Kind::vgg19: return {{4096, 2048, 1024, 512, 256, 128, 64, 32, 2}, spec.dense_init};
    case Kind::alexnet: return {{4096, 4096, 2}, spec.dense_init};
    case Kind::tiny: return {{32, 2}, spec.dense_init};
  }
  throw Error(Errc::bad_spec, "unknown backbone kind");
}

inline void validate(const HeadSpec& h) {
  if (h.widths.empty()) throw Error(Errc::bad_spec, "head needs at least one layer");
  for (int w : h.widths)
    if (w <= 0) throw Error(Errc::bad_spec, "head widths must be positive");
  if (h.widths.back() != 2) throw Error(Errc::bad_spec, "head must end in 2 outputs");
}

/// Dense stack named "<prefix>.dense{k}".
inline nn::Sequential build_dense_stack(const HeadSpec& head, int in_width, const std::string& prefix,
                                        std::uint64_t seed) {
  validate(head);
  nn::Sequential seq;
  int width = in_width;
  for (std::size_t k = 0; k < head.widths.size(); ++k) {
    const std::string n = prefix + ".dense" + std::to_string(k + 1);
    seq.add<nn::Dense>(n, width, head.widths[k], head.init);
    if (k + 1 < head.widths.size()) seq.add<nn::ReLU>(prefix + ".relu" + std::to_string(k + 1));
    width = head.widths[k];
  }
  seq.initialize(seed);
  return seq;
}

// ---------------------------------------------------------------------------
// Model: one or more feature columns fused by concatenation into a dense
// classifier. A single-column model is a backbone with a replaced head.

struct Model {
  std::vector<Backbone> columns;
  nn::Sequential classifier;

  bool multi_column() const { return columns.size() > 1; }
  std::string classifier_name() const { return multi_column() ? "fusion" : "head"; }

  int fused_width() const {
    int w = 0;
    for (const auto& c : columns) w += c.feature_width;
    return w;
  }

  /// One (B, 3, H, W) tensor per column -> (B, 2) logits.
  nn::Tensor forward(std::span<const nn::Tensor> inputs, bool keep) {
    if (inputs.size() != columns.size())
      throw Error(Errc::bad_shape, "expected " + std::to_string(columns.size()) + " column inputs");
    const int batch = inputs[0].dim(0);
    nn::Tensor fused({batch, fused_width()});
    int offset = 0;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (inputs[i].dim(0) != batch) throw Error(Errc::bad_shape, "column batch sizes differ");
      const auto feat = columns[i].features.forward(inputs[i], keep);
      const int fw = columns[i].feature_width;
      for (int s = 0; s < batch; ++s) std::copy_n(feat.row(s).data(), fw, fused.row(s).data() + offset);
      offset += fw;
    }
    return classifier.forward(std::move(fused), keep);
  }

  nn::Tensor forward(const nn::Tensor& input, bool keep) { return forward(std::span<const nn::Tensor>(&input, 1), keep); }

  void backward(const nn::Tensor& dlogits) {
    bool columns_trainable = false;
    for (const auto& c : columns) columns_trainable |= c.features.has_trainable();
    auto dfused = classifier.backward(dlogits, columns_trainable);
    if (!columns_trainable) return;
    const int batch = dfused.dim(0);
    int offset = 0;
    for (auto& c : columns) {
      const int fw = c.feature_width;
      if (c.features.has_trainable()) {
        nn::Tensor d({batch, fw});
        for (int s = 0; s < batch; ++s) std::copy_n(dfused.row(s).data() + offset, fw, d.row(s).data());
        c.features.backward(std::move(d), false);
      }
      offset += fw;
    }
  }

  /// Parameters with their checkpoint names: "block{i}.conv{j}.weight" and
  /// "head.dense{k}.*" for one column; "column{c}.block..." and
  /// "fusion.dense{m}.*" for several.
  std::vector<std::pair<std::string, nn::Param*>> named_params() {
    std::vector<std::pair<std::string, nn::Param*>> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string prefix = multi_column() ? "column" + std::to_string(i + 1) + "." : "";
      for (auto* p : columns[i].features.params()) out.emplace_back(prefix + p->name, p);
    }
    for (auto* p : classifier.params()) out.emplace_back(p->name, p);
    return out;
  }
  std::vector<std::pair<std::string, const nn::Param*>> named_params() const {
    auto tmp = const_cast<Model*>(this)->named_params();
    return {tmp.begin(), tmp.end()};
  }
  std::vector<nn::Param*> params() {
    std::vector<nn::Param*> out;
    for (auto& [n, p] : named_params()) out.push_back(p);
    return out;
  }
  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }
  std::size_t parameter_count() const {
    std::size_t n = classifier.parameter_count();
    for (const auto& c : columns) n += c.features.parameter_count();
    return n;
  }
};

/// Attaches a fresh dense head to a feature extractor.
inline Model replace_head(Backbone backbone, const HeadSpec& head, std::uint64_t seed) {
  Model m;
  const int width = backbone.feature_width;
  m.columns.push_back(std::move(backbone));
  m.classifier = build_dense_stack(head, width, "head", mix_seed(seed, "head"));
  return m;
}

// ---------------------------------------------------------------------------
// Trainable policies

enum class TrainablePolicy { head_only, head_plus_top_conv, all };

inline std::string to_string(TrainablePolicy p) {
  switch (p) {
    case TrainablePolicy::head_only: return "HEAD_ONLY";
    case TrainablePolicy::head_plus_top_conv: return "HEAD_PLUS_TOP_CONV";
    case TrainablePolicy::all: return "ALL";
  }
  return "?";
}

inline TrainablePolicy parse_policy(const std::string& s) {
  if (s == "HEAD_ONLY") return TrainablePolicy::head_only;
  if (s == "HEAD_PLUS_TOP_CONV") return TrainablePolicy::head_plus_top_conv;
  if (s == "ALL") return TrainablePolicy::all;
  throw Error(Errc::bad_config, "unknown trainable policy '" + s + "'");
}

inline bool conv_trainable(const BackboneSpec& spec, int global_index, TrainablePolicy policy) {
  switch (policy) {
    case TrainablePolicy::head_only: return false;
    case TrainablePolicy::head_plus_top_conv: return global_index >= spec.top_conv_start;
    case TrainablePolicy::all: return true;
  }
  return false;
}

inline void set_trainable(Backbone& bb, TrainablePolicy policy) {
  for (const auto& info : bb.convs) {
    const bool on = conv_trainable(bb.spec, info.global_index, policy);
    for (auto* p : bb.features.layer(info.layer).params()) p->trainable = on;
  }
}

/// The classifier (head or fusion) is trainable under every policy.
inline void set_trainable(Model& m, TrainablePolicy policy) {
  for (auto& c : m.columns) set_trainable(c, policy);
  for (auto* p : m.classifier.params()) p->trainable = true;
}

// ---------------------------------------------------------------------------
// Pretrained weights: an archive with "block{i}.conv{j}.weight|bias".

inline void save_backbone_weights(const Backbone& bb, const std::string& path) {
  nn::Archive a;
  a.meta["kind"] = to_string(bb.spec.kind);
  for (const auto* p : bb.features.params()) a.tensors.emplace_back(p->name, p->value);
  nn::save_archive(path, a);
}

/// Copies convolution weights from `path`. The head is untouched. A missing
/// file is accepted only when the spec does not ask for pretrained weights.
inline void load_pretrained(Backbone& bb, const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) {
    if (bb.spec.pretrained) throw Error(Errc::weights_incompatible, "weights file not found: '" + path + "'");
    return;
  }
  nn::Archive a;
  try {
    a = nn::load_archive(path);
  } catch (const Error& e) {
    throw Error(Errc::weights_incompatible, e.what());
  }
  for (auto* p : bb.features.params()) {
    const auto* t = a.find(p->name);
    if (!t) throw Error(Errc::weights_incompatible, "missing " + p->name);
    if (t->shape() != p->value.shape())
      throw Error(Errc::weights_incompatible, p->name + ": expected " + nn::shape_string(p->value.shape()) + ", got " +
                                                  nn::shape_string(t->shape()));
  }
  for (auto* p : bb.features.params()) p->value = *a.find(p->name);
}

}  // namespace aesthetics::backbones
