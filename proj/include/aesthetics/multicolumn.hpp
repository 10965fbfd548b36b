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

// Single/double/triple column assembly: per-column variant menus, per-sample
// variant selection, concatenation fusion and warm starting from smaller
// trained models.

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aesthetics/backbones.hpp"
#include "aesthetics/error.hpp"
#include "aesthetics/geometry.hpp"
#include "aesthetics/image.hpp"
#include "aesthetics/random.hpp"
#include "aesthetics/saliency.hpp"

namespace aesthetics::multicolumn {

enum class ColumnVariant {
  original,
  padded,
  center_crop,
  random_crop_1,
  random_crop_2,
  random_crop_3,
  saliency_spectral,
  saliency_fine,
};

inline constexpr std::array<ColumnVariant, 8> kAllVariants{
    ColumnVariant::original,      ColumnVariant::padded,        ColumnVariant::center_crop,
    ColumnVariant::random_crop_1, ColumnVariant::random_crop_2, ColumnVariant::random_crop_3,
    ColumnVariant::saliency_spectral, ColumnVariant::saliency_fine,
};

inline std::string to_string(ColumnVariant v) {
  switch (v) {
    case ColumnVariant::original: return "ORIGINAL";
    case ColumnVariant::padded: return "PADDED";
    case ColumnVariant::center_crop: return "CENTER_CROP";
    case ColumnVariant::random_crop_1: return "RANDOM_CROP_1";
    case ColumnVariant::random_crop_2: return "RANDOM_CROP_2";
    case ColumnVariant::random_crop_3: return "RANDOM_CROP_3";
    case ColumnVariant::saliency_spectral: return "SALIENCY_SPECTRAL";
    case ColumnVariant::saliency_fine: return "SALIENCY_FINE";
  }
  return "?";
}

inline ColumnVariant parse_variant(const std::string& s) {
  for (auto v : kAllVariants)
    if (to_string(v) == s) return v;
  throw Error(Errc::bad_config, "unknown column variant '" + s + "'");
}

struct ColumnConfig {
  std::vector<ColumnVariant> menu;
  backbones::BackboneSpec backbone;
};

struct FusionConfig {
  backbones::HeadSpec classifier{{512, 2}};
  /// When set, must equal the summed column feature widths.
  std::optional<int> input_width;
};

struct Architecture {
  std::vector<ColumnConfig> columns;
  FusionConfig fusion;

  int column_count() const { return static_cast<int>(columns.size()); }
};

/// "A,B,C|D,E|F": menus of successive columns.
inline std::string describe_menus(const std::vector<ColumnConfig>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += '|';
    for (std::size_t j = 0; j < columns[i].menu.size(); ++j) {
      if (j) out += ',';
      out += to_string(columns[i].menu[j]);
    }
  }
  return out;
}

inline std::vector<std::vector<ColumnVariant>> parse_menus(const std::string& text) {
  std::vector<std::vector<ColumnVariant>> menus;
  std::stringstream cols(text);
  std::string col;
  while (std::getline(cols, col, '|')) {
    std::vector<ColumnVariant> menu;
    std::stringstream items(col);
    std::string item;
    while (std::getline(items, item, ',')) menu.push_back(parse_variant(item));
    menus.push_back(std::move(menu));
  }
  return menus;
}

inline void validate(const Architecture& arch) {
  if (arch.columns.empty()) throw Error(Errc::bad_config, "no columns");
  std::set<ColumnVariant> seen;
  for (const auto& c : arch.columns) {
    if (c.menu.empty()) throw Error(Errc::bad_config, "empty variant menu");
    for (auto v : c.menu)
      if (!seen.insert(v).second) throw Error(Errc::bad_config, to_string(v) + " appears in two columns");
  }
}

/// n = 1: {ORIGINAL} with the backbone's own head.
/// n = 2: {ORIGINAL, PADDED, CENTER_CROP} and {RANDOM_CROP_1..3}.
/// n = 3: as n = 2 plus {SALIENCY_SPECTRAL, SALIENCY_FINE}.
/// Multi-column models fuse through concat -> dense(512, ReLU) -> dense(2).
inline Architecture standard_configs(int n, const backbones::BackboneSpec& backbone) {
  using V = ColumnVariant;
  if (n < 1 || n > 3) throw Error(Errc::bad_config, "column count must be 1, 2 or 3, got " + std::to_string(n));
  Architecture arch;
  if (n == 1) {
    arch.columns.push_back({{V::original}, backbone});
    arch.fusion.classifier = backbones::default_head(backbone);
    return arch;
  }
  arch.columns.push_back({{V::original, V::padded, V::center_crop}, backbone});
  arch.columns.push_back({{V::random_crop_1, V::random_crop_2, V::random_crop_3}, backbone});
  if (n == 3) arch.columns.push_back({{V::saliency_spectral, V::saliency_fine}, backbone});
  arch.fusion.classifier.init = backbone.dense_init;
  return arch;
}

// ---------------------------------------------------------------------------
// Variant construction

struct PreprocessParams {
  geometry::ResizeMode resize = geometry::ResizeMode::aspect_crop;
  geometry::RandomCropParams crops;
  saliency::SpectralResidualParams spectral;
  saliency::FineGrainedParams fine;
  geometry::Normalization norm;
};

/// Lazily built 224x224 views of one image. Random crops are drawn once per
/// image from `crop_seed`; images below 224 on a side are upscaled before
/// cropping. Saliency maps are computed on the ORIGINAL view.
class VariantSet {
 public:
  VariantSet(Image image, std::uint64_t crop_seed, PreprocessParams params = {})
      : image_(std::move(image)), crop_seed_(crop_seed), params_(std::move(params)) {
    if (image_.empty()) throw Error(Errc::empty_image, "variant source");
  }

  const Image& source() const { return image_; }
  const PreprocessParams& params() const { return params_; }

  /// Base raster for center/random crops.
  const Image& crop_base() {
    if (!crop_base_) crop_base_ = geometry::ensure_min_side(image_, geometry::kInputSize);
    return *crop_base_;
  }
  const geometry::RandomCrops& random_crops() {
    if (!crops_) {
      const auto& base = crop_base();
      auto p = params_.crops;
      p.size = geometry::kInputSize;
      crops_ = geometry::random_crops(base.width, base.height, crop_seed_, p);
    }
    return *crops_;
  }
  geometry::CropSpec center_spec() { return geometry::center_crop_spec(crop_base().width, crop_base().height); }

  bool available(ColumnVariant v) {
    const int k = random_index(v);
    return k < 0 || k < static_cast<int>(random_crops().crops.size());
  }

  /// The 224x224 raster of a variant in [0, 255]; nullopt when a random crop
  /// could not be placed.
  std::optional<Image> image(ColumnVariant v) {
    using geometry::kInputSize;
    switch (v) {
      case ColumnVariant::original: return original();
      case ColumnVariant::padded:
        return geometry::resize_to(geometry::pad_to_square(image_), kInputSize, kInputSize, params_.resize);
      case ColumnVariant::center_crop: return geometry::center_crop(crop_base(), kInputSize).first;
      case ColumnVariant::saliency_spectral: return saliency::to_image(saliency::spectral_residual(original(), params_.spectral));
      case ColumnVariant::saliency_fine: return saliency::to_image(saliency::fine_grained(original(), params_.fine));
      default: break;
    }
    const int k = random_index(v);
    const auto& rc = random_crops();
    if (k >= static_cast<int>(rc.crops.size())) return std::nullopt;
    return geometry::apply_crop(crop_base(), rc.crops[k]);
  }

  /// Normalized 3x224x224 tensor, cached.
  const std::optional<nn::Tensor>& tensor(ColumnVariant v) {
    auto& slot = tensors_[static_cast<std::size_t>(v)];
    if (!slot.built) {
      auto img = image(v);
      if (img) slot.value = geometry::normalize_pixels(*img, params_.norm);
      slot.built = true;
    }
    return slot.value;
  }

 private:
  static int random_index(ColumnVariant v) {
    switch (v) {
      case ColumnVariant::random_crop_1: return 0;
      case ColumnVariant::random_crop_2: return 1;
      case ColumnVariant::random_crop_3: return 2;
      default: return -1;
    }
  }
  const Image& original() {
    if (!original_) original_ = geometry::resize_to(image_, geometry::kInputSize, geometry::kInputSize, params_.resize);
    return *original_;
  }

  struct Slot {
    bool built = false;
    std::optional<nn::Tensor> value;
  };

  Image image_;
  std::uint64_t crop_seed_;
  PreprocessParams params_;
  std::optional<Image> crop_base_;
  std::optional<Image> original_;
  std::optional<geometry::RandomCrops> crops_;
  std::array<Slot, kAllVariants.size()> tensors_{};
};

enum class Mode { train, eval };

/// Seed for a record's random crops; fixed across epochs.
inline std::uint64_t crop_seed(std::uint64_t seed, const std::string& record_id) {
  return mix_seed(seed, fnv1a("crops:" + record_id));
}

/// TRAIN draws one menu entry per column uniformly, seeded by
/// (seed, record, epoch, column); EVAL takes the first entry. An unavailable
/// pick falls through to the following menu entries (cyclically).
inline std::vector<ColumnVariant> choose_variants(const std::vector<ColumnConfig>& columns, Mode mode,
                                                  std::uint64_t seed, const std::string& record_id, int epoch,
                                                  const std::function<bool(ColumnVariant)>& available) {
  std::vector<ColumnVariant> picks;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& menu = columns[c].menu;
    if (menu.empty()) throw Error(Errc::bad_config, "empty variant menu");
    std::size_t start = 0;
    if (mode == Mode::train) {
      Rng rng(mix_seed(seed, fnv1a(record_id), static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(c)));
      start = static_cast<std::size_t>(uniform_below(rng, menu.size()));
    }
    bool found = false;
    for (std::size_t k = 0; k < menu.size(); ++k) {
      const auto v = menu[(start + k) % menu.size()];
      if (available(v)) {
        picks.push_back(v);
        found = true;
        break;
      }
    }
    if (!found) throw Error(Errc::no_variant, "record " + record_id + ", column " + std::to_string(c + 1));
  }
  return picks;
}

/// One normalized tensor per column.
inline std::vector<nn::Tensor> select_variants(VariantSet& set, const std::vector<ColumnConfig>& columns, Mode mode,
                                               std::uint64_t seed, const std::string& record_id, int epoch) {
  const auto picks =
      choose_variants(columns, mode, seed, record_id, epoch, [&](ColumnVariant v) { return set.available(v); });
  std::vector<nn::Tensor> out;
  for (auto v : picks) out.push_back(*set.tensor(v));
  return out;
}

/// Cartesian product of the available entries of every column menu.
inline std::vector<std::vector<ColumnVariant>> all_combinations(const std::vector<ColumnConfig>& columns,
                                                                const std::function<bool(ColumnVariant)>& available) {
  std::vector<std::vector<ColumnVariant>> combos{{}};
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<std::vector<ColumnVariant>> next;
    for (const auto& prefix : combos)
      for (auto v : columns[c].menu)
        if (available(v)) {
          auto extended = prefix;
          extended.push_back(v);
          next.push_back(std::move(extended));
        }
    if (next.empty()) throw Error(Errc::no_variant, "column " + std::to_string(c + 1) + " has no usable variant");
    combos = std::move(next);
  }
  return combos;
}

// ---------------------------------------------------------------------------
// Assembly

/// Columns get independent weights; the classifier input is the
/// concatenation of column features.
inline backbones::Model assemble(const Architecture& arch, std::uint64_t seed) {
  validate(arch);
  backbones::Model m;
  for (std::size_t i = 0; i < arch.columns.size(); ++i)
    m.columns.push_back(backbones::build_backbone(arch.columns[i].backbone, mix_seed(seed, "column", i)));
  const int width = m.fused_width();
  if (arch.fusion.input_width && *arch.fusion.input_width != width)
    throw Error(Errc::bad_fusion, "classifier expects " + std::to_string(*arch.fusion.input_width) +
                                      " inputs, columns provide " + std::to_string(width));
  m.classifier = backbones::build_dense_stack(arch.fusion.classifier, width, m.classifier_name(),
                                              mix_seed(seed, m.classifier_name()));
  return m;
}

/// Copies column weights from the donors' columns (taken in donor order,
/// then column order) and reinitializes the classifier.
inline void warm_start(backbones::Model& target, std::span<const backbones::Model* const> donors,
                       std::uint64_t seed) {
  std::vector<const backbones::Backbone*> sources;
  for (const auto* d : donors)
    for (const auto& c : d->columns) sources.push_back(&c);
  if (sources.size() != target.columns.size())
    throw Error(Errc::weights_incompatible, "donors supply " + std::to_string(sources.size()) + " columns, model has " +
                                                std::to_string(target.columns.size()));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto& dst = target.columns[i];
    const auto& src = *sources[i];
    if (src.spec.kind != dst.spec.kind)
      throw Error(Errc::weights_incompatible, "column " + std::to_string(i + 1) + ": donor is " +
                                                  backbones::to_string(src.spec.kind) + ", target is " +
                                                  backbones::to_string(dst.spec.kind));
    auto dp = dst.features.params();
    auto sp = src.features.params();
    if (dp.size() != sp.size()) throw Error(Errc::weights_incompatible, "column " + std::to_string(i + 1));
    for (std::size_t k = 0; k < dp.size(); ++k)
      if (dp[k]->value.shape() != sp[k]->value.shape())
        throw Error(Errc::weights_incompatible, "column " + std::to_string(i + 1) + ": " + dp[k]->name);
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto dp = target.columns[i].features.params();
    auto sp = sources[i]->features.params();
    for (std::size_t k = 0; k < dp.size(); ++k) {
      dp[k]->value = sp[k]->value;
      dp[k]->velocity = {};
      dp[k]->grad = {};
    }
  }
  target.classifier.initialize(mix_seed(seed, "warm-start", target.classifier_name()));
  for (auto* p : target.classifier.params()) {
    p->velocity = {};
    p->grad = {};
  }
}

}  // namespace aesthetics::multicolumn
