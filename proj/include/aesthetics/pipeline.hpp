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

#include <string>
#include <vector>

#include "aesthetics/ava.hpp"
#include "aesthetics/backbones.hpp"
#include "aesthetics/config.hpp"
#include "aesthetics/multicolumn.hpp"
#include "aesthetics/train.hpp"

namespace aesthetics::pipeline {

inline backbones::BackboneSpec backbone_from(const RunConfig& cfg) {
  backbones::BackboneSpec spec;
  switch (backbones::parse_kind(cfg.get("backbone"))) {
    case backbones::Kind::vgg19: spec = backbones::vgg19_spec(); break;
    case backbones::Kind::alexnet: spec = backbones::alexnet_spec(); break;
    case backbones::Kind::tiny: {
      const auto ch = cfg.get_ints("tiny_channels");
      if (ch.size() != 2) throw Error(Errc::bad_config, "tiny_channels needs two widths");
      spec = backbones::tiny_spec(ch[0], ch[1]);
      break;
    }
  }
  const auto& weights = cfg.get("weights");
  if (weights == "none") {
    spec.pretrained = false;
  } else if (!weights.empty()) {
    spec.weights_path = weights;
  }
  backbones::validate(spec);
  return spec;
}

inline multicolumn::Architecture architecture_from(const RunConfig& cfg) {
  const auto spec = backbone_from(cfg);
  auto arch = multicolumn::standard_configs(static_cast<int>(cfg.get_int("columns")), spec);
  if (const auto& menus = cfg.get("menus"); !menus.empty()) {
    const auto parsed = multicolumn::parse_menus(menus);
    if (parsed.size() != arch.columns.size())
      throw Error(Errc::bad_config, "menus describe " + std::to_string(parsed.size()) + " columns, expected " +
                                        std::to_string(arch.columns.size()));
    for (std::size_t i = 0; i < parsed.size(); ++i) arch.columns[i].menu = parsed[i];
  }
  if (arch.column_count() == 1) {
    if (const auto widths = cfg.get_ints("head_widths"); !widths.empty()) arch.fusion.classifier.widths = widths;
  } else {
    arch.fusion.classifier.widths = cfg.get_ints("fusion_widths");
  }
  backbones::validate(arch.fusion.classifier);
  multicolumn::validate(arch);
  return arch;
}

inline multicolumn::PreprocessParams preprocess_from(const RunConfig& cfg) {
  multicolumn::PreprocessParams p;
  const auto& resize = cfg.get("resize");
  if (resize == "aspect_crop")
    p.resize = geometry::ResizeMode::aspect_crop;
  else if (resize == "stretch")
    p.resize = geometry::ResizeMode::stretch;
  else
    throw Error(Errc::bad_config, "resize must be aspect_crop or stretch");
  p.crops.count = static_cast<int>(cfg.get_int("crop_count"));
  p.crops.min_separation = cfg.get_double("crop_min_separation");
  p.crops.max_attempts = static_cast<int>(cfg.get_int("crop_max_attempts"));
  p.spectral.working_width = static_cast<int>(cfg.get_int("spectral_width"));
  p.spectral.sigma = cfg.get_double("spectral_sigma");
  p.fine.scales = cfg.get_ints("fine_scales");
  if (p.crops.count < 0 || p.spectral.working_width < 1 || p.fine.scales.empty())
    throw Error(Errc::bad_config, "invalid preprocessing parameters");
  return p;
}

inline train::ScheduleParams schedule_from(const RunConfig& cfg) {
  train::ScheduleParams s;
  s.head_epochs = static_cast<int>(cfg.get_int("head_epochs"));
  s.finetune_epochs = static_cast<int>(cfg.get_int("finetune_epochs"));
  s.epoch_multiplier = cfg.get_double("epoch_multiplier");
  s.min_stage_epochs = static_cast<int>(cfg.get_int("min_stage_epochs"));
  s.lr_head = cfg.get_double("lr_head");
  s.lr_finetune = cfg.get_double("lr_finetune");
  s.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  s.momentum = cfg.get_double("momentum");
  return s;
}

inline std::vector<train::TrainStage> stages_from(const RunConfig& cfg, const multicolumn::Architecture& arch) {
  return train::default_schedule(arch.columns.front().backbone.kind, arch.column_count(), schedule_from(cfg));
}

inline ava::SplitRatios ratios_from(const RunConfig& cfg) {
  const auto r = cfg.get_doubles("split_ratios");
  if (r.size() != 3) throw Error(Errc::bad_config, "split_ratios needs three values");
  return {r[0], r[1], r[2]};
}

/// Assembles the model and loads backbone weights where configured.
inline backbones::Model build_model(const multicolumn::Architecture& arch, std::uint64_t seed) {
  auto model = multicolumn::assemble(arch, seed);
  for (auto& column : model.columns) backbones::load_pretrained(column, column.spec.weights_path.value_or(""));
  return model;
}

}  // namespace aesthetics::pipeline
