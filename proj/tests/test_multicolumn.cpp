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
#include <gtest/gtest.h>

#include <set>

#include "aesthetics/multicolumn.hpp"
#include "test_support.hpp"

namespace {

using namespace aesthetics;
using namespace aesthetics::multicolumn;
using V = ColumnVariant;
using testing_support::random_image;

const auto kAll = [](ColumnVariant) { return true; };

TEST(Configs, StandardMenus) {
  const auto tiny = backbones::tiny_spec();
  const auto one = standard_configs(1, tiny);
  ASSERT_EQ(one.column_count(), 1);
  EXPECT_EQ(one.columns[0].menu, (std::vector<V>{V::original}));
  EXPECT_EQ(one.fusion.classifier.widths, backbones::default_head(tiny).widths);

  const auto three = standard_configs(3, tiny);
  ASSERT_EQ(three.column_count(), 3);
  EXPECT_EQ(three.columns[0].menu, (std::vector<V>{V::original, V::padded, V::center_crop}));
  EXPECT_EQ(three.columns[1].menu, (std::vector<V>{V::random_crop_1, V::random_crop_2, V::random_crop_3}));
  EXPECT_EQ(three.columns[2].menu, (std::vector<V>{V::saliency_spectral, V::saliency_fine}));
  EXPECT_EQ(three.fusion.classifier.widths, (std::vector<int>{512, 2}));
  EXPECT_EQ(standard_configs(2, tiny).column_count(), 2);
  EXPECT_THROW(standard_configs(4, tiny), Error);
}

TEST(Configs, MenuValidationAndParsing) {
  auto arch = standard_configs(2, backbones::tiny_spec());
  arch.columns[1].menu.push_back(V::padded);
  try {
    validate(arch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_config);
  }
  const auto menus = parse_menus("ORIGINAL,PADDED|SALIENCY_FINE");
  ASSERT_EQ(menus.size(), 2u);
  EXPECT_EQ(menus[0], (std::vector<V>{V::original, V::padded}));
  EXPECT_EQ(menus[1], (std::vector<V>{V::saliency_fine}));
  for (auto v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("SIDEWAYS"), Error);
}

TEST(Selection, EvalTakesFirstEntry) {
  const auto arch = standard_configs(3, backbones::tiny_spec());
  const auto picks = choose_variants(arch.columns, Mode::eval, 1, "r", 0, kAll);
  EXPECT_EQ(picks, (std::vector<V>{V::original, V::random_crop_1, V::saliency_spectral}));
}

TEST(Selection, TrainIsDeterministicAndCoversMenus) {
  const auto arch = standard_configs(3, backbones::tiny_spec());
  std::vector<std::set<V>> seen(3);
  for (int epoch = 0; epoch < 60; ++epoch) {
    const auto a = choose_variants(arch.columns, Mode::train, 7, "rec", epoch, kAll);
    const auto b = choose_variants(arch.columns, Mode::train, 7, "rec", epoch, kAll);
    ASSERT_EQ(a, b);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& menu = arch.columns[c].menu;
      EXPECT_NE(std::find(menu.begin(), menu.end(), a[c]), menu.end());
      seen[c].insert(a[c]);
    }
  }
  EXPECT_EQ(seen[0].size(), 3u);
  EXPECT_EQ(seen[1].size(), 3u);
  EXPECT_EQ(seen[2].size(), 2u);
}

TEST(Selection, UnavailableCropsFallBack) {
  const auto arch = standard_configs(2, backbones::tiny_spec());
  const auto only_second = [](V v) { return v != V::random_crop_1 && v != V::random_crop_3; };
  for (int epoch = 0; epoch < 20; ++epoch)
    EXPECT_EQ(choose_variants(arch.columns, Mode::train, 3, "x", epoch, only_second)[1], V::random_crop_2);
  const auto none = [](V v) { return v == V::original; };
  try {
    choose_variants(arch.columns, Mode::eval, 3, "x", 0, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_variant);
  }
}

TEST(Selection, AllCombinations) {
  const auto arch = standard_configs(3, backbones::tiny_spec());
  const auto combos = all_combinations(arch.columns, kAll);
  EXPECT_EQ(combos.size(), 18u);
  std::set<std::vector<V>> unique(combos.begin(), combos.end());
  EXPECT_EQ(unique.size(), 18u);
  const auto no_random = [](V v) { return v != V::random_crop_1 && v != V::random_crop_2 && v != V::random_crop_3; };
  EXPECT_THROW(all_combinations(arch.columns, no_random), Error);
}

TEST(Variants, SmallImageHasNoRandomCrops) {
  VariantSet set(random_image(224, 224, 3, 4), 9);
  EXPECT_TRUE(set.available(V::center_crop));
  EXPECT_FALSE(set.available(V::random_crop_1));
  EXPECT_FALSE(set.image(V::random_crop_2).has_value());
  for (auto v : {V::original, V::padded, V::center_crop, V::saliency_spectral, V::saliency_fine}) {
    const auto& t = set.tensor(v);
    ASSERT_TRUE(t.has_value()) << to_string(v);
    EXPECT_EQ(t->shape(), (std::vector<int>{3, 224, 224}));
  }
}

TEST(Variants, LargeImageCropsAreStable) {
  const auto img = random_image(700, 520, 3, 5);
  VariantSet a(img, crop_seed(1, "id"));
  VariantSet b(img, crop_seed(1, "id"));
  ASSERT_TRUE(a.random_crops().complete());
  EXPECT_EQ(a.random_crops().crops, b.random_crops().crops);
  EXPECT_EQ(*a.tensor(V::random_crop_3), *b.tensor(V::random_crop_3));
  EXPECT_NE(crop_seed(1, "id"), crop_seed(1, "other"));
}

TEST(Assembly, FusionWidthMismatchIsAnError) {
  auto arch = standard_configs(3, backbones::tiny_spec());
  const auto m = assemble(arch, 1);
  EXPECT_EQ(m.fused_width(), 3 * 16 * 49);
  arch.fusion.input_width = 100;
  try {
    assemble(arch, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_fusion);
  }
}

TEST(Assembly, ColumnsAreIndependent) {
  auto m = assemble(standard_configs(2, backbones::tiny_spec()), 1);
  EXPECT_NE(m.columns[0].features.params()[0]->value, m.columns[1].features.params()[0]->value);
  const auto before = m.columns[1].features.params()[0]->value;
  m.columns[0].features.params()[0]->value[0] += 1.0f;
  EXPECT_EQ(m.columns[1].features.params()[0]->value, before);
  const auto names = m.named_params();
  EXPECT_EQ(names.front().first, "column1.block1.conv1.weight");
  EXPECT_EQ(names.back().first, "fusion.dense2.bias");
}

TEST(WarmStart, CopiesColumnsAndResetsClassifier) {
  const auto tiny = backbones::tiny_spec();
  auto d1 = assemble(standard_configs(1, tiny), 21);
  auto d2 = assemble(standard_configs(1, tiny), 22);
  auto target = assemble(standard_configs(2, tiny), 23);
  const backbones::Model* donors[] = {&d1, &d2};
  warm_start(target, donors, 5);
  for (std::size_t k = 0; k < d1.columns[0].features.params().size(); ++k) {
    EXPECT_EQ(target.columns[0].features.params()[k]->value, d1.columns[0].features.params()[k]->value);
    EXPECT_EQ(target.columns[1].features.params()[k]->value, d2.columns[0].features.params()[k]->value);
  }
  auto again = assemble(standard_configs(2, tiny), 99);
  warm_start(again, donors, 5);
  EXPECT_EQ(again.classifier.params()[0]->value, target.classifier.params()[0]->value);

  auto three = assemble(standard_configs(3, tiny), 1);
  try {
    warm_start(three, donors, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::weights_incompatible);
  }
  auto wide = assemble(standard_configs(1, backbones::tiny_spec(8, 32)), 2);
  const backbones::Model* mixed[] = {&d1, &wide};
  EXPECT_THROW(warm_start(target, mixed, 5), Error);
}

}  // namespace
