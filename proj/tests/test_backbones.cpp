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

#include "aesthetics/backbones.hpp"
#include "test_support.hpp"

namespace {

using namespace aesthetics;
using namespace aesthetics::backbones;

std::size_t conv_params(const Backbone& bb) { return bb.features.parameter_count(); }

TEST(Structure, Vgg19) {
  auto spec = vgg19_spec();
  spec.pretrained = false;
  const auto bb = build_backbone(spec, 1);
  ASSERT_EQ(bb.convs.size(), 16u);
  EXPECT_EQ(bb.feature_width, 512 * 7 * 7);
  // 3x3 convolutions 64,64 | 128,128 | 256 x4 | 512 x4 | 512 x4, counted by hand
  EXPECT_EQ(conv_params(bb), 20024384u);
  EXPECT_EQ(bb.convs[8].block, 4);
  EXPECT_EQ(bb.convs[8].index_in_block, 1);
  EXPECT_EQ(bb.conv(16).output_shape({512, 14, 14}), (std::vector<int>{512, 14, 14}));
  EXPECT_EQ(default_head(spec).widths.size(), 9u);
}

TEST(Structure, AlexNet) {
  const auto bb = build_backbone(alexnet_spec(), 1);
  ASSERT_EQ(bb.convs.size(), 5u);
  EXPECT_EQ(bb.feature_width, 256 * 6 * 6);
  EXPECT_EQ(conv_params(bb), 2469696u);
  const auto head = default_head(alexnet_spec());
  EXPECT_EQ(head.widths, (std::vector<int>{4096, 4096, 2}));
  EXPECT_EQ(head.init, nn::Init::normal_001);
}

TEST(Structure, TinyAndHeadNames) {
  auto m = replace_head(build_backbone(tiny_spec(), 3), default_head(tiny_spec()), 3);
  EXPECT_EQ(m.columns[0].feature_width, 16 * 7 * 7);
  std::vector<std::string> names;
  for (const auto& [n, p] : m.named_params()) names.push_back(n);
  EXPECT_EQ(names, (std::vector<std::string>{"block1.conv1.weight", "block1.conv1.bias", "block2.conv1.weight",
                                             "block2.conv1.bias", "head.dense1.weight", "head.dense1.bias",
                                             "head.dense2.weight", "head.dense2.bias"}));
  nn::Tensor x({2, 3, 224, 224});
  EXPECT_EQ(m.forward(x, false).shape(), (std::vector<int>{2, 2}));
}

TEST(Structure, InvalidSpecsAreRejected) {
  auto s = tiny_spec();
  s.blocks.push_back(s.blocks[0]);
  EXPECT_THROW(build_backbone(s, 1), Error);
  auto v = vgg19_spec();
  v.blocks[4].convs.pop_back();
  try {
    build_backbone(v, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_spec);
  }
  EXPECT_THROW(validate(HeadSpec{{32, 3}}), Error);
}

TEST(Policies, WhichConvolutionsTrain) {
  const auto vgg = vgg19_spec();
  for (int i = 1; i <= 16; ++i) {
    EXPECT_FALSE(conv_trainable(vgg, i, TrainablePolicy::head_only));
    EXPECT_EQ(conv_trainable(vgg, i, TrainablePolicy::head_plus_top_conv), i >= 9) << i;
    EXPECT_TRUE(conv_trainable(vgg, i, TrainablePolicy::all));
  }
  const auto alex = alexnet_spec();
  for (int i = 1; i <= 5; ++i) EXPECT_EQ(conv_trainable(alex, i, TrainablePolicy::head_plus_top_conv), i >= 4);
  EXPECT_EQ(parse_policy("HEAD_PLUS_TOP_CONV"), TrainablePolicy::head_plus_top_conv);
  EXPECT_THROW(parse_policy("SOME"), Error);
}

TEST(Policies, ClassifierAlwaysTrainable) {
  auto m = replace_head(build_backbone(tiny_spec(), 3), default_head(tiny_spec()), 3);
  set_trainable(m, TrainablePolicy::head_only);
  EXPECT_FALSE(m.columns[0].features.has_trainable());
  for (auto* p : m.classifier.params()) EXPECT_TRUE(p->trainable);
  set_trainable(m, TrainablePolicy::head_plus_top_conv);
  EXPECT_FALSE(m.columns[0].conv(1).params()[0]->trainable);
  EXPECT_TRUE(m.columns[0].conv(2).params()[0]->trainable);
}

TEST(Pretrained, RoundTripAndErrors) {
  testing_support::TempDir dir("weights");
  const auto src = build_backbone(tiny_spec(), 10);
  save_backbone_weights(src, dir.str("w.bin"));

  auto dst = build_backbone(tiny_spec(), 11);
  load_pretrained(dst, dir.str("w.bin"));
  const auto sp = src.features.params();
  const auto dp = dst.features.params();
  for (std::size_t k = 0; k < sp.size(); ++k) EXPECT_EQ(sp[k]->value, dp[k]->value);

  auto wide = build_backbone(tiny_spec(8, 24), 11);
  try {
    load_pretrained(wide, dir.str("w.bin"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::weights_incompatible);
    EXPECT_NE(std::string(e.what()).find("block2.conv1.weight"), std::string::npos) << e.what();
  }

  auto needs = tiny_spec();
  needs.pretrained = true;
  auto bb = build_backbone(needs, 1);
  EXPECT_THROW(load_pretrained(bb, dir.str("absent.bin")), Error);
  auto optional_bb = build_backbone(tiny_spec(), 1);
  const auto before = optional_bb.features.params()[0]->value;
  load_pretrained(optional_bb, dir.str("absent.bin"));
  EXPECT_EQ(optional_bb.features.params()[0]->value, before);
}

}  // namespace
