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

#include <numeric>

#include "aesthetics/geometry.hpp"
#include "test_support.hpp"

namespace {

using namespace aesthetics;
using namespace aesthetics::geometry;
using testing_support::random_image;

double pixel_sum(const Image& img) { return std::accumulate(img.data.begin(), img.data.end(), 0.0); }

TEST(Resize, AspectWindowOfTallImage) {
  const auto a = aspect_window(448, 896, 224, 224);
  EXPECT_EQ(a.scaled_w, 224);
  EXPECT_EQ(a.scaled_h, 448);
  EXPECT_EQ(a.offset_x, 0);
  EXPECT_EQ(a.offset_y, 112);
}

TEST(Resize, OutputIsInputSize) {
  for (auto [w, h] : {std::pair{300, 200}, {224, 224}, {100, 700}, {1, 1}}) {
    const auto out = resize_to(random_image(w, h, 3, 1));
    EXPECT_EQ(out.width, 224);
    EXPECT_EQ(out.height, 224);
    EXPECT_EQ(out.channels, 3);
  }
}

TEST(Resize, SameSizeIsIdentity) {
  const auto img = random_image(224, 224, 3, 5);
  EXPECT_EQ(resize_to(img), img);
  EXPECT_EQ(resize_to(img, 224, 224, ResizeMode::stretch), img);
}

TEST(Resize, ExactHalvingOfTallImageMatchesCenterWindow) {
  // A 448x896 image whose 2x2 blocks are constant downsamples exactly to the
  // block values; the kept window is the central 448 rows of blocks.
  Image img(448, 896, 1);
  for (int y = 0; y < 896; ++y)
    for (int x = 0; x < 448; ++x) img.at(x, y) = static_cast<float>((x / 2 + 3 * (y / 2)) % 251);
  const auto out = resize_to(img);
  int mismatches = 0;
  for (int y = 1; y < 223; ++y)
    for (int x = 1; x < 223; ++x) {
      const float expect = 0.5f * (img.at(2 * x, 2 * (y + 112)) + img.at(2 * x + 1, 2 * (y + 112)));
      mismatches += std::abs(out.at(x, y) - expect) > 1e-3f;
    }
  EXPECT_EQ(mismatches, 0);
}

TEST(Resize, EmptyImageIsAnError) {
  try {
    resize_to(Image{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_image);
  }
}

TEST(Pad, OddDifferenceGoesBottomRight) {
  const auto img = random_image(5, 2, 1, 3);
  const auto sq = pad_to_square(img);
  ASSERT_EQ(sq.width, 5);
  ASSERT_EQ(sq.height, 5);
  const auto win = square_padding_window(5, 2);
  EXPECT_EQ(win.y, 1);  // one row above, two below
  for (int x = 0; x < 5; ++x) {
    EXPECT_EQ(sq.at(x, 0), 0.0f);
    EXPECT_EQ(sq.at(x, 3), 0.0f);
    EXPECT_EQ(sq.at(x, 4), 0.0f);
    EXPECT_EQ(sq.at(x, 1), img.at(x, 0));
  }
}

TEST(Pad, SquareInputUnchanged) {
  const auto img = random_image(17, 17, 3, 2);
  EXPECT_EQ(pad_to_square(img), img);
}

TEST(Crop, CenterCropOffsets) {
  EXPECT_EQ(center_crop_spec(300, 224), (CropSpec{38, 0, 224, 224}));
  EXPECT_EQ(center_crop_spec(225, 301), (CropSpec{0, 38, 224, 224}));
  try {
    center_crop_spec(223, 500);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_small);
  }
}

TEST(Crop, ApplyCropExamples) {
  const auto img = random_image(9, 7, 3, 4);
  EXPECT_EQ(apply_crop(img, {0, 0, 9, 7}), img);
  const auto px = apply_crop(img, {0, 0, 1, 1});
  for (int c = 0; c < 3; ++c) EXPECT_EQ(px.at(0, 0, c), img.at(0, 0, c));
  try {
    apply_crop(img, {5, 0, 5, 7});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_crop);
  }
}

TEST(RandomCrops, ForcedInfeasibility) {
  const auto r = random_crops(224, 224, 1);
  EXPECT_TRUE(r.crops.empty());
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.error->code(), Errc::insufficient_separation);
}

TEST(RandomCrops, LargeImageSucceedsWithSeparation) {
  const auto r = random_crops(640, 480, 42);
  ASSERT_TRUE(r.complete());
  ASSERT_EQ(r.crops.size(), 3u);
  const auto center = center_crop_spec(640, 480);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(r.crops[i].inside(640, 480));
    EXPECT_GE(separation(r.crops[i], center), 100.0);
    for (std::size_t j = 0; j < i; ++j) EXPECT_GE(separation(r.crops[i], r.crops[j]), 100.0);
  }
}

TEST(RandomCrops, GoldenSequenceForSeed) {
  // Integer-only sampling: the same seed gives the same placements.
  const auto a = random_crops(1000, 800, 2024);
  const auto b = random_crops(1000, 800, 2024);
  ASSERT_EQ(a.crops.size(), b.crops.size());
  for (std::size_t i = 0; i < a.crops.size(); ++i) EXPECT_EQ(a.crops[i], b.crops[i]);
  const auto c = random_crops(1000, 800, 2025);
  EXPECT_NE(a.crops, c.crops);
}

TEST(RandomCrops, BelowMinimumSizeIsAnError) {
  try {
    random_crops(100, 400, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_small);
  }
}

TEST(EnsureMinSide, UpscalesShorterSide) {
  const auto out = ensure_min_side(random_image(100, 150, 3, 1));
  EXPECT_EQ(out.width, 224);
  EXPECT_EQ(out.height, 336);
  const auto big = random_image(300, 260, 1, 2);
  EXPECT_EQ(ensure_min_side(big), big);
}

TEST(Normalize, ZeroImageGivesMinusMeanOverStd) {
  const Normalization norm;
  const auto t = normalize_pixels(Image(224, 224, 3, 0.0f), norm);
  ASSERT_EQ(t.shape(), (std::vector<int>{3, 224, 224}));
  for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(t[c * 224 * 224 + 777], -norm.mean[c] / norm.stddev[c]);
}

TEST(Normalize, SingleChannelIsReplicated) {
  const auto img = random_image(224, 224, 1, 8);
  const Normalization unit{{0.0f, 0.0f, 0.0f}, {1.0f, 1.0f, 1.0f}};
  const auto t = normalize_pixels(img, unit);
  const std::size_t plane = 224 * 224;
  for (std::size_t i = 0; i < plane; i += 97) {
    EXPECT_EQ(t[i], t[plane + i]);
    EXPECT_EQ(t[i], t[2 * plane + i]);
  }
}

TEST(Normalize, WrongSizeIsAnError) {
  try {
    normalize_pixels(Image(100, 100, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_shape);
  }
}

TEST(Properties, PaddingAndCropsOverRandomSizes) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(uniform_below(rng, 120));
    const int h = 1 + static_cast<int>(uniform_below(rng, 120));
    const auto img = random_image(w, h, 1 + 2 * static_cast<int>(uniform_below(rng, 2)), trial, true);
    const auto sq = pad_to_square(img);
    EXPECT_EQ(sq.width, sq.height);
    EXPECT_EQ(pixel_sum(sq), pixel_sum(img));
    const auto win = square_padding_window(w, h);
    EXPECT_TRUE(win.inside(sq.width, sq.height));
    EXPECT_EQ(apply_crop(sq, win), img);

    const int W = 224 + static_cast<int>(uniform_below(rng, 600));
    const int H = 224 + static_cast<int>(uniform_below(rng, 600));
    EXPECT_TRUE(center_crop_spec(W, H).inside(W, H));
    const auto r = random_crops(W, H, static_cast<std::uint64_t>(trial));
    for (const auto& c : r.crops) EXPECT_TRUE(c.inside(W, H));
    if (!r.complete()) {
      EXPECT_EQ(r.error->code(), Errc::insufficient_separation);
    }
  }
}

}  // namespace
