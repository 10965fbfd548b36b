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

// Geometric preprocessing of network inputs: aspect-aware resize,
// zero-pad-to-square, center crop and separation-constrained random crops.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/image.hpp"
#include "aesthetics/nn/tensor.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics::geometry {

inline constexpr int kInputSize = 224;

struct CropSpec {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool inside(int width, int height) const { return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= width && y + h <= height; }

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

/// Chebyshev distance between crop centers.
inline double separation(const CropSpec& a, const CropSpec& b) {
  return std::max(std::abs(a.center_x() - b.center_x()), std::abs(a.center_y() - b.center_y()));
}

enum class ResizeMode { aspect_crop, stretch };

/// Scale factor and crop window for aspect-preserving resize: the shorter
/// side is scaled onto its target, the longer axis is center-cropped.
struct AspectWindow {
  double scale = 1.0;
  int scaled_w = 0;
  int scaled_h = 0;
  int offset_x = 0;
  int offset_y = 0;
};

inline AspectWindow aspect_window(int w, int h, int target_w, int target_h) {
  AspectWindow a;
  a.scale = std::max(static_cast<double>(target_w) / w, static_cast<double>(target_h) / h);
  a.scaled_w = std::max(target_w, static_cast<int>(std::lround(w * a.scale)));
  a.scaled_h = std::max(target_h, static_cast<int>(std::lround(h * a.scale)));
  a.offset_x = (a.scaled_w - target_w) / 2;
  a.offset_y = (a.scaled_h - target_h) / 2;
  return a;
}

inline Image resize_to(const Image& image, int target_w = kInputSize, int target_h = kInputSize,
                       ResizeMode mode = ResizeMode::aspect_crop) {
  if (image.empty()) throw Error(Errc::empty_image, "resize_to");
  if (mode == ResizeMode::stretch) return resize_bilinear(image, target_w, target_h);
  const auto a = aspect_window(image.width, image.height, target_w, target_h);
  // The scaled image is never materialised; only the window is sampled.
  return resample_bilinear(image, target_w, target_h, static_cast<double>(a.scaled_w) / image.width,
                           static_cast<double>(a.scaled_h) / image.height, a.offset_x, a.offset_y);
}

/// Where the original content sits inside its zero-padded square.
inline CropSpec square_padding_window(int w, int h) {
  const int side = std::max(w, h);
  return {(side - w) / 2, (side - h) / 2, w, h};
}

/// Zero-pads the shorter axis to a square; odd differences put the extra
/// row/column at the bottom/right.
inline Image pad_to_square(const Image& image) {
  if (image.empty()) throw Error(Errc::empty_image, "pad_to_square");
  const int side = std::max(image.width, image.height);
  const auto win = square_padding_window(image.width, image.height);
  Image out(side, side, image.channels, 0.0f);
  for (int y = 0; y < image.height; ++y)
    std::copy_n(&image.at(0, y), static_cast<std::size_t>(image.width) * image.channels, &out.at(win.x, win.y + y));
  return out;
}

inline Image apply_crop(const Image& image, const CropSpec& spec) {
  if (!spec.inside(image.width, image.height))
    throw Error(Errc::bad_crop, "crop (" + std::to_string(spec.x) + "," + std::to_string(spec.y) + "," +
                                    std::to_string(spec.w) + "," + std::to_string(spec.h) + ") outside " +
                                    std::to_string(image.width) + "x" + std::to_string(image.height));
  Image out(spec.w, spec.h, image.channels);
  for (int y = 0; y < spec.h; ++y)
    std::copy_n(&image.at(spec.x, spec.y + y), static_cast<std::size_t>(spec.w) * image.channels, &out.at(0, y));
  return out;
}

inline CropSpec center_crop_spec(int w, int h, int size = kInputSize) {
  if (w < size || h < size)
    throw Error(Errc::too_small, std::to_string(w) + "x" + std::to_string(h) + " < " + std::to_string(size));
  return {(w - size) / 2, (h - size) / 2, size, size};
}

inline std::pair<Image, CropSpec> center_crop(const Image& image, int size = kInputSize) {
  if (image.empty()) throw Error(Errc::empty_image, "center_crop");
  const auto spec = center_crop_spec(image.width, image.height, size);
  return {apply_crop(image, spec), spec};
}

/// Upscales so that the shorter side is at least `size`; larger images are
/// returned unchanged.
inline Image ensure_min_side(const Image& image, int size = kInputSize) {
  if (image.empty()) throw Error(Errc::empty_image, "ensure_min_side");
  if (image.width >= size && image.height >= size) return image;
  const double s = static_cast<double>(size) / std::min(image.width, image.height);
  const int w = std::max(size, static_cast<int>(std::lround(image.width * s)));
  const int h = std::max(size, static_cast<int>(std::lround(image.height * s)));
  return resize_bilinear(image, w, h);
}

struct RandomCropParams {
  int size = kInputSize;
  int count = 3;
  double min_separation = 100.0;
  int max_attempts = 1000;
};

struct RandomCrops {
  std::vector<CropSpec> crops;
  /// Set when fewer than `count` crops could be placed.
  std::optional<Error> error;

  bool complete() const { return !error.has_value(); }
};

/// Rejection-samples top-left corners uniformly over the valid positions.
/// A candidate is kept when its center is at least `min_separation` away
/// (Chebyshev) from the center crop and from every crop kept so far.
inline RandomCrops random_crops(int width, int height, std::uint64_t seed, const RandomCropParams& p = {}) {
  if (width < p.size || height < p.size)
    throw Error(Errc::too_small, std::to_string(width) + "x" + std::to_string(height) + " < " + std::to_string(p.size));
  RandomCrops result;
  std::vector<CropSpec> taken{center_crop_spec(width, height, p.size)};
  Rng rng(seed);
  const auto span_x = static_cast<std::uint64_t>(width - p.size + 1);
  const auto span_y = static_cast<std::uint64_t>(height - p.size + 1);
  for (int attempt = 0; attempt < p.max_attempts && static_cast<int>(result.crops.size()) < p.count; ++attempt) {
    CropSpec c{static_cast<int>(uniform_below(rng, span_x)), static_cast<int>(uniform_below(rng, span_y)), p.size,
               p.size};
    bool ok = true;
    for (const auto& t : taken)
      if (separation(c, t) < p.min_separation) {
        ok = false;
        break;
      }
    if (!ok) continue;
    taken.push_back(c);
    result.crops.push_back(c);
  }
  if (static_cast<int>(result.crops.size()) < p.count)
    result.error = Error(Errc::insufficient_separation, "placed=" + std::to_string(result.crops.size()));
  return result;
}

inline RandomCrops random_crops(const Image& image, std::uint64_t seed, const RandomCropParams& p = {}) {
  if (image.empty()) throw Error(Errc::empty_image, "random_crops");
  return random_crops(image.width, image.height, seed, p);
}

struct Normalization {
  std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
  std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};
};

/// 224x224 raster in [0, 255] -> standardized 3x224x224 CHW tensor.
/// Single-channel input is replicated to three channels.
inline nn::Tensor normalize_pixels(const Image& image, const Normalization& norm = {}) {
  if (image.width != kInputSize || image.height != kInputSize)
    throw Error(Errc::bad_shape, "expected 224x224, got " + std::to_string(image.width) + "x" + std::to_string(image.height));
  if (image.channels != 1 && image.channels != 3) throw Error(Errc::bad_shape, "expected 1 or 3 channels");
  nn::Tensor t({3, kInputSize, kInputSize});
  const std::size_t plane = static_cast<std::size_t>(kInputSize) * kInputSize;
  for (int c = 0; c < 3; ++c) {
    const int src_c = image.channels == 1 ? 0 : c;
    for (int y = 0; y < kInputSize; ++y)
      for (int x = 0; x < kInputSize; ++x) {
        const float v = image.at(x, y, src_c) / 255.0f;
        t[c * plane + static_cast<std::size_t>(y) * kInputSize + x] = (v - norm.mean[c]) / norm.stddev[c];
      }
  }
  return t;
}

}  // namespace aesthetics::geometry
