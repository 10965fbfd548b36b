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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "aesthetics/error.hpp"

namespace aesthetics {

/// Interleaved row-major raster (HWC). Pixel intensities of loaded images
/// live in [0, 255].
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, int c, T fill = T{})
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  bool empty() const { return width <= 0 || height <= 0 || channels <= 0; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  T& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using Image = Raster<float>;

inline void require_nonempty(const auto& img, const char* what) {
  if (img.empty()) throw Error(Errc::empty_image, what);
}

/// Rec.601 luma for 3-channel input; 1-channel input is copied as is.
template <typename Out = double, typename T>
Raster<Out> luminance(const Raster<T>& img) {
  require_nonempty(img, "luminance");
  Raster<Out> out(img.width, img.height, 1);
  if (img.channels == 1) {
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<Out>(img.data[i]);
    return out;
  }
  if (img.channels != 3) throw Error(Errc::bad_shape, "luminance expects 1 or 3 channels");
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = static_cast<Out>(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2));
  return out;
}

namespace detail {

struct Tap {
  int i0, i1;
  double w1;
};

// Half-pixel-centre mapping from destination index to a source coordinate:
// src = (dst + offset + 0.5) / scale - 0.5, clamped to the source extent.
inline std::vector<Tap> bilinear_taps(int dst_len, int src_len, double scale, double offset) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
  for (int d = 0; d < dst_len; ++d) {
    double s = (d + offset + 0.5) / scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    int i0 = static_cast<int>(std::floor(s));
    int i1 = std::min(i0 + 1, src_len - 1);
    taps[d] = {i0, i1, s - i0};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resampling of the window of a (conceptually) scaled image:
/// output pixel (x, y) samples the source as if it had been scaled by
/// (scale_x, scale_y) and then cropped at (offset_x, offset_y).
template <typename T>
Raster<T> resample_bilinear(const Raster<T>& src, int out_w, int out_h, double scale_x, double scale_y,
                            double offset_x = 0.0, double offset_y = 0.0) {
  require_nonempty(src, "resample");
  Raster<T> out(out_w, out_h, src.channels);
  const auto tx = detail::bilinear_taps(out_w, src.width, scale_x, offset_x);
  const auto ty = detail::bilinear_taps(out_h, src.height, scale_y, offset_y);
  for (int y = 0; y < out_h; ++y) {
    const auto& vy = ty[y];
    for (int x = 0; x < out_w; ++x) {
      const auto& vx = tx[x];
      for (int c = 0; c < src.channels; ++c) {
        if (vx.w1 == 0.0 && vy.w1 == 0.0) {
          out.at(x, y, c) = src.at(vx.i0, vy.i0, c);
          continue;
        }
        const double top = src.at(vx.i0, vy.i0, c) * (1.0 - vx.w1) + src.at(vx.i1, vy.i0, c) * vx.w1;
        const double bot = src.at(vx.i0, vy.i1, c) * (1.0 - vx.w1) + src.at(vx.i1, vy.i1, c) * vx.w1;
        out.at(x, y, c) = static_cast<T>(top * (1.0 - vy.w1) + bot * vy.w1);
      }
    }
  }
  return out;
}

template <typename T>
Raster<T> resize_bilinear(const Raster<T>& src, int out_w, int out_h) {
  require_nonempty(src, "resize");
  if (out_w <= 0 || out_h <= 0) throw Error(Errc::bad_shape, "resize target must be positive");
  return resample_bilinear(src, out_w, out_h, static_cast<double>(out_w) / src.width,
                           static_cast<double>(out_h) / src.height);
}

}  // namespace aesthetics
