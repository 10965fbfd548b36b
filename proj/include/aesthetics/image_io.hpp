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

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "aesthetics/error.hpp"
#include "aesthetics/image.hpp"

namespace aesthetics {

/// Decodes any format OpenCV reads into an RGB (or grayscale) raster in
/// [0, 255].
inline Image load_image(const std::string& path) {
  cv::Mat m;
  try {
    m = cv::imread(path, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(Errc::bad_image, path + ": " + e.what());
  }
  if (m.empty()) throw Error(Errc::bad_image, "cannot decode " + path);
  cv::Mat f;
  const double scale = m.depth() == CV_16U ? 255.0 / 65535.0 : 1.0;
  m.convertTo(f, CV_32F, scale);
  const int src_ch = f.channels();
  if (src_ch != 1 && src_ch != 3 && src_ch != 4) throw Error(Errc::bad_image, path + ": unsupported channel count");
  const int ch = src_ch == 1 ? 1 : 3;  // alpha is dropped
  Image img(f.cols, f.rows, ch);
  for (int y = 0; y < f.rows; ++y) {
    const float* row = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      if (ch == 1) {
        img.at(x, y) = row[x];
      } else {
        img.at(x, y, 0) = row[src_ch * x + 2];
        img.at(x, y, 1) = row[src_ch * x + 1];
        img.at(x, y, 2) = row[src_ch * x + 0];
      }
    }
  }
  return img;
}

/// Writes an 8-bit image (values rounded and clamped to [0, 255]); the
/// format follows the file extension.
inline void save_image(const Image& img, const std::string& path) {
  require_nonempty(img, "save_image");
  if (img.channels != 1 && img.channels != 3) throw Error(Errc::bad_shape, "save_image expects 1 or 3 channels");
  cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        const int dst_c = img.channels == 3 ? 2 - c : 0;
        const float v = std::clamp(std::round(img.at(x, y, c)), 0.0f, 255.0f);
        row[x * img.channels + dst_c] = static_cast<unsigned char>(v);
      }
  }
  if (!cv::imwrite(path, m)) throw Error(Errc::io, "cannot write " + path);
}

}  // namespace aesthetics
