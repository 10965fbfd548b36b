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

// Static saliency maps: spectral residual and fine-grained center-surround.
// Both operate on Rec.601 luminance in double precision and return a field
// in [0, 1] with the source dimensions.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/image.hpp"

namespace aesthetics::saliency {

struct SpectralResidualParams {
  int working_width = 64;
  double epsilon = 1e-8;
  int box_size = 3;
  double sigma = 2.5;
};

struct FineGrainedParams {
  /// Surround box half-widths, clipped to the image.
  std::vector<int> scales{8, 16, 32};
};

/// Single-plane importance field. Values are in [0, 1]; max is 1 unless the
/// map is identically zero.
using SaliencyMap = Raster<double>;

/// Maps saliency to an intensity raster in [0, 255] so it can go through the
/// same normalization as the photographic variants.
inline Image to_image(const SaliencyMap& map) {
  Image img(map.width, map.height, 1);
  for (std::size_t i = 0; i < map.data.size(); ++i) img.data[i] = static_cast<float>(map.data[i] * 255.0);
  return img;
}

namespace detail {

// Flatness guard for min-max normalization. Relative rather than absolute:
// the spectral residual of a flat image carries a huge DC term whose
// floating-point jitter is ~1e-13 of its magnitude.
inline constexpr double kFlatTolerance = 1e-10;

inline void normalize_unit(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mn = *lo, mx = *hi;
  const double range = mx - mn;
  if (!(range > kFlatTolerance * std::max({1.0, std::abs(mx), std::abs(mn)}))) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  for (auto& x : v) x = std::clamp((x - mn) / range, 0.0, 1.0);
}

using Complex = std::complex<double>;

/// In-place 2-D DFT of a row-major h x w complex grid.
inline void fft2(std::vector<Complex>& grid, int w, int h, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in, out;
  in.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * w, w, in.begin());
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy(out.begin(), out.end(), grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  in.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) in[y] = grid[static_cast<std::size_t>(y) * w + x];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = out[y];
  }
}

/// Mean over a box of odd side `size`, periodic boundary (the spectrum is
/// periodic).
inline std::vector<double> box_filter_periodic(const std::vector<double>& v, int w, int h, int size) {
  const int r = size / 2;
  std::vector<double> out(v.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = ((y + dy) % h + h) % h;
          const int xx = ((x + dx) % w + w) % w;
          acc += v[static_cast<std::size_t>(yy) * w + xx];
        }
      out[static_cast<std::size_t>(y) * w + x] = acc / ((2 * r + 1) * (2 * r + 1));
    }
  return out;
}

/// Separable Gaussian blur, radius ceil(3 sigma), replicated border.
inline std::vector<double> gaussian_blur(const std::vector<double>& v, int w, int h, double sigma) {
  if (sigma <= 0.0) return v;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += (k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma)));
  for (auto& x : k) x /= sum;
  std::vector<double> tmp(v.size()), out(v.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * v[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace detail

/// Spectral residual saliency.
///
/// Luminance is resampled to `working_width` columns (aspect preserved). With
/// F the 2-D spectrum, A = log(|F| + eps) and R = A - box(A), the map is the
/// squared magnitude of the inverse transform of exp(R) * exp(i * arg F),
/// Gaussian-smoothed, resampled to the source size and scaled to [0, 1].
/// The reconstruction is evaluated as F * exp(-box(A)), which equals
/// exp(R + i arg F) up to the eps term and stays well defined on bins where
/// F vanishes and the phase is meaningless.
template <typename T>
SaliencyMap spectral_residual(const Raster<T>& image, const SpectralResidualParams& p = {}) {
  if (image.empty()) throw Error(Errc::empty_image, "spectral_residual");
  const auto lum = luminance<double>(image);
  const int w = std::max(1, p.working_width);
  const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(w) * lum.height / lum.width)));
  const auto small = resize_bilinear(lum, w, h);

  std::vector<detail::Complex> spec(small.data.begin(), small.data.end());
  detail::fft2(spec, w, h, false);

  std::vector<double> log_amp(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) log_amp[i] = std::log(std::abs(spec[i]) + p.epsilon);
  const auto avg = detail::box_filter_periodic(log_amp, w, h, p.box_size);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::exp(-avg[i]);

  detail::fft2(spec, w, h, true);
  std::vector<double> energy(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) energy[i] = std::norm(spec[i]);
  energy = detail::gaussian_blur(energy, w, h, p.sigma);

  SaliencyMap work(w, h, 1);
  work.data = std::move(energy);
  SaliencyMap out = (w == lum.width && h == lum.height) ? work : resize_bilinear(work, lum.width, lum.height);
  detail::normalize_unit(out.data);
  return out;
}

struct CenterSurround {
  SaliencyMap on;   // bright center on darker surround
  SaliencyMap off;  // dark center on brighter surround
};

/// Raw on/off center-surround responses of the luminance, summed over the
/// surround scales. Luminance is linear, so each channel's difference
/// (center * n - sum) / n is taken against its own integral image and the
/// Rec.601 weights are applied afterwards. For inputs on a dyadic grid
/// (8-bit images included) I and max - I then swap `on` and `off` bit for
/// bit.
template <typename T>
CenterSurround center_surround(const Raster<T>& image, const FineGrainedParams& p = {}) {
  if (image.empty()) throw Error(Errc::empty_image, "fine_grained");
  if (image.channels != 1 && image.channels != 3) throw Error(Errc::bad_shape, "fine_grained expects 1 or 3 channels");
  const int w = image.width, h = image.height, nc = image.channels;
  const double weights[3] = {nc == 1 ? 1.0 : 0.299, 0.587, 0.114};
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<std::vector<double>> integral(nc, std::vector<double>(stride * (h + 1), 0.0));
  for (int c = 0; c < nc; ++c) {
    auto& in = integral[c];
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += static_cast<double>(image.at(x, y, c));
        in[(y + 1) * stride + x + 1] = in[y * stride + x + 1] + row;
      }
    }
  }

  CenterSurround cs{SaliencyMap(w, h, 1, 0.0), SaliencyMap(w, h, 1, 0.0)};
  for (int s : p.scales) {
    if (s <= 0) continue;
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - s), y1 = std::min(h, y + s + 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - s), x1 = std::min(w, x + s + 1);
        const double n = static_cast<double>(y1 - y0) * (x1 - x0);
        double d = 0.0;
        for (int c = 0; c < nc; ++c) {
          const auto& in = integral[c];
          const double sum = in[y1 * stride + x1] - in[y0 * stride + x1] - in[y1 * stride + x0] + in[y0 * stride + x0];
          d += weights[c] * ((static_cast<double>(image.at(x, y, c)) * n - sum) / n);
        }
        if (d > 0) cs.on.at(x, y) += d;
        if (d < 0) cs.off.at(x, y) -= d;
      }
    }
  }
  return cs;
}

/// Fine-grained saliency: on + off center-surround energy over scales,
/// scaled to [0, 1].
template <typename T>
SaliencyMap fine_grained(const Raster<T>& image, const FineGrainedParams& p = {}) {
  auto cs = center_surround(image, p);
  SaliencyMap out = std::move(cs.on);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += cs.off.data[i];
  detail::normalize_unit(out.data);
  return out;
}

}  // namespace aesthetics::saliency
