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
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aesthetics/error.hpp"

namespace aesthetics::nn {

/// Dense float tensor, row-major. Activations are laid out NCHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f) : shape_(std::move(shape)) {
    data_.assign(count(shape_), fill);
  }
  Tensor(std::vector<int> shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) throw Error(Errc::bad_shape, "tensor data does not match shape");
  }

  static std::size_t count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  /// Elements per leading-axis entry.
  std::size_t stride0() const { return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0]; }
  std::span<float> row(int n) { return {data_.data() + n * stride0(), stride0()}; }
  std::span<const float> row(int n) const { return {data_.data() + n * stride0(), stride0()}; }

  void reshape(std::vector<int> shape) {
    if (count(shape) != data_.size()) throw Error(Errc::bad_shape, "reshape changes element count");
    shape_ = std::move(shape);
  }
  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

/// Stacks equally shaped samples into a batch along a new leading axis.
inline Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw Error(Errc::bad_shape, "cannot stack an empty batch");
  std::vector<int> shape{static_cast<int>(samples.size())};
  shape.insert(shape.end(), samples[0].shape().begin(), samples[0].shape().end());
  Tensor out(shape);
  const std::size_t n = samples[0].size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].shape() != samples[0].shape()) throw Error(Errc::bad_shape, "ragged batch");
    std::memcpy(out.data() + i * n, samples[i].data(), n * sizeof(float));
  }
  return out;
}

/// FNV-1a over the raw bytes; used for bitwise freeze and warm-start checks.
inline std::uint64_t checksum(const Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
  for (std::size_t i = 0; i < t.size() * sizeof(float); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace aesthetics::nn
