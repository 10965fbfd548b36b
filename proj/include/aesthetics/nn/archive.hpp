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

// Single-file tensor archive used for pretrained weights and checkpoints.
//
//   "AESTHNN1"
//   u32 n_meta   { u32 len, key bytes, u32 len, value bytes } * n_meta
//   u32 n_tensor { u32 len, name bytes, u32 rank, i32 dims[rank], f32 data } * n_tensor
//
// All integers and floats little-endian.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/nn/tensor.hpp"

namespace aesthetics::nn {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

struct Archive {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return &t;
    return nullptr;
  }
  std::string meta_or(const std::string& key, const std::string& fallback = {}) const {
    auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second;
  }
};

namespace detail {

inline constexpr char kMagic[8] = {'A', 'E', 'S', 'T', 'H', 'N', 'N', '1'};

inline void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
inline void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw Error(Errc::io, source_ + ": truncated at byte " + std::to_string(offset_ + in_.gcount()));
    offset_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::string str(std::size_t limit = 1u << 20) {
    const auto n = u32();
    if (n > limit) throw Error(Errc::io, source_ + ": implausible string length at byte " + std::to_string(offset_));
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace detail

inline void save_archive(const std::string& path, const Archive& a) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io, "cannot open " + tmp);
    os.write(detail::kMagic, sizeof detail::kMagic);
    detail::put_u32(os, static_cast<std::uint32_t>(a.meta.size()));
    for (const auto& [k, v] : a.meta) {
      detail::put_str(os, k);
      detail::put_str(os, v);
    }
    detail::put_u32(os, static_cast<std::uint32_t>(a.tensors.size()));
    for (const auto& [name, t] : a.tensors) {
      detail::put_str(os, name);
      detail::put_u32(os, static_cast<std::uint32_t>(t.rank()));
      for (int d : t.shape()) detail::put_u32(os, static_cast<std::uint32_t>(d));
      os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
    }
    if (!os) throw Error(Errc::io, "write failed: " + tmp);
  }
  // The previous file stays intact until the new one is complete.
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(Errc::io, "cannot rename " + tmp + " -> " + path);
}

inline Archive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  detail::Reader r(in, path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, detail::kMagic, 8) != 0) throw Error(Errc::io, path + ": not a tensor archive");
  Archive a;
  const auto n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto k = r.str();
    a.meta[k] = r.str(1u << 26);
  }
  const auto n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto name = r.str();
    const auto rank = r.u32();
    if (rank > 8) throw Error(Errc::io, path + ": bad rank at byte " + std::to_string(r.offset()));
    std::vector<int> shape(rank);
    std::size_t elements = 1;
    for (auto& d : shape) {
      const auto v = r.u32();
      if (v > (1u << 30)) throw Error(Errc::io, path + ": bad dimension at byte " + std::to_string(r.offset()));
      d = static_cast<int>(v);
      elements *= v;
    }
    if (elements > (std::size_t{1} << 31)) throw Error(Errc::io, path + ": tensor too large");
    Tensor t(shape);
    r.bytes(t.data(), t.size() * sizeof(float));
    a.tensors.emplace_back(std::move(name), std::move(t));
  }
  return a;
}

}  // namespace aesthetics::nn
