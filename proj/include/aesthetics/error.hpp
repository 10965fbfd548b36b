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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aesthetics {

enum class Errc {
  empty_histogram,
  invalid_rating,
  class_missing,
  bad_manifest,
  bad_label,
  empty_image,
  too_small,
  bad_crop,
  bad_shape,
  insufficient_separation,
  bad_spec,
  weights_incompatible,
  bad_config,
  no_variant,
  bad_fusion,
  diverged,
  empty_split,
  bad_image,
  io,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::empty_histogram: return "empty-histogram";
    case Errc::invalid_rating: return "invalid-rating";
    case Errc::class_missing: return "class-missing";
    case Errc::bad_manifest: return "bad-manifest";
    case Errc::bad_label: return "bad-label";
    case Errc::empty_image: return "empty-image";
    case Errc::too_small: return "too-small";
    case Errc::bad_crop: return "bad-crop";
    case Errc::bad_shape: return "bad-shape";
    case Errc::insufficient_separation: return "insufficient-separation";
    case Errc::bad_spec: return "bad-spec";
    case Errc::weights_incompatible: return "weights-incompatible";
    case Errc::bad_config: return "bad-config";
    case Errc::no_variant: return "no-variant";
    case Errc::bad_fusion: return "bad-fusion";
    case Errc::diverged: return "diverged";
    case Errc::empty_split: return "empty-split";
    case Errc::bad_image: return "bad-image";
    case Errc::io: return "io";
  }
  return "unknown";
}

/// Library-wide exception. `line` is 1-based when the error is tied to a
/// line of a text input, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, std::size_t line = 0)
      : std::runtime_error(format(code, detail, line)), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(Errc code, const std::string& detail, std::size_t line) {
    std::string msg(to_string(code));
    if (line != 0) msg += " at line " + std::to_string(line);
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  Errc code_;
  std::size_t line_;
};

}  // namespace aesthetics
