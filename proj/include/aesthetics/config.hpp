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

// Layered key-value run configuration: profile defaults < config file <
// command-line overrides. The fingerprint hashes the resolved map.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics {

enum class Profile { paper, desk };

inline std::string to_string(Profile p) { return p == Profile::paper ? "PAPER" : "DESK"; }

inline Profile parse_profile(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "PAPER") return Profile::paper;
  if (s == "DESK") return Profile::desk;
  throw Error(Errc::bad_config, "unknown profile '" + s + "'");
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class RunConfig {
 public:
  using Map = std::map<std::string, std::string>;

  static Map defaults(Profile p) {
    Map m{
        {"profile", to_string(p)},
        {"seed", "0"},
        {"backbone", "vgg19"},
        {"columns", "3"},
        {"menus", ""},
        {"tiny_channels", "8,16"},
        {"weights", ""},
        {"head_widths", ""},
        {"fusion_widths", "512,2"},
        {"head_epochs", "300"},
        {"finetune_epochs", "100"},
        {"epoch_multiplier", "1"},
        {"min_stage_epochs", "1"},
        {"lr_head", "0.001"},
        {"lr_finetune", "0.0001"},
        {"batch_size", "32"},
        {"momentum", "0.9"},
        {"class_weighted", "false"},
        {"eval_averaging", "false"},
        {"checkpoint_interval", "10"},
        {"split_ratios", "0.8,0.1,0.1"},
        {"resize", "aspect_crop"},
        {"crop_count", "3"},
        {"crop_min_separation", "100"},
        {"crop_max_attempts", "1000"},
        {"spectral_width", "64"},
        {"spectral_sigma", "2.5"},
        {"fine_scales", "8,16,32"},
    };
    if (p == Profile::desk) {
      m["backbone"] = "tiny";
      m["epoch_multiplier"] = "0.01";
      m["min_stage_epochs"] = "3";
      m["batch_size"] = "8";
      m["checkpoint_interval"] = "1";
    }
    return m;
  }

  explicit RunConfig(Profile p = Profile::paper) : values_(defaults(p)) {}

  /// `key = value` lines; '#' starts a comment.
  static Map parse(std::istream& in, const std::string& origin = "config") {
    Map m;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(Errc::bad_config, origin + ": expected key = value", n);
      auto key = trim(std::string_view(line).substr(0, eq));
      if (key.empty()) throw Error(Errc::bad_config, origin + ": empty key", n);
      m[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return m;
  }

  static Map parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read config " + path);
    return parse(in, path);
  }

  /// Overlays `layer`; unknown keys are rejected.
  void merge(const Map& layer) {
    for (const auto& [k, v] : layer) set(k, v);
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw Error(Errc::bad_config, "unknown config key '" + key + "'");
    if (key == "profile") parse_profile(value);
    values_[key] = value;
  }

  /// "key=value"
  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::bad_config, "expected key=value, got '" + kv + "'");
    set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }

  const Map& values() const { return values_; }
  Profile profile() const { return parse_profile(get("profile")); }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::bad_config, "missing config key '" + key + "'");
    return it->second;
  }

  std::int64_t get_int(const std::string& key) const {
    const auto& s = get(key);
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw Error(Errc::bad_config, key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const auto& s = get(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw Error(Errc::bad_config, key + ": expected a non-negative integer, got '" + s + "'");
    return v;
  }

  double get_double(const std::string& key) const {
    const auto& s = get(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(Errc::bad_config, key + ": expected a number, got '" + s + "'");
  }

  bool get_bool(const std::string& key) const {
    const auto& s = get(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(Errc::bad_config, key + ": expected a boolean, got '" + s + "'");
  }

  std::vector<int> get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : split_list(get(key))) {
      int v = 0;
      const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
      if (r.ec != std::errc{} || r.ptr != item.data() + item.size())
        throw Error(Errc::bad_config, key + ": bad integer '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(key))) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(Errc::bad_config, key + ": bad number '" + item + "'");
      }
    }
    return out;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values_) {
      h = fnv1a(k, h);
      h = fnv1a("=", h);
      h = fnv1a(v, h);
      h = fnv1a("\n", h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  Map values_;
};

}  // namespace aesthetics
