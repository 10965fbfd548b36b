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

// AVA-style vote metadata: parsing, mode-rating binarization, stratified
// splits and the tab-separated manifest consumed by training.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics::ava {

inline constexpr int kNumRatings = 10;

struct VoteHistogram {
  /// counts[r - 1] is the number of votes for rating r.
  std::array<std::int64_t, kNumRatings> counts{};

  std::int64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }
  std::int64_t votes(int rating) const { return counts.at(static_cast<std::size_t>(rating - 1)); }

  friend bool operator==(const VoteHistogram&, const VoteHistogram&) = default;
};

enum class Label { low, high, excluded };
enum class Split { train, val, test, none };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::low: return "LOW";
    case Label::high: return "HIGH";
    case Label::excluded: return "EXCLUDED";
  }
  return "?";
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "TRAIN";
    case Split::val: return "VAL";
    case Split::test: return "TEST";
    case Split::none: return "NONE";
  }
  return "?";
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "LOW") return Label::low;
  if (s == "HIGH") return Label::high;
  if (s == "EXCLUDED") return Label::excluded;
  return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "TRAIN") return Split::train;
  if (s == "VAL") return Split::val;
  if (s == "TEST") return Split::test;
  if (s == "NONE") return Split::none;
  return std::nullopt;
}

struct ImageRecord {
  std::string id;
  std::string path;
  VoteHistogram histogram;
  std::optional<Label> label;  // unset until assign_labels
  Split split = Split::none;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

// ---------------------------------------------------------------------------
// Metadata parsing

enum class ParseFailure { too_few_columns, bad_integer, negative_count };

inline std::string_view to_string(ParseFailure f) {
  switch (f) {
    case ParseFailure::too_few_columns: return "too-few-columns";
    case ParseFailure::bad_integer: return "bad-integer";
    case ParseFailure::negative_count: return "negative-count";
  }
  return "?";
}

struct ParseError {
  std::size_t line = 0;
  ParseFailure reason{};
  std::string text;
};

struct ParseResult {
  std::vector<ImageRecord> records;
  std::vector<ParseError> errors;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line, std::size_t max_fields) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size() && out.size() < max_fields) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// One record per non-empty line: record index, image id, then ten vote
/// counts. Columns past the twelfth are ignored. Bad lines are reported and
/// skipped.
inline ParseResult parse_metadata(std::istream& in) {
  ParseResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = detail::split_ws(line, 2 + kNumRatings);
    if (fields.empty()) continue;
    if (fields.size() < 2 + kNumRatings) {
      result.errors.push_back({lineno, ParseFailure::too_few_columns, line});
      continue;
    }
    ImageRecord rec;
    rec.id = std::string(fields[1]);
    bool ok = static_cast<bool>(detail::to_int(fields[0]));
    ParseFailure why = ParseFailure::bad_integer;
    for (int r = 0; ok && r < kNumRatings; ++r) {
      auto v = detail::to_int(fields[2 + r]);
      if (!v) {
        ok = false;
      } else if (*v < 0) {
        ok = false;
        why = ParseFailure::negative_count;
      } else {
        rec.histogram.counts[r] = *v;
      }
    }
    if (!ok) {
      result.errors.push_back({lineno, why, line});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Labels

/// Rating with the most votes; ties go to the lowest rating.
inline int mode_rating(const VoteHistogram& h) {
  if (h.total() <= 0) throw Error(Errc::empty_histogram, "no votes");
  int best = 1;
  for (int r = 2; r <= kNumRatings; ++r)
    if (h.votes(r) > h.votes(best)) best = r;
  return best;
}

inline Label binarize(int rating) {
  if (rating < 1 || rating > kNumRatings) throw Error(Errc::invalid_rating, std::to_string(rating));
  if (rating <= 4) return Label::low;
  if (rating >= 7) return Label::high;
  return Label::excluded;
}

inline Label label_of(const VoteHistogram& h) { return binarize(mode_rating(h)); }

inline void assign_labels(std::vector<ImageRecord>& records) {
  for (auto& r : records) {
    r.label = label_of(r.histogram);
    if (*r.label == Label::excluded) r.split = Split::none;
  }
}

struct RatingSummary {
  std::array<std::int64_t, kNumRatings> per_rating{};
  std::int64_t total = 0;

  std::int64_t count(int rating) const { return per_rating.at(static_cast<std::size_t>(rating - 1)); }
};

inline RatingSummary summarize_by_rating(const std::vector<ImageRecord>& records) {
  RatingSummary s;
  for (const auto& r : records) {
    ++s.per_rating[static_cast<std::size_t>(mode_rating(r.histogram) - 1)];
    ++s.total;
  }
  return s;
}

inline void print_summary(std::ostream& os, const RatingSummary& s) {
  os << "Rating";
  for (int r = 1; r <= kNumRatings; ++r) os << '\t' << r;
  os << "\tTotal images\n";
  os << "Number of images";
  for (int r = 1; r <= kNumRatings; ++r) os << '\t' << s.count(r);
  os << '\t' << s.total << '\n';
}

// ---------------------------------------------------------------------------
// Splits

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Stratified seeded split of LOW and HIGH records. EXCLUDED records are
/// left at Split::none. Per class, the train and val counts are the rounded
/// ratio shares and test takes the remainder.
inline void make_splits(std::vector<ImageRecord>& records, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw Error(Errc::bad_config, "split ratios must be positive and sum to 1");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (!r.label) r.label = label_of(r.histogram);
    r.split = Split::none;
    if (*r.label == Label::low) by_class[0].push_back(i);
    if (*r.label == Label::high) by_class[1].push_back(i);
  }
  for (int c = 0; c < 2; ++c)
    if (by_class[c].empty())
      throw Error(Errc::class_missing, c == 0 ? "no LOW records" : "no HIGH records");

  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    shuffle(idx, rng);
    const auto n = static_cast<double>(idx.size());
    auto n_train = static_cast<std::size_t>(std::llround(n * ratios.train));
    auto n_val = static_cast<std::size_t>(std::llround(n * ratios.val));
    n_train = std::min(n_train, idx.size());
    n_val = std::min(n_val, idx.size() - n_train);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      records[idx[k]].split = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    }
  }
}

// ---------------------------------------------------------------------------
// Manifest: id \t path \t c1..c10 \t label \t split

inline void write_manifest(std::ostream& os, const std::vector<ImageRecord>& records) {
  for (const auto& r : records) {
    if (!r.label) throw Error(Errc::bad_manifest, "record " + r.id + " has no label");
    if (r.id.find_first_of("\t\n") != std::string::npos || r.path.find_first_of("\t\n") != std::string::npos)
      throw Error(Errc::bad_manifest, "tab or newline inside a field of record " + r.id);
    os << r.id << '\t' << r.path;
    for (auto c : r.histogram.counts) os << '\t' << c;
    os << '\t' << to_string(*r.label) << '\t' << to_string(r.split) << '\n';
  }
}

inline std::vector<ImageRecord> read_manifest(std::istream& in) {
  std::vector<ImageRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      auto tab = rest.find('\t');
      f.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (f.size() != 4 + kNumRatings)
      throw Error(Errc::bad_manifest, "expected " + std::to_string(4 + kNumRatings) + " fields, got " +
                                          std::to_string(f.size()), lineno);
    ImageRecord r;
    r.id = std::string(f[0]);
    r.path = std::string(f[1]);
    for (int k = 0; k < kNumRatings; ++k) {
      auto v = detail::to_int(f[2 + k]);
      if (!v || *v < 0) throw Error(Errc::bad_manifest, "bad vote count '" + std::string(f[2 + k]) + "'", lineno);
      r.histogram.counts[k] = *v;
    }
    r.label = parse_label(f[12]);
    if (!r.label) throw Error(Errc::bad_label, "unknown label '" + std::string(f[12]) + "'", lineno);
    auto split = parse_split(f[13]);
    if (!split) throw Error(Errc::bad_manifest, "unknown split '" + std::string(f[13]) + "'", lineno);
    r.split = *split;
    if (*r.label == Label::excluded && r.split != Split::none)
      throw Error(Errc::bad_manifest, "EXCLUDED record assigned to a split", lineno);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_manifest(const std::string& path, const std::vector<ImageRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io, "cannot open " + path + " for writing");
  write_manifest(os, records);
  if (!os) throw Error(Errc::io, "write failed: " + path);
}

inline std::vector<ImageRecord> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  return read_manifest(in);
}

}  // namespace aesthetics::ava
