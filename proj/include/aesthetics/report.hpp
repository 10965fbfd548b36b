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
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aesthetics/backbones.hpp"
#include "aesthetics/error.hpp"
#include "aesthetics/train.hpp"

namespace aesthetics::report {

inline std::string network_label(int columns) {
  switch (columns) {
    case 1: return "Single Column Network";
    case 2: return "Double Column Network";
    case 3: return "Triple Column Network";
  }
  return std::to_string(columns) + " Column Network";
}

inline std::string architecture_label(backbones::Kind k) {
  switch (k) {
    case backbones::Kind::vgg19: return "VGG19";
    case backbones::Kind::alexnet: return "AlexNet";
    case backbones::Kind::tiny: return "TINY";
  }
  return "?";
}

struct TrainReport {
  std::string architecture;
  std::string network;
  int columns = 1;
  std::string profile;
  std::string fingerprint;
  std::string config;
  std::string status = "complete";  // complete | interrupted | diverged
  std::string error;
  std::vector<train::EpochStat> epochs;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
  double wall_seconds = 0.0;
};

inline nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json j;
  j["architecture"] = r.architecture;
  j["network"] = r.network;
  j["columns"] = r.columns;
  j["profile"] = r.profile;
  j["fingerprint"] = r.fingerprint;
  j["config"] = r.config;
  j["status"] = r.status;
  j["error"] = r.error;
  j["wall_seconds"] = r.wall_seconds;
  j["train_accuracy"] = r.train_accuracy ? nlohmann::json(*r.train_accuracy) : nlohmann::json(nullptr);
  j["test_accuracy"] = r.test_accuracy ? nlohmann::json(*r.test_accuracy) : nlohmann::json(nullptr);
  j["epochs"] = nlohmann::json::parse(train::EpochHistory{r.epochs}.to_json());
  return j;
}

inline std::optional<double> accuracy_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const double v = j.at(key).get<double>();
  if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::bad_config, std::string(key) + " outside [0, 1]");
  return v;
}

inline TrainReport from_json(const nlohmann::json& j) {
  TrainReport r;
  r.architecture = j.at("architecture").get<std::string>();
  r.network = j.at("network").get<std::string>();
  r.columns = j.value("columns", 1);
  r.profile = j.value("profile", "");
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.config = j.value("config", "");
  r.status = j.value("status", "complete");
  r.error = j.value("error", "");
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.train_accuracy = accuracy_field(j, "train_accuracy");
  r.test_accuracy = accuracy_field(j, "test_accuracy");
  if (j.contains("epochs")) r.epochs = train::EpochHistory::from_json(j.at("epochs").dump()).epochs;
  return r;
}

inline void save(const TrainReport& r, const std::string& path) {
  std::ofstream out(path);
  out << to_json(r).dump(2) << "\n";
  if (!out) throw Error(Errc::io, "cannot write " + path);
}

/// Throws on unreadable or malformed files.
inline TrainReport load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_config, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tables

struct Table3Row {
  std::string architecture;
  std::string network;
  double train_accuracy;
  double test_accuracy;
};

inline const std::vector<Table3Row>& reference_architectures() {
  static const std::vector<Table3Row> rows{
      {"AlexNet", "Single Column", 0.993, 0.6164},
      {"VGG19", "Single Column Network", 0.9987, 0.7137},
      {"VGG19", "Double Column Network", 0.8082, 0.7444},
      {"VGG19", "Triple Column Network", 0.92, 0.823},
  };
  return rows;
}

struct ComparisonRow {
  std::string network;
  double accuracy_percent;
  bool measured = false;
};

inline const std::vector<ComparisonRow>& literature_rows() {
  static const std::vector<ComparisonRow> rows{
      {"Single Column Network (SCNN)", 71.20},
      {"Double Column Network (DCNN)", 73.25},
      {"Brain Inspired Deep Neural Network (BDN)", 78.08},
      {"Triple Column Network", 82.3},
  };
  return rows;
}

inline std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s = "|";
    for (std::size_t c = 0; c < cells.size(); ++c) s += " " + cells[c] + std::string(width[c] - cells[c].size(), ' ') + " |";
    return s + "\n";
  };
  std::string sep = "|";
  for (auto w : width) sep += std::string(w + 2, '-') + "|";
  std::string out = line(header) + sep + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

inline std::string opt_acc(const std::optional<double>& v) { return v ? fmt(*v, 4) : "n/a"; }

/// Measured runs in the layout of the architecture results table.
inline std::string render_runs(const std::vector<TrainReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) rows.push_back({r.architecture, r.network, opt_acc(r.train_accuracy), opt_acc(r.test_accuracy)});
  return render_table({"Architecture", "Network", "Train accuracy", "Test Accuracy"}, rows);
}

inline std::string render_reference() {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reference_architectures())
    rows.push_back({r.architecture, r.network, fmt(r.train_accuracy, 4), fmt(r.test_accuracy, 4)});
  return render_table({"Architecture", "Network", "Train accuracy", "Test Accuracy"}, rows);
}

/// Literature rows plus one row per measured run (test accuracy in percent),
/// sorted by accuracy, highest first.
inline std::vector<ComparisonRow> comparison_rows(const std::vector<TrainReport>& reports) {
  auto rows = literature_rows();
  for (const auto& r : reports) {
    if (!r.test_accuracy) continue;
    rows.push_back({r.architecture + " " + r.network + " (measured, " + r.profile + ", " + r.fingerprint + ")",
                    *r.test_accuracy * 100.0, true});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.accuracy_percent > b.accuracy_percent; });
  return rows;
}

inline std::string render_comparison(const std::vector<ComparisonRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) cells.push_back({r.network, fmt(r.accuracy_percent, 2)});
  return render_table({"Network", "Accuracy"}, cells);
}

}  // namespace aesthetics::report
