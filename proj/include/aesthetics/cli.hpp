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

// Command-line front end: ingest, preview, train, eval, predict, report.
// Exit codes: 0 success, 1 usage, 2 data, 3 numeric failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aesthetics/ava.hpp"
#include "aesthetics/config.hpp"
#include "aesthetics/error.hpp"
#include "aesthetics/geometry.hpp"
#include "aesthetics/image_io.hpp"
#include "aesthetics/multicolumn.hpp"
#include "aesthetics/pipeline.hpp"
#include "aesthetics/report.hpp"
#include "aesthetics/train.hpp"

namespace aesthetics::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::bad_config:
    case Errc::no_variant:
    case Errc::bad_fusion:
    case Errc::bad_spec: return kUsage;
    case Errc::diverged: return kNumeric;
    default: return kData;
  }
}

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string profile;
  std::string config_file;
  std::vector<std::string> overrides;
};

inline RunConfig resolve_config(const GlobalOptions& g) {
  Profile profile = Profile::paper;
  std::optional<RunConfig::Map> file_layer;
  if (!g.config_file.empty()) {
    file_layer = RunConfig::parse_file(g.config_file);
    if (auto it = file_layer->find("profile"); it != file_layer->end()) profile = parse_profile(it->second);
  }
  if (!g.profile.empty()) profile = parse_profile(g.profile);
  RunConfig cfg(profile);
  if (file_layer) cfg.merge(*file_layer);
  cfg.set("profile", to_string(profile));
  for (const auto& kv : g.overrides) cfg.set_assignment(kv);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  return cfg;
}

/// Resolved configuration stored in a run directory.
inline RunConfig load_run_config(const fs::path& run_dir) {
  const auto layer = RunConfig::parse_file((run_dir / "config.txt").string());
  const auto it = layer.find("profile");
  RunConfig cfg(it == layer.end() ? Profile::paper : parse_profile(it->second));
  cfg.merge(layer);
  return cfg;
}

inline std::string utc_timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

inline fs::path new_run_dir(const fs::path& root, const std::string& fingerprint) {
  const std::string base = utc_timestamp() + "-" + fingerprint;
  fs::path dir = root / base;
  for (int k = 2; fs::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

/// Manifest paths are relative to the manifest's directory unless absolute.
inline std::vector<ava::ImageRecord> load_manifest_resolved(const std::string& path) {
  auto records = ava::read_manifest(path);
  const auto base = fs::absolute(path).parent_path();
  for (auto& r : records)
    if (!r.path.empty() && fs::path(r.path).is_relative()) r.path = (base / r.path).lexically_normal().string();
  return records;
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestOptions {
  std::string metadata;
  std::string images;
  std::string out;
  std::string ratios;
  std::string image_ext = "jpg";
  bool strict = false;
};

inline int cmd_ingest(const IngestOptions& o, RunConfig cfg, std::ostream& out, std::ostream& err) {
  if (!o.ratios.empty()) cfg.set("split_ratios", o.ratios);
  std::ifstream in(o.metadata);
  if (!in) {
    err << "error: cannot read metadata " << o.metadata << "\n";
    return kData;
  }
  auto parsed = ava::parse_metadata(in);
  for (const auto& e : parsed.errors)
    err << "warning: " << o.metadata << ":" << e.line << ": " << ava::to_string(e.reason) << "\n";
  if (parsed.records.empty()) {
    err << "error: no valid records in " << o.metadata << "\n";
    return kData;
  }

  std::vector<ava::ImageRecord> usable;
  std::size_t empty = 0;
  for (auto& r : parsed.records) {
    if (r.histogram.total() <= 0) {
      ++empty;
      continue;
    }
    usable.push_back(std::move(r));
  }
  if (empty) err << "warning: skipped " << empty << " records without votes\n";
  ava::assign_labels(usable);
  ava::print_summary(out, ava::summarize_by_rating(usable));

  const auto manifest_dir = fs::absolute(o.out).parent_path();
  std::vector<ava::ImageRecord> kept;
  std::size_t missing = 0;
  for (auto& r : usable) {
    fs::path image = fs::path(o.images.empty() ? "." : o.images) / (r.id + "." + o.image_ext);
    if (!o.images.empty() && !fs::exists(image)) {
      ++missing;
      if (o.strict) err << "error: missing image " << image.string() << "\n";
      continue;
    }
    const auto abs = fs::absolute(image).lexically_normal();
    auto rel = abs.lexically_relative(manifest_dir);
    r.path = rel.empty() ? abs.string() : rel.string();
    kept.push_back(std::move(r));
  }
  if (missing) {
    if (o.strict) {
      err << "error: " << missing << " image files missing\n";
      return kData;
    }
    err << "warning: skipped " << missing << " records with missing image files\n";
  }
  ava::make_splits(kept, pipeline::ratios_from(cfg), cfg.get_u64("seed"));
  if (!manifest_dir.empty()) fs::create_directories(manifest_dir);
  ava::write_manifest(o.out, kept);
  std::array<std::size_t, 4> per_split{};
  for (const auto& r : kept) ++per_split[static_cast<std::size_t>(r.split)];
  out << "manifest: " << o.out << " (" << kept.size() << " records; train " << per_split[0] << ", val " << per_split[1]
      << ", test " << per_split[2] << ", excluded " << per_split[3] << ")\n";
  return kOk;
}

struct PreviewOptions {
  std::string image;
  std::string out;
};

inline std::string describe(const geometry::CropSpec& c) {
  std::ostringstream os;
  os << "x=" << c.x << " y=" << c.y << " w=" << c.w << " h=" << c.h;
  return os.str();
}

inline int cmd_preview(const PreviewOptions& o, const RunConfig& cfg, std::ostream& out, std::ostream&) {
  using multicolumn::ColumnVariant;
  const Image img = load_image(o.image);
  const auto id = fs::path(o.image).stem().string();
  const auto seed = cfg.get_u64("seed");
  multicolumn::VariantSet set(img, multicolumn::crop_seed(seed, id), pipeline::preprocess_from(cfg));
  fs::create_directories(o.out);
  const std::pair<ColumnVariant, const char*> files[] = {
      {ColumnVariant::original, "original.png"},
      {ColumnVariant::padded, "padded.png"},
      {ColumnVariant::center_crop, "center_crop.png"},
      {ColumnVariant::random_crop_1, "random_crop_1.png"},
      {ColumnVariant::random_crop_2, "random_crop_2.png"},
      {ColumnVariant::random_crop_3, "random_crop_3.png"},
      {ColumnVariant::saliency_spectral, "saliency_spectral.png"},
      {ColumnVariant::saliency_fine, "saliency_fine.png"},
  };
  int written = 0;
  for (const auto& [variant, name] : files) {
    const auto view = set.image(variant);
    const auto path = fs::path(o.out) / name;
    if (!view) {
      fs::remove(path);
      continue;
    }
    save_image(*view, path.string());
    ++written;
  }

  std::ostringstream side;
  const auto& rc = set.random_crops();
  side << "source " << fs::path(o.image).filename().string() << " " << img.width << "x" << img.height << "\n";
  side << "seed " << seed << "\n";
  side << "crop_base " << set.crop_base().width << "x" << set.crop_base().height << "\n";
  side << "center_crop " << describe(set.center_spec()) << "\n";
  for (std::size_t k = 0; k < rc.crops.size(); ++k) side << "random_crop_" << k + 1 << " " << describe(rc.crops[k]) << "\n";
  for (std::size_t k = rc.crops.size(); k < static_cast<std::size_t>(cfg.get_int("crop_count")); ++k)
    side << "random_crop_" << k + 1 << " INFEASIBLE\n";
  if (rc.error) side << "random_crops_error " << rc.error->what() << "\n";
  std::ofstream(fs::path(o.out) / "crops.txt") << side.str();
  out << "wrote " << written << " views and crops.txt to " << o.out << "\n";
  return kOk;
}

struct TrainOptions {
  std::string manifest;
  std::string out = "runs";
  std::string resume;
  std::optional<int> stop_after_epochs;
};

inline std::map<std::string, std::string> checkpoint_meta(const RunConfig& cfg, const multicolumn::Architecture& arch) {
  return {{"config", cfg.serialize()}, {"menus", multicolumn::describe_menus(arch.columns)}};
}

/// A resumed run keeps the configuration stored in its directory.
inline int cmd_train(const TrainOptions& o, RunConfig cfg, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  if (!fs::exists(o.manifest)) {
    err << "error: manifest not found: " << o.manifest << "\n";
    return kData;
  }
  if (!o.resume.empty()) {
    if (!fs::exists(fs::path(o.resume) / "latest.ckpt")) {
      err << "error: no checkpoint in " << o.resume << "\n";
      return kData;
    }
    cfg = load_run_config(o.resume);
  }
  const auto records = load_manifest_resolved(o.manifest);
  const auto arch = pipeline::architecture_from(cfg);
  const auto stages = pipeline::stages_from(cfg, arch);
  const auto pre = pipeline::preprocess_from(cfg);
  const auto seed = cfg.get_u64("seed");
  const auto fingerprint = cfg.fingerprint();

  fs::path run_dir;
  if (!o.resume.empty()) {
    run_dir = o.resume;
  } else {
    run_dir = new_run_dir(o.out, fingerprint);
    std::ofstream(run_dir / "config.txt") << cfg.serialize();
  }

  auto model = pipeline::build_model(arch, seed);
  auto train_data = train::Dataset::from_records(records, ava::Split::train, pre, seed);
  auto test_data = train::Dataset::from_records(records, ava::Split::test, pre, seed);

  report::TrainReport rep;
  rep.architecture = report::architecture_label(arch.columns.front().backbone.kind);
  rep.network = report::network_label(arch.column_count());
  rep.columns = arch.column_count();
  rep.profile = cfg.get("profile");
  rep.fingerprint = fingerprint;
  rep.config = cfg.serialize();

  train::ScheduleOptions opt;
  opt.seed = seed;
  opt.class_weighted = cfg.get_bool("class_weighted");
  opt.run_dir = run_dir.string();
  opt.checkpoint_interval = static_cast<int>(cfg.get_int("checkpoint_interval"));
  opt.resume = !o.resume.empty();
  opt.fingerprint = fingerprint;
  opt.checkpoint_meta = checkpoint_meta(cfg, arch);
  opt.stop_after_epochs = o.stop_after_epochs;
  std::vector<train::EpochStat> seen;
  opt.on_epoch = [&](const train::EpochStat& s) {
    seen.push_back(s);
    out << s.stage << " epoch " << s.epoch << ": loss " << report::fmt(s.loss, 6) << ", accuracy "
        << report::fmt(s.accuracy, 4) << "\n";
  };

  const auto finish = [&](const std::string& status) {
    rep.status = status;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report::save(rep, (run_dir / "report.json").string());
    std::ofstream(run_dir / "report.txt") << report::render_runs({rep});
  };

  train::ScheduleResult result;
  try {
    result = train::run_schedule(model, stages, arch.columns, train_data, opt);
  } catch (const Error& e) {
    if (e.code() != Errc::diverged) throw;
    rep.epochs = seen;
    rep.error = e.what();
    finish("diverged");
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
  rep.epochs = result.history.epochs;
  if (result.interrupted) {
    out << "interrupted; resume with --resume " << run_dir.string() << "\n";
    return kOk;
  }

  train::save_checkpoint((run_dir / "model.ckpt").string(), model,
                         {stages.back().name, static_cast<int>(stages.size()) - 1, stages.back().epochs, fingerprint,
                          opt.checkpoint_meta});
  const bool averaging = cfg.get_bool("eval_averaging");
  rep.train_accuracy = train::evaluate(model, train_data, arch.columns, averaging);
  if (!test_data.empty())
    rep.test_accuracy = train::evaluate(model, test_data, arch.columns, averaging);
  else
    err << "warning: manifest has no TEST records\n";
  finish("complete");
  out << report::render_runs({rep});
  out << "run directory: " << run_dir.string() << "\n";
  return kOk;
}

/// Rebuilds the model of a finished run.
inline std::pair<RunConfig, backbones::Model> load_run(const fs::path& run_dir) {
  auto cfg = load_run_config(run_dir);
  const auto arch = pipeline::architecture_from(cfg);
  auto model = multicolumn::assemble(arch, cfg.get_u64("seed"));
  train::load_checkpoint((run_dir / "model.ckpt").string(), model);
  return {std::move(cfg), std::move(model)};
}

struct EvalOptions {
  std::string run;
  std::string manifest;
  std::string split = "TEST";
  std::optional<bool> averaging;
};

inline int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream&) {
  auto [cfg, model] = load_run(o.run);
  const auto arch = pipeline::architecture_from(cfg);
  const auto split = ava::parse_split(o.split);
  if (!split || *split == ava::Split::none) throw Error(Errc::bad_config, "split must be TRAIN, VAL or TEST");
  const auto records = load_manifest_resolved(o.manifest);
  auto data = train::Dataset::from_records(records, *split, pipeline::preprocess_from(cfg), cfg.get_u64("seed"));
  const bool averaging = o.averaging.value_or(cfg.get_bool("eval_averaging"));
  const double acc = train::evaluate(model, data, arch.columns, averaging);
  out << o.split << " accuracy " << report::fmt(acc, 6) << " (" << data.size() << " images)\n";
  return kOk;
}

struct PredictOptions {
  std::string run;
  std::vector<std::string> images;
  bool averaging = false;
};

inline int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream&) {
  auto [cfg, model] = load_run(o.run);
  const auto arch = pipeline::architecture_from(cfg);
  const auto pre = pipeline::preprocess_from(cfg);
  for (const auto& path : o.images) {
    const auto p = train::predict(model, load_image(path), arch.columns, pre, cfg.get_u64("seed"),
                                  fs::path(path).stem().string(), o.averaging);
    out << path << "\t" << (p.label == train::kHigh ? "HIGH" : "LOW") << "\t" << report::fmt(p.confidence, 6) << "\n";
  }
  return kOk;
}

inline int cmd_report(const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
  std::vector<report::TrainReport> reports;
  for (const auto& f : files) {
    fs::path path = f;
    if (fs::is_directory(path)) path /= "report.json";
    try {
      auto r = report::load(path.string());
      if (!r.test_accuracy) {
        err << "warning: " << path.string() << " has no test accuracy (status " << r.status << "), skipped\n";
        continue;
      }
      reports.push_back(std::move(r));
    } catch (const Error& e) {
      err << "warning: skipping " << path.string() << ": " << e.what() << "\n";
    }
  }
  if (reports.empty()) {
    err << "error: no valid reports\n";
    return kData;
  }
  out << "Reference results (static, full-scale)\n" << report::render_reference() << "\n";
  out << "Measured runs\n" << report::render_runs(reports) << "\n";
  out << "Comparison\n" << report::render_comparison(report::comparison_rows(reports));
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-column image aesthetics classification"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--profile", g.profile, "PAPER or DESK");
  app.add_option("--config", g.config_file, "Config file (key = value lines)");
  app.add_option("--set", g.overrides, "Config override key=value (repeatable)");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse vote metadata and write a labeled, split manifest");
  c_ingest->add_option("--metadata", ingest.metadata, "Vote metadata file")->required();
  c_ingest->add_option("--images", ingest.images, "Image directory; records without a file are skipped");
  c_ingest->add_option("--out", ingest.out, "Manifest to write")->required();
  c_ingest->add_option("--ratios", ingest.ratios, "train,val,test ratios");
  c_ingest->add_option("--image-ext", ingest.image_ext, "Image file extension");
  c_ingest->add_flag("--strict", ingest.strict, "Fail when an image file is missing");

  PreviewOptions preview;
  auto* c_preview = app.add_subcommand("preview", "Write every column variant of one image");
  c_preview->add_option("--image", preview.image)->required();
  c_preview->add_option("--out", preview.out)->required();

  TrainOptions tr;
  auto* c_train = app.add_subcommand("train", "Run the staged training schedule");
  c_train->add_option("--manifest", tr.manifest)->required();
  c_train->add_option("--out", tr.out, "Root for run directories");
  c_train->add_option("--resume", tr.resume, "Continue the run in this directory");
  c_train->add_option("--stop-after-epochs", tr.stop_after_epochs, "Stop after this many epochs")->group("");

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "Accuracy of a trained run on a manifest split");
  c_eval->add_option("--run", ev.run)->required();
  c_eval->add_option("--manifest", ev.manifest)->required();
  c_eval->add_option("--split", ev.split);
  bool eval_averaging = false;
  auto* eval_avg = c_eval->add_flag("--averaging", eval_averaging, "Average over all variant combinations");

  PredictOptions pr;
  auto* c_predict = app.add_subcommand("predict", "Classify images with a trained run");
  c_predict->add_option("--run", pr.run)->required();
  c_predict->add_option("images", pr.images)->required();
  c_predict->add_flag("--averaging", pr.averaging, "Average over all variant combinations");

  std::vector<std::string> report_files;
  auto* c_report = app.add_subcommand("report", "Compare run reports with published results");
  c_report->add_option("reports", report_files, "report.json files or run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const auto cfg = resolve_config(g);
    if (c_ingest->parsed()) return cmd_ingest(ingest, cfg, out, err);
    if (c_preview->parsed()) return cmd_preview(preview, cfg, out, err);
    if (c_train->parsed()) return cmd_train(tr, cfg, out, err);
    if (c_eval->parsed()) {
      if (eval_avg->count() > 0) ev.averaging = eval_averaging;
      return cmd_eval(ev, out, err);
    }
    if (c_predict->parsed()) return cmd_predict(pr, out, err);
    if (c_report->parsed()) return cmd_report(report_files, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace aesthetics::cli
