#include "geofuse/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "geofuse/config.hpp"
#include "geofuse/error.hpp"
#include "geofuse/fcn.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/metrics.hpp"
#include "geofuse/pipeline.hpp"
#include "geofuse/pso.hpp"
#include "geofuse/synthgen.hpp"

namespace fs = std::filesystem;

namespace geofuse {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string text_of(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::pair<std::size_t, std::size_t> parse_size_arg(const std::string& text) {
  const auto x = text.find('x');
  std::size_t w = 0, h = 0;
  if (x == std::string::npos)
    throw ValidationError("--size must look like WxH, got '" + text + "'");
  try {
    std::size_t used = 0;
    w = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("w");
    const std::string hs = text.substr(x + 1);
    h = std::stoul(hs, &used);
    if (used != hs.size()) throw std::invalid_argument("h");
  } catch (const std::logic_error&) {
    throw ValidationError("--size must look like WxH, got '" + text + "'");
  }
  return {w, h};
}

// Scenes read from disk, with per-scene digests over their four files.
struct SceneSet {
  std::vector<std::string> names;
  std::vector<SceneSample> scenes;
  std::vector<std::string> digests;
};

SceneSet load_scenes(const fs::path& data_dir, RunManifest& manifest) {
  SceneSet set;
  for (const fs::path& dir : list_scene_dirs(data_dir)) {
    std::string combined;
    auto load = [&](const char* file) {
      const fs::path path = dir / file;
      const std::vector<std::uint8_t> bytes = read_file_bytes(path);
      const std::string digest = sha256_hex(bytes);
      manifest.inputs.emplace_back(path.string(), digest);
      combined += digest;
      return bytes;
    };
    try {
      SceneSample s{decode_raster(load("lidar.gfr")),
                    decode_raster(load("sar.gfr")),
                    decode_raster(load("optical.gfr")),
                    decode_labels(load("labels.gfl"))};
      set.scenes.push_back(std::move(s));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", dir.string(), e.what()));
    }
    set.names.push_back(dir.filename().string());
    set.digests.push_back(sha256_hex(
        std::vector<std::uint8_t>(combined.begin(), combined.end())));
  }
  if (set.scenes.empty())
    throw ValidationError("no scene_<k> directories in '" + data_dir.string() + "'");
  return set;
}

std::string subset_digest(const SceneSet& set, std::span<const std::size_t> idx) {
  std::string joined;
  for (std::size_t i : idx) joined += set.names[i] + ":" + set.digests[i] + "\n";
  return sha256_hex(std::vector<std::uint8_t>(joined.begin(), joined.end()));
}

void record_config(RunManifest& manifest, const RunConfig& config) {
  for (const auto& [k, v] : parse_kv(format_run_config(config))) manifest.config[k] = v;
}

std::vector<std::size_t> eval_indices(const Split& split, EvalSplit which,
                                      std::size_t n) {
  switch (which) {
    case EvalSplit::train: return split.train;
    case EvalSplit::val: return split.val;
    case EvalSplit::test: return split.test;
    case EvalSplit::all: break;
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return all;
}

Dataset head(Dataset set, std::size_t cap) {
  if (cap > 0 && set.size() > cap) set.resize(cap);
  return set;
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::string size = "64x64";
  std::string out;
  SceneSpec spec;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  SceneSpec spec = a.spec;
  std::tie(spec.width, spec.height) = parse_size_arg(a.size);
  spec.validate();
  if (a.count == 0) throw ValidationError("--count must be >= 1");
  const fs::path dir = a.out;
  RunManifest manifest;
  manifest.command = "gen";
  manifest.seeds["base"] = a.seed;
  manifest.config["count"] = std::to_string(a.count);
  manifest.config["size"] = fmt::format("{}x{}", spec.width, spec.height);
  manifest.config["building_count"] = std::to_string(spec.building_count);
  manifest.config["road_count"] = std::to_string(spec.road_count);
  manifest.config["vegetation_blobs"] = std::to_string(spec.vegetation_blobs);
  manifest.config["lidar_sigma"] = fmt::format("{}", spec.lidar_sigma);
  manifest.config["sar_speckle_rate"] = fmt::format("{}", spec.sar_speckle_rate);
  manifest.config["optical_sigma"] = fmt::format("{}", spec.optical_sigma);
  for (std::size_t k = 0; k < a.count; ++k) {
    spec.seed = a.seed + k;
    const fs::path scene_dir = dir / fmt::format("scene_{}", k);
    write_scene(generate_scene(spec), scene_dir);
    for (const char* f : {"lidar.gfr", "sar.gfr", "optical.gfr", "labels.gfl"})
      manifest.add_output(scene_dir / f);
  }
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, dir);
  fmt::print(out, "wrote {} scenes to {}\n", a.count, dir.string());
  return kExitOk;
}

// --- fuse -----------------------------------------------------------------

struct FuseArgs {
  std::string lidar, sar, optical, out;
  bool denoise = false;
  double tolerance = std::numeric_limits<double>::infinity();
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "fuse";
  manifest.config["denoise"] = a.denoise ? "true" : "false";
  Raster l = read_raster(a.lidar), s = read_raster(a.sar), o = read_raster(a.optical);
  manifest.add_input(a.lidar);
  manifest.add_input(a.sar);
  manifest.add_input(a.optical);
  const AlignmentReport report = check_alignment(l, s, o, a.tolerance);
  if (!report.georef_match) throw AlignmentError(report);
  if (a.denoise) {
    l = denoise(l);
    s = denoise(s);
    o = denoise(o);
  }
  const Raster fused = fuse(l, s, o);
  write_raster(fused, a.out);
  manifest.add_output(a.out);
  manifest.extra.emplace_back("alignment", report.describe());
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.out);
  fmt::print(out, "fused {}x{}x{} -> {}\n", fused.channels(), fused.height(),
             fused.width(), a.out);
  return kExitOk;
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data, config, out;
  std::optional<double> budget_seconds;
  std::optional<std::uint64_t> budget_macs;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  RunConfig config = load_run_config(a.config);
  if (a.budget_seconds) config.budget_seconds = *a.budget_seconds;
  if (a.budget_macs) config.budget_macs = *a.budget_macs;
  config.validate();

  RunManifest manifest;
  manifest.command = "train";
  manifest.add_input(a.config);
  const SceneSet set = load_scenes(a.data, manifest);
  const Split split = split_indices(set.scenes.size(), config.split_seed,
                                    config.train_fraction, config.val_fraction);
  if (split.train.empty()) throw ValidationError("training split is empty");
  const Dataset train_set =
      make_dataset(select(set.scenes, split.train), config.input);
  const Dataset val_set = make_dataset(select(set.scenes, split.val), config.input);

  FcnModel model = build_fcn(config.fcn);
  fit_input_normalization(model, train_set);
  BudgetTracker budget(config.budget_seconds, config.budget_macs);
  const TrainResult result = train(model, train_set, val_set, budget);
  const double train_seconds = budget.elapsed_seconds();
  for (const EpochRecord& e : result.history.epochs)
    fmt::print(err, "epoch {}: train_loss={:.6f} val_loss={:.6f} ({:.1f}s)\n",
               e.epoch, e.train_loss, e.val_loss, e.elapsed_seconds);
  if (!result.complete)
    fmt::print(err, "warning: budget exhausted before the first epoch ({}); "
                    "writing the initial model\n", result.stop_reason);

  write_model(result.model, a.out);
  manifest.add_output(a.out);
  record_config(manifest, config);
  manifest.seeds["init"] = config.fcn.seed;
  manifest.seeds["split"] = config.split_seed;
  manifest.mac_count = budget.mac_count;
  manifest.extra.emplace_back("train_seconds", fmt::format("{}", train_seconds));
  manifest.extra.emplace_back("complete", result.complete ? "true" : "false");
  manifest.extra.emplace_back("stop_reason", result.stop_reason);
  manifest.extra.emplace_back("best_epoch", std::to_string(result.best_epoch));
  manifest.extra.emplace_back("best_val_loss", fmt::format("{}", result.best_val_loss));
  manifest.extra.emplace_back("train_set_digest", subset_digest(set, split.train));
  manifest.extra.emplace_back("val_set_digest", subset_digest(set, split.val));
  for (const EpochRecord& e : result.history.epochs)
    manifest.extra.emplace_back(
        fmt::format("epoch_{}", e.epoch),
        fmt::format("train_loss={} val_loss={} seconds={} macs={}", e.train_loss,
                    e.val_loss, e.elapsed_seconds, e.macs));
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.out);
  fmt::print(out, "trained {} epochs (best {} val_loss={:.6f}) -> {}\n",
             result.history.epochs.size(), result.best_epoch,
             result.best_val_loss, a.out);
  return kExitOk;
}

// --- tune -----------------------------------------------------------------

struct TuneArgs {
  std::string data, config, out;
  std::optional<std::size_t> swarm, iters;
  std::optional<std::uint64_t> seed;
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  RunConfig config = load_run_config(a.config);
  if (a.swarm) config.swarm.n_particles = *a.swarm;
  if (a.iters) config.swarm.max_iters = *a.iters;
  if (a.seed) config.swarm.seed = *a.seed;
  config.validate();

  RunManifest manifest;
  manifest.command = "tune";
  manifest.add_input(a.config);
  const SceneSet set = load_scenes(a.data, manifest);
  const Split split = split_indices(set.scenes.size(), config.split_seed,
                                    config.train_fraction, config.val_fraction);
  if (split.train.empty() || split.val.empty())
    throw ValidationError("tuning needs non-empty train and validation splits");
  const Dataset train_set = head(
      make_dataset(select(set.scenes, split.train), config.input),
      config.tune_train_tiles);
  const Dataset val_set = head(
      make_dataset(select(set.scenes, split.val), config.input),
      config.tune_val_tiles);

  FcnTuningBudget budget;
  budget.base = config.fcn;
  budget.epochs = config.tune_epochs;
  budget.seed = config.fcn.seed;
  budget.lambda_p = config.swarm.lambda_p;
  std::size_t evaluations = 0;
  const FitnessFn fitness = [&](std::span<const double> values) {
    const double f = evaluate_fcn_fitness(values, config.tune_space, train_set,
                                          val_set, budget);
    ++evaluations;
    std::string shown;
    for (std::size_t j = 0; j < values.size(); ++j)
      shown += fmt::format("{}{}={}", j ? " " : "", config.tune_space.dims[j].name,
                           values[j]);
    fmt::print(err, "eval {}: {} -> {:.6f}\n", evaluations, shown, f);
    return f;
  };
  const PsoResult result = run_pso(config.tune_space, config.swarm, fitness);

  RunConfig best = config;
  best.fcn = apply_hyperparameters(config.fcn, config.tune_space, result.best_values);
  write_text(a.out, format_run_config(best));
  fs::path trace_path = a.out;
  trace_path += ".trace.csv";
  write_text(trace_path, format_trace_csv(result.trace));

  manifest.add_output(a.out);
  manifest.add_output(trace_path);
  record_config(manifest, config);
  manifest.seeds["swarm"] = config.swarm.seed;
  manifest.seeds["init"] = config.fcn.seed;
  manifest.seeds["split"] = config.split_seed;
  manifest.extra.emplace_back("best_fitness", fmt::format("{}", result.best_fitness));
  manifest.extra.emplace_back("evaluations", std::to_string(result.evaluations));
  manifest.extra.emplace_back("iterations", std::to_string(result.trace.size() - 1));
  manifest.extra.emplace_back("converged", result.converged ? "true" : "false");
  manifest.extra.emplace_back("tune_train_tiles", std::to_string(train_set.size()));
  manifest.extra.emplace_back("tune_val_tiles", std::to_string(val_set.size()));
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.out);
  fmt::print(out, "best fitness {:.6f} after {} evaluations -> {}\n",
             result.best_fitness, result.evaluations, a.out);
  return kExitOk;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string model, data, thresholds, report;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const RunConfig config = load_run_config(a.thresholds);
  const FcnModel model = read_model(a.model);
  if (model.config.in_channels != config.input.channel_count())
    throw ValidationError(fmt::format(
        "model expects {} channels but modalities '{}' give {}",
        model.config.in_channels, format_modalities(config.input.modalities),
        config.input.channel_count()));

  RunManifest manifest;
  manifest.command = "eval";
  manifest.add_input(a.model);
  manifest.add_input(a.thresholds);
  const SceneSet set = load_scenes(a.data, manifest);
  const Split split = split_indices(set.scenes.size(), config.split_seed,
                                    config.train_fraction, config.val_fraction);
  const std::vector<std::size_t> idx =
      eval_indices(split, config.eval_split, set.scenes.size());
  if (idx.empty())
    throw ValidationError("evaluation split '" + to_string(config.eval_split) +
                          "' is empty");
  const Dataset eval_set = make_dataset(select(set.scenes, idx), config.input);

  ConfusionMatrix confusion(model.config.num_classes);
  for (const Sample& s : eval_set) confusion += confusion_matrix(predict(model, s.input), s.labels);
  EvalReport report = evaluate(confusion);
  report.dataset = to_string(config.eval_split);
  report.test_loss = test_loss(model, eval_set);
  const std::vector<std::size_t> grad_idx =
      config.eval_split == EvalSplit::all || split.train.empty() ? idx : split.train;
  const Dataset grad_set = make_dataset(select(set.scenes, grad_idx), config.input);
  report.grad_norm = gradient_norm(model, grad_set);
  report.regularization = regularization_value(model);
  apply_audits(report, config.thresholds);
  report.extra["model_digest"] = sha256_file(a.model);
  report.extra["test_set_digest"] = subset_digest(set, idx);
  report.extra["tile_count"] = std::to_string(idx.size());
  report.extra["modalities"] = format_modalities(config.input.modalities);

  write_text(a.report, format_report_kv(report));
  manifest.add_output(a.report);
  record_config(manifest, config);
  manifest.seeds["split"] = config.split_seed;
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.report);
  out << format_report_text(report);
  return kExitOk;
}

// --- predict --------------------------------------------------------------

struct PredictArgs {
  std::string model, input, out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const FcnModel model = read_model(a.model);
  const Raster input = read_raster(a.input);
  const LabelMap labels = predict(model, input);
  write_labels(labels, a.out);
  RunManifest manifest;
  manifest.command = "predict";
  manifest.add_input(a.model);
  manifest.add_input(a.input);
  manifest.add_output(a.out);
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.out);
  fmt::print(out, "predicted {}x{} labels -> {}\n", labels.height(),
             labels.width(), a.out);
  return kExitOk;
}

// --- compare --------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> runs;
  std::string out;
};

struct CompareRow {
  std::string model;
  std::map<std::string, std::string> report;
  std::string train_seconds = "nan";
  std::string mac_count = "0";
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  if (a.runs.size() < 2) throw ValidationError("compare needs at least two runs");
  RunManifest manifest;
  manifest.command = "compare";
  std::vector<CompareRow> rows;
  for (const std::string& run : a.runs) {
    const fs::path dir = run;
    CompareRow row;
    row.model = dir.filename().empty() ? dir.parent_path().filename().string()
                                       : dir.filename().string();
    row.report = parse_kv(text_of(read_file_bytes(dir / "report.txt")));
    manifest.add_input(dir / "report.txt");
    const fs::path train_manifest = dir / "model.gfm.manifest";
    if (fs::exists(train_manifest)) {
      const auto m = parse_kv(text_of(read_file_bytes(train_manifest)));
      manifest.add_input(train_manifest);
      if (auto it = m.find("train_seconds"); it != m.end()) row.train_seconds = it->second;
      else if (auto w = m.find("wall_seconds"); w != m.end()) row.train_seconds = w->second;
      if (auto it = m.find("mac_count"); it != m.end()) row.mac_count = it->second;
    }
    for (const char* key : {"pixel_accuracy", "mean_iou", "macro_f1",
                            "macro_recall", "macro_precision", "test_set_digest"})
      if (!row.report.count(key))
        throw ValidationError(fmt::format("{}: report lacks '{}'", run, key));
    rows.push_back(std::move(row));
  }
  for (const CompareRow& r : rows)
    if (r.report.at("test_set_digest") != rows.front().report.at("test_set_digest"))
      throw ValidationError(fmt::format(
          "test sets differ: '{}' and '{}' were evaluated on different tiles",
          rows.front().model, r.model));

  std::string csv =
      "model,pixel_accuracy,mean_iou,macro_f1,recall,precision,train_seconds,mac_count\n";
  std::string table = fmt::format("{:<16} {:>9} {:>9} {:>9} {:>9} {:>9} {:>10} {:>12}\n",
                                  "model", "accuracy", "mIoU", "F1", "recall",
                                  "precision", "train_s", "MACs");
  for (const CompareRow& r : rows) {
    const auto& m = r.report;
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.model, m.at("pixel_accuracy"),
                       m.at("mean_iou"), m.at("macro_f1"), m.at("macro_recall"),
                       m.at("macro_precision"), r.train_seconds, r.mac_count);
    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    table += fmt::format("{:<16} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>10.1f} {:>12.4g}\n",
                         r.model, num(m.at("pixel_accuracy")), num(m.at("mean_iou")),
                         num(m.at("macro_f1")), num(m.at("macro_recall")),
                         num(m.at("macro_precision")), num(r.train_seconds),
                         num(r.mac_count));
  }
  write_text(a.out, csv);
  manifest.add_output(a.out);
  manifest.wall_seconds = seconds_since(start);
  write_manifest(manifest, a.out);
  out << table;
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Multi-sensor raster fusion and FCN segmentation toolkit", "geofuse"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate synthetic scenes");
  g->add_option("--seed", gen.seed, "Base seed; scene k uses seed+k")->required();
  g->add_option("--count", gen.count, "Number of scenes")->required();
  g->add_option("--size", gen.size, "Scene extent WxH")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--buildings", gen.spec.building_count)->capture_default_str();
  g->add_option("--roads", gen.spec.road_count)->capture_default_str();
  g->add_option("--vegetation", gen.spec.vegetation_blobs)->capture_default_str();
  g->add_option("--lidar-sigma", gen.spec.lidar_sigma)->capture_default_str();
  g->add_option("--sar-speckle", gen.spec.sar_speckle_rate)->capture_default_str();
  g->add_option("--optical-sigma", gen.spec.optical_sigma)->capture_default_str();

  FuseArgs fuse_args;
  auto* f = app.add_subcommand("fuse", "Stack co-registered rasters");
  f->add_option("--lidar", fuse_args.lidar)->required();
  f->add_option("--sar", fuse_args.sar)->required();
  f->add_option("--optical", fuse_args.optical)->required();
  f->add_flag("--denoise", fuse_args.denoise, "Denoise each source first");
  f->add_option("--tolerance", fuse_args.tolerance,
                "Residual tolerance reported in the manifest");
  f->add_option("--out", fuse_args.out)->required();

  TrainArgs train_args;
  auto* t = app.add_subcommand("train", "Train an FCN on a scene directory");
  t->add_option("--data", train_args.data)->required();
  t->add_option("--config", train_args.config)->required();
  t->add_option("--budget-seconds", train_args.budget_seconds);
  t->add_option("--budget-macs", train_args.budget_macs);
  t->add_option("--out", train_args.out)->required();

  TuneArgs tune_args;
  auto* u = app.add_subcommand("tune", "Search hyperparameters with PSO");
  u->add_option("--data", tune_args.data)->required();
  u->add_option("--config", tune_args.config)->required();
  u->add_option("--swarm", tune_args.swarm, "Particle count");
  u->add_option("--iters", tune_args.iters, "Maximum iterations");
  u->add_option("--seed", tune_args.seed, "Swarm seed");
  u->add_option("--out", tune_args.out)->required();

  EvalArgs eval_args;
  auto* e = app.add_subcommand("eval", "Score a model and run the audits");
  e->add_option("--model", eval_args.model)->required();
  e->add_option("--data", eval_args.data)->required();
  e->add_option("--thresholds", eval_args.thresholds, "Run config file")->required();
  e->add_option("--report", eval_args.report)->required();

  PredictArgs predict_args;
  auto* p = app.add_subcommand("predict", "Label one raster");
  p->add_option("--model", predict_args.model)->required();
  p->add_option("--input", predict_args.input)->required();
  p->add_option("--out", predict_args.out)->required();

  CompareArgs compare_args;
  auto* c = app.add_subcommand("compare", "Tabulate evaluated runs");
  c->add_option("--runs", compare_args.runs)->required();
  c->add_option("--out", compare_args.out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (f->parsed()) return cmd_fuse(fuse_args, out);
    if (t->parsed()) return cmd_train(train_args, out, err);
    if (u->parsed()) return cmd_tune(tune_args, out, err);
    if (e->parsed()) return cmd_eval(eval_args, out);
    if (p->parsed()) return cmd_predict(predict_args, out);
    if (c->parsed()) return cmd_compare(compare_args, out);
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitValidation;
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace geofuse
