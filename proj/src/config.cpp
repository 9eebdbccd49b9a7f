#include "geofuse/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "geofuse/error.hpp"
#include "geofuse/metrics.hpp"

namespace geofuse {
namespace {

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty() || std::isnan(v))
    throw ValidationError(fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ValidationError(
        fmt::format("{}: '{}' is not a non-negative integer", key, text));
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ValidationError(fmt::format("{}: '{}' is not true/false", key, text));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    out.push_back(text.substr(start, at - start));
    if (at == std::string::npos) break;
    start = at + 1;
  }
  return out;
}

constexpr const char* kRangePrefix = "tune_range_";

Dimension parse_range(const std::string& name, const std::string& text) {
  const std::string key = kRangePrefix + name;
  const auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 4)
    throw ValidationError(
        fmt::format("{}: expected min:max[:log|linear][:int|real]", key));
  Dimension d = RunConfig::default_dimension(name);
  d.min = parse_double(key, parts[0]);
  d.max = parse_double(key, parts[1]);
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p == "log") d.scale = Scale::log;
    else if (p == "linear") d.scale = Scale::linear;
    else if (p == "int") d.kind = DimKind::integer;
    else if (p == "real") d.kind = DimKind::continuous;
    else throw ValidationError(fmt::format("{}: unknown range flag '{}'", key, p));
  }
  return d;
}

std::string format_range(const Dimension& d) {
  return fmt::format("{}:{}:{}:{}", d.min, d.max,
                     d.scale == Scale::log ? "log" : "linear",
                     d.kind == DimKind::integer ? "int" : "real");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](double RunConfig::*m) -> Setter {
      return [m](RunConfig& c, const std::string& k, const std::string& v) {
        c.*m = parse_double(k, v);
      };
    };
    auto size = [](std::size_t RunConfig::*m) -> Setter {
      return [m](RunConfig& c, const std::string& k, const std::string& v) {
        c.*m = parse_size(k, v);
      };
    };
    t["num_classes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.num_classes = parse_size(k, v);
    };
    t["base_filters"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.base_filters = parse_size(k, v);
    };
    t["depth"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.depth = parse_size(k, v);
    };
    t["learning_rate"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.learning_rate = parse_double(k, v);
    };
    t["batch_size"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.batch_size = parse_size(k, v);
    };
    t["epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.epochs = parse_size(k, v);
    };
    t["l2"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.l2 = parse_double(k, v);
    };
    t["l1"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.l1 = parse_double(k, v);
    };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fcn.seed = parse_u64(k, v);
    };
    t["modalities"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.input.modalities = parse_modalities(v);
    };
    t["denoise"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.input.denoise = parse_bool(k, v);
    };
    t["split_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.split_seed = parse_u64(k, v);
    };
    t["train_fraction"] = dbl(&RunConfig::train_fraction);
    t["val_fraction"] = dbl(&RunConfig::val_fraction);
    t["eval_split"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.eval_split = parse_eval_split(v);
    };
    t["budget_seconds"] = dbl(&RunConfig::budget_seconds);
    t["budget_macs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.budget_macs = parse_u64(k, v);
    };

    auto swarm_dbl = [](double SwarmConfig::*m) -> Setter {
      return [m](RunConfig& c, const std::string& k, const std::string& v) {
        c.swarm.*m = parse_double(k, v);
      };
    };
    auto swarm_size = [](std::size_t SwarmConfig::*m) -> Setter {
      return [m](RunConfig& c, const std::string& k, const std::string& v) {
        c.swarm.*m = parse_size(k, v);
      };
    };
    t["swarm_particles"] = swarm_size(&SwarmConfig::n_particles);
    t["swarm_iters"] = swarm_size(&SwarmConfig::max_iters);
    t["swarm_patience"] = swarm_size(&SwarmConfig::patience);
    t["swarm_c1"] = swarm_dbl(&SwarmConfig::c1);
    t["swarm_c2"] = swarm_dbl(&SwarmConfig::c2);
    t["swarm_w_max"] = swarm_dbl(&SwarmConfig::w_max);
    t["swarm_w_min"] = swarm_dbl(&SwarmConfig::w_min);
    t["swarm_epsilon"] = swarm_dbl(&SwarmConfig::epsilon);
    t["swarm_v_clamp_frac"] = swarm_dbl(&SwarmConfig::v_clamp_frac);
    t["swarm_lambda_p"] = swarm_dbl(&SwarmConfig::lambda_p);
    t["swarm_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.swarm.seed = parse_u64(k, v);
    };

    auto thr = [](double ConstraintThresholds::*m) -> Setter {
      return [m](RunConfig& c, const std::string& k, const std::string& v) {
        c.thresholds.*m = parse_double(k, v);
      };
    };
    t["threshold_completeness"] = thr(&ConstraintThresholds::completeness);
    t["threshold_consistency"] = thr(&ConstraintThresholds::consistency);
    t["threshold_noise"] = thr(&ConstraintThresholds::noise);
    t["threshold_pso_eta"] = thr(&ConstraintThresholds::pso_eta);
    t["threshold_grad_rho"] = thr(&ConstraintThresholds::grad_rho);
    t["threshold_accuracy_min"] = thr(&ConstraintThresholds::accuracy_min);
    t["threshold_test_error_max"] = thr(&ConstraintThresholds::test_error_max);
    t["threshold_regularization"] = thr(&ConstraintThresholds::regularization);

    t["tune_epochs"] = size(&RunConfig::tune_epochs);
    t["tune_train_tiles"] = size(&RunConfig::tune_train_tiles);
    t["tune_val_tiles"] = size(&RunConfig::tune_val_tiles);
    return t;
  }();
  return table;
}

}  // namespace

std::string to_string(EvalSplit split) {
  switch (split) {
    case EvalSplit::train: return "train";
    case EvalSplit::val: return "val";
    case EvalSplit::test: return "test";
    case EvalSplit::all: return "all";
  }
  return "?";
}

EvalSplit parse_eval_split(const std::string& name) {
  if (name == "train") return EvalSplit::train;
  if (name == "val") return EvalSplit::val;
  if (name == "test") return EvalSplit::test;
  if (name == "all") return EvalSplit::all;
  throw ValidationError("eval_split: '" + name + "' is not train/val/test/all");
}

Dimension RunConfig::default_dimension(const std::string& name) {
  if (name == "learning_rate")
    return {name, 0.01, 0.5, Scale::log, DimKind::continuous};
  if (name == "batch_size") return {name, 2, 8, Scale::linear, DimKind::integer};
  if (name == "base_filters")
    return {name, 8, 24, Scale::linear, DimKind::integer};
  if (name == "depth") return {name, 1, 3, Scale::linear, DimKind::integer};
  if (name == "l2" || name == "l1")
    return {name, 1e-6, 1e-2, Scale::log, DimKind::continuous};
  throw ValidationError("unknown tuning dimension '" + name + "'");
}

SearchSpace RunConfig::default_search_space() {
  SearchSpace s;
  s.dims = {default_dimension("learning_rate"), default_dimension("batch_size")};
  return s;
}

void RunConfig::validate() const {
  fcn.validate();
  if (fcn.in_channels != input.channel_count())
    throw ValidationError("in_channels does not match the selected modalities");
  if (!(train_fraction >= 0.0) || !(val_fraction >= 0.0) ||
      train_fraction + val_fraction > 1.0)
    throw ValidationError("split fractions must be >= 0 and sum to <= 1");
  if (!(budget_seconds >= 0.0))
    throw ValidationError("budget_seconds must be >= 0");
  swarm.validate();
  thresholds.validate();
  if (tune_epochs < 1) throw ValidationError("tune_epochs must be >= 1");
  tune_space.validate();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return format_run_config(a) == format_run_config(b);
}

RunConfig parse_run_config(const std::string& text) {
  const std::map<std::string, std::string> kv = parse_kv(text);
  RunConfig c;
  std::vector<std::string> dims;
  for (const Dimension& d : c.tune_space.dims) dims.push_back(d.name);
  std::map<std::string, Dimension> ranges;
  std::optional<double> norm_bound;

  for (const auto& [key, value] : kv) {
    if (auto it = setters().find(key); it != setters().end()) {
      it->second(c, key, value);
    } else if (key == "tune_dims") {
      dims = split(value, ',');
    } else if (key == "tune_norm_bound") {
      if (value != "none") norm_bound = parse_double(key, value);
    } else if (key.rfind(kRangePrefix, 0) == 0) {
      const std::string name = key.substr(std::string(kRangePrefix).size());
      ranges[name] = parse_range(name, value);
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }

  c.tune_space.dims.clear();
  for (const std::string& name : dims) {
    for (const Dimension& d : c.tune_space.dims)
      if (d.name == name)
        throw ValidationError("tune_dims: '" + name + "' listed twice");
    auto it = ranges.find(name);
    c.tune_space.dims.push_back(it != ranges.end()
                                    ? it->second
                                    : RunConfig::default_dimension(name));
  }
  c.tune_space.norm_bound = norm_bound;
  c.fcn.in_channels = c.input.channel_count();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()));
}

std::string format_run_config(const RunConfig& c) {
  std::string out;
  auto line = [&](const std::string& key, const auto& value) {
    out += fmt::format("{}={}\n", key, value);
  };
  line("num_classes", c.fcn.num_classes);
  line("base_filters", c.fcn.base_filters);
  line("depth", c.fcn.depth);
  line("learning_rate", c.fcn.learning_rate);
  line("batch_size", c.fcn.batch_size);
  line("epochs", c.fcn.epochs);
  line("l2", c.fcn.l2);
  line("l1", c.fcn.l1);
  line("seed", c.fcn.seed);
  line("modalities", format_modalities(c.input.modalities));
  line("denoise", c.input.denoise);
  line("split_seed", c.split_seed);
  line("train_fraction", c.train_fraction);
  line("val_fraction", c.val_fraction);
  line("eval_split", to_string(c.eval_split));
  line("budget_seconds", c.budget_seconds);
  line("budget_macs", c.budget_macs);
  line("swarm_particles", c.swarm.n_particles);
  line("swarm_iters", c.swarm.max_iters);
  line("swarm_c1", c.swarm.c1);
  line("swarm_c2", c.swarm.c2);
  line("swarm_w_max", c.swarm.w_max);
  line("swarm_w_min", c.swarm.w_min);
  line("swarm_epsilon", c.swarm.epsilon);
  line("swarm_patience", c.swarm.patience);
  line("swarm_v_clamp_frac", c.swarm.v_clamp_frac);
  line("swarm_seed", c.swarm.seed);
  line("swarm_lambda_p", c.swarm.lambda_p);
  line("threshold_completeness", c.thresholds.completeness);
  line("threshold_consistency", c.thresholds.consistency);
  line("threshold_noise", c.thresholds.noise);
  line("threshold_pso_eta", c.thresholds.pso_eta);
  line("threshold_grad_rho", c.thresholds.grad_rho);
  line("threshold_accuracy_min", c.thresholds.accuracy_min);
  line("threshold_test_error_max", c.thresholds.test_error_max);
  line("threshold_regularization", c.thresholds.regularization);
  line("tune_epochs", c.tune_epochs);
  line("tune_train_tiles", c.tune_train_tiles);
  line("tune_val_tiles", c.tune_val_tiles);
  std::string names;
  for (const Dimension& d : c.tune_space.dims)
    names += (names.empty() ? "" : ",") + d.name;
  line("tune_dims", names);
  if (c.tune_space.norm_bound) line("tune_norm_bound", *c.tune_space.norm_bound);
  else line("tune_norm_bound", "none");
  for (const Dimension& d : c.tune_space.dims)
    line(kRangePrefix + d.name, format_range(d));
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file_bytes(path));
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.emplace_back(path.string(), sha256_file(path));
}

std::string format_manifest(const RunManifest& m) {
  std::string out;
  out += fmt::format("command={}\n", m.command);
  out += fmt::format("wall_seconds={}\n", m.wall_seconds);
  out += fmt::format("mac_count={}\n", m.mac_count);
  for (const auto& [k, v] : m.seeds) out += fmt::format("seed.{}={}\n", k, v);
  for (const auto& [k, v] : m.config) out += fmt::format("config.{}={}\n", k, v);
  for (const auto& [p, d] : m.inputs) out += fmt::format("input.{}={}\n", p, d);
  for (const auto& [p, d] : m.outputs) out += fmt::format("output.{}={}\n", p, d);
  for (const auto& [k, v] : m.extra) out += fmt::format("{}={}\n", k, v);
  return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  if (std::filesystem::is_directory(output)) return output / "manifest.txt";
  std::filesystem::path p = output;
  p += ".manifest";
  return p;
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& output) {
  const std::string text = format_manifest(manifest);
  write_file_bytes(manifest_path(output),
                   std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace geofuse
