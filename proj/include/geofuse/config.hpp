#pragma once

// Run configuration (key=value text) and run manifests.
//
// Recognized keys, grouped by what they feed:
//   model/training  num_classes base_filters depth learning_rate batch_size
//                   epochs l2 l1 seed
//   input/split     modalities denoise split_seed train_fraction
//                   val_fraction eval_split budget_seconds budget_macs
//   swarm           swarm_particles swarm_iters swarm_c1 swarm_c2
//                   swarm_w_max swarm_w_min swarm_epsilon swarm_patience
//                   swarm_v_clamp_frac swarm_seed swarm_lambda_p
//   thresholds      threshold_completeness threshold_consistency
//                   threshold_noise threshold_pso_eta threshold_grad_rho
//                   threshold_accuracy_min threshold_test_error_max
//                   threshold_regularization
//   tuning          tune_epochs tune_train_tiles tune_val_tiles tune_dims
//                   tune_norm_bound tune_range_<dimension>
//
// A tune_range value is `min:max[:log|linear][:int|real]`.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geofuse/fcn.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/pipeline.hpp"
#include "geofuse/pso.hpp"

namespace geofuse {

enum class EvalSplit { train, val, test, all };

std::string to_string(EvalSplit split);
EvalSplit parse_eval_split(const std::string& name);

struct RunConfig {
  FcnConfig fcn;  // in_channels follows `input`
  InputOptions input;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  EvalSplit eval_split = EvalSplit::test;
  double budget_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t budget_macs = std::numeric_limits<std::uint64_t>::max();

  SwarmConfig swarm;
  ConstraintThresholds thresholds;

  std::size_t tune_epochs = 3;
  std::size_t tune_train_tiles = 0;  // 0 keeps the whole split
  std::size_t tune_val_tiles = 0;
  SearchSpace tune_space = default_search_space();

  /// learning_rate in [0.01, 0.5] (log) and batch_size in [2, 8] (integer).
  static SearchSpace default_search_space();
  /// Range used for a dimension named in tune_dims without its own
  /// tune_range_ entry.
  static Dimension default_dimension(const std::string& name);

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&);
};

/// Unknown keys, duplicates and malformed values throw ValidationError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every key with its resolved value; parse_run_config round-trips it.
std::string format_run_config(const RunConfig& config);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Record written next to every command output.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
  double wall_seconds = 0.0;
  std::uint64_t mac_count = 0;
  std::vector<std::pair<std::string, std::string>> extra;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
};

std::string format_manifest(const RunManifest& manifest);
/// `DIR/manifest.txt` for a directory output, `<file>.manifest` otherwise.
std::filesystem::path manifest_path(const std::filesystem::path& output);
void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& output);

}  // namespace geofuse
