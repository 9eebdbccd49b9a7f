#pragma once

// Glue between scenes on disk and model-ready tensors: modality selection,
// optional denoising, fusion and the seeded train/val/test split.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geofuse/fcn.hpp"
#include "geofuse/raster.hpp"
#include "geofuse/synthgen.hpp"

namespace geofuse {

struct InputOptions {
  std::vector<Modality> modalities{Modality::lidar, Modality::sar,
                                   Modality::optical};
  bool denoise = false;

  /// Channels produced for a standard scene (lidar 1, sar 1, optical 3).
  std::size_t channel_count() const;
};

/// Parses a comma-separated modality list such as "lidar,optical".
std::vector<Modality> parse_modalities(const std::string& list);
std::string format_modalities(std::span<const Modality> modalities);

/// Stacks the selected modalities (denoised first when requested).
Raster assemble_input(const SceneSample& scene, const InputOptions& options);
Sample make_sample(const SceneSample& scene, const InputOptions& options);
Dataset make_dataset(std::span<const SceneSample> scenes,
                     const InputOptions& options);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) cut into floor(n*train), floor(n*val) and the
/// remainder.
Split split_indices(std::size_t n, std::uint64_t seed,
                    double train_fraction = 0.70, double val_fraction = 0.15);

template <class T>
std::vector<T> select(const std::vector<T>& items,
                      std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items.at(i));
  return out;
}

/// `scene_<k>` subdirectories of `data_dir`, ordered by k.
std::vector<std::filesystem::path> list_scene_dirs(
    const std::filesystem::path& data_dir);

}  // namespace geofuse
