#pragma once

// Deterministic synthetic urban scenes: co-registered lidar heights, SAR
// backscatter, optical reflectance and ground-truth labels.
//
// Each modality carries different class evidence. Heights separate
// buildings and vegetation from flat ground, SAR texture separates
// vegetation and road smoothness, and optical colour separates roads from
// bare ground.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "geofuse/raster.hpp"

namespace geofuse {

enum class UrbanClass : std::uint8_t {
  background = 0,
  building = 1,
  road = 2,
  vegetation = 3,
};
inline constexpr std::size_t kNumUrbanClasses = 4;

struct SceneSpec {
  std::uint64_t seed = 0;
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t building_count = 4;
  std::size_t road_count = 2;
  std::size_t vegetation_blobs = 4;
  double lidar_sigma = 0.5;         // metres
  double sar_speckle_rate = 0.15;   // fraction of pixels hit by speckle
  double optical_sigma = 0.06;      // reflectance units

  /// Extents must be positive multiples of 4 and noise levels >= 0.
  void validate() const;
};

struct SceneSample {
  Raster lidar;    // 1 channel
  Raster sar;      // 1 channel
  Raster optical;  // 3 channels
  LabelMap labels;
};

SceneSample generate_scene(const SceneSpec& spec);

/// Scene k is generated with seed base_seed + k.
std::vector<SceneSample> generate_dataset(std::uint64_t base_seed,
                                          std::size_t count,
                                          const SceneSpec& spec_template);

/// Writes lidar.gfr, sar.gfr, optical.gfr and labels.gfl into `dir`.
void write_scene(const SceneSample& scene, const std::filesystem::path& dir);
SceneSample read_scene(const std::filesystem::path& dir);

}  // namespace geofuse
