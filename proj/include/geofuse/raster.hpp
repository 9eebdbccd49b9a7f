#pragma once

// Georeferenced rasters and label maps plus their binary codecs.
//
// GFR1 (raster), all integers little-endian:
//   "GFR1" | u32 width | u32 height | u32 channels | u8 modality
//   | f64 origin_x | f64 origin_y | f64 pixel_size
//   | f32 samples, channel-planar, row-major within each plane
//
// GFL1 (label map):
//   "GFL1" | u32 width | u32 height | u8 num_classes | u8 ids, row-major

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace geofuse {

enum class Modality : std::uint8_t { lidar = 0, sar = 1, optical = 2, fused = 3 };

std::string_view to_string(Modality m);
/// Parses "lidar", "sar", "optical" or "fused".
Modality parse_modality(std::string_view name);

struct Georef {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 1.0;

  friend bool operator==(const Georef&, const Georef&) = default;
};

class Raster {
 public:
  Raster() = default;
  /// Zero-filled raster. Throws ValidationError on a zero extent or a
  /// non-positive pixel size.
  Raster(std::size_t width, std::size_t height, std::size_t channels,
         Modality modality, Georef georef = {});
  Raster(std::size_t width, std::size_t height, std::size_t channels,
         Modality modality, Georef georef, std::vector<float> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t plane_size() const noexcept { return width_ * height_; }
  Modality modality() const noexcept { return modality_; }
  const Georef& georef() const noexcept { return georef_; }

  std::span<float> samples() noexcept { return samples_; }
  std::span<const float> samples() const noexcept { return samples_; }
  std::span<float> plane(std::size_t c) {
    return std::span<float>(samples_).subspan(c * plane_size(), plane_size());
  }
  std::span<const float> plane(std::size_t c) const {
    return std::span<const float>(samples_).subspan(c * plane_size(),
                                                    plane_size());
  }

  float& at(std::size_t c, std::size_t row, std::size_t col) {
    return samples_[(c * height_ + row) * width_ + col];
  }
  float at(std::size_t c, std::size_t row, std::size_t col) const {
    return samples_[(c * height_ + row) * width_ + col];
  }

  /// Channels [first, first + count) as a new raster with the given tag.
  Raster slice_channels(std::size_t first, std::size_t count,
                        Modality modality) const;

  /// Same dimensions, georeference, tag and bit-identical samples.
  bool bit_equal(const Raster& other) const noexcept;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  Modality modality_ = Modality::fused;
  Georef georef_;
  std::vector<float> samples_;
};

class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(std::size_t width, std::size_t height, std::size_t num_classes,
           std::uint8_t fill = 0);
  /// Throws ValidationError if any id is >= num_classes.
  LabelMap(std::size_t width, std::size_t height, std::size_t num_classes,
           std::vector<std::uint8_t> ids);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return ids_.size(); }

  std::span<const std::uint8_t> ids() const noexcept { return ids_; }
  std::uint8_t operator[](std::size_t i) const { return ids_[i]; }
  std::uint8_t at(std::size_t row, std::size_t col) const {
    return ids_[row * width_ + col];
  }
  /// Throws ValidationError if id >= num_classes.
  void set(std::size_t row, std::size_t col, std::uint8_t id);

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<std::uint8_t> ids_;
};

inline constexpr std::size_t kRasterHeaderBytes = 4 + 3 * 4 + 1 + 3 * 8;
inline constexpr std::size_t kLabelHeaderBytes = 4 + 2 * 4 + 1;

std::vector<std::uint8_t> encode_raster(const Raster& raster);
/// Throws FormatError naming the offset of the first defect.
Raster decode_raster(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_labels(const LabelMap& labels);
LabelMap decode_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

Raster read_raster(const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);
LabelMap read_labels(const std::filesystem::path& path);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);

}  // namespace geofuse
