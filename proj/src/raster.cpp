#include "geofuse/raster.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "byte_io.hpp"
#include "geofuse/error.hpp"

namespace geofuse {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::lidar: return "lidar";
    case Modality::sar: return "sar";
    case Modality::optical: return "optical";
    case Modality::fused: return "fused";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "lidar") return Modality::lidar;
  if (name == "sar") return Modality::sar;
  if (name == "optical") return Modality::optical;
  if (name == "fused") return Modality::fused;
  throw ValidationError("unknown modality '" + std::string(name) + "'");
}

Raster::Raster(std::size_t width, std::size_t height, std::size_t channels,
               Modality modality, Georef georef)
    : Raster(width, height, channels, modality, georef,
             std::vector<float>(width * height * channels, 0.0f)) {}

Raster::Raster(std::size_t width, std::size_t height, std::size_t channels,
               Modality modality, Georef georef, std::vector<float> samples)
    : width_(width),
      height_(height),
      channels_(channels),
      modality_(modality),
      georef_(georef),
      samples_(std::move(samples)) {
  if (width == 0 || height == 0 || channels == 0)
    throw ValidationError("raster dimensions must be positive");
  if (!(georef.pixel_size > 0.0))
    throw ValidationError("raster pixel_size must be > 0");
  if (samples_.size() != width * height * channels)
    throw ValidationError("raster sample count " +
                          std::to_string(samples_.size()) + " != " +
                          std::to_string(width * height * channels));
}

Raster Raster::slice_channels(std::size_t first, std::size_t count,
                              Modality modality) const {
  if (count == 0 || first + count > channels_)
    throw ValidationError("channel slice [" + std::to_string(first) + ", " +
                          std::to_string(first + count) +
                          ") out of range for " + std::to_string(channels_) +
                          " channels");
  const auto begin = samples_.begin() + static_cast<std::ptrdiff_t>(
                                             first * plane_size());
  std::vector<float> out(begin, begin + static_cast<std::ptrdiff_t>(
                                            count * plane_size()));
  return Raster(width_, height_, count, modality, georef_, std::move(out));
}

bool Raster::bit_equal(const Raster& other) const noexcept {
  return width_ == other.width_ && height_ == other.height_ &&
         channels_ == other.channels_ && modality_ == other.modality_ &&
         std::memcmp(&georef_.origin_x, &other.georef_.origin_x, 8) == 0 &&
         std::memcmp(&georef_.origin_y, &other.georef_.origin_y, 8) == 0 &&
         std::memcmp(&georef_.pixel_size, &other.georef_.pixel_size, 8) == 0 &&
         std::memcmp(samples_.data(), other.samples_.data(),
                     samples_.size() * sizeof(float)) == 0;
}

LabelMap::LabelMap(std::size_t width, std::size_t height,
                   std::size_t num_classes, std::uint8_t fill)
    : LabelMap(width, height, num_classes,
               std::vector<std::uint8_t>(width * height, fill)) {}

LabelMap::LabelMap(std::size_t width, std::size_t height,
                   std::size_t num_classes, std::vector<std::uint8_t> ids)
    : width_(width), height_(height), num_classes_(num_classes),
      ids_(std::move(ids)) {
  if (width == 0 || height == 0)
    throw ValidationError("label map dimensions must be positive");
  if (num_classes == 0 || num_classes > 255)
    throw ValidationError("label map num_classes must be in [1, 255]");
  if (ids_.size() != width * height)
    throw ValidationError("label count does not match width*height");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] >= num_classes)
      throw ValidationError("label id " + std::to_string(ids_[i]) +
                            " at index " + std::to_string(i) +
                            " >= num_classes " + std::to_string(num_classes));
}

void LabelMap::set(std::size_t row, std::size_t col, std::uint8_t id) {
  if (id >= num_classes_)
    throw ValidationError("label id " + std::to_string(id) +
                          " >= num_classes " + std::to_string(num_classes_));
  ids_[row * width_ + col] = id;
}

std::vector<std::uint8_t> encode_raster(const Raster& raster) {
  detail::ByteWriter w;
  w.magic("GFR1");
  w.u32(static_cast<std::uint32_t>(raster.width()));
  w.u32(static_cast<std::uint32_t>(raster.height()));
  w.u32(static_cast<std::uint32_t>(raster.channels()));
  w.u8(static_cast<std::uint8_t>(raster.modality()));
  w.f64(raster.georef().origin_x);
  w.f64(raster.georef().origin_y);
  w.f64(raster.georef().pixel_size);
  for (float v : raster.samples()) w.f32(v);
  return std::move(w).take();
}

Raster decode_raster(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("GFR1");
  const std::uint32_t width = r.u32();
  if (width == 0) throw FormatError("zero width", 4);
  const std::uint32_t height = r.u32();
  if (height == 0) throw FormatError("zero height", 8);
  const std::uint32_t channels = r.u32();
  if (channels == 0) throw FormatError("zero channel count", 12);
  const std::uint8_t tag = r.u8();
  if (tag > 3) throw FormatError("unknown modality tag", 16);
  Georef georef;
  georef.origin_x = r.f64();
  georef.origin_y = r.f64();
  georef.pixel_size = r.f64();
  if (!(georef.pixel_size > 0.0))
    throw FormatError("non-positive pixel_size", 33);
  const std::size_t count = std::size_t{width} * height * channels;
  r.require(count * sizeof(float), "truncated payload");
  std::vector<float> samples(count);
  for (auto& v : samples) v = r.f32();
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  return Raster(width, height, channels, static_cast<Modality>(tag), georef,
                std::move(samples));
}

std::vector<std::uint8_t> encode_labels(const LabelMap& labels) {
  detail::ByteWriter w;
  w.magic("GFL1");
  w.u32(static_cast<std::uint32_t>(labels.width()));
  w.u32(static_cast<std::uint32_t>(labels.height()));
  w.u8(static_cast<std::uint8_t>(labels.num_classes()));
  for (std::uint8_t id : labels.ids()) w.u8(id);
  return std::move(w).take();
}

LabelMap decode_labels(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("GFL1");
  const std::uint32_t width = r.u32();
  if (width == 0) throw FormatError("zero width", 4);
  const std::uint32_t height = r.u32();
  if (height == 0) throw FormatError("zero height", 8);
  const std::uint8_t num_classes = r.u8();
  if (num_classes == 0) throw FormatError("zero num_classes", 12);
  const std::size_t count = std::size_t{width} * height;
  r.require(count, "truncated payload");
  std::vector<std::uint8_t> ids(count);
  for (std::size_t i = 0; i < count; ++i) {
    ids[i] = r.u8();
    if (ids[i] >= num_classes)
      throw FormatError("label id out of range", kLabelHeaderBytes + i);
  }
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  return LabelMap(width, height, num_classes, std::move(ids));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Raster read_raster(const std::filesystem::path& path) {
  return decode_raster(read_file_bytes(path));
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  write_file_bytes(path, encode_raster(raster));
}

LabelMap read_labels(const std::filesystem::path& path) {
  return decode_labels(read_file_bytes(path));
}

void write_labels(const LabelMap& labels, const std::filesystem::path& path) {
  write_file_bytes(path, encode_labels(labels));
}

}  // namespace geofuse
