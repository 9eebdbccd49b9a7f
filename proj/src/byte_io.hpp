#pragma once

// Little-endian primitive encoding shared by the GFR1/GFL1/GFM1 codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geofuse/error.hpp"

namespace geofuse::detail {

static_assert(std::endian::native == std::endian::little,
              "codecs assume a little-endian host");

class ByteWriter {
 public:
  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }

  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }

  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view tag) {
    require(tag.size(), "truncated magic");
    if (std::memcmp(bytes_.data(), tag.data(), tag.size()) != 0)
      throw FormatError("bad magic", 0);
    pos_ += tag.size();
  }
  std::uint8_t u8() {
    require(1, "truncated payload");
    return bytes_[pos_++];
  }
  std::uint32_t u32() { return read<std::uint32_t>(); }
  std::uint64_t u64() { return read<std::uint64_t>(); }
  float f32() { return read<float>(); }
  double f64() { return read<double>(); }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  void require(std::size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what, bytes_.size());
  }

 private:
  template <class T>
  T read() {
    require(sizeof(T), "truncated payload");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace geofuse::detail
