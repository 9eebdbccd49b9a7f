#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geofuse {

/// Input rejected by a precondition or schema check. The CLI maps this to
/// exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary file. Carries the byte offset of the first defect.
class FormatError : public ValidationError {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : ValidationError(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// NaN/Inf encountered in training math.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geofuse
