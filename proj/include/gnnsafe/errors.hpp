#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gnnsafe {

/// Malformed on-disk data: missing file, size mismatch, bad field.
/// The message names the offending file or field.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value reached a place that must stay finite (training loss,
/// gradient check). Carries the epoch when raised inside the training loop.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::int64_t epoch = -1)
      : std::runtime_error(what), epoch_(epoch) {}
  std::int64_t epoch() const { return epoch_; }

 private:
  std::int64_t epoch_;
};

}  // namespace gnnsafe
