#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hdrkit {

/// Every failure the library reports is one of these codes.
enum class Errc {
  NonFiniteSample,
  NegativeSample,
  BadColorSpace,
  BadDimensions,
  NegativeInRgbe,
  Overflow,
  NotRadiance,
  NotPfm,
  NotPpm,
  TruncatedFile,
  CorruptRle,
  BadScale,
  UnsupportedMaxval,
  UnsupportedVariant,
  CodeOutOfRange,
  NegativeLuminance,
  AlignmentUnreliable,
  InsufficientSamples,
  BadParameter,
  CurveNotInvertible,
  ShapeMismatch,
  NeedsAbsoluteCalibration,
  MissingExtension,
  CorruptStream,
  Io,
};

std::string_view error_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Error(Errc code, const std::string& message, std::size_t offset);

  /// Same error with "context: " inserted after the error name.
  Error with_context(const std::string& context) const;

  Errc code() const noexcept { return code_; }
  /// Byte offset into the input for codec errors.
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  struct Raw {};
  Error(Raw, Errc code, std::optional<std::size_t> offset, const std::string& what);

  Errc code_;
  std::optional<std::size_t> offset_;
};

}  // namespace hdrkit
