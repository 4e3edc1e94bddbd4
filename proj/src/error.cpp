#include "hdrkit/error.hpp"

namespace hdrkit {

std::string_view error_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonFiniteSample: return "NonFiniteSample";
    case Errc::NegativeSample: return "NegativeSample";
    case Errc::BadColorSpace: return "BadColorSpace";
    case Errc::BadDimensions: return "BadDimensions";
    case Errc::NegativeInRgbe: return "NegativeInRgbe";
    case Errc::Overflow: return "Overflow";
    case Errc::NotRadiance: return "NotRadiance";
    case Errc::NotPfm: return "NotPfm";
    case Errc::NotPpm: return "NotPpm";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::CorruptRle: return "CorruptRle";
    case Errc::BadScale: return "BadScale";
    case Errc::UnsupportedMaxval: return "UnsupportedMaxval";
    case Errc::UnsupportedVariant: return "UnsupportedVariant";
    case Errc::CodeOutOfRange: return "CodeOutOfRange";
    case Errc::NegativeLuminance: return "NegativeLuminance";
    case Errc::AlignmentUnreliable: return "AlignmentUnreliable";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::BadParameter: return "BadParameter";
    case Errc::CurveNotInvertible: return "CurveNotInvertible";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NeedsAbsoluteCalibration: return "NeedsAbsoluteCalibration";
    case Errc::MissingExtension: return "MissingExtension";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

Error::Error(Raw, Errc code, std::optional<std::size_t> offset, const std::string& what)
    : std::runtime_error(what), code_(code), offset_(offset) {}

Error Error::with_context(const std::string& context) const {
  const std::string prefix = std::string(error_name(code_)) + ": ";
  std::string msg = what();
  msg.insert(msg.compare(0, prefix.size(), prefix) == 0 ? prefix.size() : 0, context + ": ");
  return Error(Raw{}, code_, offset_, msg);
}

Error::Error(Errc code, const std::string& message, std::size_t offset)
    : std::runtime_error(std::string(error_name(code)) + ": " + message + " (at byte " +
                         std::to_string(offset) + ")"),
      code_(code),
      offset_(offset) {}

}  // namespace hdrkit
