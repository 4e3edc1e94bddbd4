#pragma once

#include <array>
#include <cstdint>

#include "hdrkit/image.hpp"

namespace hdrkit {

// ---------------------------------------------------------------------------
// Shared-exponent RGBE / XYZE
// ---------------------------------------------------------------------------

/// Four bytes in file order R, G, B, E. Exponent bias 128.
/// Invariant: e == 0 implies all mantissas zero; otherwise the largest
/// mantissa is >= 128.
struct RgbePixel {
  std::uint8_t r = 0, g = 0, b = 0, e = 0;

  std::array<std::uint8_t, 4> bytes() const { return {r, g, b, e}; }
  static RgbePixel from_bytes(const std::uint8_t* p) { return {p[0], p[1], p[2], p[3]}; }
  friend bool operator==(const RgbePixel&, const RgbePixel&) = default;
};

/// How mantissas are derived from the scaled components.
///  - Nearest rounds to the closest mantissa; absolute error <= max * 2^-8.
///  - Floor truncates (the classic Radiance convention); error < max * 2^-7.
enum class RgbeRounding : std::uint8_t { Nearest, Floor };

/// Throws NegativeInRgbe for negative components, NonFiniteSample for NaN or
/// infinity and Overflow when max component exceeds 2^127. Values whose
/// exponent would fall below the representable range encode as zero.
RgbePixel rgbe_encode(const Rgb& rgb, RgbeRounding rounding = RgbeRounding::Nearest);
/// component = mantissa / 256 * 2^(e - 128)
Rgb rgbe_decode(RgbePixel p);

/// Same codec applied to an XYZ triple.
inline RgbePixel xyze_encode(const Rgb& xyz, RgbeRounding rounding = RgbeRounding::Nearest) {
  return rgbe_encode(xyz, rounding);
}
inline Rgb xyze_decode(RgbePixel p) { return rgbe_decode(p); }

// ---------------------------------------------------------------------------
// LogLuv32
// ---------------------------------------------------------------------------

/// Sign bit, 15-bit log-luminance code, 8-bit u' and v' codes.
///   le = floor(256 * (log2 Y + 64)),  ue = floor(410 u'),  ve = floor(410 v')
/// le == 0 is the canonical zero.
struct LogLuvPixel {
  bool sign = false;
  std::uint16_t le = 0;
  std::uint8_t ue = 0, ve = 0;

  /// sign in bit 31, le in bits 30..16, ue in 15..8, ve in 7..0
  std::uint32_t word() const;
  static LogLuvPixel from_word(std::uint32_t w);
  /// Big-endian byte order.
  std::array<std::uint8_t, 4> bytes() const;
  static LogLuvPixel from_bytes(const std::uint8_t* p);

  friend bool operator==(const LogLuvPixel&, const LogLuvPixel&) = default;
};

/// Input is XYZ. Y <= 0 (and luminances too small for the log range) produce
/// the canonical zero; luminances above the range saturate. NaN throws.
LogLuvPixel logluv_encode(const Rgb& xyz);
/// Decodes at bin centres; returns XYZ.
Rgb logluv_decode(LogLuvPixel p);

/// CIE 1976 u'v' of an XYZ triple.
std::array<double, 2> uv_prime(const Rgb& xyz);

// ---------------------------------------------------------------------------
// IEEE 754 binary16
// ---------------------------------------------------------------------------

inline constexpr float kHalfMax = 65504.0f;

/// Round-to-nearest-even. Magnitudes above 65504 (including infinities) clamp
/// to +-65504; NaN maps to the canonical quiet NaN 0x7E00.
std::uint16_t half_encode(float value);
float half_decode(std::uint16_t code);

struct HalfTriple {
  std::array<std::uint16_t, 3> codes{};
  friend bool operator==(const HalfTriple&, const HalfTriple&) = default;
};

HalfTriple half_encode(const Rgb& rgb);
Rgb half_decode(const HalfTriple& h);

}  // namespace hdrkit
