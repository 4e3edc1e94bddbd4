#include "hdrkit/encodings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "hdrkit/error.hpp"

namespace hdrkit {

namespace {

std::uint8_t mantissa(double v, double scale, RgbeRounding rounding) {
  const double m = rounding == RgbeRounding::Floor ? std::floor(v * scale)
                                                   : std::floor(v * scale + 0.5);
  return static_cast<std::uint8_t>(std::min(m, 255.0));
}

}  // namespace

RgbePixel rgbe_encode(const Rgb& rgb, RgbeRounding rounding) {
  for (double v : rgb) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteSample, "RGBE input is not finite");
    if (v < 0.0) throw Error(Errc::NegativeInRgbe, "RGBE cannot represent negative samples");
  }
  const double peak = std::max({rgb[0], rgb[1], rgb[2]});
  if (peak > 0x1p127) throw Error(Errc::Overflow, "RGBE exponent range exceeded");
  if (peak == 0.0) return {};

  int exponent = 0;
  std::frexp(peak, &exponent);  // peak = f * 2^exponent, f in [0.5, 1)
  // A peak that rounds to 256 keeps its exponent and saturates at 255: moving
  // to the next exponent would double the step of the other channels.
  double scale = std::ldexp(1.0, 8 - exponent);
  int biased = exponent + 128;
  if (biased > 255) {
    // Only reachable for peak within half a mantissa step of 2^127.
    biased = 255;
    scale = std::ldexp(1.0, 8 - 127);
  }
  if (biased < 1) return {};
  return {mantissa(rgb[0], scale, rounding), mantissa(rgb[1], scale, rounding),
          mantissa(rgb[2], scale, rounding), static_cast<std::uint8_t>(biased)};
}

Rgb rgbe_decode(RgbePixel p) {
  if (p.e == 0) return {0.0, 0.0, 0.0};
  const int shift = static_cast<int>(p.e) - 128 - 8;
  return {std::ldexp(static_cast<double>(p.r), shift), std::ldexp(static_cast<double>(p.g), shift),
          std::ldexp(static_cast<double>(p.b), shift)};
}

// --- LogLuv ----------------------------------------------------------------

std::uint32_t LogLuvPixel::word() const {
  return (static_cast<std::uint32_t>(sign) << 31) | (static_cast<std::uint32_t>(le & 0x7fff) << 16) |
         (static_cast<std::uint32_t>(ue) << 8) | ve;
}

LogLuvPixel LogLuvPixel::from_word(std::uint32_t w) {
  return {(w >> 31) != 0, static_cast<std::uint16_t>((w >> 16) & 0x7fff),
          static_cast<std::uint8_t>((w >> 8) & 0xff), static_cast<std::uint8_t>(w & 0xff)};
}

std::array<std::uint8_t, 4> LogLuvPixel::bytes() const {
  const std::uint32_t w = word();
  return {static_cast<std::uint8_t>(w >> 24), static_cast<std::uint8_t>(w >> 16),
          static_cast<std::uint8_t>(w >> 8), static_cast<std::uint8_t>(w)};
}

LogLuvPixel LogLuvPixel::from_bytes(const std::uint8_t* p) {
  return from_word((static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
                   (static_cast<std::uint32_t>(p[2]) << 8) | p[3]);
}

std::array<double, 2> uv_prime(const Rgb& xyz) {
  const double denom = xyz[0] + 15.0 * xyz[1] + 3.0 * xyz[2];
  if (!(denom > 0.0)) return {4.0 / 19.0, 9.0 / 19.0};  // equal-energy white
  return {4.0 * xyz[0] / denom, 9.0 * xyz[1] / denom};
}

namespace {

std::uint8_t chroma_code(double c) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(410.0 * c), 0.0, 255.0));
}

}  // namespace

LogLuvPixel logluv_encode(const Rgb& xyz) {
  for (double v : xyz) {
    if (std::isnan(v)) throw Error(Errc::NonFiniteSample, "LogLuv input is NaN");
  }
  const double y = xyz[1];
  if (!(y > 0.0)) return {};
  const double code = std::floor(256.0 * (std::log2(y) + 64.0));
  if (code < 1.0) return {};
  LogLuvPixel p;
  p.le = static_cast<std::uint16_t>(std::min(code, 32767.0));
  const auto uv = uv_prime(xyz);
  p.ue = chroma_code(uv[0]);
  p.ve = chroma_code(uv[1]);
  return p;
}

Rgb logluv_decode(LogLuvPixel p) {
  if (p.le == 0) return {0.0, 0.0, 0.0};
  double y = std::exp2((p.le + 0.5) / 256.0 - 64.0);
  if (p.sign) y = -y;
  const double u = (p.ue + 0.5) / 410.0;
  const double v = (p.ve + 0.5) / 410.0;
  const double d = 6.0 * u - 16.0 * v + 12.0;
  const double cx = 9.0 * u / d;
  const double cy = 4.0 * v / d;
  return {cx / cy * y, y, (1.0 - cx - cy) / cy * y};
}

// --- binary16 --------------------------------------------------------------

std::uint16_t half_encode(float value) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  const auto sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
  const std::uint32_t magnitude = bits & 0x7fffffffu;

  if (magnitude > 0x7f800000u) return 0x7e00;                    // NaN
  if (magnitude > std::bit_cast<std::uint32_t>(kHalfMax)) return sign | 0x7bffu;  // clamp
  if (magnitude < 0x38800000u) {
    // Subnormal half: value = m * 2^-24, m rounded half-to-even.
    const float scaled = std::bit_cast<float>(magnitude) * 0x1p24f;
    return sign | static_cast<std::uint16_t>(std::nearbyint(scaled));
  }
  const std::uint32_t exponent = (magnitude >> 23) - 127 + 15;
  const std::uint32_t mant = magnitude & 0x7fffffu;
  std::uint32_t code = (exponent << 10) | (mant >> 13);
  const std::uint32_t rest = mant & 0x1fffu;
  if (rest > 0x1000u || (rest == 0x1000u && (code & 1u))) ++code;
  return static_cast<std::uint16_t>(sign | std::min<std::uint32_t>(code, 0x7bffu));
}

float half_decode(std::uint16_t code) {
  const bool negative = (code & 0x8000u) != 0;
  const int exponent = (code >> 10) & 0x1f;
  const int mant = code & 0x3ff;
  float value;
  if (exponent == 0) {
    value = std::ldexp(static_cast<float>(mant), -24);
  } else if (exponent == 31) {
    value = mant == 0 ? INFINITY : NAN;
  } else {
    value = std::ldexp(static_cast<float>(1024 + mant), exponent - 25);
  }
  return negative ? -value : value;
}

HalfTriple half_encode(const Rgb& rgb) {
  return {{half_encode(static_cast<float>(rgb[0])), half_encode(static_cast<float>(rgb[1])),
           half_encode(static_cast<float>(rgb[2]))}};
}

Rgb half_decode(const HalfTriple& h) {
  return {half_decode(h.codes[0]), half_decode(h.codes[1]), half_decode(h.codes[2])};
}

}  // namespace hdrkit
