#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdrkit/image.hpp"

namespace hdrkit {

enum class TransferKind : std::uint8_t { Gamma, Srgb, Pq, LogN, Pu };

/// An EOTF/OETF pair over the code domain [0, 1].
///
/// `peak_nits` is the luminance of code 1.0. Gamma and sRGB default to a peak
/// of 1 (relative output); PQ and PU are absolute with a fixed 10000 nit peak.
/// LogN covers `decades` orders of magnitude below the peak:
///   L = peak * 10^(decades * (code - 1)).
/// PU shares the PQ curve in the code domain; `pu_encode` gives PU units.
struct TransferFunction {
  TransferKind kind = TransferKind::Srgb;
  double gamma = 2.2;
  double decades = 12.0;
  double peak_nits = 1.0;

  static TransferFunction make_gamma(double gamma, double peak = 1.0);
  static TransferFunction make_srgb(double peak = 1.0);
  static TransferFunction make_pq();
  static TransferFunction make_log(double decades = 12.0, double peak = 1e8);
  static TransferFunction make_pu();
  /// gamma22 | srgb | pq | log | pu
  static TransferFunction by_name(std::string_view name);
  static TransferFunction for_tag(TransferTag tag);

  bool absolute() const { return kind == TransferKind::Pq || kind == TransferKind::Pu; }
  std::string name() const;
};

/// Code in [0,1] to luminance. Throws CodeOutOfRange outside [0,1].
double eotf(const TransferFunction& tf, double code);
/// Luminance to code in [0,1]; luminances above the peak saturate at 1.
/// Throws NegativeLuminance for negative input.
double oetf(const TransferFunction& tf, double luminance);

/// SMPTE ST 2084 in nits, unclamped above 10000.
double pq_eotf(double code);
double pq_oetf(double nits);

/// Perceptually uniform luminance units: an affine renormalization of the PQ
/// curve with PU(0.1 nit) = 0 and PU(80 nit) = 255.
double pu_encode(double nits);
double pu_decode(double pu);

struct Quantization {
  unsigned bits = 0;
  std::vector<std::uint32_t> codes;
  /// Largest luminance ratio between adjacent code levels that fall inside
  /// the input's positive luminance range.
  double max_step_ratio = 1.0;
};

/// Uniform quantization of the code domain to 2^bits levels; bits in [1, 16].
Quantization quantize(const TransferFunction& tf, std::span<const double> luminances,
                      unsigned bits);
std::vector<double> dequantize(const TransferFunction& tf, std::span<const std::uint32_t> codes,
                               unsigned bits);
/// Largest eotf(k+1)/eotf(k) over adjacent levels with eotf(k) in [lo, hi].
double max_step_ratio(const TransferFunction& tf, unsigned bits, double lo, double hi);

}  // namespace hdrkit
