#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hdrkit/color.hpp"
#include "hdrkit/image.hpp"
#include "hdrkit/merge.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

/// Bilateral smoothing of the 8-bit code values before linearization.
struct Prefilter {
  double sigma_spatial = 2.0;  ///< pixels
  double sigma_range = 6.0;    ///< code values
};

struct ExpansionParams {
  /// A display transfer function or a recovered camera response. Either is
  /// normalized so that code 255 linearizes to 1.
  std::variant<TransferFunction, ResponseCurve> linearizer = TransferFunction::make_srgb();
  double target_peak = 1000.0;  ///< nits
  double alpha = 1.6;
  std::optional<Prefilter> prefilter;
  std::uint8_t low_code = 5;     ///< codes at or below are low confidence
  std::uint8_t high_code = 250;  ///< codes at or above are low confidence
  const ColorSpace* color_space = nullptr;  ///< rec709 when null

  /// Throws BadParameter / CurveNotInvertible.
  void validate() const;
};

struct ExpansionResult {
  HdrImage image;  ///< absolute, nits
  /// 1 where some channel code is outside (low_code, high_code).
  std::vector<std::uint8_t> low_confidence;
  std::size_t flagged = 0;
};

/// Inverse tone mapping: optional prefilter, linearization, then
/// L_out = target_peak * L_lin^alpha with each channel scaled by L_out / L_lin.
ExpansionResult expand(const SdrImage& sdr, const ExpansionParams& params = {});

/// Linear value in [0, 1] for a (possibly fractional) code in [0, 255].
double linearize(const ExpansionParams& params, double code);

}  // namespace hdrkit
