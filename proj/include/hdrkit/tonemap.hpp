#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hdrkit/color.hpp"
#include "hdrkit/image.hpp"

namespace hdrkit {

enum class ColorFormula : std::uint8_t {
  RatioPower,   ///< I_t = (I_o / L_o)^p * L_t  (CLI: eq3)
  LinearBlend,  ///< I_t = ((I_o / L_o - 1) * p + 1) * L_t  (CLI: eq4)
};

struct ColorCorrectionParams {
  std::optional<double> p;  ///< nullopt selects the per-pixel automatic value
  ColorFormula formula = ColorFormula::RatioPower;
};

struct ClipStats {
  std::size_t below = 0;  ///< channel values < 0 before encoding
  std::size_t above = 0;  ///< channel values > 1 before encoding
  double fraction = 0.0;  ///< (below + above) / channel count
};

struct ToneMapResult {
  SdrImage sdr;
  Raster l_t;    ///< display-relative luminance in [0, 1]
  Raster l_o;    ///< source luminance
  Raster slope;  ///< d log L_t / d log L_o
  ClipStats clip;
};

struct GlobalToneOptions {
  double key = 0.18;
  /// Source luminance mapped to display white; the image maximum when unset.
  std::optional<double> white_point;
  ColorCorrectionParams color;
  TransferTag encode = TransferTag::Srgb;
  const ColorSpace* color_space = nullptr;  ///< rec709 when null
};

struct LocalToneOptions {
  double sigma_spatial = 0.0;  ///< pixels; 2% of the larger side when 0
  double sigma_range = 0.4;    ///< log10 units
  double base_contrast = 1.6;  ///< target log10 range of the base layer
  ColorCorrectionParams color;
  TransferTag encode = TransferTag::Srgb;
  const ColorSpace* color_space = nullptr;
};

/// Extended photographic curve L_t = x (1 + x / W^2) / (1 + x), x = s L_o,
/// s = key / geometric-mean(L_o), W = s * white_point; clamped to 1.
ToneMapResult tonemap_global(const HdrImage& img, const GlobalToneOptions& options = {});

/// Bilateral base/detail split of log10 luminance; the base is compressed to
/// `base_contrast` decades and the detail layer is kept. The brightest output
/// pixel is placed at display white.
ToneMapResult tonemap_local(const HdrImage& img, const LocalToneOptions& options = {});

/// Brute-force bilateral filter with a Gaussian spatial kernel truncated at
/// 2 sigma and a Gaussian range kernel.
Raster bilateral_filter(const Raster& in, double sigma_spatial, double sigma_range);

/// Per-pixel saturation parameter p = clamp(slope, 0, 1).
Raster auto_saturation(const ToneMapResult& result);

/// One pixel of either formula. Zero source luminance gives black.
Rgb color_correct_pixel(const Rgb& i_o, double l_o, double l_t, double p, ColorFormula formula);

/// Display-linear RGB before encoding; may leave [0, 1].
HdrImage color_correct(const HdrImage& img, const ToneMapResult& result,
                       const ColorCorrectionParams& params);

/// Hard clip to [0, 1] and 8-bit encode through the tagged OETF.
SdrImage encode_sdr(const HdrImage& display, TransferTag tag, ClipStats* stats = nullptr);

}  // namespace hdrkit
