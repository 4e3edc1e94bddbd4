#include "hdrkit/expand.hpp"

#include <algorithm>
#include <cmath>

#include "hdrkit/error.hpp"
#include "hdrkit/parallel.hpp"
#include "hdrkit/tonemap.hpp"

namespace hdrkit {

void ExpansionParams::validate() const {
  if (!(target_peak > 0.0) || !std::isfinite(target_peak)) {
    throw Error(Errc::BadParameter, "target peak must be positive");
  }
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw Error(Errc::BadParameter, "alpha must be >= 1");
  if (low_code >= high_code) throw Error(Errc::BadParameter, "low code must be below high code");
  if (prefilter && (!(prefilter->sigma_spatial > 0.0) || !(prefilter->sigma_range > 0.0))) {
    throw Error(Errc::BadParameter, "prefilter sigmas must be positive");
  }
  if (const auto* curve = std::get_if<ResponseCurve>(&linearizer)) {
    for (int z = 0; z < 256; ++z) {
      if (!std::isfinite(curve->g[z])) throw Error(Errc::CurveNotInvertible, "response curve is not finite");
      if (z > 0 && curve->g[z] < curve->g[z - 1]) {
        throw Error(Errc::CurveNotInvertible, "response curve decreases at code " + std::to_string(z));
      }
    }
    if (!(curve->g[255] > curve->g[0])) throw Error(Errc::CurveNotInvertible, "response curve is constant");
  }
}

double linearize(const ExpansionParams& params, double code) {
  code = std::clamp(code, 0.0, 255.0);
  if (const auto* tf = std::get_if<TransferFunction>(&params.linearizer)) {
    return eotf(*tf, code / 255.0) / eotf(*tf, 1.0);
  }
  const auto& g = std::get<ResponseCurve>(params.linearizer).g;
  const int i = std::min(static_cast<int>(code), 254);
  const double f = code - i;
  return std::exp(g[i] + f * (g[i + 1] - g[i]) - g[255]);
}

ExpansionResult expand(const SdrImage& sdr, const ExpansionParams& params) {
  params.validate();
  const ColorSpace& cs = params.color_space ? *params.color_space : ColorSpace::rec709();
  const std::size_t n = sdr.pixel_count();
  const auto codes = sdr.data();

  ExpansionResult result;
  result.low_confidence.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto z = codes[3 * i + c];
      if (z <= params.low_code || z >= params.high_code) result.low_confidence[i] = 1;
    }
    result.flagged += result.low_confidence[i];
  }

  std::vector<double> linear(3 * n);
  if (params.prefilter) {
    for (int c = 0; c < 3; ++c) {
      Raster plane(sdr.width(), sdr.height());
      for (std::size_t i = 0; i < n; ++i) plane.values[i] = codes[3 * i + c];
      plane = bilateral_filter(plane, params.prefilter->sigma_spatial, params.prefilter->sigma_range);
      for (std::size_t i = 0; i < n; ++i) linear[3 * i + c] = linearize(params, plane.values[i]);
    }
  } else {
    std::array<double, 256> lut{};
    for (int z = 0; z < 256; ++z) lut[z] = linearize(params, z);
    for (std::size_t k = 0; k < 3 * n; ++k) linear[k] = lut[codes[k]];
  }

  std::vector<float> out(3 * n);
  parallel_for(0, sdr.height(), [&](std::size_t y) {
    for (std::size_t i = y * sdr.width(); i < (y + 1) * sdr.width(); ++i) {
      const Rgb rgb{linear[3 * i], linear[3 * i + 1], linear[3 * i + 2]};
      const double l = cs.luminance(rgb);
      if (!(l > 0.0)) continue;
      // Channels stay within the peak: rgb_c * L^(alpha - 1) <= 1.
      const double scale = params.target_peak * std::pow(l, params.alpha - 1.0);
      for (int c = 0; c < 3; ++c) {
        out[3 * i + c] = static_cast<float>(std::clamp(rgb[c] * scale, 0.0, params.target_peak));
      }
    }
  });
  result.image = HdrImage(sdr.width(), sdr.height(), std::move(out), Calibration::Absolute);
  return result;
}

}  // namespace hdrkit
