#include "hdrkit/tonemap.hpp"

#include <algorithm>
#include <cmath>

#include "hdrkit/error.hpp"
#include "hdrkit/parallel.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

namespace {

const ColorSpace& space_or_default(const ColorSpace* cs) { return cs ? *cs : ColorSpace::rec709(); }

Raster source_luminance(const HdrImage& img, const ColorSpace& cs) {
  Raster l = luminance(img, cs);
  for (auto& v : l.values) v = std::max(v, 0.0);
  return l;
}

void finish(const HdrImage& img, ToneMapResult& r, const ColorCorrectionParams& color, TransferTag tag) {
  const HdrImage display = color_correct(img, r, color);
  r.sdr = encode_sdr(display, tag, &r.clip);
}

}  // namespace

ToneMapResult tonemap_global(const HdrImage& img, const GlobalToneOptions& options) {
  if (!(options.key > 0.0)) throw Error(Errc::BadParameter, "key must be positive");
  if (options.white_point && !(*options.white_point > 0.0)) {
    throw Error(Errc::BadParameter, "white point must be positive");
  }
  const ColorSpace& cs = space_or_default(options.color_space);
  ToneMapResult r;
  r.l_o = source_luminance(img, cs);
  r.l_t = Raster(img.width(), img.height());
  r.slope = Raster(img.width(), img.height(), 1.0);

  double log_sum = 0.0, max_l = 0.0;
  std::size_t positive = 0;
  for (double l : r.l_o.values) {
    if (l <= 0.0) continue;
    log_sum += std::log(l);
    max_l = std::max(max_l, l);
    ++positive;
  }
  if (positive > 0) {
    const double s = options.key / std::exp(log_sum / static_cast<double>(positive));
    const double white = s * options.white_point.value_or(max_l);
    const double inv_w2 = 1.0 / (white * white);
    for (std::size_t i = 0; i < r.l_o.size(); ++i) {
      const double l = r.l_o.values[i];
      if (l <= 0.0) continue;
      const double x = s * l;
      r.l_t.values[i] = std::min(1.0, x * (1.0 + x * inv_w2) / (1.0 + x));
      r.slope.values[i] = (1.0 + 2.0 * x * inv_w2 + x * x * inv_w2) / ((1.0 + x) * (1.0 + x * inv_w2));
    }
  }
  finish(img, r, options.color, options.encode);
  return r;
}

Raster bilateral_filter(const Raster& in, double sigma_spatial, double sigma_range) {
  if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0)) {
    throw Error(Errc::BadParameter, "bilateral sigmas must be positive");
  }
  const long radius = static_cast<long>(std::ceil(2.0 * sigma_spatial));
  std::vector<double> spatial(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (long dy = -radius; dy <= radius; ++dy) {
    for (long dx = -radius; dx <= radius; ++dx) {
      spatial[static_cast<std::size_t>((dy + radius) * (2 * radius + 1) + dx + radius)] =
          std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_spatial * sigma_spatial));
    }
  }
  const double inv_r = 1.0 / (2.0 * sigma_range * sigma_range);
  const long W = static_cast<long>(in.width), H = static_cast<long>(in.height);
  Raster out(in.width, in.height);
  parallel_for(0, in.height, [&](std::size_t yy) {
    const long y = static_cast<long>(yy);
    for (long x = 0; x < W; ++x) {
      const double centre = in.values[static_cast<std::size_t>(y * W + x)];
      double num = 0.0, den = 0.0;
      for (long dy = std::max(-radius, -y); dy <= std::min(radius, H - 1 - y); ++dy) {
        const double* row = &in.values[static_cast<std::size_t>((y + dy) * W)];
        const double* ks = &spatial[static_cast<std::size_t>((dy + radius) * (2 * radius + 1) + radius)];
        for (long dx = std::max(-radius, -x); dx <= std::min(radius, W - 1 - x); ++dx) {
          const double v = row[x + dx];
          const double d = v - centre;
          const double k = ks[dx] * std::exp(-d * d * inv_r);
          num += k * v;
          den += k;
        }
      }
      out.values[static_cast<std::size_t>(y * W + x)] = num / den;
    }
  });
  return out;
}

ToneMapResult tonemap_local(const HdrImage& img, const LocalToneOptions& options) {
  if (!(options.sigma_range > 0.0) || options.sigma_spatial < 0.0 || !(options.base_contrast > 0.0)) {
    throw Error(Errc::BadParameter, "sigmas and base contrast must be positive");
  }
  const double sigma_s = options.sigma_spatial > 0.0
                             ? options.sigma_spatial
                             : std::max(1.0, 0.02 * static_cast<double>(std::max(img.width(), img.height())));
  const ColorSpace& cs = space_or_default(options.color_space);
  ToneMapResult r;
  r.l_o = source_luminance(img, cs);
  r.l_t = Raster(img.width(), img.height());
  r.slope = Raster(img.width(), img.height(), 1.0);

  double floor = INFINITY;
  for (double l : r.l_o.values) {
    if (l > 0.0) floor = std::min(floor, l);
  }
  if (std::isfinite(floor)) {
    Raster log_l(img.width(), img.height());
    for (std::size_t i = 0; i < log_l.size(); ++i) log_l.values[i] = std::log10(std::max(r.l_o.values[i], floor));
    const Raster base = bilateral_filter(log_l, sigma_s, options.sigma_range);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (r.l_o.values[i] <= 0.0) continue;
      lo = std::min(lo, base.values[i]);
      hi = std::max(hi, base.values[i]);
    }
    const double range = hi - lo;
    const double c = range > options.base_contrast ? options.base_contrast / range : 1.0;
    // Anchor the brightest output at display white so no detail is clipped.
    std::vector<double> out(base.size());
    double top = -INFINITY;
    for (std::size_t i = 0; i < base.size(); ++i) {
      out[i] = c * (base.values[i] - hi) + (log_l.values[i] - base.values[i]);
      if (r.l_o.values[i] > 0.0) top = std::max(top, out[i]);
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      r.slope.values[i] = c;
      if (r.l_o.values[i] <= 0.0) continue;
      r.l_t.values[i] = std::min(1.0, std::pow(10.0, out[i] - top));
    }
  }
  finish(img, r, options.color, options.encode);
  return r;
}

Raster auto_saturation(const ToneMapResult& result) {
  Raster p = result.slope;
  for (auto& v : p.values) v = std::clamp(v, 0.0, 1.0);
  return p;
}

Rgb color_correct_pixel(const Rgb& i_o, double l_o, double l_t, double p, ColorFormula formula) {
  if (!(l_o > 0.0)) return {0.0, 0.0, 0.0};
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double ratio = i_o[c] / l_o;
    out[c] = formula == ColorFormula::RatioPower ? std::pow(ratio, p) * l_t : (ratio * p + (1.0 - p)) * l_t;
  }
  return out;
}

HdrImage color_correct(const HdrImage& img, const ToneMapResult& result, const ColorCorrectionParams& params) {
  if (result.l_o.size() != img.pixel_count() || result.l_t.size() != img.pixel_count()) {
    throw Error(Errc::ShapeMismatch, "tone map result does not match the image");
  }
  if (params.p && !(*params.p >= 0.0 && *params.p <= 1.0)) {
    throw Error(Errc::BadParameter, "saturation p must be in [0,1]");
  }
  const Raster p_auto = params.p ? Raster() : auto_saturation(result);
  std::vector<float> data(3 * img.pixel_count());
  bool negative = false;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double p = params.p ? *params.p : p_auto.values[i];
    // Negative inputs (wide-gamut sources) have no meaningful ratio power.
    Rgb src = img.pixel(i);
    if (params.formula == ColorFormula::RatioPower) {
      for (auto& v : src) v = std::max(v, 0.0);
    }
    const Rgb v = color_correct_pixel(src, result.l_o.values[i], result.l_t.values[i], p, params.formula);
    for (int c = 0; c < 3; ++c) {
      data[3 * i + static_cast<std::size_t>(c)] = static_cast<float>(v[c]);
      negative = negative || v[c] < 0.0;
    }
  }
  return HdrImage(img.width(), img.height(), std::move(data), Calibration::Relative, negative);
}

SdrImage encode_sdr(const HdrImage& display, TransferTag tag, ClipStats* stats) {
  const TransferFunction tf = TransferFunction::for_tag(tag);
  // PQ-tagged output treats display white as 10000 nits.
  const double peak = tf.absolute() ? 10000.0 : tf.peak_nits;
  std::vector<std::uint8_t> data(display.data().size());
  ClipStats s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double v = display.data()[i];
    if (v < 0.0) {
      ++s.below;
      v = 0.0;
    } else if (v > 1.0) {
      ++s.above;
      v = 1.0;
    }
    data[i] = static_cast<std::uint8_t>(std::lround(255.0 * oetf(tf, v * peak)));
  }
  s.fraction = data.empty() ? 0.0 : static_cast<double>(s.below + s.above) / static_cast<double>(data.size());
  if (stats) *stats = s;
  return SdrImage(display.width(), display.height(), std::move(data), tag);
}

}  // namespace hdrkit
