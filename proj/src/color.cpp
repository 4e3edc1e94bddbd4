#include "hdrkit/color.hpp"

#include <cmath>
#include <string>

#include "hdrkit/error.hpp"

namespace hdrkit {

Rgb multiply(const Matrix3& m, const Rgb& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Matrix3 invert(const Matrix3& m) {
  const double c00 = m[4] * m[8] - m[5] * m[7];
  const double c01 = m[5] * m[6] - m[3] * m[8];
  const double c02 = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  if (!std::isfinite(det) || std::abs(det) <= 1e-12 * scale * scale * scale) {
    throw Error(Errc::BadColorSpace, "matrix is singular");
  }
  const double inv = 1.0 / det;
  return {c00 * inv,
          (m[2] * m[7] - m[1] * m[8]) * inv,
          (m[1] * m[5] - m[2] * m[4]) * inv,
          c01 * inv,
          (m[0] * m[8] - m[2] * m[6]) * inv,
          (m[2] * m[3] - m[0] * m[5]) * inv,
          c02 * inv,
          (m[1] * m[6] - m[0] * m[7]) * inv,
          (m[0] * m[4] - m[1] * m[3]) * inv};
}

ColorSpace::ColorSpace(const Matrix3& m) : to_xyz_(m), from_xyz_(invert(m)) {
  const double sum = m[3] + m[4] + m[5];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::BadColorSpace,
                "luminance weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

ColorSpace ColorSpace::from_matrix(const Matrix3& rgb_to_xyz) { return ColorSpace(rgb_to_xyz); }

ColorSpace ColorSpace::from_primaries(Chromaticity r, Chromaticity g, Chromaticity b,
                                      Chromaticity w) {
  for (const auto& c : {r, g, b, w}) {
    if (!(c.y > 0.0)) throw Error(Errc::BadColorSpace, "chromaticity y must be positive");
  }
  // Columns are the XYZ of each primary at unit Y, rescaled so RGB white maps
  // to the white point with Y = 1.
  const Matrix3 p = {r.x / r.y, g.x / g.y, b.x / b.y, 1.0, 1.0, 1.0,
                     (1 - r.x - r.y) / r.y, (1 - g.x - g.y) / g.y, (1 - b.x - b.y) / b.y};
  const Rgb white = {w.x / w.y, 1.0, (1 - w.x - w.y) / w.y};
  const Rgb s = multiply(invert(p), white);
  Matrix3 m{};
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) m[3 * row + col] = p[3 * row + col] * s[col];
  }
  return ColorSpace(m);
}

const ColorSpace& ColorSpace::rec709() {
  static const ColorSpace cs =
      from_primaries({0.64, 0.33}, {0.30, 0.60}, {0.15, 0.06}, {0.3127, 0.3290});
  return cs;
}

const ColorSpace& ColorSpace::rec601() {
  // 625-line (EBU) primaries, D65.
  static const ColorSpace cs =
      from_primaries({0.64, 0.33}, {0.29, 0.60}, {0.15, 0.06}, {0.3127, 0.3290});
  return cs;
}

const ColorSpace& ColorSpace::rec2020() {
  static const ColorSpace cs =
      from_primaries({0.708, 0.292}, {0.170, 0.797}, {0.131, 0.046}, {0.3127, 0.3290});
  return cs;
}

const ColorSpace& ColorSpace::by_name(std::string_view name) {
  if (name == "rec709" || name == "srgb") return rec709();
  if (name == "rec601") return rec601();
  if (name == "rec2020") return rec2020();
  throw Error(Errc::BadParameter, "unknown color space '" + std::string(name) + "'");
}

Raster luminance(const HdrImage& img, const ColorSpace& cs) {
  Raster out(img.width(), img.height());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) out.values[i] = cs.luminance(img.pixel(i));
  return out;
}

namespace {

HdrImage transform(const HdrImage& img, const Matrix3& m, bool allow_negative) {
  std::vector<float> data(img.data().size());
  bool negative = false;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb v = multiply(m, img.pixel(i));
    for (int c = 0; c < 3; ++c) {
      data[3 * i + c] = static_cast<float>(v[c]);
      negative = negative || data[3 * i + c] < 0.0f;
    }
  }
  return HdrImage(img.width(), img.height(), std::move(data), img.calibration(),
                  allow_negative || negative);
}

}  // namespace

HdrImage rgb_to_xyz(const HdrImage& img, const ColorSpace& cs) {
  return transform(img, cs.to_xyz(), img.allows_negative());
}

HdrImage xyz_to_rgb(const HdrImage& img, const ColorSpace& cs) {
  return transform(img, cs.from_xyz(), img.allows_negative());
}

}  // namespace hdrkit
