#pragma once

#include <array>
#include <string_view>

#include "hdrkit/image.hpp"

namespace hdrkit {

using Matrix3 = std::array<double, 9>;  // row-major

Rgb multiply(const Matrix3& m, const Rgb& v);
Matrix3 invert(const Matrix3& m);  // throws BadColorSpace when singular

/// RGB primaries expressed as an RGB->XYZ matrix. The second row holds the
/// luminance weights; they sum to one for any space normalized to Y_white = 1.
class ColorSpace {
 public:
  struct Chromaticity {
    double x, y;
  };

  /// Builds the space from primary and white chromaticities.
  static ColorSpace from_primaries(Chromaticity red, Chromaticity green, Chromaticity blue,
                                   Chromaticity white);
  /// Wraps an explicit matrix; validates invertibility and weight sum.
  static ColorSpace from_matrix(const Matrix3& rgb_to_xyz);

  static const ColorSpace& rec709();
  static const ColorSpace& rec601();
  static const ColorSpace& rec2020();
  /// "rec709", "srgb", "rec601", "rec2020"; throws BadParameter otherwise.
  static const ColorSpace& by_name(std::string_view name);

  const Matrix3& to_xyz() const { return to_xyz_; }
  const Matrix3& from_xyz() const { return from_xyz_; }
  std::array<double, 3> luminance_weights() const { return {to_xyz_[3], to_xyz_[4], to_xyz_[5]}; }
  /// XYZ of RGB (1,1,1).
  Rgb white_xyz() const { return multiply(to_xyz_, {1.0, 1.0, 1.0}); }

  double luminance(const Rgb& rgb) const {
    return to_xyz_[3] * rgb[0] + to_xyz_[4] * rgb[1] + to_xyz_[5] * rgb[2];
  }

 private:
  explicit ColorSpace(const Matrix3& m);
  Matrix3 to_xyz_{};
  Matrix3 from_xyz_{};
};

/// Per-pixel luminance, in nits when the image is Absolute.
Raster luminance(const HdrImage& img, const ColorSpace& cs = ColorSpace::rec709());

HdrImage rgb_to_xyz(const HdrImage& img, const ColorSpace& cs = ColorSpace::rec709());
/// Result may hold negative samples for out-of-gamut colors.
HdrImage xyz_to_rgb(const HdrImage& img, const ColorSpace& cs = ColorSpace::rec709());

}  // namespace hdrkit
