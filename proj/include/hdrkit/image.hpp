#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hdrkit {

/// Linear tristimulus triple, RGB or XYZ depending on context.
using Rgb = std::array<double, 3>;

enum class Calibration : std::uint8_t {
  Relative,  ///< scene- or display-relative radiance, arbitrary unit
  Absolute,  ///< luminance-bearing, 1.0 == 1 nit
};

/// Which OETF produced the 8-bit codes of an SdrImage.
enum class TransferTag : std::uint8_t { Gamma22, Srgb, PqNormalized };

/// Single-channel double raster, row-major.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  std::size_t size() const { return values.size(); }
};

/// Linear floating-point RGB raster. Row-major, top-left origin, interleaved.
/// Immutable once constructed; the constructor enforces that every sample is
/// finite and, unless `allow_negative` is set, non-negative.
class HdrImage {
 public:
  HdrImage() = default;
  HdrImage(std::size_t width, std::size_t height, std::vector<float> data,
           Calibration calibration = Calibration::Relative, bool allow_negative = false);

  static HdrImage filled(std::size_t width, std::size_t height, const Rgb& value,
                         Calibration calibration = Calibration::Relative);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  bool empty() const { return data_.empty(); }
  Calibration calibration() const { return calibration_; }
  bool allows_negative() const { return allow_negative_; }

  std::span<const float> data() const { return data_; }
  Rgb pixel(std::size_t x, std::size_t y) const { return pixel(y * width_ + x); }
  Rgb pixel(std::size_t index) const {
    const float* p = data_.data() + 3 * index;
    return {p[0], p[1], p[2]};
  }

  HdrImage with_calibration(Calibration calibration) const;
  /// Multiplies every sample by `factor` (> 0).
  HdrImage scaled(double factor, Calibration calibration) const;

  friend bool operator==(const HdrImage&, const HdrImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> data_;
  Calibration calibration_ = Calibration::Relative;
  bool allow_negative_ = false;
};

/// 8-bit per channel RGB raster.
class SdrImage {
 public:
  SdrImage() = default;
  SdrImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data,
           TransferTag tag = TransferTag::Srgb);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  bool empty() const { return data_.empty(); }
  TransferTag transfer_tag() const { return tag_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::uint8_t at(std::size_t x, std::size_t y, int channel) const {
    return data_[3 * (y * width_ + x) + static_cast<std::size_t>(channel)];
  }

  friend bool operator==(const SdrImage&, const SdrImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
  TransferTag tag_ = TransferTag::Srgb;
};

}  // namespace hdrkit
