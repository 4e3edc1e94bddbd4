#include "hdrkit/image.hpp"

#include <cmath>
#include <string>

#include "hdrkit/error.hpp"

namespace hdrkit {

HdrImage::HdrImage(std::size_t width, std::size_t height, std::vector<float> data,
                   Calibration calibration, bool allow_negative)
    : width_(width),
      height_(height),
      data_(std::move(data)),
      calibration_(calibration),
      allow_negative_(allow_negative) {
  if (width_ * height_ * 3 != data_.size()) {
    throw Error(Errc::BadDimensions, std::to_string(width_) + "x" + std::to_string(height_) +
                                         " image needs " + std::to_string(width_ * height_ * 3) +
                                         " samples, got " + std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const float v = data_[i];
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFiniteSample, "sample " + std::to_string(i) + " is not finite");
    }
    if (v < 0.0f && !allow_negative_) {
      throw Error(Errc::NegativeSample, "sample " + std::to_string(i) + " is negative");
    }
  }
}

HdrImage HdrImage::filled(std::size_t width, std::size_t height, const Rgb& value,
                          Calibration calibration) {
  std::vector<float> data(width * height * 3);
  for (std::size_t i = 0; i < width * height; ++i) {
    for (int c = 0; c < 3; ++c) data[3 * i + c] = static_cast<float>(value[c]);
  }
  const bool negative = value[0] < 0 || value[1] < 0 || value[2] < 0;
  return HdrImage(width, height, std::move(data), calibration, negative);
}

HdrImage HdrImage::with_calibration(Calibration calibration) const {
  HdrImage out = *this;
  out.calibration_ = calibration;
  return out;
}

HdrImage HdrImage::scaled(double factor, Calibration calibration) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(Errc::BadParameter, "scale factor must be positive and finite");
  }
  std::vector<float> data(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data[i] = static_cast<float>(static_cast<double>(data_[i]) * factor);
  }
  return HdrImage(width_, height_, std::move(data), calibration, allow_negative_);
}

SdrImage::SdrImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data,
                   TransferTag tag)
    : width_(width), height_(height), data_(std::move(data)), tag_(tag) {
  if (width_ * height_ * 3 != data_.size()) {
    throw Error(Errc::BadDimensions, std::to_string(width_) + "x" + std::to_string(height_) +
                                         " image needs " + std::to_string(width_ * height_ * 3) +
                                         " bytes, got " + std::to_string(data_.size()));
  }
}

}  // namespace hdrkit
