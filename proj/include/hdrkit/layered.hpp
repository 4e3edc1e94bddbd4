#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hdrkit/image.hpp"
#include "hdrkit/tonemap.hpp"

namespace hdrkit {

enum class LayerMode : std::uint8_t { Lossless, Lossy16, Lossy8, BaseOnly };

std::string_view layer_mode_name(LayerMode mode);
/// lossless | lossy16 | lossy8 | base-only
LayerMode layer_mode_from_name(std::string_view name);

enum class BaseOperator : std::uint8_t { Global, Local };

struct PackOptions {
  LayerMode mode = LayerMode::Lossless;
  BaseOperator op = BaseOperator::Global;
  GlobalToneOptions global;  ///< encode and color_space are ignored
  LocalToneOptions local;    ///< encode and color_space are ignored
};

/// Fixed 176-byte little-endian header; see docs/hdrl.md for the layout.
struct LayeredHeader {
  LayerMode mode = LayerMode::Lossless;
  BaseOperator op = BaseOperator::Global;
  ColorFormula formula = ColorFormula::RatioPower;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  /// Global: key, white point (NaN = image maximum), unused.
  /// Local: sigma_spatial, sigma_range, base_contrast.
  std::array<double, 3> tone{};
  double saturation = 0.0;  ///< NaN = automatic
  double epsilon = 0x1p-16;
  double scale = 1.0;  ///< lossless predictor gain
  std::array<double, 3> plane_min{};
  std::array<double, 3> plane_step{};  ///< log2 units; 0 for lossless
  /// Bound on |(L' + eps) / (L + eps) - 1| for lossy modes; 0 when lossless.
  double error_bound = 0.0;
  std::uint64_t base_offset = 0;
  std::uint64_t base_length = 0;
  std::uint64_t ext_offset = 0;
  std::uint64_t ext_length = 0;
  std::uint32_t ext_crc = 0;
  Calibration calibration = Calibration::Relative;  ///< of the source; base-only output is always relative
};

inline constexpr std::size_t kLayeredHeaderSize = 176;

struct LayeredStream {
  LayeredHeader header;
  std::vector<std::uint8_t> bytes;  ///< complete container

  std::span<const std::uint8_t> base() const;
  std::span<const std::uint8_t> extension() const;
};

LayeredStream pack(const HdrImage& img, const PackOptions& options = {});

/// Throws CorruptStream on a bad header or B/E disagreement and
/// MissingExtension when E is absent, truncated or fails its checksum.
HdrImage unpack(std::span<const std::uint8_t> bytes);

LayeredHeader read_layered_header(std::span<const std::uint8_t> bytes);

/// The base layer as a legacy reader sees it: a byte slice holding a P6 file.
SdrImage extract_base(std::span<const std::uint8_t> bytes);

struct DecorrelationReport {
  double direct_bits = 0.0;    ///< zero-order entropy of quantized log2 luminance
  double residual_bits = 0.0;  ///< same for the log2 ratio against the base
  double gain = 0.0;           ///< 1 - residual / direct (0 when direct is 0)
  double step = 1.0 / 32.0;    ///< log2 quantization step used for both
};

DecorrelationReport decorrelation_gain(const HdrImage& img, const PackOptions& options = {});

/// Zero-order entropy in bits per sample.
double zero_order_entropy(std::span<const std::int64_t> samples);

/// Byte RLE followed by an adaptive order-0 range coder.
std::vector<std::uint8_t> entropy_encode(std::span<const std::uint8_t> data);
/// Throws CorruptStream when the input does not decode to `size` bytes.
std::vector<std::uint8_t> entropy_decode(std::span<const std::uint8_t> coded, std::size_t size);

}  // namespace hdrkit
