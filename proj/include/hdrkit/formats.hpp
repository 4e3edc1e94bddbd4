#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdrkit/color.hpp"
#include "hdrkit/encodings.hpp"
#include "hdrkit/image.hpp"

namespace hdrkit {

using Bytes = std::vector<std::uint8_t>;

// --- Radiance .hdr / .pic --------------------------------------------------

enum class RadianceFormat : std::uint8_t { Rgbe, Xyze };

struct RadianceHeader {
  std::string signature;  ///< first line, e.g. "#?RADIANCE"
  RadianceFormat format = RadianceFormat::Rgbe;
  /// Product of every EXPOSURE line; stored values are radiance times this.
  double exposure = 1.0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string resolution;   ///< resolution line as read, e.g. "-Y 4 +X 8"
  std::size_t data_offset = 0;
};

RadianceHeader read_hdr_header(std::span<const std::uint8_t> bytes);

/// Decodes flat and adaptive-RLE scanlines in any orientation and returns a
/// top-left-origin image with EXPOSURE divided out. XYZE files are converted
/// to RGB through `cs`.
HdrImage read_hdr(std::span<const std::uint8_t> bytes, const ColorSpace& cs = ColorSpace::rec709());

struct HdrWriteOptions {
  bool use_rle = true;
  RadianceFormat format = RadianceFormat::Rgbe;
  RgbeRounding rounding = RgbeRounding::Nearest;
  const ColorSpace* color_space = nullptr;  ///< for XYZE; rec709 when null
};

/// Always writes the canonical "-Y h +X w" orientation and no EXPOSURE line.
Bytes write_hdr(const HdrImage& img, const HdrWriteOptions& options = {});

// --- PFM --------------------------------------------------------------------

struct PfmHeader {
  bool color = true;  ///< "PF" (true) or "Pf" (false)
  std::size_t width = 0;
  std::size_t height = 0;
  double scale = -1.0;  ///< sign: negative means little-endian
  std::size_t data_offset = 0;

  bool little_endian() const { return scale < 0.0; }
};

PfmHeader read_pfm_header(std::span<const std::uint8_t> bytes);
/// Sample values are returned bit-exact; the scale is metadata only.
/// Grayscale files expand to R = G = B.
HdrImage read_pfm(std::span<const std::uint8_t> bytes);
Bytes write_pfm(const HdrImage& img, bool little_endian = true, double scale = 1.0);

// --- binary PPM (P6, maxval 255) -------------------------------------------

SdrImage read_ppm(std::span<const std::uint8_t> bytes, TransferTag tag = TransferTag::Srgb);
Bytes write_ppm(const SdrImage& img);

// --- files -------------------------------------------------------------------

enum class FileFormat : std::uint8_t { Radiance, Pfm, Ppm, Layered };

/// By extension (.hdr/.pic, .pfm, .ppm, .hdrl); throws BadParameter otherwise.
FileFormat format_from_path(const std::filesystem::path& path);
/// "hdr", "pic", "pfm", "ppm", "hdrl".
FileFormat format_from_name(std::string_view name);
std::string_view format_name(FileFormat format);

Bytes read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace hdrkit
