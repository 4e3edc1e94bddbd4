#pragma once

#include <filesystem>
#include <optional>

#include "hdrkit/formats.hpp"
#include "hdrkit/image.hpp"

namespace hdrkit {

/// Reads .hdr/.pic, .pfm, .ppm (sRGB-decoded, relative) or .hdrl, by
/// extension unless `format` is given.
HdrImage load_image(const std::filesystem::path& path, std::optional<FileFormat> format = {});

/// Writes .hdr, .pfm or .hdrl (lossless) atomically.
void save_image(const std::filesystem::path& path, const HdrImage& img, std::optional<FileFormat> format = {});

}  // namespace hdrkit
