#include "hdrkit/io.hpp"

#include "hdrkit/error.hpp"
#include "hdrkit/formats.hpp"
#include "hdrkit/layered.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

HdrImage load_image(const std::filesystem::path& path, std::optional<FileFormat> format) {
  const FileFormat f = format ? *format : format_from_path(path);
  const Bytes bytes = read_file(path);
  switch (f) {
    case FileFormat::Radiance: return read_hdr(bytes);
    case FileFormat::Pfm: return read_pfm(bytes);
    case FileFormat::Layered: return unpack(bytes);
    case FileFormat::Ppm: {
      const SdrImage sdr = read_ppm(bytes);
      const TransferFunction tf = TransferFunction::for_tag(sdr.transfer_tag());
      std::vector<float> data(sdr.data().size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<float>(eotf(tf, sdr.data()[i] / 255.0));
      }
      return HdrImage(sdr.width(), sdr.height(), std::move(data));
    }
  }
  throw Error(Errc::BadParameter, "unsupported format");
}

void save_image(const std::filesystem::path& path, const HdrImage& img, std::optional<FileFormat> format) {
  Bytes bytes;
  switch (format ? *format : format_from_path(path)) {
    case FileFormat::Radiance: bytes = write_hdr(img); break;
    case FileFormat::Pfm: bytes = write_pfm(img); break;
    case FileFormat::Layered: bytes = pack(img, {}).bytes; break;
    case FileFormat::Ppm:
      throw Error(Errc::BadParameter, path.string() + ": .ppm holds 8-bit output; tone map or convert first");
  }
  write_file_atomic(path, bytes);
}

}  // namespace hdrkit
