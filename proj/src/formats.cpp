#include "hdrkit/formats.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>

#include "hdrkit/error.hpp"

namespace hdrkit {

namespace {

// Guards allocations driven by untrusted headers.
constexpr std::size_t kMaxDimension = 1u << 20;
constexpr std::size_t kMaxPixels = 1u << 28;

std::uint32_t byte_swap(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void check_dims(std::size_t w, std::size_t h, std::size_t offset) {
  if (w == 0 || h == 0 || w > kMaxDimension || h > kMaxDimension || w * h > kMaxPixels) {
    throw Error(Errc::BadDimensions,
                "unsupported dimensions " + std::to_string(w) + "x" + std::to_string(h), offset);
  }
}

/// Cursor over a byte buffer for the text parts of the headers.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }
  void skip(std::size_t n) { pos_ += n; }

  /// Line without the trailing '\n', or nullopt when no newline remains.
  std::optional<std::string> line(std::size_t max_len = 4096) {
    const std::size_t start = pos_;
    for (std::size_t i = pos_; i < bytes_.size() && i - start <= max_len; ++i) {
      if (bytes_[i] == '\n') {
        pos_ = i + 1;
        return std::string(reinterpret_cast<const char*>(bytes_.data()) + start, i - start);
      }
    }
    return std::nullopt;
  }

  /// Whitespace-separated token; `#` starts a comment running to end of line.
  std::string token(bool comments) {
    for (;;) {
      while (!at_end() && std::isspace(peek())) ++pos_;
      if (comments && !at_end() && peek() == '#') {
        while (!at_end() && peek() != '\n') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (!at_end() && !std::isspace(peek()) && pos_ - start < 64) ++pos_;
    return std::string(reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// ===========================================================================
// Radiance
// ===========================================================================

namespace {

struct Orientation {
  bool rows_are_y = true;  // scanlines run along X
  bool y_down = true;      // -Y: first scanline is the top row
  bool x_right = true;     // +X: scanline starts at the left
};

Orientation parse_resolution(const std::string& line, std::size_t& width, std::size_t& height,
                             std::size_t offset) {
  Reader r(std::span(reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
  const std::string s1 = r.token(false), n1 = r.token(false), s2 = r.token(false),
                    n2 = r.token(false);
  auto bad = [&] { return Error(Errc::NotRadiance, "bad resolution line '" + line + "'", offset); };
  if (s1.size() != 2 || s2.size() != 2 || !r.token(false).empty()) throw bad();
  auto d1 = parse_number<std::size_t>(n1);
  auto d2 = parse_number<std::size_t>(n2);
  if (!d1 || !d2) throw bad();
  const char a1 = s1[1], a2 = s2[1];
  if ((s1[0] != '+' && s1[0] != '-') || (s2[0] != '+' && s2[0] != '-')) throw bad();
  Orientation o;
  if (a1 == 'Y' && a2 == 'X') {
    o.rows_are_y = true;
    o.y_down = s1[0] == '-';
    o.x_right = s2[0] == '+';
    height = *d1;
    width = *d2;
  } else if (a1 == 'X' && a2 == 'Y') {
    o.rows_are_y = false;
    o.x_right = s1[0] == '+';
    o.y_down = s2[0] == '-';
    width = *d1;
    height = *d2;
  } else {
    throw bad();
  }
  check_dims(width, height, offset);
  return o;
}

RadianceHeader parse_header(std::span<const std::uint8_t> bytes, Orientation* orientation) {
  Reader r(bytes);
  RadianceHeader h;
  if (bytes.size() < 2 || bytes[0] != '#' || bytes[1] != '?') {
    throw Error(Errc::NotRadiance, "missing #? signature", 0);
  }
  auto sig = r.line();
  if (!sig) throw Error(Errc::TruncatedFile, "header ends inside signature", bytes.size());
  h.signature = *sig;
  bool have_format = false;
  for (;;) {
    const std::size_t at = r.pos();
    auto line = r.line();
    if (!line) throw Error(Errc::TruncatedFile, "header is not terminated", bytes.size());
    if (line->empty()) break;
    std::string_view l = *line;
    if (l.starts_with("FORMAT=")) {
      const auto value = trim(l.substr(7));
      if (value == "32-bit_rle_rgbe") {
        h.format = RadianceFormat::Rgbe;
      } else if (value == "32-bit_rle_xyze") {
        h.format = RadianceFormat::Xyze;
      } else {
        throw Error(Errc::UnsupportedVariant, "unsupported FORMAT '" + std::string(value) + "'", at);
      }
      have_format = true;
    } else if (l.starts_with("EXPOSURE=")) {
      auto value = parse_number<double>(trim(l.substr(9)));
      if (!value || !(*value > 0.0) || !std::isfinite(*value)) {
        throw Error(Errc::NotRadiance, "bad EXPOSURE value", at);
      }
      h.exposure *= *value;
    }
  }
  if (!have_format) throw Error(Errc::NotRadiance, "header has no FORMAT line", r.pos());
  const std::size_t res_at = r.pos();
  auto res = r.line(256);
  if (!res) throw Error(Errc::TruncatedFile, "missing resolution line", bytes.size());
  h.resolution = *res;
  const Orientation o = parse_resolution(*res, h.width, h.height, res_at);
  if (orientation) *orientation = o;
  h.data_offset = r.pos();
  return h;
}

/// Reads one scanline of `n` RGBE pixels starting at `pos` into `out`.
void read_scanline(std::span<const std::uint8_t> bytes, std::size_t& pos, std::size_t n,
                   std::vector<std::uint8_t>& out) {
  out.resize(4 * n);
  const std::size_t size = bytes.size();
  const bool rle = n >= 8 && n <= 0x7fff && pos + 4 <= size && bytes[pos] == 2 &&
                   bytes[pos + 1] == 2 && (bytes[pos + 2] & 0x80) == 0;
  if (!rle) {
    if (size - pos < 4 * n) throw Error(Errc::TruncatedFile, "flat scanline truncated", size);
    std::memcpy(out.data(), bytes.data() + pos, 4 * n);
    pos += 4 * n;
    return;
  }
  const std::size_t declared = (static_cast<std::size_t>(bytes[pos + 2]) << 8) | bytes[pos + 3];
  if (declared != n) {
    throw Error(Errc::CorruptRle, "scanline length " + std::to_string(declared) + " != " +
                                      std::to_string(n), pos);
  }
  pos += 4;
  for (int ch = 0; ch < 4; ++ch) {
    std::size_t i = 0;
    while (i < n) {
      if (pos >= size) throw Error(Errc::TruncatedFile, "RLE scanline truncated", pos);
      const std::size_t at = pos;
      std::size_t count = bytes[pos++];
      if (count > 128) {
        count -= 128;
        if (i + count > n) throw Error(Errc::CorruptRle, "run overruns scanline", at);
        if (pos >= size) throw Error(Errc::TruncatedFile, "RLE run truncated", pos);
        const std::uint8_t value = bytes[pos++];
        for (std::size_t k = 0; k < count; ++k) out[4 * (i + k) + ch] = value;
      } else {
        if (count == 0 || i + count > n) {
          throw Error(Errc::CorruptRle, "literal overruns scanline", at);
        }
        if (size - pos < count) throw Error(Errc::TruncatedFile, "RLE literal truncated", size);
        for (std::size_t k = 0; k < count; ++k) out[4 * (i + k) + ch] = bytes[pos + k];
        pos += count;
      }
      i += count;
    }
  }
}

void write_rle_channel(const std::uint8_t* data, std::size_t n, Bytes& out) {
  // Same run-finding strategy as the reference Radiance writer: runs shorter
  // than 4 are emitted as literals.
  std::size_t cur = 0;
  while (cur < n) {
    std::size_t beg_run = cur;
    std::size_t run_count = 0;
    std::size_t old_run_count = 0;
    while (run_count < 4 && beg_run < n) {
      beg_run += run_count;
      old_run_count = run_count;
      run_count = 1;
      while (beg_run + run_count < n && run_count < 127 &&
             data[4 * beg_run] == data[4 * (beg_run + run_count)]) {
        ++run_count;
      }
    }
    if (old_run_count > 1 && old_run_count == beg_run - cur) {
      out.push_back(static_cast<std::uint8_t>(128 + old_run_count));
      out.push_back(data[4 * cur]);
      cur = beg_run;
    }
    while (cur < beg_run) {
      const std::size_t literal = std::min<std::size_t>(128, beg_run - cur);
      out.push_back(static_cast<std::uint8_t>(literal));
      for (std::size_t k = 0; k < literal; ++k) out.push_back(data[4 * (cur + k)]);
      cur += literal;
    }
    if (run_count >= 4) {
      out.push_back(static_cast<std::uint8_t>(128 + run_count));
      out.push_back(data[4 * beg_run]);
      cur += run_count;
    }
  }
}

}  // namespace

RadianceHeader read_hdr_header(std::span<const std::uint8_t> bytes) {
  return parse_header(bytes, nullptr);
}

HdrImage read_hdr(std::span<const std::uint8_t> bytes, const ColorSpace& cs) {
  Orientation o;
  const RadianceHeader h = parse_header(bytes, &o);
  const std::size_t scanlines = o.rows_are_y ? h.height : h.width;
  const std::size_t scan_len = o.rows_are_y ? h.width : h.height;
  // Every scanline takes at least 4 + 4*2*ceil(len/127) bytes (RLE) or 4*len (flat).
  const std::size_t min_line =
      scan_len >= 8 && scan_len <= 0x7fff ? 4 + 8 * ((scan_len + 126) / 127) : 4 * scan_len;
  if ((bytes.size() - h.data_offset) / min_line < scanlines) {
    throw Error(Errc::TruncatedFile, "pixel data shorter than declared dimensions", bytes.size());
  }

  std::vector<float> data(3 * h.width * h.height);
  std::vector<std::uint8_t> line;
  std::size_t pos = h.data_offset;
  const double inv_exposure = 1.0 / h.exposure;
  for (std::size_t s = 0; s < scanlines; ++s) {
    read_scanline(bytes, pos, scan_len, line);
    for (std::size_t i = 0; i < scan_len; ++i) {
      std::size_t x, y;
      if (o.rows_are_y) {
        y = o.y_down ? s : h.height - 1 - s;
        x = o.x_right ? i : h.width - 1 - i;
      } else {
        x = o.x_right ? s : h.width - 1 - s;
        y = o.y_down ? i : h.height - 1 - i;
      }
      const Rgb v = rgbe_decode(RgbePixel::from_bytes(&line[4 * i]));
      float* dst = &data[3 * (y * h.width + x)];
      for (int c = 0; c < 3; ++c) dst[c] = static_cast<float>(v[c] * inv_exposure);
    }
  }
  HdrImage img(h.width, h.height, std::move(data));
  if (h.format == RadianceFormat::Xyze) return xyz_to_rgb(img, cs);
  return img;
}

Bytes write_hdr(const HdrImage& img, const HdrWriteOptions& options) {
  if (img.empty()) throw Error(Errc::BadDimensions, "cannot write an empty image");
  const bool xyze = options.format == RadianceFormat::Xyze;
  const HdrImage& src = xyze ? rgb_to_xyz(img, options.color_space ? *options.color_space
                                                                   : ColorSpace::rec709())
                             : img;
  const std::string header = std::string("#?RADIANCE\nFORMAT=") +
                             (xyze ? "32-bit_rle_xyze" : "32-bit_rle_rgbe") + "\n\n-Y " +
                             std::to_string(img.height()) + " +X " + std::to_string(img.width()) +
                             "\n";
  Bytes out(header.begin(), header.end());
  const std::size_t w = img.width();
  const bool rle = options.use_rle && w >= 8 && w <= 0x7fff;
  std::vector<std::uint8_t> line(4 * w);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto p = rgbe_encode(src.pixel(x, y), options.rounding).bytes();
      std::copy(p.begin(), p.end(), line.begin() + 4 * x);
    }
    if (!rle) {
      out.insert(out.end(), line.begin(), line.end());
      continue;
    }
    out.push_back(2);
    out.push_back(2);
    out.push_back(static_cast<std::uint8_t>(w >> 8));
    out.push_back(static_cast<std::uint8_t>(w & 0xff));
    for (int ch = 0; ch < 4; ++ch) write_rle_channel(line.data() + ch, w, out);
  }
  return out;
}

// ===========================================================================
// PFM
// ===========================================================================

PfmHeader read_pfm_header(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  PfmHeader h;
  const std::string magic = r.token(false);
  if (magic == "PF") {
    h.color = true;
  } else if (magic == "Pf") {
    h.color = false;
  } else {
    throw Error(Errc::NotPfm, "magic is not PF or Pf", 0);
  }
  const std::size_t dims_at = r.pos();
  auto w = parse_number<std::size_t>(r.token(false));
  auto hgt = parse_number<std::size_t>(r.token(false));
  if (!w || !hgt) throw Error(Errc::NotPfm, "bad dimensions", dims_at);
  check_dims(*w, *hgt, dims_at);
  const std::size_t scale_at = r.pos();
  const std::string scale_token = r.token(false);
  auto scale = parse_number<double>(scale_token);
  if (!scale) throw Error(Errc::NotPfm, "bad scale '" + scale_token + "'", scale_at);
  if (*scale == 0.0 || !std::isfinite(*scale)) throw Error(Errc::BadScale, "scale must be nonzero and finite", scale_at);
  if (r.at_end() || !std::isspace(r.peek())) {
    throw Error(Errc::TruncatedFile, "header not terminated", r.pos());
  }
  r.skip(1);
  h.width = *w;
  h.height = *hgt;
  h.scale = *scale;
  h.data_offset = r.pos();
  return h;
}

HdrImage read_pfm(std::span<const std::uint8_t> bytes) {
  const PfmHeader h = read_pfm_header(bytes);
  const std::size_t channels = h.color ? 3 : 1;
  const std::size_t need = h.width * h.height * channels * 4;
  if (bytes.size() - h.data_offset < need) {
    throw Error(Errc::TruncatedFile,
                "payload needs " + std::to_string(need) + " bytes", bytes.size());
  }
  const bool swap = h.little_endian() != (std::endian::native == std::endian::little);
  std::vector<float> data(3 * h.width * h.height);
  bool negative = false;
  std::size_t pos = h.data_offset;
  for (std::size_t row = 0; row < h.height; ++row) {
    const std::size_t y = h.height - 1 - row;  // bottom-to-top
    for (std::size_t x = 0; x < h.width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        std::uint32_t u;
        std::memcpy(&u, bytes.data() + pos, 4);
        if (swap) u = byte_swap(u);
        const float v = std::bit_cast<float>(u);
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteSample, "sample is not finite", pos);
        negative = negative || v < 0.0f;
        float* dst = &data[3 * (y * h.width + x)];
        if (h.color) {
          dst[c] = v;
        } else {
          dst[0] = dst[1] = dst[2] = v;
        }
        pos += 4;
      }
    }
  }
  return HdrImage(h.width, h.height, std::move(data), Calibration::Relative, negative);
}

Bytes write_pfm(const HdrImage& img, bool little_endian, double scale) {
  if (img.empty()) throw Error(Errc::BadDimensions, "cannot write an empty image");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::BadScale, "scale magnitude must be positive");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, little_endian ? -scale : scale,
                           std::chars_format::fixed, 6);
  const std::string header = "PF\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::string(buf, res.ptr) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + 12 * img.pixel_count());
  const bool swap = little_endian != (std::endian::native == std::endian::little);
  const auto data = img.data();
  for (std::size_t row = 0; row < img.height(); ++row) {
    const std::size_t y = img.height() - 1 - row;
    for (std::size_t i = 3 * y * img.width(); i < 3 * (y + 1) * img.width(); ++i) {
      std::uint32_t u = std::bit_cast<std::uint32_t>(data[i]);
      if (swap) u = byte_swap(u);
      std::uint8_t b[4];
      std::memcpy(b, &u, 4);
      out.insert(out.end(), b, b + 4);
    }
  }
  return out;
}

// ===========================================================================
// PPM
// ===========================================================================

SdrImage read_ppm(std::span<const std::uint8_t> bytes, TransferTag tag) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(Errc::NotPpm, "missing P magic", 0);
  if (bytes[1] != '6') {
    throw Error(Errc::UnsupportedVariant,
                std::string("netpbm variant P") + static_cast<char>(bytes[1]) + " is not supported", 1);
  }
  Reader r(bytes);
  r.skip(2);
  const std::size_t dims_at = r.pos();
  auto w = parse_number<std::size_t>(r.token(true));
  auto h = parse_number<std::size_t>(r.token(true));
  if (!w || !h) throw Error(Errc::NotPpm, "bad dimensions", dims_at);
  check_dims(*w, *h, dims_at);
  const std::size_t max_at = r.pos();
  auto maxval = parse_number<unsigned>(r.token(true));
  if (!maxval) throw Error(Errc::NotPpm, "bad maxval", max_at);
  if (*maxval != 255) {
    throw Error(Errc::UnsupportedMaxval, "maxval " + std::to_string(*maxval) + " != 255", max_at);
  }
  if (r.at_end() || !std::isspace(r.peek())) throw Error(Errc::TruncatedFile, "header not terminated", r.pos());
  r.skip(1);
  const std::size_t need = 3 * *w * *h;
  if (r.remaining() < need) throw Error(Errc::TruncatedFile, "payload truncated", bytes.size());
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos()),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(r.pos() + need));
  return SdrImage(*w, *h, std::move(data), tag);
}

Bytes write_ppm(const SdrImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

// ===========================================================================
// Files
// ===========================================================================

FileFormat format_from_name(std::string_view name) {
  if (name == "hdr" || name == "pic") return FileFormat::Radiance;
  if (name == "pfm") return FileFormat::Pfm;
  if (name == "ppm") return FileFormat::Ppm;
  if (name == "hdrl") return FileFormat::Layered;
  throw Error(Errc::BadParameter, "unknown format '" + std::string(name) + "'");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext.size() < 2) {
    throw Error(Errc::BadParameter, "cannot infer format of '" + path.string() + "'");
  }
  try {
    return format_from_name(std::string_view(ext).substr(1));
  } catch (const Error&) {
    throw Error(Errc::BadParameter, "cannot infer format of '" + path.string() + "'");
  }
}

std::string_view format_name(FileFormat format) {
  switch (format) {
    case FileFormat::Radiance: return "hdr";
    case FileFormat::Pfm: return "pfm";
    case FileFormat::Ppm: return "ppm";
    case FileFormat::Layered: return "hdrl";
  }
  return "unknown";
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::Io, "error reading '" + path.string() + "'");
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(Errc::Io, "error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::Io, "cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace hdrkit
