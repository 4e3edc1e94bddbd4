#include "hdrkit/layered.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "hdrkit/color.hpp"
#include "hdrkit/error.hpp"
#include "hdrkit/formats.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

namespace {

constexpr char kMagic[4] = {'H', 'D', 'R', 'L'};
constexpr std::uint8_t kVersion = 1;
constexpr char kNote[15] = "base=ppm-p6";
constexpr std::uint8_t kFlagAbsolute = 1;

// --- little-endian helpers ---

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}
double get_f64(std::span<const std::uint8_t> b, std::size_t at) { return std::bit_cast<double>(get_le(b, at, 8)); }

std::uint32_t crc(std::span<const std::uint8_t> b) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t at = 0;
  while (at < b.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(b.size() - at, 1u << 30));
    c = crc32(c, b.data() + at, n);
    at += n;
  }
  return static_cast<std::uint32_t>(c);
}

std::vector<std::uint8_t> serialize_header(const LayeredHeader& h) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(h.mode));
  out.push_back(static_cast<std::uint8_t>(h.op));
  out.push_back(static_cast<std::uint8_t>(h.formula));
  put_u32(out, h.width);
  put_u32(out, h.height);
  for (double v : h.tone) put_f64(out, v);
  put_f64(out, h.saturation);
  put_f64(out, h.epsilon);
  put_f64(out, h.scale);
  for (double v : h.plane_min) put_f64(out, v);
  for (double v : h.plane_step) put_f64(out, v);
  put_f64(out, h.error_bound);
  put_u64(out, h.base_offset);
  put_u64(out, h.base_length);
  put_u64(out, h.ext_offset);
  put_u64(out, h.ext_length);
  put_u32(out, h.ext_crc);
  out.push_back(h.calibration == Calibration::Absolute ? kFlagAbsolute : 0);
  out.insert(out.end(), kNote, kNote + 15);
  put_u32(out, crc(out));
  return out;
}

// --- RLE: four equal bytes are followed by a count of further repeats ---

std::vector<std::uint8_t> rle_encode(std::span<const std::uint8_t> in) {
  std::vector<std::uint8_t> out;
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t n = 1;
    while (i + n < in.size() && in[i + n] == in[i] && n < 4 + 255) ++n;
    if (n >= 4) {
      out.insert(out.end(), 4, in[i]);
      out.push_back(static_cast<std::uint8_t>(n - 4));
    } else {
      out.insert(out.end(), n, in[i]);
    }
    i += n;
  }
  return out;
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint8_t> in, std::size_t size) {
  std::vector<std::uint8_t> out;
  out.reserve(size);
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t n = 1;
    while (n < 4 && i + n < in.size() && in[i + n] == in[i]) ++n;
    out.insert(out.end(), n, in[i]);
    if (n == 4) {
      if (i + 4 >= in.size()) throw Error(Errc::CorruptStream, "RLE run without a count");
      out.insert(out.end(), in[i + 4], in[i]);
      i += 5;
    } else {
      i += n;
    }
    if (out.size() > size) throw Error(Errc::CorruptStream, "RLE data longer than declared");
  }
  if (out.size() != size) throw Error(Errc::CorruptStream, "RLE data shorter than declared");
  return out;
}

// --- carry-less range coder with an adaptive order-0 model ---

constexpr std::uint32_t kTop = 1u << 24;
constexpr std::uint32_t kBot = 1u << 16;

struct Model {
  std::array<std::uint32_t, 256> freq;
  std::uint32_t total = 256;
  Model() { freq.fill(1); }

  std::uint32_t cum(int s) const {
    std::uint32_t c = 0;
    for (int i = 0; i < s; ++i) c += freq[i];
    return c;
  }
  void update(int s) {
    freq[s] += 32;
    total += 32;
    if (total > kBot) {
      total = 0;
      for (auto& f : freq) {
        f = (f + 1) / 2;
        total += f;
      }
    }
  }
};

}  // namespace

std::vector<std::uint8_t> entropy_encode(std::span<const std::uint8_t> data) {
  const std::vector<std::uint8_t> rle = rle_encode(data);
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(rle.size()));
  std::uint32_t low = 0, range = 0xFFFFFFFFu;
  Model m;
  for (std::uint8_t s : rle) {
    range /= m.total;
    low += m.cum(s) * range;
    range *= m.freq[s];
    for (;;) {
      if ((low ^ (low + range)) >= kTop) {
        if (range >= kBot) break;
        range = (0u - low) & (kBot - 1);
      }
      out.push_back(static_cast<std::uint8_t>(low >> 24));
      low <<= 8;
      range <<= 8;
    }
    m.update(s);
  }
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(low >> 24));
    low <<= 8;
  }
  return out;
}

std::vector<std::uint8_t> entropy_decode(std::span<const std::uint8_t> coded, std::size_t size) {
  if (coded.size() < 8) throw Error(Errc::CorruptStream, "entropy-coded plane too short");
  const std::size_t rle_size = get_le(coded, 0, 4);
  if (rle_size > 2 * size + 16) throw Error(Errc::CorruptStream, "implausible RLE length");
  std::size_t at = 4;
  auto next = [&]() -> std::uint32_t { return at < coded.size() ? coded[at++] : 0; };
  std::uint32_t low = 0, range = 0xFFFFFFFFu, code = 0;
  for (int i = 0; i < 4; ++i) code = (code << 8) | next();
  Model m;
  std::vector<std::uint8_t> rle(rle_size);
  for (auto& out : rle) {
    range /= m.total;
    const std::uint32_t v = (code - low) / range;
    if (v >= m.total) throw Error(Errc::CorruptStream, "range decoder out of bounds");
    int s = 0;
    std::uint32_t c = 0;
    while (c + m.freq[s] <= v) c += m.freq[s++];
    low += c * range;
    range *= m.freq[s];
    for (;;) {
      if ((low ^ (low + range)) >= kTop) {
        if (range >= kBot) break;
        range = (0u - low) & (kBot - 1);
      }
      code = (code << 8) | next();
      low <<= 8;
      range <<= 8;
    }
    out = static_cast<std::uint8_t>(s);
    m.update(s);
  }
  return rle_decode(rle, size);
}

double zero_order_entropy(std::span<const std::int64_t> samples) {
  if (samples.empty()) return 0.0;
  std::map<std::int64_t, std::size_t> hist;
  for (auto v : samples) ++hist[v];
  double h = 0.0;
  const double n = static_cast<double>(samples.size());
  for (const auto& [v, c] : hist) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h + 0.0;  // avoid -0
}

std::string_view layer_mode_name(LayerMode mode) {
  switch (mode) {
    case LayerMode::Lossless: return "lossless";
    case LayerMode::Lossy16: return "lossy16";
    case LayerMode::Lossy8: return "lossy8";
    case LayerMode::BaseOnly: return "base-only";
  }
  return "?";
}

LayerMode layer_mode_from_name(std::string_view name) {
  for (LayerMode m : {LayerMode::Lossless, LayerMode::Lossy16, LayerMode::Lossy8, LayerMode::BaseOnly}) {
    if (layer_mode_name(m) == name) return m;
  }
  throw Error(Errc::BadParameter, "unknown layer mode '" + std::string(name) + "'");
}

std::span<const std::uint8_t> LayeredStream::base() const {
  return std::span(bytes).subspan(header.base_offset, header.base_length);
}

std::span<const std::uint8_t> LayeredStream::extension() const {
  return std::span(bytes).subspan(header.ext_offset, header.ext_length);
}

namespace {

struct BaseLayer {
  SdrImage sdr;
  std::vector<double> linear;  ///< 3 per pixel, relative
  std::vector<double> lum;
};

BaseLayer linearize_base(const SdrImage& sdr) {
  BaseLayer b;
  const TransferFunction tf = TransferFunction::make_srgb();
  std::array<double, 256> lut{};
  for (int z = 0; z < 256; ++z) lut[z] = eotf(tf, z / 255.0);
  const auto w = ColorSpace::rec709().luminance_weights();
  b.linear.resize(sdr.data().size());
  b.lum.resize(sdr.pixel_count());
  for (std::size_t i = 0; i < sdr.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) b.linear[3 * i + c] = lut[sdr.data()[3 * i + c]];
    b.lum[i] = w[0] * b.linear[3 * i] + w[1] * b.linear[3 * i + 1] + w[2] * b.linear[3 * i + 2];
  }
  b.sdr = sdr;
  return b;
}

SdrImage make_base(const HdrImage& img, const PackOptions& o) {
  if (o.op == BaseOperator::Global) {
    GlobalToneOptions g = o.global;
    g.encode = TransferTag::Srgb;
    g.color_space = nullptr;
    return tonemap_global(img, g).sdr;
  }
  LocalToneOptions l = o.local;
  l.encode = TransferTag::Srgb;
  l.color_space = nullptr;
  return tonemap_local(img, l).sdr;
}

void fill_tone(LayeredHeader& h, const PackOptions& o) {
  h.op = o.op;
  const ColorCorrectionParams& color = o.op == BaseOperator::Global ? o.global.color : o.local.color;
  h.formula = color.formula;
  h.saturation = color.p.value_or(std::numeric_limits<double>::quiet_NaN());
  if (o.op == BaseOperator::Global) {
    h.tone = {o.global.key, o.global.white_point.value_or(std::numeric_limits<double>::quiet_NaN()), 0.0};
  } else {
    h.tone = {o.local.sigma_spatial, o.local.sigma_range, o.local.base_contrast};
  }
}

double log_ratio(double num, double den, double eps) { return std::log2((num + eps) / (den + eps)); }

// Residual planes for the lossy modes: log luminance ratio and two chroma
// ratio differences (red and blue against luminance).
std::array<std::vector<double>, 3> lossy_planes(const HdrImage& img, const BaseLayer& base, double eps) {
  const auto w = ColorSpace::rec709().luminance_weights();
  std::array<std::vector<double>, 3> p;
  for (auto& v : p) v.resize(img.pixel_count());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb px = img.pixel(i);
    const double r = std::max(px[0], 0.0), g = std::max(px[1], 0.0), b = std::max(px[2], 0.0);
    const double l = w[0] * r + w[1] * g + w[2] * b;
    const double lb = base.lum[i];
    p[0][i] = log_ratio(l, lb, eps);
    p[1][i] = log_ratio(r, l, eps) - log_ratio(base.linear[3 * i], lb, eps);
    p[2][i] = log_ratio(b, l, eps) - log_ratio(base.linear[3 * i + 2], lb, eps);
  }
  return p;
}

void append_plane(std::vector<std::uint8_t>& ext, std::span<const std::uint8_t> raw) {
  const auto coded = entropy_encode(raw);
  put_u32(ext, static_cast<std::uint32_t>(raw.size()));
  put_u32(ext, static_cast<std::uint32_t>(coded.size()));
  ext.insert(ext.end(), coded.begin(), coded.end());
}

std::vector<std::uint8_t> read_plane(std::span<const std::uint8_t> ext, std::size_t& at, std::size_t expected) {
  if (at + 8 > ext.size()) throw Error(Errc::CorruptStream, "extension plane header truncated");
  const std::size_t raw = get_le(ext, at, 4), coded = get_le(ext, at + 4, 4);
  at += 8;
  if (raw != expected) throw Error(Errc::CorruptStream, "extension plane size disagrees with base dimensions");
  if (at + coded > ext.size()) throw Error(Errc::CorruptStream, "extension plane truncated");
  auto out = entropy_decode(ext.subspan(at, coded), raw);
  at += coded;
  return out;
}

std::uint32_t zigzag(std::uint32_t v) { return (v << 1) ^ (0u - (v >> 31)); }
std::uint32_t unzigzag(std::uint32_t v) { return (v >> 1) ^ (0u - (v & 1)); }

double predictor_scale(const HdrImage& img, const BaseLayer& base) {
  const auto w = ColorSpace::rec709().luminance_weights();
  std::vector<double> ratios;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb px = img.pixel(i);
    const double l = w[0] * px[0] + w[1] * px[1] + w[2] * px[2];
    if (l > 0.0 && base.lum[i] > 0.0) ratios.push_back(l / base.lum[i]);
  }
  if (ratios.empty()) return 1.0;
  auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
  std::nth_element(ratios.begin(), mid, ratios.end());
  return *mid;
}

float predict(const BaseLayer& base, double scale, std::size_t k) {
  return static_cast<float>(scale * base.linear[k]);
}

}  // namespace

LayeredStream pack(const HdrImage& img, const PackOptions& options) {
  if (img.empty()) throw Error(Errc::BadDimensions, "cannot pack an empty image");
  LayeredStream s;
  LayeredHeader& h = s.header;
  h.mode = options.mode;
  h.width = static_cast<std::uint32_t>(img.width());
  h.height = static_cast<std::uint32_t>(img.height());
  h.calibration = img.calibration();
  fill_tone(h, options);

  const SdrImage sdr = make_base(img, options);
  const BaseLayer base = linearize_base(sdr);
  const std::vector<std::uint8_t> base_bytes = write_ppm(sdr);
  const std::size_t n = img.pixel_count();

  std::vector<std::uint8_t> ext;
  if (options.mode == LayerMode::Lossless) {
    h.scale = predictor_scale(img, base);
    std::array<std::vector<std::uint8_t>, 4> planes;
    for (auto& p : planes) p.resize(3 * n);
    const auto data = img.data();
    for (std::size_t k = 0; k < 3 * n; ++k) {
      const std::uint32_t diff = std::bit_cast<std::uint32_t>(data[k]) -
                                 std::bit_cast<std::uint32_t>(predict(base, h.scale, k));
      const std::uint32_t z = zigzag(diff);
      const std::size_t at = (k % 3) * n + k / 3;  // channel-major
      for (int b = 0; b < 4; ++b) planes[b][at] = static_cast<std::uint8_t>(z >> (8 * b));
    }
    for (const auto& p : planes) append_plane(ext, p);
  } else if (options.mode != LayerMode::BaseOnly) {
    const int bits = options.mode == LayerMode::Lossy16 ? 16 : 8;
    const double levels = std::ldexp(1.0, bits) - 1.0;
    const auto planes = lossy_planes(img, base, h.epsilon);
    for (int p = 0; p < 3; ++p) {
      const auto [lo, hi] = std::minmax_element(planes[p].begin(), planes[p].end());
      h.plane_min[p] = *lo;
      h.plane_step[p] = (*hi - *lo) / levels;
      const std::uint32_t mask = (1u << bits) - 1u;
      std::vector<std::uint8_t> bytes(static_cast<std::size_t>(bits / 8) * n);
      std::uint32_t prev = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto q = h.plane_step[p] > 0.0
                           ? static_cast<std::uint32_t>(std::lround((planes[p][i] - *lo) / h.plane_step[p]))
                           : 0u;
        const std::uint32_t d = (q - prev) & mask;
        prev = q;
        if (bits == 16) {
          bytes[i] = static_cast<std::uint8_t>(d);
          bytes[n + i] = static_cast<std::uint8_t>(d >> 8);
        } else {
          bytes[i] = static_cast<std::uint8_t>(d);
        }
      }
      append_plane(ext, bytes);
    }
    h.error_bound = std::exp2(h.plane_step[0] / 2.0) - 1.0;
  }

  h.base_offset = kLayeredHeaderSize;
  h.base_length = base_bytes.size();
  h.ext_offset = h.base_offset + h.base_length;
  h.ext_length = ext.size();
  h.ext_crc = crc(ext);
  s.bytes = serialize_header(h);
  s.bytes.insert(s.bytes.end(), base_bytes.begin(), base_bytes.end());
  s.bytes.insert(s.bytes.end(), ext.begin(), ext.end());
  return s;
}

LayeredHeader read_layered_header(std::span<const std::uint8_t> b) {
  if (b.size() < kLayeredHeaderSize) throw Error(Errc::CorruptStream, "layered header truncated", b.size());
  if (std::memcmp(b.data(), kMagic, 4) != 0) throw Error(Errc::CorruptStream, "missing HDRL magic", 0);
  if (b[4] != kVersion) throw Error(Errc::CorruptStream, "unsupported HDRL version", 4);
  if (get_le(b, kLayeredHeaderSize - 4, 4) != crc(b.first(kLayeredHeaderSize - 4))) {
    throw Error(Errc::CorruptStream, "header checksum mismatch", kLayeredHeaderSize - 4);
  }
  if (b[5] > 3 || b[6] > 1 || b[7] > 1) throw Error(Errc::CorruptStream, "bad mode byte", 5);
  LayeredHeader h;
  h.mode = static_cast<LayerMode>(b[5]);
  h.op = static_cast<BaseOperator>(b[6]);
  h.formula = static_cast<ColorFormula>(b[7]);
  h.width = static_cast<std::uint32_t>(get_le(b, 8, 4));
  h.height = static_cast<std::uint32_t>(get_le(b, 12, 4));
  std::size_t at = 16;
  for (auto& v : h.tone) {
    v = get_f64(b, at);
    at += 8;
  }
  h.saturation = get_f64(b, at);
  h.epsilon = get_f64(b, at + 8);
  h.scale = get_f64(b, at + 16);
  at += 24;
  for (auto& v : h.plane_min) {
    v = get_f64(b, at);
    at += 8;
  }
  for (auto& v : h.plane_step) {
    v = get_f64(b, at);
    at += 8;
  }
  h.error_bound = get_f64(b, at);
  h.base_offset = get_le(b, at + 8, 8);
  h.base_length = get_le(b, at + 16, 8);
  h.ext_offset = get_le(b, at + 24, 8);
  h.ext_length = get_le(b, at + 32, 8);
  h.ext_crc = static_cast<std::uint32_t>(get_le(b, at + 40, 4));
  if (b[at + 44] & ~kFlagAbsolute) throw Error(Errc::CorruptStream, "unknown header flags", at + 44);
  h.calibration = b[at + 44] & kFlagAbsolute ? Calibration::Absolute : Calibration::Relative;
  if (h.base_offset != kLayeredHeaderSize || h.base_length > b.size() - h.base_offset) {
    throw Error(Errc::CorruptStream, "base layer out of bounds", 120);
  }
  if (h.ext_offset != h.base_offset + h.base_length) throw Error(Errc::CorruptStream, "extension offset", 136);
  return h;
}

SdrImage extract_base(std::span<const std::uint8_t> bytes) {
  const LayeredHeader h = read_layered_header(bytes);
  return read_ppm(bytes.subspan(h.base_offset, h.base_length));
}

HdrImage unpack(std::span<const std::uint8_t> bytes) {
  const LayeredHeader h = read_layered_header(bytes);
  const SdrImage sdr = read_ppm(bytes.subspan(h.base_offset, h.base_length));
  if (sdr.width() != h.width || sdr.height() != h.height) {
    throw Error(Errc::CorruptStream, "base layer dimensions disagree with the header");
  }
  const BaseLayer base = linearize_base(sdr);
  const std::size_t n = sdr.pixel_count();
  if (h.mode == LayerMode::BaseOnly) {
    std::vector<float> data(3 * n);
    for (std::size_t k = 0; k < 3 * n; ++k) data[k] = static_cast<float>(base.linear[k]);
    return HdrImage(h.width, h.height, std::move(data));
  }
  if (h.ext_length == 0 || h.ext_offset + h.ext_length > bytes.size()) {
    throw Error(Errc::MissingExtension, "extension layer absent or truncated");
  }
  const auto ext = bytes.subspan(h.ext_offset, h.ext_length);
  if (crc(ext) != h.ext_crc) throw Error(Errc::MissingExtension, "extension layer fails its checksum");

  std::size_t at = 0;
  if (h.mode == LayerMode::Lossless) {
    std::array<std::vector<std::uint8_t>, 4> planes;
    for (auto& p : planes) p = read_plane(ext, at, 3 * n);
    std::vector<float> data(3 * n);
    bool negative = false;
    for (std::size_t k = 0; k < 3 * n; ++k) {
      std::uint32_t z = 0;
      const std::size_t at = (k % 3) * n + k / 3;
      for (int b = 0; b < 4; ++b) z |= static_cast<std::uint32_t>(planes[b][at]) << (8 * b);
      data[k] = std::bit_cast<float>(std::bit_cast<std::uint32_t>(predict(base, h.scale, k)) + unzigzag(z));
      negative = negative || data[k] < 0.0f;
    }
    return HdrImage(h.width, h.height, std::move(data), h.calibration, negative);
  }

  const int bits = h.mode == LayerMode::Lossy16 ? 16 : 8;
  const std::uint32_t mask = (1u << bits) - 1u;
  std::array<std::vector<double>, 3> planes;
  for (int p = 0; p < 3; ++p) {
    const auto raw = read_plane(ext, at, static_cast<std::size_t>(bits / 8) * n);
    planes[p].resize(n);
    std::uint32_t prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t d = bits == 16 ? raw[i] | (static_cast<std::uint32_t>(raw[n + i]) << 8) : raw[i];
      const std::uint32_t q = (prev + d) & mask;
      prev = q;
      planes[p][i] = h.plane_min[p] + h.plane_step[p] * q;
    }
  }
  const auto w = ColorSpace::rec709().luminance_weights();
  const double eps = h.epsilon;
  std::vector<float> data(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lb = base.lum[i];
    const double l = std::max(0.0, std::exp2(planes[0][i]) * (lb + eps) - eps);
    auto channel = [&](int p, int c) {
      const double ratio = planes[p][i] + log_ratio(base.linear[3 * i + c], lb, eps);
      return std::max(0.0, std::exp2(ratio) * (l + eps) - eps);
    };
    double r = channel(1, 0), b = channel(2, 2);
    double g = (l - w[0] * r - w[2] * b) / w[1];
    if (g < 0.0) {
      // Chroma quantization overshoot: keep the coded luminance.
      g = 0.0;
      const double rb = w[0] * r + w[2] * b;
      if (rb > 0.0) {
        r *= l / rb;
        b *= l / rb;
      } else {
        r = g = b = l;
      }
    }
    data[3 * i] = static_cast<float>(r);
    data[3 * i + 1] = static_cast<float>(g);
    data[3 * i + 2] = static_cast<float>(b);
  }
  return HdrImage(h.width, h.height, std::move(data), h.calibration);
}

DecorrelationReport decorrelation_gain(const HdrImage& img, const PackOptions& options) {
  DecorrelationReport rep;
  const BaseLayer base = linearize_base(make_base(img, options));
  const auto w = ColorSpace::rec709().luminance_weights();
  const double eps = 0x1p-16;
  std::vector<std::int64_t> direct, residual;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb px = img.pixel(i);
    const double l = std::max(0.0, w[0] * px[0] + w[1] * px[1] + w[2] * px[2]);
    direct.push_back(std::llround(std::log2(l + eps) / rep.step));
    residual.push_back(std::llround(log_ratio(l, base.lum[i], eps) / rep.step));
  }
  rep.direct_bits = zero_order_entropy(direct);
  rep.residual_bits = zero_order_entropy(residual);
  rep.gain = rep.direct_bits > 0.0 ? 1.0 - rep.residual_bits / rep.direct_bits : 0.0;
  return rep;
}

}  // namespace hdrkit
