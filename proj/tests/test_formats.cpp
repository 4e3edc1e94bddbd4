#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "hdrkit/error.hpp"
#include "hdrkit/formats.hpp"
#include "support/random.hpp"

using namespace hdrkit;
using hdrkit::testing::Rng;

namespace {

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;  // sentinel: no error raised
}

HdrImage random_image(Rng& rng, std::size_t w, std::size_t h, double lo = 1e-3, double hi = 1e3) {
  std::vector<float> data(3 * w * h);
  for (auto& v : data) v = static_cast<float>(rng.log_uniform(lo, hi));
  return HdrImage(w, h, std::move(data));
}

void append_float(Bytes& out, float v, bool little) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) {
    const int shift = little ? 8 * i : 8 * (3 - i);
    out.push_back(static_cast<std::uint8_t>(bits >> shift));
  }
}

}  // namespace

// --- Radiance ---------------------------------------------------------------

TEST(Radiance, SinglePixelBytesMatchReferenceWriter) {
  const HdrImage img(1, 1, {0.3f, 0.02f, 0.1f});
  HdrWriteOptions opts;
  opts.rounding = RgbeRounding::Floor;
  const Bytes file = write_hdr(img, opts);
  const std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 1\n";
  Bytes expected = to_bytes(header);
  for (std::uint8_t b : {153, 10, 51, 127}) expected.push_back(b);
  EXPECT_EQ(file, expected);
}

TEST(Radiance, BlackImageRowIsOneRunPerComponent) {
  const HdrImage black = HdrImage::filled(8, 8, {0, 0, 0});
  const Bytes file = write_hdr(black);
  const auto hdr = read_hdr_header(file);
  // Each scanline: 4-byte marker, then per component one run of 8 zeros (2 bytes).
  ASSERT_EQ(file.size() - hdr.data_offset, 8u * (4 + 4 * 2));
  const std::uint8_t* row = file.data() + hdr.data_offset;
  EXPECT_EQ(row[0], 2);
  EXPECT_EQ(row[1], 2);
  EXPECT_EQ(row[2], 0);
  EXPECT_EQ(row[3], 8);
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(row[4 + 2 * c], 128 + 8);
    EXPECT_EQ(row[5 + 2 * c], 0);
  }
  EXPECT_EQ(read_hdr(file), black);
}

TEST(Radiance, RoundTripWithinQuantizationBound) {
  Rng rng(5);
  for (int n = 0; n < 20; ++n) {
    const std::size_t w = static_cast<std::size_t>(rng.integer(1, 70));
    const std::size_t h = static_cast<std::size_t>(rng.integer(1, 9));
    const HdrImage img = random_image(rng, w, h, 1e-6, 1e6);
    const HdrImage back = read_hdr(write_hdr(img));
    ASSERT_EQ(back.width(), w);
    ASSERT_EQ(back.height(), h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      const Rgb a = img.pixel(i), b = back.pixel(i);
      const double peak = std::max({a[0], a[1], a[2]});
      // float storage of the decoded value adds at most one float ulp.
      for (int c = 0; c < 3; ++c) ASSERT_LE(std::abs(a[c] - b[c]), peak * 0x1p-8 * (1 + 0x1p-20));
    }
  }
}

TEST(Radiance, RleAndFlatDecodeIdentically) {
  Rng rng(6);
  for (int n = 0; n < 10; ++n) {
    const std::size_t w = static_cast<std::size_t>(rng.integer(8, 300));
    std::vector<float> data(3 * w * 4);
    // Long constant stretches mixed with noise exercise both run kinds.
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = (i / 30) % 2 ? 1.5f : static_cast<float>(rng.uniform(0.1, 4));
    }
    const HdrImage img(w, 4, data);
    HdrWriteOptions flat;
    flat.use_rle = false;
    const Bytes a = write_hdr(img), b = write_hdr(img, flat);
    EXPECT_LT(a.size(), b.size());
    EXPECT_EQ(read_hdr(a), read_hdr(b));
  }
}

TEST(Radiance, ExposureIsDividedOutAndStacks) {
  const std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\nEXPOSURE=2\nEXPOSURE=4\n\n-Y 1 +X 1\n";
  Bytes file = to_bytes(header);
  for (std::uint8_t b : {128, 128, 128, 129}) file.push_back(b);  // (1, 1, 1)
  const auto hdr = read_hdr_header(file);
  EXPECT_DOUBLE_EQ(hdr.exposure, 8.0);
  EXPECT_FLOAT_EQ(static_cast<float>(read_hdr(file).pixel(0)[0]), 0.125f);
}

TEST(Radiance, OrientationsNormalizeToTopLeft) {
  // 2x2 image with distinct pixels; stored order depends on the resolution line.
  auto px = [](int k) { return std::array<std::uint8_t, 4>{static_cast<std::uint8_t>(128 + k), 128, 128, 129}; };
  auto make = [&](const std::string& res, std::array<int, 4> order) {
    Bytes f = to_bytes("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n" + res + "\n");
    for (int k : order) {
      const auto p = px(k);
      f.insert(f.end(), p.begin(), p.end());
    }
    return read_hdr(f);
  };
  // Pixels labelled by top-left raster index: 0 1 / 2 3.
  const HdrImage ref = make("-Y 2 +X 2", {0, 1, 2, 3});
  EXPECT_EQ(make("+Y 2 +X 2", {2, 3, 0, 1}), ref);
  EXPECT_EQ(make("-Y 2 -X 2", {1, 0, 3, 2}), ref);
  EXPECT_EQ(make("+X 2 -Y 2", {0, 2, 1, 3}), ref);
  EXPECT_EQ(make("-X 2 +Y 2", {3, 1, 2, 0}), ref);
}

TEST(Radiance, XyzeHandlesWideGamut) {
  const auto& cs = ColorSpace::rec709();
  const HdrImage img(1, 1, {-0.2f, 0.9f, 0.05f}, Calibration::Relative, true);
  EXPECT_EQ(error_of([&] { (void)write_hdr(img); }), Errc::NegativeInRgbe);
  HdrWriteOptions opts;
  opts.format = RadianceFormat::Xyze;
  const Bytes file = write_hdr(img, opts);
  EXPECT_EQ(read_hdr_header(file).format, RadianceFormat::Xyze);
  const HdrImage back = read_hdr(file, cs);
  EXPECT_TRUE(back.allows_negative());
  EXPECT_NEAR(back.pixel(0)[0], -0.2, 0.02);
  EXPECT_NEAR(back.pixel(0)[1], 0.9, 0.02);
}

TEST(Radiance, Errors) {
  EXPECT_EQ(error_of([] { (void)read_hdr(to_bytes("P6\n1 1\n255\n")); }), Errc::NotRadiance);
  EXPECT_EQ(error_of([] { (void)read_hdr(to_bytes("#?RADIANCE\n\n-Y 1 +X 1\n")); }), Errc::NotRadiance);
  const std::string good = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 2 +X 8\n";
  EXPECT_EQ(error_of([&] { (void)read_hdr(to_bytes(good + "\x02\x02")); }), Errc::TruncatedFile);
  // New-style RLE row whose run overruns the 8-pixel scanline.
  Bytes bad = to_bytes(good);
  for (std::uint8_t b : {2, 2, 0, 8, 128 + 9, 7}) bad.push_back(b);
  bad.resize(bad.size() + 64, 0);
  EXPECT_EQ(error_of([&] { (void)read_hdr(bad); }), Errc::CorruptRle);
  try {
    (void)read_hdr(bad);
  } catch (const Error& e) {
    EXPECT_GE(e.offset().value_or(0), good.size());
  }
}

// --- PFM --------------------------------------------------------------------

TEST(Pfm, LittleEndianHasNegativeScale) {
  const HdrImage img = HdrImage::filled(2, 1, {1, 2, 3});
  const Bytes le = write_pfm(img, true);
  const Bytes be = write_pfm(img, false);
  EXPECT_LT(read_pfm_header(le).scale, 0.0);
  EXPECT_GT(read_pfm_header(be).scale, 0.0);
  EXPECT_EQ(std::string(le.begin(), le.begin() + 3), "PF\n");
}

TEST(Pfm, RoundTripBitExactBothEndiannesses) {
  Rng rng(7);
  for (int n = 0; n < 100; ++n) {
    const std::size_t w = static_cast<std::size_t>(rng.integer(1, 40));
    const std::size_t h = static_cast<std::size_t>(rng.integer(1, 40));
    std::vector<float> data(3 * w * h);
    for (auto& v : data) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng.bits() % 0x7f800000u));
    const HdrImage img(w, h, data);
    const bool little = n % 2 == 0;
    const HdrImage back = read_pfm(write_pfm(img, little));
    ASSERT_EQ(back.width(), w);
    ASSERT_EQ(back.height(), h);
    ASSERT_EQ(std::memcmp(back.data().data(), img.data().data(), data.size() * 4), 0);
  }
}

TEST(Pfm, ScanlinesAreBottomToTop) {
  const HdrImage img(1, 2, {1, 1, 1, 2, 2, 2});
  const Bytes file = write_pfm(img, true);
  const auto hdr = read_pfm_header(file);
  float first;
  std::memcpy(&first, file.data() + hdr.data_offset, 4);
  EXPECT_EQ(first, 2.0f);
}

TEST(Pfm, GrayscaleExpandsToRgb) {
  Bytes file = to_bytes("Pf\n2 2\n-1.0\n");
  for (float v : {1.0f, 2.0f, 3.0f, 4.0f}) append_float(file, v, true);
  const HdrImage img = read_pfm(file);
  ASSERT_EQ(img.width(), 2u);
  // Bottom row first in the file.
  EXPECT_EQ(img.pixel(0, 1), (Rgb{1, 1, 1}));
  EXPECT_EQ(img.pixel(1, 1), (Rgb{2, 2, 2}));
  EXPECT_EQ(img.pixel(0, 0), (Rgb{3, 3, 3}));
  EXPECT_EQ(img.pixel(1, 0), (Rgb{4, 4, 4}));
}

TEST(Pfm, BigEndianHandBuilt) {
  Bytes file = to_bytes("PF\n1 1\n2.5\n");
  for (float v : {0.5f, 1.5f, 3.0f}) append_float(file, v, false);
  EXPECT_EQ(read_pfm(file).pixel(0), (Rgb{0.5, 1.5, 3.0}));
  EXPECT_DOUBLE_EQ(read_pfm_header(file).scale, 2.5);
}

TEST(Pfm, Errors) {
  EXPECT_EQ(error_of([] { (void)read_pfm(to_bytes("PX\n1 1\n-1\n")); }), Errc::NotPfm);
  EXPECT_EQ(error_of([] { (void)read_pfm(to_bytes("PF\n1 1\n0\n")); }), Errc::BadScale);
  EXPECT_EQ(error_of([] { (void)read_pfm(to_bytes("PF\n1 1\n-1\n\x01\x02")); }), Errc::TruncatedFile);
  Bytes nan = to_bytes("Pf\n1 1\n-1\n");
  append_float(nan, NAN, true);
  EXPECT_EQ(error_of([&] { (void)read_pfm(nan); }), Errc::NonFiniteSample);
}

// --- PPM --------------------------------------------------------------------

TEST(Ppm, WhitePixelPayload) {
  const Bytes file = write_ppm(SdrImage(1, 1, {255, 255, 255}));
  ASSERT_GE(file.size(), 3u);
  EXPECT_EQ(Bytes(file.end() - 3, file.end()), (Bytes{0xFF, 0xFF, 0xFF}));
}

TEST(Ppm, RoundTripBitExact) {
  Rng rng(8);
  std::vector<std::uint8_t> data(3 * 17 * 5);
  for (auto& v : data) v = static_cast<std::uint8_t>(rng.bits());
  const SdrImage img(17, 5, data, TransferTag::Gamma22);
  EXPECT_EQ(read_ppm(write_ppm(img), TransferTag::Gamma22), img);
}

TEST(Ppm, Errors) {
  EXPECT_EQ(error_of([] { (void)read_ppm(to_bytes("P3\n1 1\n255\n255 255 255\n")); }), Errc::UnsupportedVariant);
  EXPECT_EQ(error_of([] { (void)read_ppm(to_bytes("P6\n1 1\n65535\n")); }), Errc::UnsupportedMaxval);
  EXPECT_EQ(error_of([] { (void)read_ppm(to_bytes("P6\n2 1\n255\nabc")); }), Errc::TruncatedFile);
}

// --- files ------------------------------------------------------------------

TEST(Files, FormatDispatch) {
  EXPECT_EQ(format_from_path("a/b.HDR"), FileFormat::Radiance);
  EXPECT_EQ(format_from_path("x.pic"), FileFormat::Radiance);
  EXPECT_EQ(format_from_path("x.pfm"), FileFormat::Pfm);
  EXPECT_EQ(format_from_path("x.ppm"), FileFormat::Ppm);
  EXPECT_EQ(format_from_path("x.hdrl"), FileFormat::Layered);
  EXPECT_THROW((void)format_from_path("x.exr"), Error);
  EXPECT_EQ(format_from_name("pfm"), FileFormat::Pfm);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "hdrkit_test_files";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.bin";
  write_file_atomic(path, Bytes{1, 2, 3});
  write_file_atomic(path, Bytes{4, 5});
  EXPECT_EQ(read_file(path), (Bytes{4, 5}));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  std::filesystem::remove_all(dir);
  EXPECT_EQ(error_of([&] { (void)read_file(path); }), Errc::Io);
}

// --- fuzz -------------------------------------------------------------------

namespace {

// Every outcome must be either a typed error or an image whose size matches
// the header the reader itself reports.
template <class Read, class Header>
void fuzz(const Bytes& seed_file, Read read, Header header, std::uint64_t seed, int iterations) {
  Rng rng(seed);
  for (int i = 0; i < iterations; ++i) {
    Bytes f = seed_file;
    const int kind = rng.integer(0, 3);
    if (kind == 0) {
      f.resize(static_cast<std::size_t>(rng.integer(0, static_cast<int>(f.size()) - 1)));
    } else {
      const int flips = rng.integer(1, 8);
      for (int k = 0; k < flips; ++k) {
        const auto pos = static_cast<std::size_t>(rng.integer(0, static_cast<int>(f.size()) - 1));
        f[pos] = kind == 1 ? static_cast<std::uint8_t>(rng.bits()) : static_cast<std::uint8_t>(f[pos] ^ (1u << rng.integer(0, 7)));
      }
      if (kind == 3) f.resize(f.size() - static_cast<std::size_t>(rng.integer(1, 16)));
    }
    try {
      const HdrImage img = read(f);
      const auto h = header(f);
      ASSERT_EQ(img.width(), h.width);
      ASSERT_EQ(img.height(), h.height);
      ASSERT_EQ(img.data().size(), 3 * h.width * h.height);
    } catch (const Error&) {
      // typed error: fine
    }
  }
}

}  // namespace

TEST(Fuzz, RadianceMutationsYieldTypedErrors) {
  Rng rng(9);
  const HdrImage img = random_image(rng, 37, 6);
  HdrWriteOptions flat;
  flat.use_rle = false;
  fuzz(write_hdr(img), [](const Bytes& b) { return read_hdr(b); },
       [](const Bytes& b) { return read_hdr_header(b); }, 100, 2500);
  fuzz(write_hdr(img, flat), [](const Bytes& b) { return read_hdr(b); },
       [](const Bytes& b) { return read_hdr_header(b); }, 101, 2500);
}

TEST(Fuzz, PfmMutationsYieldTypedErrors) {
  Rng rng(10);
  const HdrImage img = random_image(rng, 9, 7);
  fuzz(write_pfm(img, true), [](const Bytes& b) { return read_pfm(b); },
       [](const Bytes& b) { return read_pfm_header(b); }, 102, 2500);
  fuzz(write_pfm(img, false), [](const Bytes& b) { return read_pfm(b); },
       [](const Bytes& b) { return read_pfm_header(b); }, 103, 2500);
}

TEST(Fuzz, HugeDeclaredDimensionsRejectedBeforeAllocation) {
  EXPECT_THROW((void)read_hdr(to_bytes("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 100000 +X 100000\n")), Error);
  EXPECT_THROW((void)read_pfm(to_bytes("PF\n100000 100000\n-1\n")), Error);
  EXPECT_THROW((void)read_hdr(to_bytes("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 0 +X 4\n")), Error);
}
