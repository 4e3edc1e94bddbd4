#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hdrkit/error.hpp"
#include "hdrkit/merge.hpp"
#include "hdrkit/parallel.hpp"
#include "support/random.hpp"
#include "support/scenes.hpp"

using namespace hdrkit;
using namespace hdrkit::testing;

namespace {

ExposureStack make_stack(const Raster& radiance, std::vector<double> times, double gamma) {
  ExposureStack s;
  for (double t : times) s.frames.push_back(capture(radiance, t, gamma));
  s.times = std::move(times);
  return s;
}

// RMSE between curves after removing the unidentifiable constant offset.
double curve_rmse(const ResponseCurve& c, double gamma, int lo, int hi) {
  double mean = 0;
  for (int z = lo; z <= hi; ++z) mean += c.g[z] - gamma * std::log(z / 255.0);
  mean /= hi - lo + 1;
  double sq = 0;
  for (int z = lo; z <= hi; ++z) {
    const double d = c.g[z] - gamma * std::log(z / 255.0) - mean;
    sq += d * d;
  }
  return std::sqrt(sq / (hi - lo + 1));
}

SdrImage constant_frame(std::size_t w, std::size_t h, std::uint8_t v) {
  return SdrImage(w, h, std::vector<std::uint8_t>(3 * w * h, v));
}

}  // namespace

TEST(Weights, HatShape) {
  const auto w = WeightFunction::hat();
  EXPECT_EQ(w.w[0], 0.0);
  EXPECT_EQ(w.w[255], 0.0);
  for (int z = 1; z < 255; ++z) {
    EXPECT_GT(w.w[z], 0.0);
    EXPECT_LE(w.w[z], 1.0);
    EXPECT_EQ(w.w[z], w.w[255 - z]);
  }
}

TEST(Stack, Validation) {
  ExposureStack s;
  EXPECT_THROW(s.validate(), Error);
  s.frames = {constant_frame(4, 4, 10), constant_frame(4, 3, 10)};
  s.times = {1, 2};
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
  s.frames[1] = constant_frame(4, 4, 20);
  s.times = {1, 1};
  EXPECT_THROW(s.validate(), Error);
  s.times = {1, -2};
  EXPECT_THROW(s.validate(), Error);
}

TEST(Response, RecoversGammaCurve) {
  const Raster e = radiance_field(256, 256, 1, 0.005, 2.0);
  const auto stack = make_stack(e, {0.25, 1.0, 4.0}, 2.2);
  const ResponseCurve c = estimate_response(stack);
  EXPECT_EQ(c.g[128], 0.0);
  EXPECT_TRUE(c.is_monotone());
  EXPECT_LT(curve_rmse(c, 2.2, 20, 235), 0.05);
}

TEST(Response, LinearSensorIsAffineInLogCode) {
  const Raster e = radiance_field(256, 256, 2, 0.005, 2.0);
  const auto stack = make_stack(e, {0.25, 1.0, 4.0}, 1.0);
  const ResponseCurve c = estimate_response(stack);
  EXPECT_LT(curve_rmse(c, 1.0, 20, 235), 0.05);
}

TEST(Response, MonotoneOnRandomStacks) {
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const Raster e = radiance_field(64, 64, 100 + static_cast<std::uint64_t>(k), 0.001, rng.uniform(1, 50));
    ExposureStack s;
    const int n = rng.integer(2, 5);
    double t = rng.log_uniform(0.01, 1);
    for (int j = 0; j < n; ++j) {
      SdrImage f = capture(e, t, rng.uniform(1.0, 3.0));
      // Noise the codes so the least-squares solution is not already monotone.
      std::vector<std::uint8_t> d(f.data().begin(), f.data().end());
      for (auto& v : d) v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + rng.integer(-6, 6), 0, 255));
      s.frames.emplace_back(f.width(), f.height(), std::move(d));
      s.times.push_back(t);
      t *= rng.uniform(1.5, 6);
    }
    ResponseOptions opt;
    opt.lambda = rng.uniform(0, 30);
    try {
      const ResponseCurve c = estimate_response(s, WeightFunction::hat(), opt);
      EXPECT_TRUE(c.is_monotone()) << k;
      EXPECT_EQ(c.g[128], 0.0);
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::InsufficientSamples);
    }
  }
}

TEST(Response, InsufficientSamples) {
  const Raster e = radiance_field(32, 32, 4, 0.01, 1.0);
  const auto one = make_stack(e, {1.0}, 2.2);
  try {
    (void)estimate_response(one);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::InsufficientSamples);
  }
  // Fully clipped frames carry no information.
  ExposureStack clipped;
  clipped.frames = {constant_frame(32, 32, 255), constant_frame(32, 32, 255)};
  clipped.times = {1, 2};
  EXPECT_THROW((void)estimate_response(clipped), Error);
}

TEST(Response, DeterministicForSeed) {
  const Raster e = radiance_field(96, 96, 5, 0.01, 1.0);
  const auto stack = make_stack(e, {0.5, 2.0}, 2.2);
  EXPECT_EQ(estimate_response(stack).g, estimate_response(stack).g);
}

TEST(Merge, SingleFrameLinear) {
  Rng rng(6);
  std::vector<std::uint8_t> d(3 * 10 * 10);
  for (auto& v : d) v = static_cast<std::uint8_t>(rng.bits());
  ExposureStack s{{SdrImage(10, 10, d)}, {1.0}};
  const auto r = merge(s, ResponseCurve::from_gamma(1.0));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0 || d[i] == 255) continue;
    EXPECT_NEAR(r.image.data()[i], d[i] / 255.0, 1e-6 * d[i] / 255.0);
  }
}

TEST(Merge, TwoFramesWithinQuantization) {
  const Raster e = radiance_field(128, 128, 7, 0.2, 0.95);
  const auto s = make_stack(e, {1.0, 2.0}, 1.0);
  const auto w = WeightFunction::hat();
  const auto r = merge(s, ResponseCurve::from_gamma(1.0));
  std::size_t well_exposed = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    // Rounding puts each code within 0.5/z relative of the truth; the merge is
    // a weighted geometric mean, so its log error is the weighted mean of those.
    double W = 0, log_bound = 0;
    int min_code = 255;
    for (const auto& f : s.frames) {
      const int z = f.data()[3 * i];
      if (w.w[z] == 0) continue;
      const double eps = 0.5 / z;
      W += w.w[z];
      log_bound += w.w[z] * std::max(std::log1p(eps), -std::log1p(-eps));
      min_code = std::min(min_code, z);
    }
    ASSERT_GT(W, 0.0);
    const double bound = std::expm1(log_bound / W);
    const double err = std::abs(r.image.data()[3 * i] - e.values[i]) / e.values[i];
    ASSERT_LE(err, bound + 1e-6) << i;
    if (min_code >= 128) {
      ASSERT_LE(err, 1.0 / 255.0) << i;
      ++well_exposed;
    }
  }
  EXPECT_GT(well_exposed, 1000u);
}

TEST(Merge, FullySaturatedPixelsAreFlagged) {
  ExposureStack s;
  s.frames = {constant_frame(4, 4, 255), constant_frame(4, 4, 255), constant_frame(4, 4, 255)};
  s.times = {1, 2, 4};
  const auto r = merge(s, ResponseCurve::from_gamma(2.2));
  EXPECT_EQ(r.flagged, 16u);
  EXPECT_TRUE(std::all_of(r.saturation_mask.begin(), r.saturation_mask.end(), [](auto m) { return m == 1; }));
  // Filled from the shortest exposure.
  EXPECT_FLOAT_EQ(r.image.data()[0], 1.0f);

  s.frames = {constant_frame(4, 4, 0), constant_frame(4, 4, 0)};
  s.times = {1, 2};
  EXPECT_EQ(merge(s, ResponseCurve::from_gamma(2.2)).flagged, 16u);
}

TEST(Merge, ReciprocityAndFrameOrder) {
  const Raster e = radiance_field(96, 96, 8, 0.005, 2.0);
  const auto s = make_stack(e, {0.25, 1.0, 4.0}, 2.2);
  const auto curve = estimate_response(s);
  const auto base = merge(s, curve).image;

  for (double k : {2.0, 0.125, 1024.0}) {
    ExposureStack scaled = s;
    for (auto& t : scaled.times) t *= k;
    const auto img = merge(scaled, curve).image;
    for (std::size_t i = 0; i < img.data().size(); ++i) {
      ASSERT_EQ(img.data()[i], static_cast<float>(base.data()[i] / k)) << k;
    }
  }
  // Non power-of-two factors differ by at most float rounding.
  ExposureStack scaled = s;
  for (auto& t : scaled.times) t *= 3.0;
  const auto img3 = merge(scaled, curve).image;
  for (std::size_t i = 0; i < img3.data().size(); ++i) {
    ASSERT_NEAR(img3.data()[i] * 3.0, base.data()[i], 2e-7 * base.data()[i]);
  }

  ExposureStack shuffled;
  for (std::size_t j : {2u, 0u, 1u}) {
    shuffled.frames.push_back(s.frames[j]);
    shuffled.times.push_back(s.times[j]);
  }
  EXPECT_EQ(merge(shuffled, curve).image, base);
}

TEST(Merge, ThreadCountDoesNotChangeResult) {
  const Raster e = radiance_field(64, 64, 9, 0.01, 1.0);
  const auto s = make_stack(e, {0.5, 2.0}, 2.2);
  const auto curve = ResponseCurve::from_gamma(2.2);
  set_thread_limit(1);
  const auto a = merge(s, curve).image;
  set_thread_limit(4);
  const auto b = merge(s, curve).image;
  set_thread_limit(0);
  EXPECT_EQ(a, b);
}

// --- alignment -----------------------------------------------------------------

namespace {

ExposureStack shifted_stack(std::uint64_t seed, const std::vector<Shift>& shifts, std::size_t size = 128) {
  const std::size_t m = 40;
  const Raster big = radiance_field(size + 2 * m, size + 2 * m, seed, 0.01, 2.0);
  ExposureStack s;
  const double times[3] = {0.25, 1.0, 4.0};
  for (std::size_t j = 0; j < shifts.size(); ++j) {
    // Frame content moved by (dx, dy): frame(x, y) = scene(x - dx, y - dy).
    const Raster r = crop(big, static_cast<std::size_t>(static_cast<long>(m) - shifts[j].dx),
                          static_cast<std::size_t>(static_cast<long>(m) - shifts[j].dy), size, size);
    s.frames.push_back(capture(r, times[j % 3] * std::pow(4.0, static_cast<double>(j / 3)), 2.2));
    s.times.push_back(times[j % 3] * std::pow(4.0, static_cast<double>(j / 3)));
  }
  return s;
}

}  // namespace

TEST(Align, IdenticalFramesGiveZeroShift) {
  const Raster e = radiance_field(96, 96, 10, 0.01, 2.0);
  const auto s = make_stack(e, {0.25, 1.0, 4.0}, 2.2);
  const auto r = align_global(s);
  for (const auto& sh : r.shifts) EXPECT_EQ(sh, Shift{});
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.reference, 1u);
  EXPECT_EQ(classify_misalignment(r).kind, Misalignment::None);
}

TEST(Align, RecoversKnownShift) {
  const auto s = shifted_stack(11, {{3, -2}, {0, 0}, {0, 0}});
  const auto r = align_global(s);
  EXPECT_EQ(r.shifts[0], (Shift{-3, 2}));
  EXPECT_EQ(r.shifts[2], Shift{});
  // The translated frame matches the reference scene away from the border.
  EXPECT_EQ(r.valid[0], 0);
  EXPECT_EQ(r.valid[64 * 128 + 64], 1);
  EXPECT_EQ(classify_misalignment(r).kind, Misalignment::Global);
  EXPECT_EQ(classify_misalignment(r).max_shift, 3);
}

TEST(Align, RandomShiftsUpToSixteen) {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Shift a{rng.integer(-16, 16), rng.integer(-16, 16)};
    const Shift b{rng.integer(-16, 16), rng.integer(-16, 16)};
    const auto r = align_global(shifted_stack(200 + static_cast<std::uint64_t>(k), {a, {0, 0}, b}));
    EXPECT_EQ(r.shifts[0], (Shift{-a.dx, -a.dy})) << k;
    EXPECT_EQ(r.shifts[2], (Shift{-b.dx, -b.dy})) << k;
  }
}

TEST(Align, BeyondRangeIsUnreliable) {
  AlignOptions opt;
  opt.levels = 3;  // reach 7 px
  opt.strict = true;
  const auto s = shifted_stack(13, {{20, 20}, {0, 0}, {0, 0}});
  try {
    (void)align_global(s, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AlignmentUnreliable);
  }
  opt.strict = false;
  const auto r = align_global(s, opt);
  EXPECT_EQ(r.shifts[0], Shift{});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("AlignmentUnreliable"), std::string::npos);
}

TEST(Align, ConstantFrameIsUnreliable) {
  auto s = shifted_stack(14, {{0, 0}, {0, 0}, {0, 0}});
  s.frames[0] = constant_frame(128, 128, 90);
  AlignOptions opt;
  opt.strict = true;
  EXPECT_THROW((void)align_global(s, opt), Error);
  EXPECT_EQ(align_global(s).warnings.size(), 1u);
}

TEST(Align, LocalMotionIsReported) {
  auto s = shifted_stack(15, {{0, 0}, {0, 0}, {0, 0}});
  // Replace a large block of the long exposure with unrelated content.
  const Raster other = radiance_field(128, 128, 999, 0.01, 2.0);
  const SdrImage o = capture(other, 4.0, 2.2);
  std::vector<std::uint8_t> d(s.frames[2].data().begin(), s.frames[2].data().end());
  for (std::size_t y = 20; y < 90; ++y) {
    std::memcpy(&d[3 * (y * 128 + 20)], &o.data()[3 * (y * 128 + 20)], 3 * 70);
  }
  s.frames[2] = SdrImage(128, 128, d);
  const auto r = align_global(s);
  const auto rep = classify_misalignment(r);
  EXPECT_EQ(rep.kind, Misalignment::Local);
  EXPECT_GT(rep.residual_fraction, 0.05);
}
