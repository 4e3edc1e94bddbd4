#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <sstream>

#include "hdrkit/cli.hpp"
#include "hdrkit/error.hpp"
#include "hdrkit/formats.hpp"
#include "hdrkit/io.hpp"
#include "hdrkit/layered.hpp"
#include "hdrkit/merge.hpp"
#include "hdrkit/tonemap.hpp"
#include "support/scenes.hpp"

using namespace hdrkit;
using namespace hdrkit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome hdrkit_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hdrkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    scene_ = natural_scene(SceneKind::Interior, 48, 32, 11);
    save_image(path("scene.pfm"), scene_);
    scene_ = load_image(path("scene.pfm"));  // PFM carries no calibration
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  HdrImage scene_;
};

}  // namespace

TEST_F(Cli, ConvertRoundTripWithinRgbeBound) {
  ASSERT_EQ(hdrkit_cli({"convert", path("scene.pfm"), path("scene.hdr")}).code, 0);
  ASSERT_EQ(hdrkit_cli({"convert", path("scene.hdr"), path("back.pfm")}).code, 0);
  const HdrImage back = load_image(path("back.pfm"));
  for (std::size_t i = 0; i < scene_.pixel_count(); ++i) {
    const Rgb a = scene_.pixel(i), b = back.pixel(i);
    const double bound = std::max({a[0], a[1], a[2]}) * 0x1p-8;
    for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(a[c] - b[c]), bound);
  }
}

TEST_F(Cli, FormatOverride) {
  ASSERT_EQ(hdrkit_cli({"--format", "pfm", "convert", path("scene.pfm"), path("scene.bin")}).code, 0);
  EXPECT_EQ(read_pfm(read_file(path("scene.bin"))), scene_);
}

TEST_F(Cli, Info) {
  const Outcome r = hdrkit_cli({"info", path("scene.pfm")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("width=48\n"), std::string::npos);
  EXPECT_NE(r.out.find("height=32\n"), std::string::npos);
  EXPECT_NE(r.out.find("format=pfm\n"), std::string::npos);
  EXPECT_NE(r.out.find("max_luminance="), std::string::npos);
  const Outcome j = hdrkit_cli({"info", "--json", path("scene.pfm")});
  ASSERT_EQ(j.code, 0);
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["width"], 48);
  EXPECT_LT(doc["min_luminance"].get<double>(), doc["mean_luminance"].get<double>());
  EXPECT_LT(doc["mean_luminance"].get<double>(), doc["max_luminance"].get<double>());
}

TEST_F(Cli, ExitCodes) {
  const Outcome unknown = hdrkit_cli({"info", "--bogus", path("scene.pfm")});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(hdrkit_cli({}).code, 1);
  EXPECT_EQ(hdrkit_cli({"--help"}).code, 0);

  const Outcome missing = hdrkit_cli({"info", path("nope.hdr")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("Io"), std::string::npos);
  EXPECT_NE(missing.err.find("nope.hdr"), std::string::npos);
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);

  // PQ-coded output of a relative image needs a luminance anchor.
  const Outcome pq = hdrkit_cli({"--transfer", "pq", "convert", path("scene.pfm"), path("scene.ppm")});
  EXPECT_EQ(pq.code, 2);
  EXPECT_NE(pq.err.find("NeedsAbsoluteCalibration"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("scene.ppm")));
  EXPECT_EQ(hdrkit_cli({"--transfer", "pq", "--nits", "100", "convert", path("scene.pfm"), path("scene.ppm")}).code, 0);

  EXPECT_EQ(hdrkit_cli({"convert", path("scene.pfm"), path("no/such/dir/x.hdr")}).code, 2);
  EXPECT_EQ(hdrkit_cli({"tonemap", path("scene.pfm"), "-o", path("t.ppm"), "--saturation", "1.5"}).code, 2);
  EXPECT_EQ(hdrkit_cli({"tonemap", path("scene.pfm"), "-o", path("t.ppm"), "--op", "fancy"}).code, 1);
}

TEST_F(Cli, TonemapMatchesLibrary) {
  const Outcome r = hdrkit_cli({"tonemap", path("scene.pfm"), "-o", path("t.ppm"), "--formula", "eq4", "--saturation", "0.6"});
  ASSERT_EQ(r.code, 0) << r.err;
  GlobalToneOptions o;
  o.color = {0.6, ColorFormula::LinearBlend};
  EXPECT_EQ(read_ppm(read_file(path("t.ppm"))), tonemap_global(scene_, o).sdr);
  EXPECT_NE(r.out.find("clip_fraction="), std::string::npos);
  ASSERT_EQ(hdrkit_cli({"tonemap", path("scene.pfm"), "-o", path("l.ppm"), "--op", "local"}).code, 0);
  EXPECT_EQ(read_ppm(read_file(path("l.ppm"))), tonemap_local(scene_).sdr);
}

TEST_F(Cli, MergeFromManifest) {
  const Raster radiance = radiance_field(64, 48, 3, 0.005, 2.0);
  std::string manifest;
  const double times[] = {0.45, 1.8, 7.2};
  for (int k = 0; k < 3; ++k) {
    const std::string name = "f" + std::to_string(k) + ".ppm";
    write_file_atomic(path(name), write_ppm(capture(radiance, times[k], 2.2)));
    manifest += name + " " + std::to_string(times[k]) + "\n";
  }
  const Bytes text(manifest.begin(), manifest.end());
  write_file_atomic(path("stack.txt"), text);
  const Outcome r = hdrkit_cli({"merge", "--stack", path("stack.txt"), "-o", path("m.hdr"), "--response-out", path("g.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("frames=3\n"), std::string::npos);
  const HdrImage merged = load_image(path("m.hdr"));
  EXPECT_EQ(merged.width(), 64u);
  const Bytes g = read_file(path("g.txt"));
  EXPECT_TRUE(parse_response_curve(std::string(g.begin(), g.end())).is_monotone());

  // The recovered curve works as an expansion linearizer.
  const Outcome e = hdrkit_cli({"expand", path("f1.ppm"), "-o", path("e.pfm"), "--linearizer", "crf:" + path("g.txt"),
                                "--mask", path("mask.pfm"), "--prefilter"});
  ASSERT_EQ(e.code, 0) << e.err;
  const HdrImage expanded = load_image(path("e.pfm"));
  EXPECT_LE(*std::max_element(expanded.data().begin(), expanded.data().end()), 1000.0f);
  EXPECT_EQ(load_image(path("mask.pfm")).width(), 64u);

  write_file_atomic(path("bad.txt"), Bytes{'f', '0', '.', 'p', 'p', 'm', '\n'});
  const Outcome bad = hdrkit_cli({"merge", "--stack", path("bad.txt"), "-o", path("x.hdr")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("bad.txt:1"), std::string::npos);
}

TEST_F(Cli, CompareWritesReportsAndMaps) {
  const Outcome r = hdrkit_cli({"--nits", "1", "compare", path("scene.pfm"), path("scene.pfm"), "--metric",
                                "pu-psnr,log-psnr,pu-ssim", "--map-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("inf"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("pu-ssim.pfm")));
  const Outcome no_nits = hdrkit_cli({"compare", path("scene.pfm"), path("scene.pfm"), "--metric", "pu-psnr"});
  EXPECT_EQ(no_nits.code, 2);
  EXPECT_NE(no_nits.err.find("NeedsAbsoluteCalibration"), std::string::npos);
  const Outcome j = hdrkit_cli({"--json", "compare", path("scene.pfm"), path("scene.pfm"), "--metric", "log-psnr"});
  ASSERT_EQ(j.code, 0);
  const auto report = nlohmann::json::parse(j.out, nullptr, false);
  ASSERT_FALSE(report.is_discarded()) << j.out;
  ASSERT_TRUE(report.is_array() && report.size() == 1) << j.out;
  EXPECT_EQ(report[0].value("metric", ""), "log-psnr");
}

TEST_F(Cli, PackUnpack) {
  ASSERT_EQ(hdrkit_cli({"pack", path("scene.pfm"), "-o", path("s.hdrl")}).code, 0);
  const Outcome u = hdrkit_cli({"unpack", path("s.hdrl"), "-o", path("u.pfm"), "--base", path("base.ppm")});
  ASSERT_EQ(u.code, 0) << u.err;
  EXPECT_EQ(load_image(path("u.pfm")), scene_);
  EXPECT_EQ(read_ppm(read_file(path("base.ppm"))), tonemap_global(scene_).sdr);

  const Outcome info = hdrkit_cli({"info", path("s.hdrl")});
  EXPECT_NE(info.out.find("mode=lossless\n"), std::string::npos);

  Bytes cut = read_file(path("s.hdrl"));
  cut.resize(cut.size() - 10);
  write_file_atomic(path("cut.hdrl"), cut);
  const Outcome m = hdrkit_cli({"unpack", path("cut.hdrl"), "-o", path("c.pfm"), "--base", path("cbase.ppm")});
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(m.err.find("MissingExtension"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("cbase.ppm")));

  const Outcome lossy = hdrkit_cli({"pack", path("scene.pfm"), "-o", path("l.hdrl"), "--mode", "lossy8"});
  ASSERT_EQ(lossy.code, 0);
  EXPECT_NE(lossy.out.find("error_bound="), std::string::npos);
}

TEST_F(Cli, OutputsDoNotDependOnThreadCount) {
  const std::vector<std::vector<std::string>> commands{
      {"tonemap", path("scene.pfm"), "-o", "@.ppm", "--op", "local"},
      {"pack", path("scene.pfm"), "-o", "@.hdrl", "--mode", "lossy16"},
      {"--nits", "100", "compare", path("scene.pfm"), path("scene.pfm"), "--metric", "dri", "--map-dir", "@"},
  };
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<Bytes> results;
    std::vector<std::string> stdouts;
    for (const char* threads : {"1", "3", "0", "1"}) {
      const std::string out = path("run" + std::to_string(c) + "_" + std::to_string(results.size()));
      if (commands[c].back() == "@") fs::create_directories(out);
      std::vector<std::string> args{"--threads", threads};
      for (auto a : commands[c]) args.push_back(a[0] == '@' ? out + a.substr(1) : a);
      const Outcome r = hdrkit_cli(args);
      ASSERT_EQ(r.code, 0) << r.err;
      stdouts.push_back(r.out);
      const std::string file = commands[c].back() == "@" ? out + "/dri.pfm" : out + commands[c][3].substr(1);
      results.push_back(read_file(file));
    }
    for (std::size_t k = 1; k < results.size(); ++k) {
      EXPECT_EQ(results[k], results[0]) << c;
      EXPECT_EQ(stdouts[k], stdouts[0]) << c;
    }
  }
}
