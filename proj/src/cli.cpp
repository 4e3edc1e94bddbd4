#include "hdrkit/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hdrkit/color.hpp"
#include "hdrkit/error.hpp"
#include "hdrkit/expand.hpp"
#include "hdrkit/formats.hpp"
#include "hdrkit/io.hpp"
#include "hdrkit/layered.hpp"
#include "hdrkit/merge.hpp"
#include "hdrkit/parallel.hpp"
#include "hdrkit/quality.hpp"
#include "hdrkit/tonemap.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 0x5eed;
  bool json = false;
  std::optional<double> nits;
  std::string format;
  std::string transfer = "srgb";
};

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_kv(std::ostream& out, const Json& j) {
  for (const auto& [k, v] : j.items()) {
    if (v.is_number_float()) {
      out << k << '=' << num(v.get<double>()) << '\n';
    } else if (v.is_string()) {
      out << k << '=' << v.get<std::string>() << '\n';
    } else {
      out << k << '=' << v.dump() << '\n';
    }
  }
}

void emit(std::ostream& out, const Json& j, bool json) {
  if (json) {
    out << j.dump(2) << '\n';
  } else {
    print_kv(out, j);
  }
}

void require_input(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw Error(Errc::Io, "cannot open '" + p.string() + "'");
}

void require_output_dir(const fs::path& p) {
  const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
  if (!fs::is_directory(dir)) throw Error(Errc::Io, "no such directory for '" + p.string() + "'");
}

bool needs_nits(const TransferFunction& tf) { return tf.absolute() || tf.kind == TransferKind::LogN; }

std::optional<FileFormat> output_format(const Globals& g) {
  if (g.format.empty()) return std::nullopt;
  return format_from_name(g.format);
}

HdrImage decode_ppm(const SdrImage& sdr, const TransferFunction& tf) {
  std::array<double, 256> lut{};
  for (int z = 0; z < 256; ++z) lut[z] = eotf(tf, z / 255.0);
  std::vector<float> data(sdr.data().size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(lut[sdr.data()[i]]);
  return HdrImage(sdr.width(), sdr.height(), std::move(data),
                  needs_nits(tf) ? Calibration::Absolute : Calibration::Relative);
}

SdrImage encode_ppm(const HdrImage& img, const TransferFunction& tf) {
  std::vector<std::uint8_t> data(img.data().size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = std::max(0.0, static_cast<double>(img.data()[i]));
    data[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(oetf(tf, v), 0.0, 1.0)));
  }
  const TransferTag tag = tf.kind == TransferKind::Gamma ? TransferTag::Gamma22
                          : tf.kind == TransferKind::Pq  ? TransferTag::PqNormalized
                                                         : TransferTag::Srgb;
  return SdrImage(img.width(), img.height(), std::move(data), tag);
}

/// Loads any supported input; 8-bit files are decoded with --transfer and
/// relative inputs become absolute when --nits is given.
HdrImage read_input(const fs::path& path, const Globals& g) {
  require_input(path);
  HdrImage img = format_from_path(path) == FileFormat::Ppm
                     ? decode_ppm(read_ppm(read_file(path)), TransferFunction::by_name(g.transfer))
                     : load_image(path);
  if (g.nits && img.calibration() == Calibration::Relative) img = img.scaled(*g.nits, Calibration::Absolute);
  return img;
}

SdrImage read_sdr(const fs::path& path) {
  require_input(path);
  return read_ppm(read_file(path));
}

void write_output(const fs::path& path, const HdrImage& img, const Globals& g) {
  const std::optional<FileFormat> f = output_format(g);
  if ((f ? *f : format_from_path(path)) == FileFormat::Ppm) {
    const TransferFunction tf = TransferFunction::by_name(g.transfer);
    if (needs_nits(tf) && img.calibration() != Calibration::Absolute) {
      throw Error(Errc::NeedsAbsoluteCalibration, "--transfer " + g.transfer + " needs --nits for a relative image");
    }
    write_file_atomic(path, write_ppm(encode_ppm(img, tf)));
    return;
  }
  save_image(path, img, f);
}

Json luminance_stats(const HdrImage& img) {
  const Raster l = luminance(img, ColorSpace::rec709());
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (double v : l.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  Json j;
  j["min_luminance"] = lo;
  j["max_luminance"] = hi;
  j["mean_luminance"] = l.values.empty() ? 0.0 : sum / static_cast<double>(l.values.size());
  return j;
}

ExposureStack read_manifest(const fs::path& manifest) {
  require_input(manifest);
  const Bytes bytes = read_file(manifest);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  ExposureStack stack;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string path;
    if (!(ls >> path) || path[0] == '#') continue;
    double t = 0.0;
    std::string extra;
    if (!(ls >> t) || (ls >> extra)) {
      throw Error(Errc::BadParameter, manifest.string() + ":" + std::to_string(line_no) + ": expected 'path seconds'");
    }
    fs::path frame(path);
    if (frame.is_relative()) frame = manifest.parent_path() / frame;
    try {
      stack.frames.push_back(read_sdr(frame));
    } catch (const Error& e) {
      throw e.with_context(frame.string());
    }
    stack.times.push_back(t);
  }
  stack.validate();
  return stack;
}

ColorCorrectionParams color_params(const std::string& saturation, const std::string& formula) {
  ColorCorrectionParams c;
  if (saturation != "auto") {
    std::size_t used = 0;
    double p = NAN;
    try {
      p = std::stod(saturation, &used);
    } catch (const std::exception&) {
    }
    if (used != saturation.size() || !std::isfinite(p)) {
      throw Error(Errc::BadParameter, "--saturation takes 'auto' or a number in [0,1]");
    }
    c.p = p;
  }
  c.formula = formula == "eq4" ? ColorFormula::LinearBlend : ColorFormula::RatioPower;
  return c;
}

std::variant<TransferFunction, ResponseCurve> parse_linearizer(const std::string& name) {
  if (name.rfind("crf:", 0) == 0) {
    const fs::path path = name.substr(4);
    require_input(path);
    const Bytes bytes = read_file(path);
    try {
      return parse_response_curve(std::string(bytes.begin(), bytes.end()));
    } catch (const Error& e) {
      throw e.with_context(path.string());
    }
  }
  return TransferFunction::by_name(name);
}

HdrImage raster_image(const Raster& r) {
  std::vector<float> data(3 * r.size());
  bool negative = false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto v = static_cast<float>(r.values[i]);
    data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = v;
    negative = negative || v < 0.0f;
  }
  return HdrImage(r.width, r.height, std::move(data), Calibration::Relative, negative);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HDR imaging toolkit", "hdrkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "seed for sampled procedures");
  app.add_flag("--json", g.json, "machine-readable report");
  app.add_option("--nits", g.nits, "luminance of relative 1.0, in cd/m^2")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "output format override")->check(CLI::IsMember({"hdr", "pfm", "ppm", "hdrl"}));
  app.add_option("--transfer", g.transfer, "transfer for 8-bit files")
      ->check(CLI::IsMember({"gamma22", "srgb", "pq", "log", "pu"}));

  std::string in, in2, output;

  auto* convert = app.add_subcommand("convert", "convert between image formats");
  convert->add_option("input", in)->required();
  convert->add_option("output", output)->required();

  auto* merge_cmd = app.add_subcommand("merge", "merge an exposure stack");
  std::string stack_path, response_out;
  double lambda = 20.0;
  std::size_t samples = 512;
  bool align = false;
  merge_cmd->add_option("--stack", stack_path, "manifest of 'path seconds' lines")->required();
  merge_cmd->add_option("-o,--output", output)->required();
  merge_cmd->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
  merge_cmd->add_option("--samples", samples)->check(CLI::Range(1, 1 << 20));
  merge_cmd->add_flag("--align", align, "correct global shifts first");
  merge_cmd->add_option("--response-out", response_out, "write the recovered response curve");

  auto* tonemap_cmd = app.add_subcommand("tonemap", "tone map to an 8-bit PPM");
  std::string op = "global", saturation = "auto", formula = "eq3";
  std::optional<double> key, white;
  tonemap_cmd->add_option("input", in)->required();
  tonemap_cmd->add_option("-o,--output", output)->required();
  tonemap_cmd->add_option("--op", op)->check(CLI::IsMember({"global", "local"}));
  tonemap_cmd->add_option("--saturation", saturation, "auto or p in [0,1]");
  tonemap_cmd->add_option("--formula", formula)->check(CLI::IsMember({"eq3", "eq4"}));
  tonemap_cmd->add_option("--key", key)->check(CLI::PositiveNumber);
  tonemap_cmd->add_option("--white", white, "white point in input units")->check(CLI::PositiveNumber);

  auto* expand_cmd = app.add_subcommand("expand", "expand an 8-bit PPM to HDR");
  double peak = 1000.0, alpha = 1.6;
  std::string linearizer = "srgb", mask_out;
  bool prefilter = false;
  expand_cmd->add_option("input", in)->required();
  expand_cmd->add_option("-o,--output", output)->required();
  expand_cmd->add_option("--peak", peak, "nits")->check(CLI::PositiveNumber);
  expand_cmd->add_option("--alpha", alpha)->check(CLI::PositiveNumber);
  expand_cmd->add_option("--linearizer", linearizer, "srgb, gamma22 or crf:<file>");
  expand_cmd->add_flag("--prefilter", prefilter, "bilateral filter before expansion");
  expand_cmd->add_option("--mask", mask_out, "write the low-confidence mask (PFM)");

  auto* compare_cmd = app.add_subcommand("compare", "full-reference quality metrics");
  std::vector<std::string> metrics;
  std::string map_dir;
  compare_cmd->add_option("reference", in)->required();
  compare_cmd->add_option("test", in2)->required();
  compare_cmd->add_option("--metric", metrics, "pu-psnr, log-psnr, pu-ssim, dri")
      ->delimiter(',')
      ->check(CLI::IsMember({"pu-psnr", "log-psnr", "pu-ssim", "dri"}));
  compare_cmd->add_option("--map-dir", map_dir, "write per-pixel maps as <metric>.pfm");

  auto* pack_cmd = app.add_subcommand("pack", "write a layered HDRL file");
  std::string mode = "lossless";
  pack_cmd->add_option("input", in)->required();
  pack_cmd->add_option("-o,--output", output)->required();
  pack_cmd->add_option("--mode", mode)->check(CLI::IsMember({"lossless", "lossy16", "lossy8", "base-only"}));
  pack_cmd->add_option("--op", op)->check(CLI::IsMember({"global", "local"}));
  pack_cmd->add_option("--saturation", saturation, "auto or p in [0,1]");
  pack_cmd->add_option("--formula", formula)->check(CLI::IsMember({"eq3", "eq4"}));

  auto* unpack_cmd = app.add_subcommand("unpack", "decode a layered HDRL file");
  std::string base_out;
  unpack_cmd->add_option("input", in)->required();
  unpack_cmd->add_option("-o,--output", output)->required();
  unpack_cmd->add_option("--base", base_out, "also write the 8-bit base layer");

  auto* info_cmd = app.add_subcommand("info", "describe an image file");
  info_cmd->add_option("input", in)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "hdrkit: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    set_thread_limit(g.threads);
    for (const std::string& p : {output, response_out, mask_out, base_out}) {
      if (!p.empty()) require_output_dir(p);
    }
    if (!map_dir.empty() && !fs::is_directory(map_dir)) throw Error(Errc::Io, "no such directory '" + map_dir + "'");

    if (*convert) {
      write_output(output, read_input(in, g), g);
    } else if (*merge_cmd) {
      ExposureStack stack = read_manifest(stack_path);
      Json report;
      if (align) {
        const AlignResult aligned = align_global(stack);
        const MisalignmentReport m = classify_misalignment(aligned);
        for (const std::string& w : aligned.warnings) err << "hdrkit: warning: " << w << '\n';
        report["misalignment"] = std::string(misalignment_name(m.kind));
        report["max_shift"] = m.max_shift;
        stack = aligned.stack;
      }
      ResponseOptions ro;
      ro.lambda = lambda;
      ro.sample_count = samples;
      ro.seed = g.seed;
      const ResponseCurve curve = estimate_response(stack, WeightFunction::hat(), ro);
      const MergeResult merged = merge(stack, curve);
      if (!response_out.empty()) {
        const std::string text = format_response_curve(curve);
        write_file_atomic(response_out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
      }
      write_output(output, merged.image, g);
      report["frames"] = stack.size();
      report["saturated_pixels"] = merged.flagged;
      emit(out, report, g.json);
    } else if (*tonemap_cmd) {
      const HdrImage img = read_input(in, g);
      const TransferTag tag = g.transfer == "gamma22" ? TransferTag::Gamma22
                              : g.transfer == "pq"    ? TransferTag::PqNormalized
                              : g.transfer == "srgb"  ? TransferTag::Srgb
                                                      : throw Error(Errc::BadParameter, "tonemap encodes srgb, gamma22 or pq");
      ToneMapResult r;
      if (op == "local") {
        LocalToneOptions o;
        o.color = color_params(saturation, formula);
        o.encode = tag;
        r = tonemap_local(img, o);
      } else {
        GlobalToneOptions o;
        if (key) o.key = *key;
        o.white_point = white;
        o.color = color_params(saturation, formula);
        o.encode = tag;
        r = tonemap_global(img, o);
      }
      write_file_atomic(output, write_ppm(r.sdr));
      Json report;
      report["clipped_below"] = r.clip.below;
      report["clipped_above"] = r.clip.above;
      report["clip_fraction"] = r.clip.fraction;
      emit(out, report, g.json);
    } else if (*expand_cmd) {
      ExpansionParams p;
      p.linearizer = parse_linearizer(linearizer);
      p.target_peak = peak;
      p.alpha = alpha;
      if (prefilter) p.prefilter = Prefilter{};
      const ExpansionResult r = expand(read_sdr(in), p);
      write_output(output, r.image, g);
      if (!mask_out.empty()) {
        Raster m(r.image.width(), r.image.height());
        for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = r.low_confidence[i];
        write_file_atomic(mask_out, write_pfm(raster_image(m)));
      }
      Json report;
      report["low_confidence_pixels"] = r.flagged;
      emit(out, report, g.json);
    } else if (*compare_cmd) {
      if (metrics.empty()) metrics = {"pu-psnr"};
      std::vector<Metric> ms;
      for (const auto& m : metrics) ms.push_back(metric_from_name(m));
      CompareOptions co;
      co.nits = g.nits;
      const auto reports = compare(in, in2, ms, co);
      out << (g.json ? format_reports_json(reports) : format_reports_kv(reports));
      if (!map_dir.empty()) {
        for (const auto& r : reports) {
          if (r.map) write_file_atomic(fs::path(map_dir) / (r.metric + ".pfm"), write_pfm(raster_image(*r.map)));
        }
      }
    } else if (*pack_cmd) {
      PackOptions po;
      po.mode = layer_mode_from_name(mode);
      po.op = op == "local" ? BaseOperator::Local : BaseOperator::Global;
      po.global.color = po.local.color = color_params(saturation, formula);
      const LayeredStream s = pack(read_input(in, g), po);
      write_file_atomic(output, s.bytes);
      Json report;
      report["base_bytes"] = s.header.base_length;
      report["extension_bytes"] = s.header.ext_length;
      if (po.mode == LayerMode::Lossy16 || po.mode == LayerMode::Lossy8) report["error_bound"] = s.header.error_bound;
      emit(out, report, g.json);
    } else if (*unpack_cmd) {
      require_input(in);
      const Bytes bytes = read_file(in);
      if (!base_out.empty()) write_file_atomic(base_out, write_ppm(extract_base(bytes)));
      write_output(output, unpack(bytes), g);
    } else if (*info_cmd) {
      require_input(in);
      const FileFormat f = format_from_path(in);
      const HdrImage img = read_input(in, g);
      Json report;
      report["file"] = in;
      report["format"] = std::string(format_name(f));
      report["width"] = img.width();
      report["height"] = img.height();
      report["calibration"] = img.calibration() == Calibration::Absolute ? "absolute" : "relative";
      report.update(luminance_stats(img));
      if (f == FileFormat::Layered) {
        const LayeredHeader h = read_layered_header(read_file(in));
        report["mode"] = std::string(layer_mode_name(h.mode));
        report["base_bytes"] = h.base_length;
        report["extension_bytes"] = h.ext_length;
      }
      emit(out, report, g.json);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "hdrkit: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hdrkit
