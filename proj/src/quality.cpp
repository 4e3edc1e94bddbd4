#include "hdrkit/quality.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>

#include "hdrkit/color.hpp"
#include "hdrkit/error.hpp"
#include "hdrkit/io.hpp"
#include "hdrkit/parallel.hpp"
#include "hdrkit/transfer.hpp"

namespace hdrkit {

namespace {

using cplx = std::complex<double>;

void check_shapes(const HdrImage& ref, const HdrImage& test) {
  if (ref.width() != test.width() || ref.height() != test.height()) {
    throw Error(Errc::ShapeMismatch, "images differ in size: " + std::to_string(ref.width()) + "x" +
                                         std::to_string(ref.height()) + " vs " + std::to_string(test.width()) +
                                         "x" + std::to_string(test.height()));
  }
  if (ref.empty()) throw Error(Errc::BadDimensions, "cannot compare empty images");
}

void check_absolute(const HdrImage& img) {
  if (img.calibration() != Calibration::Absolute) {
    throw Error(Errc::NeedsAbsoluteCalibration, "PU metrics need absolute (nit) luminance");
  }
}

Raster pu_luminance(const HdrImage& img) {
  Raster l = luminance(img);
  for (auto& v : l.values) v = pu_encode(std::clamp(v, 0.0, 10000.0));
  return l;
}

double pu_peak() { return pu_encode(10000.0) - pu_encode(0.1); }

QualityReport psnr_report(std::string name, const Raster& a, const Raster& b, double peak,
                          MetricCalibration cal) {
  QualityReport r;
  r.metric = std::move(name);
  r.calibration = cal;
  Raster diff(a.width, a.height);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    diff.values[i] = std::abs(d);
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.size());
  r.score = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(peak * peak / mse);
  r.extras.emplace_back("mse", mse);
  r.map = std::move(diff);
  return r;
}

// Separable Gaussian, border weights renormalized.
Raster gaussian_blur(const Raster& in, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-i * i / (2.0 * sigma * sigma));
  const long W = static_cast<long>(in.width), H = static_cast<long>(in.height);
  Raster tmp(in.width, in.height), out(in.width, in.height);
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      double num = 0, den = 0;
      for (long d = std::max<long>(-radius, -x); d <= std::min<long>(radius, W - 1 - x); ++d) {
        num += k[d + radius] * in.values[y * W + x + d];
        den += k[d + radius];
      }
      tmp.values[y * W + x] = num / den;
    }
  }
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      double num = 0, den = 0;
      for (long d = std::max<long>(-radius, -y); d <= std::min<long>(radius, H - 1 - y); ++d) {
        num += k[d + radius] * tmp.values[(y + d) * W + x];
        den += k[d + radius];
      }
      out.values[y * W + x] = num / den;
    }
  }
  return out;
}

}  // namespace

std::string_view calibration_name(MetricCalibration c) {
  return c == MetricCalibration::DisplayReferred ? "display-referred" : "luminance-independent";
}

QualityReport pu_psnr(const HdrImage& ref, const HdrImage& test) {
  check_shapes(ref, test);
  check_absolute(ref);
  check_absolute(test);
  return psnr_report("pu-psnr", pu_luminance(ref), pu_luminance(test), pu_peak(),
                     MetricCalibration::DisplayReferred);
}

QualityReport log_psnr(const HdrImage& ref, const HdrImage& test) {
  check_shapes(ref, test);
  Raster a = luminance(ref), b = luminance(test);
  const double top = *std::max_element(a.values.begin(), a.values.end());
  const double floor = top > 0.0 ? 1e-6 * top : 1e-6;
  for (auto& v : a.values) v = std::log10(std::max(v, floor));
  for (auto& v : b.values) v = std::log10(std::max(v, floor));
  return psnr_report("log-psnr", a, b, 6.0, MetricCalibration::LuminanceIndependent);
}

QualityReport pu_ssim(const HdrImage& ref, const HdrImage& test) {
  check_shapes(ref, test);
  check_absolute(ref);
  check_absolute(test);
  const Raster x = pu_luminance(ref), y = pu_luminance(test);
  Raster xx(x.width, x.height), yy(x.width, x.height), xy(x.width, x.height);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx.values[i] = x.values[i] * x.values[i];
    yy.values[i] = y.values[i] * y.values[i];
    xy.values[i] = x.values[i] * y.values[i];
  }
  // An 11x11 window at sigma 1.5 is the 3.33-sigma truncation; radius 5.
  const double sigma = 1.5;
  const Raster mx = gaussian_blur(x, sigma), my = gaussian_blur(y, sigma);
  const Raster mxx = gaussian_blur(xx, sigma), myy = gaussian_blur(yy, sigma), mxy = gaussian_blur(xy, sigma);
  const double peak = pu_peak();
  const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
  Raster map(x.width, x.height);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ux = mx.values[i], uy = my.values[i];
    const double vx = mxx.values[i] - ux * ux, vy = myy.values[i] - uy * uy, cxy = mxy.values[i] - ux * uy;
    const double s = ((2 * ux * uy + c1) * (2 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    map.values[i] = s;
    sum += s;
  }
  QualityReport r;
  r.metric = "pu-ssim";
  r.calibration = MetricCalibration::DisplayReferred;
  r.score = std::clamp(sum / static_cast<double>(x.size()), -1.0, 1.0);
  r.map = std::move(map);
  return r;
}

// --- DRI --------------------------------------------------------------------------

std::string_view dri_label_name(DriLabel label) {
  switch (label) {
    case DriLabel::None: return "none";
    case DriLabel::Loss: return "loss";
    case DriLabel::Amplification: return "amplification";
    case DriLabel::Reversal: return "reversal";
  }
  return "?";
}

std::size_t DriMap::count(DriLabel label) const {
  std::size_t n = 0;
  for (const auto& b : bands) n += static_cast<std::size_t>(std::count(b.labels.begin(), b.labels.end(), label));
  return n;
}

std::vector<DriLabel> DriMap::summary() const {
  std::vector<DriLabel> out(width * height, DriLabel::None);
  std::vector<float> best(width * height, -1.0f);
  for (const auto& b : bands) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (b.labels[i] != DriLabel::None && b.probability[i] > best[i]) {
        best[i] = b.probability[i];
        out[i] = b.labels[i];
      }
    }
  }
  return out;
}

double contrast_sensitivity(double cpd, double nits) {
  const double u = cpd, l = nits, x0 = 40.0;
  const double num = 5200.0 * std::exp(-0.0016 * u * u * std::pow(1.0 + 100.0 / l, 0.08));
  const double den = std::sqrt((1.0 + 144.0 / (x0 * x0) + 0.64 * u * u) *
                               (63.0 / std::pow(l, 0.83) + 1.0 / (1.0 - std::exp(-0.02 * u * u))));
  return num / den;
}

namespace {

Raster log_luminance(const HdrImage& img) {
  Raster l = luminance(img);
  const double top = *std::max_element(l.values.begin(), l.values.end());
  const double floor = top > 0.0 ? 1e-6 * top : 1.0;
  for (auto& v : l.values) v = std::log10(std::max(v, floor));
  return l;
}

std::vector<cplx> kernel_1d(double sigma, double freq, int radius) {
  std::vector<cplx> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) sum += std::exp(-i * i / (2 * sigma * sigma));
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-i * i / (2 * sigma * sigma)) / sum * std::polar(1.0, freq * i);
  }
  return k;
}

// Separable complex convolution with edge replication.
std::vector<cplx> convolve(const Raster& in, const std::vector<cplx>& kx, const std::vector<cplx>& ky) {
  const long W = static_cast<long>(in.width), H = static_cast<long>(in.height);
  const long rx = static_cast<long>(kx.size() / 2), ry = static_cast<long>(ky.size() / 2);
  std::vector<cplx> tmp(in.size()), out(in.size());
  parallel_for(0, in.height, [&](std::size_t yy) {
    const long y = static_cast<long>(yy);
    for (long x = 0; x < W; ++x) {
      cplx acc = 0;
      for (long d = -rx; d <= rx; ++d) acc += kx[d + rx] * in.values[y * W + std::clamp(x - d, 0L, W - 1)];
      tmp[y * W + x] = acc;
    }
  });
  parallel_for(0, in.height, [&](std::size_t yy) {
    const long y = static_cast<long>(yy);
    for (long x = 0; x < W; ++x) {
      cplx acc = 0;
      for (long d = -ry; d <= ry; ++d) acc += ky[d + ry] * tmp[std::clamp(y - d, 0L, H - 1) * W + x];
      out[y * W + x] = acc;
    }
  });
  return out;
}

struct BandResponse {
  std::vector<cplx> values;
};

std::vector<BandResponse> band_responses(const Raster& log_l, const std::vector<DriBand>& bands) {
  std::vector<BandResponse> out;
  for (const auto& b : bands) {
    const double sigma = 0.56 / b.frequency;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const double omega = 2.0 * M_PI * b.frequency;
    const double theta = b.orientation * M_PI / 4.0;
    const auto kx = kernel_1d(sigma, omega * std::cos(theta), radius);
    const auto ky = kernel_1d(sigma, omega * std::sin(theta), radius);
    const auto gx = kernel_1d(sigma, 0.0, radius);
    cplx dc_x = 0, dc_y = 0;
    for (const auto& v : kx) dc_x += v;
    for (const auto& v : ky) dc_y += v;
    // Subtracting the scaled Gaussian response zeroes the kernel's DC gain.
    auto r = convolve(log_l, kx, ky);
    const auto g = convolve(log_l, gx, gx);
    const cplx dc = dc_x * dc_y;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= dc * g[i];
    out.push_back({std::move(r)});
  }
  return out;
}

}  // namespace

DriMap dri_classify(const HdrImage& ref, const HdrImage& test, const DriOptions& options) {
  check_shapes(ref, test);
  if (!(options.pixels_per_degree > 0.0) || !(options.adaptation_nits > 0.0) ||
      !(options.psychometric_slope > 0.0) || !(options.threshold_scale > 0.0)) {
    throw Error(Errc::BadParameter, "DRI options must be positive");
  }
  DriMap map;
  map.width = ref.width();
  map.height = ref.height();
  for (int s = 0; s < 4; ++s) {
    for (int o = 0; o < 4; ++o) {
      DriBand b;
      b.scale = s;
      b.orientation = o;
      b.frequency = 0.25 / std::pow(2.0, s);
      const double m = 1.0 / contrast_sensitivity(b.frequency * options.pixels_per_degree, options.adaptation_nits);
      b.threshold = options.threshold_scale * std::atanh(std::min(m, 0.999)) / std::log(10.0);
      map.bands.push_back(std::move(b));
    }
  }
  const auto rr = band_responses(log_luminance(ref), map.bands);
  const auto rt = band_responses(log_luminance(test), map.bands);
  const double beta = options.psychometric_slope;
  for (std::size_t k = 0; k < map.bands.size(); ++k) {
    auto& b = map.bands[k];
    const std::size_t n = map.width * map.height;
    b.labels.assign(n, DriLabel::None);
    b.probability.assign(n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx a = rr[k].values[i], c = rt[k].values[i];
      const double ca = 2.0 * std::abs(a), cc = 2.0 * std::abs(c);
      const double pa = 1.0 - std::exp(-std::pow(ca / b.threshold, beta));
      const double pc = 1.0 - std::exp(-std::pow(cc / b.threshold, beta));
      const bool va = ca > b.threshold, vc = cc > b.threshold;
      const bool flipped = (a * std::conj(c)).real() < 0.0;
      DriLabel label = DriLabel::None;
      double p = (1.0 - pa) * (1.0 - pc) + (flipped ? 0.0 : pa * pc);
      if (va && !vc) {
        label = DriLabel::Loss;
        p = pa * (1.0 - pc);
      } else if (!va && vc) {
        label = DriLabel::Amplification;
        p = (1.0 - pa) * pc;
      } else if (va && vc && flipped) {
        label = DriLabel::Reversal;
        p = pa * pc;
      }
      b.labels[i] = label;
      b.probability[i] = static_cast<float>(std::clamp(p, 0.0, 1.0));
    }
  }
  return map;
}

QualityReport dri_report(const DriMap& map) {
  QualityReport r;
  r.metric = "dri";
  r.calibration = MetricCalibration::LuminanceIndependent;
  const double sites = static_cast<double>(map.width * map.height * map.bands.size());
  const double loss = static_cast<double>(map.count(DriLabel::Loss)) / sites;
  const double amp = static_cast<double>(map.count(DriLabel::Amplification)) / sites;
  const double rev = static_cast<double>(map.count(DriLabel::Reversal)) / sites;
  r.score = loss + amp + rev;
  r.extras = {{"loss", loss}, {"amplification", amp}, {"reversal", rev}};
  Raster m(map.width, map.height);
  for (const auto& b : map.bands) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (b.labels[i] != DriLabel::None) m.values[i] = std::max(m.values[i], static_cast<double>(b.probability[i]));
    }
  }
  r.map = std::move(m);
  return r;
}

// --- comparison -------------------------------------------------------------------

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::PuPsnr: return "pu-psnr";
    case Metric::LogPsnr: return "log-psnr";
    case Metric::PuSsim: return "pu-ssim";
    case Metric::Dri: return "dri";
  }
  return "?";
}

Metric metric_from_name(std::string_view name) {
  for (Metric m : {Metric::PuPsnr, Metric::LogPsnr, Metric::PuSsim, Metric::Dri}) {
    if (metric_name(m) == name) return m;
  }
  throw Error(Errc::BadParameter, "unknown metric '" + std::string(name) + "'");
}

std::vector<QualityReport> compare(const std::filesystem::path& ref_path, const std::filesystem::path& test_path,
                                   const std::vector<Metric>& metrics, const CompareOptions& options) {
  if (options.nits && !(*options.nits > 0.0)) throw Error(Errc::BadParameter, "--nits must be positive");
  auto load = [&](const std::filesystem::path& p) {
    try {
      HdrImage img = load_image(p);
      if (img.calibration() == Calibration::Relative && options.nits) {
        img = img.scaled(*options.nits, Calibration::Absolute);
      }
      return img;
    } catch (const Error& e) {
      throw e.with_context(p.string());
    }
  };
  const HdrImage ref = load(ref_path), test = load(test_path);
  std::vector<QualityReport> out;
  for (Metric m : metrics) {
    switch (m) {
      case Metric::PuPsnr: out.push_back(pu_psnr(ref, test)); break;
      case Metric::LogPsnr: out.push_back(log_psnr(ref, test)); break;
      case Metric::PuSsim: out.push_back(pu_ssim(ref, test)); break;
      case Metric::Dri: out.push_back(dri_report(dri_classify(ref, test, options.dri))); break;
    }
  }
  return out;
}

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_reports_kv(const std::vector<QualityReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += "metric=" + r.metric + " score=" + number(r.score) + " calibration=" +
           std::string(calibration_name(r.calibration));
    for (const auto& [k, v] : r.extras) out += " " + k + "=" + number(v);
    out += "\n";
  }
  return out;
}

std::string format_reports_json(const std::vector<QualityReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["metric"] = r.metric;
    // JSON has no infinity; identical inputs report the string "inf".
    if (std::isfinite(r.score)) {
      j["score"] = r.score;
    } else {
      j["score"] = number(r.score);
    }
    j["calibration"] = calibration_name(r.calibration);
    for (const auto& [k, v] : r.extras) j[k] = v;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace hdrkit
