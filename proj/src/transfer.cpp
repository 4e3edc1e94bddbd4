#include "hdrkit/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdrkit/error.hpp"

namespace hdrkit {

namespace {

constexpr double kPqM1 = 2610.0 / 16384.0;
constexpr double kPqM2 = 2523.0 / 4096.0 * 128.0;
constexpr double kPqC1 = 3424.0 / 4096.0;
constexpr double kPqC2 = 2413.0 / 4096.0 * 32.0;
constexpr double kPqC3 = 2392.0 / 4096.0 * 32.0;
constexpr double kPqPeak = 10000.0;

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double l) {
  return l <= 0.0031308 ? l * 12.92 : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

}  // namespace

TransferFunction TransferFunction::make_gamma(double gamma, double peak) {
  if (!(gamma > 0.0) || !(peak > 0.0)) throw Error(Errc::BadParameter, "gamma and peak must be positive");
  return {TransferKind::Gamma, gamma, 12.0, peak};
}

TransferFunction TransferFunction::make_srgb(double peak) {
  if (!(peak > 0.0)) throw Error(Errc::BadParameter, "peak must be positive");
  return {TransferKind::Srgb, 2.4, 12.0, peak};
}

TransferFunction TransferFunction::make_pq() { return {TransferKind::Pq, 1.0, 12.0, kPqPeak}; }

TransferFunction TransferFunction::make_log(double decades, double peak) {
  if (!(decades > 0.0) || !(peak > 0.0)) throw Error(Errc::BadParameter, "decades and peak must be positive");
  return {TransferKind::LogN, 1.0, decades, peak};
}

TransferFunction TransferFunction::make_pu() { return {TransferKind::Pu, 1.0, 12.0, kPqPeak}; }

TransferFunction TransferFunction::by_name(std::string_view name) {
  if (name == "gamma22") return make_gamma(2.2);
  if (name == "srgb") return make_srgb();
  if (name == "pq") return make_pq();
  if (name == "log") return make_log();
  if (name == "pu") return make_pu();
  throw Error(Errc::BadParameter, "unknown transfer '" + std::string(name) + "'");
}

TransferFunction TransferFunction::for_tag(TransferTag tag) {
  switch (tag) {
    case TransferTag::Gamma22: return make_gamma(2.2);
    case TransferTag::Srgb: return make_srgb();
    case TransferTag::PqNormalized: return make_pq();
  }
  return make_srgb();
}

std::string TransferFunction::name() const {
  switch (kind) {
    case TransferKind::Gamma: return gamma == 2.2 ? "gamma22" : "gamma" + std::to_string(gamma);
    case TransferKind::Srgb: return "srgb";
    case TransferKind::Pq: return "pq";
    case TransferKind::LogN: return "log";
    case TransferKind::Pu: return "pu";
  }
  return "unknown";
}

double pq_eotf(double code) {
  const double p = std::pow(std::max(code, 0.0), 1.0 / kPqM2);
  const double num = std::max(p - kPqC1, 0.0);
  const double den = kPqC2 - kPqC3 * p;
  return kPqPeak * std::pow(num / den, 1.0 / kPqM1);
}

double pq_oetf(double nits) {
  const double y = std::pow(std::max(nits, 0.0) / kPqPeak, kPqM1);
  return std::pow((kPqC1 + kPqC2 * y) / (1.0 + kPqC3 * y), kPqM2);
}

double eotf(const TransferFunction& tf, double code) {
  if (!(code >= 0.0 && code <= 1.0)) {
    throw Error(Errc::CodeOutOfRange, "code " + std::to_string(code) + " outside [0,1]");
  }
  switch (tf.kind) {
    case TransferKind::Gamma: return tf.peak_nits * std::pow(code, tf.gamma);
    case TransferKind::Srgb: return tf.peak_nits * srgb_to_linear(code);
    case TransferKind::Pq:
    case TransferKind::Pu: return pq_eotf(code);
    case TransferKind::LogN: return tf.peak_nits * std::pow(10.0, tf.decades * (code - 1.0));
  }
  return 0.0;
}

double oetf(const TransferFunction& tf, double luminance) {
  if (std::isnan(luminance)) throw Error(Errc::NonFiniteSample, "luminance is NaN");
  if (luminance < 0.0) throw Error(Errc::NegativeLuminance, "luminance must be non-negative");
  if (tf.absolute() ? luminance >= 10000.0 : luminance >= tf.peak_nits) return 1.0;
  const double rel = luminance / tf.peak_nits;
  switch (tf.kind) {
    case TransferKind::Gamma: return std::pow(rel, 1.0 / tf.gamma);
    case TransferKind::Srgb: return linear_to_srgb(rel);
    case TransferKind::Pq:
    case TransferKind::Pu: return std::min(pq_oetf(luminance), 1.0);
    case TransferKind::LogN:
      if (rel <= 0.0) return 0.0;
      return std::clamp(1.0 + std::log10(rel) / tf.decades, 0.0, 1.0);
  }
  return 0.0;
}

namespace {
const double kPu01 = pq_oetf(0.1);
const double kPu80 = pq_oetf(80.0);
}  // namespace

double pu_encode(double nits) {
  return 255.0 * (pq_oetf(std::max(nits, 0.0)) - kPu01) / (kPu80 - kPu01);
}

double pu_decode(double pu) { return pq_eotf(pu / 255.0 * (kPu80 - kPu01) + kPu01); }

namespace {

void check_bits(unsigned bits) {
  if (bits < 1 || bits > 16) throw Error(Errc::BadParameter, "bits must be in [1,16]");
}

}  // namespace

double max_step_ratio(const TransferFunction& tf, unsigned bits, double lo, double hi) {
  check_bits(bits);
  const std::uint32_t levels = (1u << bits) - 1;
  double worst = 1.0;
  double prev = eotf(tf, 0.0);
  for (std::uint32_t k = 1; k <= levels; ++k) {
    const double cur = eotf(tf, static_cast<double>(k) / levels);
    if (prev > 0.0 && prev >= lo && prev <= hi) worst = std::max(worst, cur / prev);
    prev = cur;
  }
  return worst;
}

Quantization quantize(const TransferFunction& tf, std::span<const double> luminances,
                      unsigned bits) {
  check_bits(bits);
  const double levels = static_cast<double>((1u << bits) - 1);
  Quantization q;
  q.bits = bits;
  q.codes.reserve(luminances.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double l : luminances) {
    q.codes.push_back(static_cast<std::uint32_t>(std::lround(oetf(tf, l) * levels)));
    if (l > 0.0) {
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
  }
  q.max_step_ratio = hi > 0.0 ? max_step_ratio(tf, bits, lo, hi) : 1.0;
  return q;
}

std::vector<double> dequantize(const TransferFunction& tf, std::span<const std::uint32_t> codes,
                               unsigned bits) {
  check_bits(bits);
  const double levels = static_cast<double>((1u << bits) - 1);
  std::vector<double> out;
  out.reserve(codes.size());
  for (auto c : codes) out.push_back(eotf(tf, std::min(static_cast<double>(c), levels) / levels));
  return out;
}

}  // namespace hdrkit
