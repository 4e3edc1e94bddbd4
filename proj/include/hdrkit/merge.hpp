#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hdrkit/image.hpp"

namespace hdrkit {

/// Differently exposed captures of one scene. Times are in seconds.
struct ExposureStack {
  std::vector<SdrImage> frames;
  std::vector<double> times;

  /// Throws BadParameter / ShapeMismatch on an inconsistent stack.
  void validate() const;
  std::size_t size() const { return frames.size(); }
};

struct WeightFunction {
  std::array<double, 256> w{};

  /// Triangle peaking in the middle of the code range, zero at 0 and 255.
  static WeightFunction hat();
};

/// g(z): log exposure producing code z.
struct ResponseCurve {
  std::array<double, 256> g{};
  double lambda = 0.0;

  /// g(z) = gamma * ln(z / 255); code 0 takes the value of half a code step.
  static ResponseCurve from_gamma(double gamma);
  bool is_monotone() const;
};

struct ResponseOptions {
  /// Smoothness weight relative to the mean data residual, applied as
  /// lambda^2 * w(z)^2 * g''(z)^2 per code.
  double lambda = 20.0;
  std::size_t sample_count = 512;
  std::uint64_t seed = 0x5eed;
};

/// Least-squares response recovery with a smoothness penalty and g(128) = 0,
/// followed by an isotonic projection. One curve is shared by all channels.
ResponseCurve estimate_response(const ExposureStack& stack,
                                const WeightFunction& weight = WeightFunction::hat(),
                                const ResponseOptions& options = {});

struct MergeResult {
  HdrImage image;  ///< relative radiance
  /// 1 where no frame had a usable code in some channel.
  std::vector<std::uint8_t> saturation_mask;
  std::size_t flagged = 0;
};

/// Text form: 256 whitespace-separated values of g, code 0 first.
std::string format_response_curve(const ResponseCurve& curve);
/// Throws BadParameter on anything but 256 finite numbers.
ResponseCurve parse_response_curve(std::string_view text);

MergeResult merge(const ExposureStack& stack, const ResponseCurve& curve,
                  const WeightFunction& weight = WeightFunction::hat());

// --- global alignment ---------------------------------------------------------

struct Shift {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

struct AlignOptions {
  int levels = 5;          ///< pyramid depth; reachable shift is 2^levels - 1
  int exclusion = 4;       ///< codes this close to the median are ignored
  double max_error = 0.2;  ///< bitmap disagreement above this is unreliable
  bool strict = false;     ///< throw AlignmentUnreliable instead of falling back
};

struct AlignResult {
  ExposureStack stack;        ///< frames translated onto the reference
  std::vector<Shift> shifts;  ///< per input frame; applied as out(x,y) = in(x-dx, y-dy)
  std::vector<double> errors; ///< final bitmap disagreement per frame
  std::size_t reference = 0;  ///< index of the middle exposure
  /// 0 where some frame had to be edge-extended.
  std::vector<std::uint8_t> valid;
  std::vector<std::string> warnings;
};

AlignResult align_global(const ExposureStack& stack, const AlignOptions& options = {});

/// Translates an 8-bit frame with edge replication.
SdrImage translate(const SdrImage& frame, Shift shift);

enum class Misalignment : std::uint8_t { None, Global, Local, Combined };

struct MisalignmentReport {
  Misalignment kind = Misalignment::None;
  int max_shift = 0;            ///< largest |dx| or |dy| found
  double residual_fraction = 0; ///< pixels still disagreeing after alignment
};

/// Classifies an aligned stack against the taxonomy of ghosting causes.
/// Only global motion is corrected; local motion is reported, not removed.
MisalignmentReport classify_misalignment(const AlignResult& aligned,
                                         double local_threshold = 0.05);

std::string_view misalignment_name(Misalignment kind);

}  // namespace hdrkit
