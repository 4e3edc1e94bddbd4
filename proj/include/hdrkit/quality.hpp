#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdrkit/image.hpp"

namespace hdrkit {

enum class MetricCalibration : std::uint8_t { DisplayReferred, LuminanceIndependent };

std::string_view calibration_name(MetricCalibration c);

struct QualityReport {
  std::string metric;
  /// PSNR of identical inputs is +infinity; everything else is finite.
  double score = 0.0;
  MetricCalibration calibration = MetricCalibration::DisplayReferred;
  std::optional<Raster> map;
  std::vector<std::pair<std::string, double>> extras;
};

/// PSNR on PU-encoded luminance; peak = PU(10000) - PU(0.1). Luminance is
/// clamped to [0, 10000] nits. Map: absolute PU difference.
QualityReport pu_psnr(const HdrImage& ref, const HdrImage& test);
/// PSNR on log10 luminance. Both images are floored at 1e-6 of the reference
/// maximum and the peak is those 6 decades. Accepts relative images.
QualityReport log_psnr(const HdrImage& ref, const HdrImage& test);
/// Mean SSIM on PU luminance with an 11x11 Gaussian window (sigma 1.5),
/// renormalized at the borders. Map: per-pixel SSIM.
QualityReport pu_ssim(const HdrImage& ref, const HdrImage& test);

// --- dynamic-range-independent contrast classifier ------------------------------

enum class DriLabel : std::uint8_t { None, Loss, Amplification, Reversal };

std::string_view dri_label_name(DriLabel label);

struct DriOptions {
  double pixels_per_degree = 30.0;
  /// Adaptation luminance for the sensitivity model. It is shared by both
  /// images and does not depend on their levels, which keeps the labels
  /// invariant to luminance scaling.
  double adaptation_nits = 100.0;
  double psychometric_slope = 3.5;
  /// Multiplies every band threshold.
  double threshold_scale = 1.0;
};

struct DriBand {
  int scale = 0;          ///< 0 is the finest
  int orientation = 0;    ///< multiples of 45 degrees
  double frequency = 0;   ///< cycles per pixel
  double threshold = 0;   ///< log10 contrast amplitude
  std::vector<DriLabel> labels;
  std::vector<float> probability;
};

struct DriMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<DriBand> bands;  ///< 4 scales x 4 orientations

  std::size_t count(DriLabel label) const;
  /// Per-pixel label of the most probable change over all bands.
  std::vector<DriLabel> summary() const;
};

/// Contrast sensitivity (Barten's simplified formula) at `cpd` cycles per
/// degree and `nits` adaptation luminance for a 40 degree field.
double contrast_sensitivity(double cpd, double nits);

/// Bands are even/odd Gabor pairs on log10 luminance with zero DC response.
/// A band contrast is visible when its amplitude exceeds the threshold
/// derived from the sensitivity at the band frequency. Loss: visible only in
/// ref. Amplification: visible only in test. Reversal: visible in both with
/// local phase differing by more than 90 degrees.
DriMap dri_classify(const HdrImage& ref, const HdrImage& test, const DriOptions& options = {});

QualityReport dri_report(const DriMap& map);

// --- file-level comparison -------------------------------------------------------

enum class Metric : std::uint8_t { PuPsnr, LogPsnr, PuSsim, Dri };

std::string_view metric_name(Metric m);
/// pu-psnr | log-psnr | pu-ssim | dri
Metric metric_from_name(std::string_view name);

struct CompareOptions {
  /// Nits of relative 1.0 for inputs that carry no absolute calibration.
  std::optional<double> nits;
  DriOptions dri;
};

std::vector<QualityReport> compare(const std::filesystem::path& ref_path,
                                   const std::filesystem::path& test_path,
                                   const std::vector<Metric>& metrics,
                                   const CompareOptions& options = {});

/// One `metric=... score=... calibration=... key=value...` line per report.
std::string format_reports_kv(const std::vector<QualityReport>& reports);
std::string format_reports_json(const std::vector<QualityReport>& reports);

}  // namespace hdrkit
