#include "hdrkit/merge.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include "hdrkit/error.hpp"
#include "hdrkit/parallel.hpp"

namespace hdrkit {

namespace {

constexpr int kPivot = 128;

std::vector<std::size_t> order_by_time(const std::vector<double>& times) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  return order;
}

// Pool-adjacent-violators projection onto non-decreasing sequences.
void isotonic(std::array<double, 256>& g) {
  std::vector<double> value;
  std::vector<std::size_t> count;
  for (double v : g) {
    value.push_back(v);
    count.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] > value.back()) {
      const std::size_t n = count.back() + count[count.size() - 2];
      const double merged = (value[value.size() - 2] * static_cast<double>(count[count.size() - 2]) +
                             value.back() * static_cast<double>(count.back())) /
                            static_cast<double>(n);
      value.pop_back();
      count.pop_back();
      value.back() = merged;
      count.back() = n;
    }
  }
  std::size_t k = 0;
  for (std::size_t b = 0; b < value.size(); ++b) {
    for (std::size_t i = 0; i < count[b]; ++i) g[k++] = value[b];
  }
}

}  // namespace

void ExposureStack::validate() const {
  if (frames.empty()) throw Error(Errc::BadParameter, "exposure stack is empty");
  if (frames.size() != times.size()) {
    throw Error(Errc::BadParameter, "stack has " + std::to_string(frames.size()) + " frames but " +
                                        std::to_string(times.size()) + " exposure times");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].empty()) throw Error(Errc::BadDimensions, "frame " + std::to_string(i) + " is empty");
    if (frames[i].width() != frames[0].width() || frames[i].height() != frames[0].height()) {
      throw Error(Errc::ShapeMismatch, "frame " + std::to_string(i) + " differs in size from frame 0");
    }
    if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
      throw Error(Errc::BadParameter, "exposure time " + std::to_string(i) + " must be positive");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (times[j] == times[i]) throw Error(Errc::BadParameter, "exposure times must be distinct");
    }
  }
}

WeightFunction WeightFunction::hat() {
  WeightFunction f;
  for (int z = 0; z < 256; ++z) f.w[z] = (z <= 127 ? z : 255 - z) / 128.0;
  return f;
}

ResponseCurve ResponseCurve::from_gamma(double gamma) {
  ResponseCurve c;
  for (int z = 0; z < 256; ++z) c.g[z] = gamma * std::log(std::max(z, 1) / 255.0);
  c.g[0] = gamma * std::log(0.5 / 255.0);
  return c;
}

bool ResponseCurve::is_monotone() const {
  for (int z = 1; z < 256; ++z) {
    if (!(g[z] >= g[z - 1])) return false;
  }
  return true;
}

std::string format_response_curve(const ResponseCurve& curve) {
  std::string out;
  char buf[32];
  for (double v : curve.g) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  }
  return out;
}

ResponseCurve parse_response_curve(std::string_view text) {
  std::istringstream in{std::string(text)};
  ResponseCurve c;
  std::size_t n = 0;
  std::string token;
  while (in >> token) {
    if (n == 256) throw Error(Errc::BadParameter, "response curve has more than 256 values");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) {
      throw Error(Errc::BadParameter, "bad response curve value '" + token + "'");
    }
    c.g[n++] = v;
  }
  if (n != 256) throw Error(Errc::BadParameter, "response curve needs 256 values, got " + std::to_string(n));
  return c;
}

ResponseCurve estimate_response(const ExposureStack& stack, const WeightFunction& weight,
                                const ResponseOptions& options) {
  stack.validate();
  if (stack.size() < 2) throw Error(Errc::InsufficientSamples, "response recovery needs at least 2 frames");
  if (!(options.lambda >= 0.0)) throw Error(Errc::BadParameter, "lambda must be non-negative");
  const auto order = order_by_time(stack.times);
  const SdrImage& mid = stack.frames[order[order.size() / 2]];
  const std::size_t pixels = mid.pixel_count();

  // Stratify candidate sites by the middle exposure's green code, then draw
  // round-robin across strata so the samples span the code range.
  std::array<std::vector<std::size_t>, 256> strata;
  for (std::size_t i = 0; i < pixels; ++i) strata[mid.data()[3 * i + 1]].push_back(i);
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> sites;
  const std::size_t wanted = std::min(options.sample_count, pixels);
  while (sites.size() < wanted) {
    bool any = false;
    for (auto& s : strata) {
      if (s.empty() || sites.size() >= wanted) continue;
      const std::size_t k = static_cast<std::size_t>(rng() % s.size());
      sites.push_back(s[k]);
      s[k] = s.back();
      s.pop_back();
      any = true;
    }
    if (!any) break;
  }

  // Normal equations for g with ln E eliminated per (site, channel): each
  // group contributes sum w y^2 - (sum w y)^2 / W with y = g(z) - ln t.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(256, 256);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(256);
  std::size_t usable = 0;
  double total_weight = 0.0;
  Eigen::VectorXd u(256);
  for (std::size_t site : sites) {
    for (int c = 0; c < 3; ++c) {
      u.setZero();
      double W = 0.0, wl = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < stack.size(); ++j) {
        const int z = stack.frames[j].data()[3 * site + static_cast<std::size_t>(c)];
        const double w = weight.w[z];
        if (w <= 0.0) continue;
        const double lt = std::log(stack.times[j]);
        A(z, z) += w;
        b(z) += w * lt;
        u(z) += w;
        W += w;
        wl += w * lt;
        ++n;
      }
      if (n < 2) continue;
      usable += static_cast<std::size_t>(n);
      total_weight += W;
      A.noalias() -= (u * u.transpose()) / W;
      b -= u * (wl / W);
    }
  }
  if (usable < 2 * 255) {
    throw Error(Errc::InsufficientSamples,
                std::to_string(usable) + " usable observations; need at least " + std::to_string(2 * 255));
  }
  // The data term is a weighted mean so lambda does not depend on sample count.
  A /= total_weight;
  b /= total_weight;
  const double l2 = options.lambda * options.lambda;
  for (int z = 1; z < 255; ++z) {
    const double s = l2 * weight.w[z] * weight.w[z];
    const int idx[3] = {z - 1, z, z + 1};
    const double coef[3] = {1.0, -2.0, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) A(idx[r], idx[k]) += s * coef[r] * coef[k];
    }
  }

  // Pin g(128) = 0 by dropping its row and column.
  Eigen::MatrixXd Ar(255, 255);
  Eigen::VectorXd br(255);
  auto map = [](int z) { return z < kPivot ? z : z + 1; };
  for (int r = 0; r < 255; ++r) {
    br(r) = b(map(r));
    for (int k = 0; k < 255; ++k) Ar(r, k) = A(map(r), map(k));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ar);
  qr.setThreshold(1e-12);
  if (qr.rank() < 255) {
    throw Error(Errc::InsufficientSamples, "response system is rank deficient (rank " +
                                               std::to_string(qr.rank()) + " of 255)");
  }
  const Eigen::VectorXd x = qr.solve(br);

  ResponseCurve curve;
  curve.lambda = options.lambda;
  for (int r = 0; r < 255; ++r) curve.g[map(r)] = x(r);
  curve.g[kPivot] = 0.0;
  isotonic(curve.g);
  const double pivot = curve.g[kPivot];
  for (double& v : curve.g) v -= pivot;
  return curve;
}

MergeResult merge(const ExposureStack& stack, const ResponseCurve& curve, const WeightFunction& weight) {
  stack.validate();
  const auto order = order_by_time(stack.times);
  const std::size_t n = order.size();
  const double t_ref = stack.times[order.front()];
  // Offsets relative to the shortest exposure keep power-of-two time scalings exact.
  std::vector<double> rel(n);
  for (std::size_t k = 0; k < n; ++k) rel[k] = std::log(stack.times[order[k]] / t_ref);

  const std::size_t w = stack.frames[0].width(), h = stack.frames[0].height();
  std::vector<float> data(3 * w * h);
  std::vector<std::uint8_t> mask(w * h, 0);
  parallel_for(0, h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      for (std::size_t c = 0; c < 3; ++c) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const int z = stack.frames[order[k]].data()[3 * p + c];
          const double wz = weight.w[z];
          num += wz * (curve.g[z] - rel[k]);
          den += wz;
        }
        double a;
        if (den > 0.0) {
          a = num / den;
        } else {
          const int z_short = stack.frames[order.front()].data()[3 * p + c];
          if (z_short >= 128) {
            a = curve.g[z_short];
          } else {
            a = curve.g[stack.frames[order.back()].data()[3 * p + c]] - rel.back();
          }
          mask[p] = 1;
        }
        data[3 * p + c] = static_cast<float>(std::exp(a) / t_ref);
      }
    }
  });
  MergeResult out{HdrImage(w, h, std::move(data), Calibration::Relative), std::move(mask), 0};
  out.flagged = static_cast<std::size_t>(std::count(out.saturation_mask.begin(), out.saturation_mask.end(), 1));
  return out;
}

// ---------------------------------------------------------------------------
// Median threshold bitmap alignment
// ---------------------------------------------------------------------------

namespace {

struct Gray {
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> v;
  std::uint8_t at(std::size_t x, std::size_t y) const { return v[y * w + x]; }
};

Gray to_gray(const SdrImage& f) {
  Gray g{f.width(), f.height(), std::vector<std::uint8_t>(f.pixel_count())};
  const auto d = f.data();
  for (std::size_t i = 0; i < g.v.size(); ++i) {
    g.v[i] = static_cast<std::uint8_t>((54u * d[3 * i] + 183u * d[3 * i + 1] + 19u * d[3 * i + 2]) >> 8);
  }
  return g;
}

Gray halve(const Gray& g) {
  Gray o{g.w / 2, g.h / 2, {}};
  o.v.resize(o.w * o.h);
  for (std::size_t y = 0; y < o.h; ++y) {
    for (std::size_t x = 0; x < o.w; ++x) {
      const unsigned s = g.at(2 * x, 2 * y) + g.at(2 * x + 1, 2 * y) + g.at(2 * x, 2 * y + 1) +
                         g.at(2 * x + 1, 2 * y + 1);
      o.v[y * o.w + x] = static_cast<std::uint8_t>(s / 4);
    }
  }
  return o;
}

struct Bitmaps {
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> threshold;  // 1 above the median
  std::vector<std::uint8_t> keep;       // 1 outside the exclusion band
};

Bitmaps bitmaps(const Gray& g, int exclusion) {
  std::array<std::size_t, 256> hist{};
  for (auto v : g.v) ++hist[v];
  std::size_t acc = 0;
  int median = 0;
  for (int z = 0; z < 256; ++z) {
    acc += hist[z];
    if (2 * acc >= g.v.size()) {
      median = z;
      break;
    }
  }
  Bitmaps b{g.w, g.h, std::vector<std::uint8_t>(g.v.size()), std::vector<std::uint8_t>(g.v.size())};
  for (std::size_t i = 0; i < g.v.size(); ++i) {
    b.threshold[i] = g.v[i] > median;
    b.keep[i] = std::abs(static_cast<int>(g.v[i]) - median) > exclusion;
  }
  return b;
}

struct Score {
  std::size_t disagree = 0;
  std::size_t confident = 0;
  std::size_t overlap = 0;
};

// Compares ref(x, y) against frame(x - dx, y - dy) over the overlap.
Score score(const Bitmaps& ref, const Bitmaps& img, int dx, int dy) {
  Score s;
  const long W = static_cast<long>(ref.w), H = static_cast<long>(ref.h);
  for (long y = std::max(0L, static_cast<long>(dy)); y < std::min(H, H + dy); ++y) {
    for (long x = std::max(0L, static_cast<long>(dx)); x < std::min(W, W + dx); ++x) {
      const std::size_t a = static_cast<std::size_t>(y * W + x);
      const std::size_t b = static_cast<std::size_t>((y - dy) * W + (x - dx));
      ++s.overlap;
      if (ref.keep[a] && img.keep[b]) {
        ++s.confident;
        s.disagree += ref.threshold[a] != img.threshold[b];
      }
    }
  }
  return s;
}

double fraction(const Score& s) {
  return s.overlap == 0 ? 1.0 : static_cast<double>(s.disagree) / static_cast<double>(s.overlap);
}

}  // namespace

SdrImage translate(const SdrImage& frame, Shift shift) {
  const long W = static_cast<long>(frame.width()), H = static_cast<long>(frame.height());
  std::vector<std::uint8_t> out(frame.data().size());
  for (long y = 0; y < H; ++y) {
    const long sy = std::clamp(y - shift.dy, 0L, H - 1);
    for (long x = 0; x < W; ++x) {
      const long sx = std::clamp(x - shift.dx, 0L, W - 1);
      for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>(3 * (y * W + x) + c)] = frame.data()[static_cast<std::size_t>(3 * (sy * W + sx) + c)];
      }
    }
  }
  return SdrImage(frame.width(), frame.height(), std::move(out), frame.transfer_tag());
}

AlignResult align_global(const ExposureStack& stack, const AlignOptions& options) {
  stack.validate();
  if (stack.size() < 2) throw Error(Errc::BadParameter, "alignment needs at least 2 frames");
  if (options.levels < 1 || options.levels > 12) throw Error(Errc::BadParameter, "levels must be in [1,12]");
  const auto order = order_by_time(stack.times);
  AlignResult r;
  r.reference = order[order.size() / 2];
  const std::size_t w = stack.frames[0].width(), h = stack.frames[0].height();
  int levels = options.levels;
  while (levels > 1 && (std::min(w, h) >> (levels - 1)) < 8) --levels;
  const int limit = (1 << levels) - 1;

  auto pyramid = [&](const SdrImage& f) {
    std::vector<Bitmaps> p;
    Gray g = to_gray(f);
    for (int l = 0; l < levels; ++l) {
      p.push_back(bitmaps(g, options.exclusion));
      if (l + 1 < levels) g = halve(g);
    }
    return p;
  };
  const auto ref = pyramid(stack.frames[r.reference]);

  r.shifts.assign(stack.size(), {});
  r.errors.assign(stack.size(), 0.0);
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i == r.reference) continue;
    const auto img = pyramid(stack.frames[i]);
    Shift s;
    for (int l = levels - 1; l >= 0; --l) {
      const Shift centre{2 * s.dx, 2 * s.dy};
      Shift best = centre;
      double best_err = fraction(score(ref[l], img[l], centre.dx, centre.dy));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double e = fraction(score(ref[l], img[l], centre.dx + dx, centre.dy + dy));
          if (e < best_err) {
            best_err = e;
            best = {centre.dx + dx, centre.dy + dy};
          }
        }
      }
      s = best;
    }
    const Score fin = score(ref[0], img[0], s.dx, s.dy);
    const double err = fin.confident == 0 ? 1.0
                                          : static_cast<double>(fin.disagree) / static_cast<double>(fin.confident);
    std::string why;
    if (fin.confident * 100 < fin.overlap) {
      why = "frame has no contrast around its median";
    } else if (std::abs(s.dx) >= limit || std::abs(s.dy) >= limit) {
      why = "shift reached the pyramid range of " + std::to_string(limit) + " px";
    } else if (err > options.max_error) {
      why = "bitmap disagreement " + std::to_string(err) + " exceeds " + std::to_string(options.max_error);
    }
    if (!why.empty()) {
      const std::string msg = "frame " + std::to_string(i) + ": " + why;
      if (options.strict) throw Error(Errc::AlignmentUnreliable, msg);
      r.warnings.push_back(std::string(error_name(Errc::AlignmentUnreliable)) + ": " + msg + "; using zero shift");
      s = {};
    }
    r.shifts[i] = s;
    r.errors[i] = err;
  }

  r.stack.times = stack.times;
  r.valid.assign(w * h, 1);
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const Shift s = r.shifts[i];
    r.stack.frames.push_back(s == Shift{} ? stack.frames[i] : translate(stack.frames[i], s));
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const long sx = static_cast<long>(x) - s.dx, sy = static_cast<long>(y) - s.dy;
        if (sx < 0 || sy < 0 || sx >= static_cast<long>(w) || sy >= static_cast<long>(h)) r.valid[y * w + x] = 0;
      }
    }
  }
  return r;
}

MisalignmentReport classify_misalignment(const AlignResult& aligned, double local_threshold) {
  MisalignmentReport rep;
  for (std::size_t i = 0; i < aligned.shifts.size(); ++i) {
    rep.max_shift = std::max({rep.max_shift, std::abs(aligned.shifts[i].dx), std::abs(aligned.shifts[i].dy)});
    if (i != aligned.reference) rep.residual_fraction = std::max(rep.residual_fraction, aligned.errors[i]);
  }
  const bool global = rep.max_shift > 0;
  const bool local = rep.residual_fraction > local_threshold;
  rep.kind = global ? (local ? Misalignment::Combined : Misalignment::Global)
                    : (local ? Misalignment::Local : Misalignment::None);
  return rep;
}

std::string_view misalignment_name(Misalignment kind) {
  switch (kind) {
    case Misalignment::None: return "none";
    case Misalignment::Global: return "global";
    case Misalignment::Local: return "local";
    case Misalignment::Combined: return "local+global";
  }
  return "none";
}

}  // namespace hdrkit
