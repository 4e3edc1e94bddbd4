#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hdrkit/cli.hpp"
#include "hdrkit/error.hpp"
#include "hdrkit/expand.hpp"
#include "hdrkit/io.hpp"
#include "hdrkit/layered.hpp"
#include "hdrkit/quality.hpp"
#include "hdrkit/tonemap.hpp"
#include "hdrkit/transfer.hpp"

namespace py = pybind11;
using namespace hdrkit;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

void check_rgb(const py::buffer_info& info) {
  if (info.ndim != 3 || info.shape[2] != 3) throw Error(Errc::BadDimensions, "expected an (height, width, 3) array");
}

HdrImage to_image(const FloatArray& a, bool absolute) {
  const auto info = a.request();
  check_rgb(info);
  const auto* p = static_cast<const float*>(info.ptr);
  std::vector<float> data(p, p + info.size);
  bool negative = false;
  for (float v : data) negative = negative || v < 0.0f;
  return HdrImage(static_cast<std::size_t>(info.shape[1]), static_cast<std::size_t>(info.shape[0]), std::move(data),
                  absolute ? Calibration::Absolute : Calibration::Relative, negative);
}

FloatArray from_image(const HdrImage& img) {
  FloatArray out({img.height(), img.width(), std::size_t{3}});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

SdrImage to_sdr(const ByteArray& a) {
  const auto info = a.request();
  check_rgb(info);
  const auto* p = static_cast<const std::uint8_t*>(info.ptr);
  return SdrImage(static_cast<std::size_t>(info.shape[1]), static_cast<std::size_t>(info.shape[0]),
                  std::vector<std::uint8_t>(p, p + info.size), TransferTag::Srgb);
}

ByteArray from_sdr(const SdrImage& img) {
  ByteArray out({img.height(), img.width(), std::size_t{3}});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

ColorCorrectionParams color(std::optional<double> saturation, const std::string& formula) {
  ColorCorrectionParams c;
  c.p = saturation;
  if (formula == "eq4") {
    c.formula = ColorFormula::LinearBlend;
  } else if (formula != "eq3") {
    throw Error(Errc::BadParameter, "formula must be eq3 or eq4");
  }
  return c;
}

template <class F>
py::array_t<double> vectorized(F f, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
  py::array_t<double> out(x.request().shape);
  const double* in = x.data();
  double* o = out.mutable_data();
  for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = f(in[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_hdrkit, m) {
  m.doc() = "HDR imaging toolkit";

  // The message starts with the error name, e.g. "MissingExtension: ...".
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("read_image", [](const std::string& path) {
    const HdrImage img = load_image(path);
    return py::make_tuple(from_image(img), img.calibration() == Calibration::Absolute);
  }, py::arg("path"), "Returns (pixels, absolute).");
  m.def("write_image", [](const std::string& path, const FloatArray& pixels, bool absolute) {
    save_image(path, to_image(pixels, absolute));
  }, py::arg("path"), py::arg("pixels"), py::arg("absolute") = false);

  m.def("pq_eotf", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x) { return vectorized(pq_eotf, x); });
  m.def("pq_oetf", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x) { return vectorized(pq_oetf, x); });
  m.def("pu_encode", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x) { return vectorized(pu_encode, x); });

  m.def("tonemap", [](const FloatArray& pixels, const std::string& op, std::optional<double> saturation,
                      const std::string& formula, double key, std::optional<double> white) {
    const HdrImage img = to_image(pixels, false);
    ToneMapResult r;
    if (op == "local") {
      LocalToneOptions o;
      o.color = color(saturation, formula);
      r = tonemap_local(img, o);
    } else if (op == "global") {
      GlobalToneOptions o;
      o.key = key;
      o.white_point = white;
      o.color = color(saturation, formula);
      r = tonemap_global(img, o);
    } else {
      throw Error(Errc::BadParameter, "op must be global or local");
    }
    return from_sdr(r.sdr);
  }, py::arg("pixels"), py::arg("op") = "global", py::arg("saturation") = py::none(), py::arg("formula") = "eq3",
     py::arg("key") = 0.18, py::arg("white") = py::none());

  m.def("expand", [](const ByteArray& codes, double peak, double alpha, bool prefilter) {
    ExpansionParams p;
    p.target_peak = peak;
    p.alpha = alpha;
    if (prefilter) p.prefilter = Prefilter{};
    const ExpansionResult r = expand(to_sdr(codes), p);
    return from_image(r.image);
  }, py::arg("codes"), py::arg("peak") = 1000.0, py::arg("alpha") = 1.6, py::arg("prefilter") = false);

  auto metric = [&m](const char* name, QualityReport (*f)(const HdrImage&, const HdrImage&), bool absolute) {
    m.def(name, [f, absolute](const FloatArray& ref, const FloatArray& test) {
      return f(to_image(ref, absolute), to_image(test, absolute)).score;
    }, py::arg("ref"), py::arg("test"));
  };
  metric("pu_psnr", pu_psnr, true);
  metric("pu_ssim", pu_ssim, true);
  metric("log_psnr", log_psnr, false);

  m.def("pack", [](const FloatArray& pixels, const std::string& mode) {
    PackOptions o;
    o.mode = layer_mode_from_name(mode);
    const LayeredStream s = pack(to_image(pixels, false), o);
    return py::bytes(reinterpret_cast<const char*>(s.bytes.data()), s.bytes.size());
  }, py::arg("pixels"), py::arg("mode") = "lossless");
  m.def("unpack", [](const py::bytes& data) {
    const std::string_view v = data;
    return from_image(unpack(std::span(reinterpret_cast<const std::uint8_t*>(v.data()), v.size())));
  });
  m.def("extract_base", [](const py::bytes& data) {
    const std::string_view v = data;
    return from_sdr(extract_base(std::span(reinterpret_cast<const std::uint8_t*>(v.data()), v.size())));
  });

  m.def("run", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
