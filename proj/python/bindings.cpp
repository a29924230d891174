#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "proid/error.hpp"
#include "proid/io.hpp"
#include "proid/metrics.hpp"
#include "proid/phantom.hpp"
#include "proid/preprocess.hpp"
#include "proid/sequence.hpp"

namespace py = pybind11;
using namespace proid;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const FloatArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.pixels().begin());
  return img;
}

FloatArray to_array(const Image& img) {
  FloatArray a({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), a.mutable_data());
  return a;
}

std::vector<Point> to_points(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw py::value_error("expected an (N, 2) array");
  std::vector<Point> pts;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts.push_back({a.at(i, 0), a.at(i, 1)});
  return pts;
}

ScanSequence to_sequence(const FloatArray& frames, double spacing, double interval) {
  if (frames.ndim() != 3) throw py::value_error("frames must be (T, H, W)");
  ScanSequence seq;
  seq.pixel_spacing_mm = spacing;
  seq.frame_interval_s = interval;
  const auto h = static_cast<int>(frames.shape(1));
  const auto w = static_cast<int>(frames.shape(2));
  const float* src = frames.data();
  for (py::ssize_t t = 0; t < frames.shape(0); ++t) {
    Image img(w, h);
    std::copy(src, src + img.size(), img.pixels().begin());
    src += img.size();
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

Json parse(const std::string& text) { return text.empty() ? Json(nullptr) : Json::parse(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the proid segmentation pipeline";

  static py::exception<Error> error_type(m, "ProidError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("polar_angle", &polar_angle, py::arg("y"), py::arg("x"));
  m.def(
      "median_filter", [](const FloatArray& a, int kernel) { return to_array(median_filter(to_image(a), kernel)); },
      py::arg("frame"), py::arg("kernel") = 11);
  m.def(
      "apply_ace",
      [](const FloatArray& a, const std::string& uips) {
        return to_array(apply_ace(to_image(a), uips_from_json(Json::parse(uips))));
      },
      py::arg("frame"), py::arg("uips_json"));

  m.def(
      "contour_volume",
      [](const DoubleArray& polygon, std::pair<double, double> mv_a, std::pair<double, double> mv_b,
         double spacing) {
        return contour_volume(to_points(polygon), {mv_a.first, mv_a.second},
                              {mv_b.first, mv_b.second}, spacing);
      },
      py::arg("polygon"), py::arg("mv_a"), py::arg("mv_b"), py::arg("pixel_spacing_mm"));
  m.def(
      "polygon_dice",
      [](const DoubleArray& a, const DoubleArray& b, int width, int height) {
        return dice(rasterize(to_points(a), width, height), rasterize(to_points(b), width, height));
      },
      py::arg("a"), py::arg("b"), py::arg("width"), py::arg("height"));
  m.def("ejection_fraction", &ejection_fraction, py::arg("edv"), py::arg("esv"));

  m.def(
      "segment",
      [](const FloatArray& frames, double spacing, double interval, const std::string& uips,
         const std::string& params) {
        const ScanSequence seq = to_sequence(frames, spacing, interval);
        const UipFrame u = uips_from_json(Json::parse(uips));
        const PipelineParams p = params_from_json(parse(params));
        SegmentationResult r;
        {
          py::gil_scoped_release release;
          r = segment_sequence(seq, u, p);
        }
        return result_to_json(r, spacing).dump();
      },
      py::arg("frames"), py::arg("pixel_spacing_mm"), py::arg("frame_interval_s"),
      py::arg("uips_json"), py::arg("params_json") = "");

  m.def(
      "generate_phantom",
      [](const std::string& spec_json) {
        const PhantomSpec spec = phantom_spec_from_json(parse(spec_json));
        const Phantom ph = generate_phantom(spec);
        const auto& f0 = ph.sequence.frames.front();
        FloatArray frames({static_cast<py::ssize_t>(ph.sequence.size()),
                           static_cast<py::ssize_t>(f0.height()), static_cast<py::ssize_t>(f0.width())});
        float* dst = frames.mutable_data();
        for (const auto& f : ph.sequence.frames) dst = std::copy(f.pixels().begin(), f.pixels().end(), dst);
        Json truth = truth_to_json(truth_from_phantom(spec, ph.truth));
        truth["uips"] = uips_to_json(ph.truth.frames.front().uips);
        truth["measured_cnr"] = ph.truth.measured_cnr;
        truth["spec"] = phantom_spec_to_json(spec);
        return py::make_tuple(frames, truth.dump());
      },
      py::arg("spec_json") = "");

  m.def("default_params", [] { return params_to_json(PipelineParams{}).dump(); });
  m.def("phantom_params", [] { return params_to_json(phantom_pipeline_params()).dump(); });
}
