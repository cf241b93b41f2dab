#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

#include "pradkit/contour.hpp"
#include "pradkit/denoise.hpp"
#include "pradkit/error.hpp"
#include "pradkit/fusion.hpp"
#include "pradkit/io.hpp"
#include "pradkit/keyvalue.hpp"
#include "pradkit/kinematics.hpp"
#include "pradkit/phantom.hpp"
#include "pradkit/visar.hpp"

namespace py = pybind11;
using namespace pradkit;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

FrameMeta make_meta(double pitch, double time_us, double exposure_us) {
  FrameMeta m;
  m.pixel_pitch_mm = pitch;
  m.time_us = time_us;
  m.exposure_us = exposure_us;
  return m;
}

std::pair<std::size_t, std::size_t> shape2d(const py::array& a) {
  if (a.ndim() != 2) {
    throw ConfigError("expected a 2-D array");
  }
  return {static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0))};
}

GrayImage gray_from_array(const DoubleArray& a, double pitch, double time_us, double exposure_us) {
  const auto [w, h] = shape2d(a);
  std::vector<double> px(a.data(), a.data() + a.size());
  return {w, h, std::move(px), make_meta(pitch, time_us, exposure_us)};
}

template <typename T>
py::array_t<T> to_array(std::span<const T> data, std::size_t w, std::size_t h) {
  py::array_t<T> out({h, w});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

py::array_t<double> vec_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

KeyValueFile kv_from_dict(const py::dict& d) {
  KeyValueFile kv;
  for (const auto& [k, v] : d) {
    kv.set(py::str(k), py::str(v));
  }
  return kv;
}

py::dict dict_from_kv(const KeyValueFile& kv) {
  py::dict d;
  for (const auto& [k, v] : kv.entries()) {
    d[py::str(k)] = v;
  }
  return d;
}

py::dict feature_dict(const FeatureSet& f) {
  py::dict d;
  d["plateau_v_km_s"] = f.plateau_v_km_s;
  d["noise_rms_km_s"] = f.noise_rms_km_s;
  d["fluct_amplitude_km_s"] = f.fluct_amplitude_km_s;
  d["first_fluct_t_us"] = f.first_fluct_t_us;
  return d;
}

FluctuationParams fluct_params(double t0, double t1, double k, int m, int w) {
  FluctuationParams p;
  p.baseline_t0 = t0;
  p.baseline_t1 = t1;
  p.k = k;
  p.m = m;
  p.detrend_halfwidth = w;
  return p;
}

std::vector<ApexSample> apex_from_pairs(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<ApexSample> out;
  for (const auto& [t, v] : pairs) out.push_back({t, v});
  return out;
}

std::vector<std::pair<double, double>> apex_to_pairs(const std::vector<ApexSample>& apex) {
  std::vector<std::pair<double, double>> out;
  for (const auto& a : apex) out.emplace_back(a.mid_time_us, a.v_mm_us);
  return out;
}

py::dict truth_dict(const GroundTruth& truth) {
  py::list frames;
  for (const auto& f : truth.frames) {
    py::dict d;
    d["index"] = f.index;
    d["t_start_us"] = f.t_start_us;
    d["t_mid_us"] = f.t_mid_us;
    d["apex_velocity_mm_us"] = f.apex_velocity_mm_us;
    d["bubble_radius_mm"] = f.bubble_radius_mm;
    d["bubble_center_mm"] = py::make_tuple(f.bubble_center.x_mm, f.bubble_center.y_mm);
    d["top_surface_mm"] = vec_array(f.top_surface_mm);
    std::vector<double> cap;
    for (const auto& c : f.bubble_cap_mm) cap.push_back(c.value_or(std::nan("")));
    d["bubble_cap_mm"] = vec_array(cap);
    frames.append(d);
  }
  py::dict out;
  out["x_mm"] = vec_array(truth.x_mm);
  out["frames"] = frames;
  return out;
}

}  // namespace

PYBIND11_MODULE(_pradkit, m) {
  m.doc() = "Radiograph sequence kinematics toolkit";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<IoError>(m, "IoError", data.ptr());
  (void)config;

  py::class_<GrayImage>(m, "GrayImage")
      .def(py::init(&gray_from_array), py::arg("pixels"), py::arg("pixel_pitch_mm") = 0.1,
           py::arg("time_us") = 0.0, py::arg("exposure_us") = 0.0)
      .def_property_readonly("width", &GrayImage::width)
      .def_property_readonly("height", &GrayImage::height)
      .def_property_readonly("pixel_pitch_mm", &GrayImage::pitch_mm)
      .def_property_readonly("time_us", &GrayImage::time_us)
      .def_property_readonly("exposure_us", &GrayImage::exposure_us)
      .def("to_numpy",
           [](const GrayImage& g) { return to_array(g.pixels(), g.width(), g.height()); })
      .def("__repr__", [](const GrayImage& g) {
        return "<GrayImage " + std::to_string(g.width()) + "x" + std::to_string(g.height()) +
               " t=" + format_number(g.time_us()) + "us>";
      });

  py::class_<BinaryImage>(m, "BinaryImage")
      .def(py::init([](const ByteArray& a, double threshold) {
             const auto [w, h] = shape2d(a);
             std::vector<std::uint8_t> fg(a.data(), a.data() + a.size());
             for (auto& v : fg) v = v ? 1 : 0;
             return BinaryImage(w, h, std::move(fg), threshold);
           }),
           py::arg("foreground"), py::arg("threshold_used") = 0.0)
      .def_property_readonly("width", &BinaryImage::width)
      .def_property_readonly("height", &BinaryImage::height)
      .def_property_readonly("threshold_used", &BinaryImage::threshold_used)
      .def("count", &BinaryImage::count)
      .def("to_numpy",
           [](const BinaryImage& b) { return to_array(b.data(), b.width(), b.height()); })
      .def("__eq__", [](const BinaryImage& a, const BinaryImage& b) { return a == b; });

  py::class_<ContourMask>(m, "ContourMask")
      .def_readonly("mask", &ContourMask::mask)
      .def_readonly("source_threshold", &ContourMask::source_threshold)
      .def_property_readonly("connectivity",
                             [](const ContourMask& c) { return static_cast<int>(c.connectivity); });

  py::class_<Contour>(m, "Contour")
      .def_property_readonly("structure_label",
                             [](const Contour& c) { return std::string(to_string(c.structure_label)); })
      .def_property_readonly("points",
                             [](const Contour& c) {
                               std::vector<std::pair<double, double>> pts;
                               for (const auto& p : c.points) pts.emplace_back(p.x_mm, p.y_mm);
                               return pts;
                             })
      .def_property_readonly("pixels",
                             [](const Contour& c) {
                               std::vector<std::pair<std::size_t, std::size_t>> px;
                               for (const auto& p : c.pixels) px.emplace_back(p.col, p.row);
                               return px;
                             })
      .def_readonly("time_us", &Contour::time_us)
      .def_readonly("closed", &Contour::closed);

  py::class_<SurfaceProfile>(m, "SurfaceProfile")
      .def_readonly("time_us", &SurfaceProfile::time_us)
      .def_property_readonly("orientation",
                             [](const SurfaceProfile& p) { return std::string(to_string(p.orientation)); })
      .def_property_readonly("x_mm",
                             [](const SurfaceProfile& p) {
                               std::vector<double> x;
                               for (const auto& c : p.columns) x.push_back(c.x_mm);
                               return vec_array(x);
                             })
      .def_property_readonly("y_mm",
                             [](const SurfaceProfile& p) {
                               std::vector<double> y;
                               for (const auto& c : p.columns) y.push_back(c.y_mm.value_or(std::nan("")));
                               return vec_array(y);
                             })
      .def("present_count", &SurfaceProfile::present_count);

  py::class_<VisarSeries>(m, "VisarSeries")
      .def(py::init([](const std::vector<double>& t, const std::vector<double>& v, double thickness,
                       std::string label) {
             if (t.size() != v.size()) throw ConfigError("time and velocity lengths differ");
             std::vector<VisarSample> s;
             for (std::size_t i = 0; i < t.size(); ++i) s.push_back({t[i], v[i]});
             return VisarSeries(std::move(s), thickness, std::move(label));
           }),
           py::arg("time_us"), py::arg("velocity_km_s"), py::arg("thickness_in") = 1.0,
           py::arg("label") = "")
      .def_property_readonly("thickness_in", &VisarSeries::thickness_in)
      .def_property_readonly("label", &VisarSeries::label)
      .def("__len__", &VisarSeries::size)
      .def_property_readonly("time_us",
                             [](const VisarSeries& s) {
                               std::vector<double> t;
                               for (const auto& x : s.samples()) t.push_back(x.t_us);
                               return vec_array(t);
                             })
      .def_property_readonly("velocity_km_s", [](const VisarSeries& s) {
        std::vector<double> v;
        for (const auto& x : s.samples()) v.push_back(x.v_km_s);
        return vec_array(v);
      });

  py::class_<PhantomSpec>(m, "PhantomSpec")
      .def(py::init([](const py::dict& d) { return PhantomSpec::from_keyvalue(kv_from_dict(d)); }),
           py::arg("values") = py::dict())
      .def_static("load", &PhantomSpec::load)
      .def("to_dict", [](const PhantomSpec& s) { return dict_from_kv(s.to_keyvalue()); })
      .def("frame_start_times", &PhantomSpec::frame_start_times)
      .def("apex_speed", &PhantomSpec::apex_speed)
      .def("surface_y", &PhantomSpec::surface_y);

  // imagecore
  m.def("load_gray",
        [](const std::filesystem::path& p, double pitch, double t, double e) {
          return load_gray(p, make_meta(pitch, t, e));
        },
        py::arg("path"), py::arg("pixel_pitch_mm") = 0.1, py::arg("time_us") = 0.0,
        py::arg("exposure_us") = 0.0);
  m.def("save_gray", &save_gray, py::arg("image"), py::arg("path"));
  m.def("save_mask", &save_mask, py::arg("mask"), py::arg("path"));

  // contour
  m.def("binarize", &binarize, py::arg("image"), py::arg("threshold"));
  m.def("erode_once",
        [](const BinaryImage& b, int c) { return erode_once(b, parse_connectivity(c)); },
        py::arg("mask"), py::arg("connectivity") = 4);
  m.def("one_bit_erosion",
        [](const GrayImage& img, double t, int c) {
          return one_bit_erosion(img, t, parse_connectivity(c));
        },
        py::arg("image"), py::arg("threshold"), py::arg("connectivity") = 4);
  m.def("threshold_sweep",
        [](const GrayImage& img, const std::vector<double>& ts, int c) {
          return threshold_sweep(img, ts, parse_connectivity(c));
        },
        py::arg("image"), py::arg("thresholds"), py::arg("connectivity") = 4);
  m.def("select_component",
        [](const BinaryImage& b, std::optional<std::pair<std::size_t, std::size_t>> seed) {
          ComponentMode mode = LargestComponent{};
          if (seed) mode = SeededComponent{{seed->first, seed->second}};
          return select_component(b, mode);
        },
        py::arg("mask"), py::arg("seed") = py::none());
  m.def("trace_boundary",
        [](const ContourMask& mask, std::pair<std::size_t, std::size_t> anchor,
           const std::string& label) {
          return trace_boundary(mask, {anchor.first, anchor.second}, parse_structure_label(label));
        },
        py::arg("contour"), py::arg("anchor"), py::arg("label") = "unknown");

  // denoise
  m.def("diffuse",
        [](const GrayImage& img, const py::object& g, int steps, double dt) {
          if (py::isinstance<py::float_>(g) || py::isinstance<py::int_>(g)) {
            return diffuse(img, g.cast<double>(), steps, dt);
          }
          const auto a = g.cast<DoubleArray>();
          const auto [w, h] = shape2d(a);
          return diffuse(img, DiffusivityMap(w, h, {a.data(), a.data() + a.size()}), steps, dt);
        },
        py::arg("image"), py::arg("g"), py::arg("steps"), py::arg("dt"));
  m.def("adaptive_diffusivity",
        [](const GrayImage& img, double lambda) {
          const auto g = adaptive_diffusivity(img, lambda);
          return to_array<double>(g.values(), img.width(), img.height());
        },
        py::arg("image"), py::arg("edge_sensitivity"));
  m.def("heat_denoise",
        [](const GrayImage& img, double lambda, int steps, double dt) {
          return heat_denoise(img, {lambda, steps, dt});
        },
        py::arg("image"), py::arg("edge_sensitivity") = 0.15, py::arg("steps") = 20,
        py::arg("dt") = 0.2);

  // kinematics
  m.def("surface_profile",
        [](const BinaryImage& b, const std::string& dir, std::optional<double> pitch,
           std::optional<double> t) {
          return surface_profile(b, parse_scan_direction(dir),
                                 pitch.value_or(b.meta().pixel_pitch_mm),
                                 t.value_or(b.meta().time_us));
        },
        py::arg("mask"), py::arg("direction") = "from_top", py::arg("pixel_pitch_mm") = py::none(),
        py::arg("time_us") = py::none());
  m.def("velocity_field",
        [](const SurfaceProfile& a, const SurfaceProfile& b) {
          const auto f = velocity_field(a, b);
          std::vector<double> x;
          std::vector<double> v;
          for (const auto& s : f.samples) {
            x.push_back(s.x_mm);
            v.push_back(s.v_mm_us.value_or(std::nan("")));
          }
          return py::make_tuple(f.mid_time_us, vec_array(x), vec_array(v));
        },
        py::arg("p1"), py::arg("p2"));
  m.def("apex_velocity",
        [](const std::vector<SurfaceProfile>& ps, double cx, std::size_t k) {
          return apex_to_pairs(apex_velocity(ps, cx, k));
        },
        py::arg("profiles"), py::arg("center_x_mm"), py::arg("half_width") = 5);
  m.def("curvature_fit",
        [](const SurfaceProfile& p, std::size_t first, std::size_t last) -> py::object {
          const auto r = curvature_fit(p, {first, last});
          if (const auto* fit = std::get_if<CurvatureFit>(&r)) {
            py::dict d;
            d["center_mm"] = py::make_tuple(fit->center.x_mm, fit->center.y_mm);
            d["radius_mm"] = fit->radius_mm;
            d["rms_residual_mm"] = fit->rms_residual_mm;
            d["points_used"] = fit->points_used;
            return std::move(d);
          }
          return py::none();
        },
        py::arg("profile"), py::arg("first"), py::arg("last"));

  // visar
  m.def("load_visar", &load_visar, py::arg("path"), py::arg("thickness_in") = 1.0,
        py::arg("label") = "");
  m.def("save_visar", &save_visar, py::arg("series"), py::arg("path"));
  m.def("resample_linear", &resample_linear, py::arg("series"), py::arg("t_us"));
  m.def("plateau_mean", &plateau_mean, py::arg("series"), py::arg("t0"), py::arg("t1"));
  m.def("noise_rms", &noise_rms, py::arg("series"), py::arg("detrend_halfwidth") = 5);
  m.def("first_fluctuation_time",
        [](const VisarSeries& s, double t0, double t1, double k, int mm, int w) {
          return first_fluctuation_time(s, fluct_params(t0, t1, k, mm, w));
        },
        py::arg("series"), py::arg("baseline_t0"), py::arg("baseline_t1"), py::arg("k") = 3.0,
        py::arg("m") = 3, py::arg("detrend_halfwidth") = 5);
  m.def("extract_features",
        [](const VisarSeries& s, double t0, double t1, double k, int mm, int w) {
          return feature_dict(extract_features(s, fluct_params(t0, t1, k, mm, w)));
        },
        py::arg("series"), py::arg("baseline_t0") = 0.0, py::arg("baseline_t1") = 10.0,
        py::arg("k") = 3.0, py::arg("m") = 3, py::arg("detrend_halfwidth") = 5);
  m.def("compare_prad_visar",
        [](const std::vector<std::pair<double, double>>& apex, const VisarSeries& s) {
          const auto r = compare_prad_visar(apex_from_pairs(apex), s);
          py::dict d;
          d["n"] = r.n;
          d["bias_km_s"] = r.bias;
          d["rms_km_s"] = r.rms;
          return d;
        },
        py::arg("apex"), py::arg("series"));

  // phantom
  m.def("render_frame", &render_frame, py::arg("spec"), py::arg("t_start_us"),
        py::arg("frame_index") = 0);
  m.def("generate_sequence",
        [](const PhantomSpec& spec, std::optional<std::vector<double>> times, int jobs) {
          auto seq = generate_sequence(spec, times.value_or(spec.frame_start_times()), jobs);
          return py::make_tuple(seq.frames, truth_dict(seq.truth));
        },
        py::arg("spec"), py::arg("frame_times") = py::none(), py::arg("jobs") = 1);
  m.def("generate_visar", py::overload_cast<const PhantomSpec&>(&generate_visar), py::arg("spec"));
}
