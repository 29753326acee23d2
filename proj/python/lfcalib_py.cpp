#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lfcalib/camera_model.hpp"
#include "lfcalib/errors.hpp"
#include "lfcalib/io.hpp"
#include "lfcalib/linear_calibration.hpp"
#include "lfcalib/metrics.hpp"
#include "lfcalib/mpc_core.hpp"
#include "lfcalib/pipeline.hpp"
#include "lfcalib/rotation.hpp"
#include "lfcalib/simulator.hpp"
#include "lfcalib/transforms.hpp"

namespace py = pybind11;
using namespace lfcalib;

namespace {

py::dict metrics_dict(const MetricReport& m) {
  py::dict d;
  d["count"] = m.count;
  d["rms_reproj_px"] = m.rms_reproj_px;
  d["mean_reproj_px"] = m.mean_reproj_px;
  d["max_reproj_px"] = m.max_reproj_px;
  d["rms_ray_reproj_mm"] = m.rms_ray_reproj_mm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-projection-center light-field camera model and calibration";
  m.attr("__version__") = LFCALIB_VERSION;

  // Messages start with the error kind, e.g. "InsufficientPoses: ...".
  py::register_exception<Error>(m, "LfcalibError", PyExc_RuntimeError);

  py::class_<Ray>(m, "Ray")
      .def(py::init([](double s, double t, double x, double y, double f) { return Ray{s, t, x, y, f}; }),
           py::arg("s"), py::arg("t"), py::arg("x"), py::arg("y"), py::arg("f") = 1.0)
      .def_readwrite("s", &Ray::s)
      .def_readwrite("t", &Ray::t)
      .def_readwrite("x", &Ray::x)
      .def_readwrite("y", &Ray::y)
      .def_readwrite("f", &Ray::f)
      .def("__repr__", [](const Ray& r) {
        return "Ray(s=" + std::to_string(r.s) + ", t=" + std::to_string(r.t) + ", x=" + std::to_string(r.x) +
               ", y=" + std::to_string(r.y) + ", f=" + std::to_string(r.f) + ")";
      });

  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init([](double ki, double kj, double ku, double kv, double u0, double v0) {
             return Intrinsics{ki, kj, ku, kv, u0, v0};
           }),
           py::arg("k_i"), py::arg("k_j"), py::arg("k_u"), py::arg("k_v"), py::arg("u_0"), py::arg("v_0"))
      .def_readwrite("k_i", &Intrinsics::k_i)
      .def_readwrite("k_j", &Intrinsics::k_j)
      .def_readwrite("k_u", &Intrinsics::k_u)
      .def_readwrite("k_v", &Intrinsics::k_v)
      .def_readwrite("u_0", &Intrinsics::u_0)
      .def_readwrite("v_0", &Intrinsics::v_0)
      .def("principal_point", &Intrinsics::principal_point)
      .def("decoding_matrix", &Intrinsics::decoding_matrix);

  py::class_<Distortion>(m, "Distortion")
      .def(py::init([](double k1, double k2, double k3, double k4) { return Distortion{k1, k2, k3, k4}; }),
           py::arg("k_1") = 0.0, py::arg("k_2") = 0.0, py::arg("k_3") = 0.0, py::arg("k_4") = 0.0)
      .def_readwrite("k_1", &Distortion::k_1)
      .def_readwrite("k_2", &Distortion::k_2)
      .def_readwrite("k_3", &Distortion::k_3)
      .def_readwrite("k_4", &Distortion::k_4);

  m.def("project", &project, py::arg("point"), py::arg("s"), py::arg("t"), py::arg("f") = 1.0,
        py::arg("eps_z") = 1e-12, "Image-plane point (x, y) of a 3D point seen from view (s, t).");
  m.def("triangulate", [](const std::vector<Ray>& rays) { return triangulate(rays); }, py::arg("rays"),
        "Least-squares intersection of two or more rays.");
  m.def("intersect_two_rays", [](const Ray& a, const Ray& b) { return intersect_two_rays(a, b); });
  m.def("decode",
        [](double i, double j, double u, double v, const Intrinsics& in) { return decode(IndexedRay{i, j, u, v}, in); },
        py::arg("i"), py::arg("j"), py::arg("u"), py::arg("v"), py::arg("intrinsics"));
  m.def("encode",
        [](const Ray& r, const Intrinsics& in) {
          const IndexedRay px = encode(r, in);
          return py::make_tuple(px.i, px.j, px.u, px.v);
        },
        py::arg("ray"), py::arg("intrinsics"));
  m.def("undistort", &undistort, py::arg("x"), py::arg("y"), py::arg("s"), py::arg("t"), py::arg("distortion"));
  m.def("distort", [](double xu, double yu, double s, double t, const Distortion& d) { return distort(xu, yu, s, t, d); },
        py::arg("xu"), py::arg("yu"), py::arg("s"), py::arg("t"), py::arg("distortion"));
  m.def("rodrigues", &rodrigues, py::arg("omega"));
  m.def("rodrigues_inv", &rodrigues_inv, py::arg("rotation"));
  m.def("p_from_intrinsics", [](const Intrinsics& in) { return p_from_intrinsics(in).matrix(); });

  m.def("simulate",
        [](const std::string& config_json, std::uint64_t trial) {
          const SimulatedData sim = generate(parse_sim_config(config_json), trial);
          ResultFile truth;
          truth.tool_version = LFCALIB_VERSION;
          truth.camera_kind = sim.dataset.camera_kind;
          truth.intrinsics = sim.truth.intrinsics;
          truth.distortion = sim.truth.distortion;
          truth.distortion_estimated = true;
          for (const auto& p : sim.dataset.poses) truth.pose_ids.push_back(p.pose_id);
          truth.poses = sim.truth.poses;
          return py::make_tuple(dataset_to_json(sim.dataset), result_to_json(truth));
        },
        py::arg("config_json"), py::arg("trial") = 0,
        "Returns (dataset_json, ground_truth_json) for a simulation config.");

  m.def("calibrate",
        [](const std::string& dataset_json, bool refine, bool refine_distortion, int max_iter) {
          const CalibrationDataset ds = parse_dataset(dataset_json);
          PipelineOptions opts;
          opts.refine = refine;
          opts.optimize.refine_distortion = refine_distortion;
          opts.optimize.max_iter = max_iter;
          const PipelineResult pr = calibrate(ds, opts);
          ResultFile res;
          res.tool_version = LFCALIB_VERSION;
          res.input_digest = digest_string(dataset_json);
          res.camera_kind = ds.camera_kind;
          res.intrinsics = pr.final.intrinsics;
          res.distortion = pr.final.distortion;
          res.distortion_estimated = refine && refine_distortion;
          for (const auto& p : ds.poses) res.pose_ids.push_back(p.pose_id);
          res.poses = pr.final.poses;
          const MetricReport init = evaluate_metrics(pr.initial, ds);
          res.initial = MetricSummary{init.rms_reproj_px, init.mean_reproj_px, init.rms_ray_reproj_mm};
          if (refine) {
            const MetricReport fin = evaluate_metrics(pr.final, ds);
            res.optimized = MetricSummary{fin.rms_reproj_px, fin.mean_reproj_px, fin.rms_ray_reproj_mm};
            res.optimizer = pr.report;
          }
          res.warnings = pr.linear.warnings;
          return result_to_json(res);
        },
        py::arg("dataset_json"), py::arg("refine") = true, py::arg("refine_distortion") = true,
        py::arg("max_iter") = 200, "Calibrates a dataset; returns the result as JSON text.");

  m.def("evaluate",
        [](const std::string& result_json, const std::string& dataset_json) {
          const ResultFile res = parse_result(result_json);
          const CalibrationDataset ds = parse_dataset(dataset_json);
          return metrics_dict(evaluate_metrics(res.parameters(), ds));
        },
        py::arg("result_json"), py::arg("dataset_json"), "Re-projection metrics of a result on a dataset.");
}
