// Python bindings: configuration, simulation, estimation and evaluation.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "vdvio/config.hpp"
#include "vdvio/estimator.hpp"
#include "vdvio/sensor_log.hpp"
#include "vdvio/simulator.hpp"
#include "vdvio/trajectory.hpp"

namespace py = pybind11;
using namespace vdvio;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::VectorXd timestamps(const TrajectoryRecord& t) {
  Eigen::VectorXd v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = t.points[i].timestamp;
  return v;
}

RowMatrix positions(const TrajectoryRecord& t) {
  RowMatrix m(t.size(), 3);
  for (std::size_t i = 0; i < t.size(); ++i) m.row(i) = t.points[i].position.transpose();
  return m;
}

// N x 4 (x, y, z, w) or None when any pose lacks an orientation.
py::object orientations(const TrajectoryRecord& t) {
  RowMatrix m(t.size(), 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.points[i].orientation) return py::none();
    m.row(i) = t.points[i].orientation->xyzw().transpose();
  }
  return py::cast(m);
}

TrajectoryRecord make_trajectory(const Eigen::VectorXd& t, const RowMatrix& p,
                                 const std::optional<RowMatrix>& q) {
  if (p.rows() != t.size() || p.cols() != 3) {
    throw py::value_error("positions must have shape (N, 3) matching timestamps");
  }
  if (q && (q->rows() != t.size() || q->cols() != 4)) {
    throw py::value_error("orientations must have shape (N, 4) in x, y, z, w order");
  }
  TrajectoryRecord out;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    TrajectoryPoint pt;
    pt.timestamp = t[i];
    pt.position = p.row(i).transpose();
    if (q) pt.orientation = UnitQuaternion::from_xyzw(q->row(i).transpose());
    out.points.push_back(pt);
  }
  out.validate();
  return out;
}

py::dict diagnostics_dict(const EstimatorDiagnostics& d) {
  py::dict out;
  out["imu_samples"] = d.imu_samples;
  out["dvl_accepted"] = d.dvl_accepted;
  out["dvl_gated"] = d.dvl_gated;
  out["pressure_accepted"] = d.pressure_accepted;
  out["pressure_gated"] = d.pressure_gated;
  out["visual_updates"] = d.visual_updates;
  out["features_used"] = d.features_used;
  out["features_gated"] = d.features_gated;
  out["features_rejected"] = d.features_rejected;
  out["features_enhanced"] = d.features_enhanced;
  out["features_unenhanced"] = d.features_unenhanced;
  out["keyframes"] = d.keyframes;
  out["marginalizations"] = d.marginalizations;
  out["late_measurements"] = d.late_measurements;
  out["skipped_updates"] = d.skipped_updates;
  out["max_position_sigma"] = d.max_position_sigma;
  out["diverged"] = d.diverged;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Visual-DVL-inertial odometry core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<InitializationError>(m, "InitializationError", PyExc_RuntimeError);

  py::class_<AppConfig>(m, "Config")
      .def(py::init<>())
      .def("to_yaml", &format_config)
      .def_property_readonly(
          "mission_duration",
          [](const AppConfig& c) { return GroundTruth(c.simulation.trajectory).duration(); })
      .def("__repr__", [](const AppConfig& c) {
        return "<vdvio.Config mission=" +
               std::to_string(GroundTruth(c.simulation.trajectory).duration()) + " s>";
      });
  m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text); },
        py::arg("text"));

  py::class_<TrajectoryRecord>(m, "Trajectory")
      .def(py::init(&make_trajectory), py::arg("timestamps"), py::arg("positions"),
           py::arg("orientations") = py::none())
      .def_property_readonly("timestamps", &timestamps)
      .def_property_readonly("positions", &positions)
      .def_property_readonly("orientations", &orientations)
      .def("__len__", &TrajectoryRecord::size)
      .def("to_text", &format_trajectory);
  m.def("read_trajectory", [](const std::filesystem::path& p) { return read_trajectory(p); },
        py::arg("path"));
  m.def("write_trajectory",
        [](const std::filesystem::path& p, const TrajectoryRecord& t) { write_trajectory(p, t); },
        py::arg("path"), py::arg("trajectory"));
  m.def("parse_trajectory", [](const std::string& text) { return parse_trajectory(text); },
        py::arg("text"));

  py::class_<SensorLog>(m, "SensorLog")
      .def_property_readonly("seed", [](const SensorLog& l) { return l.header.seed; })
      .def_property_readonly("imu_count", [](const SensorLog& l) { return l.imu.size(); })
      .def_property_readonly("dvl_count", [](const SensorLog& l) { return l.dvl.size(); })
      .def_property_readonly("cloud_count", [](const SensorLog& l) { return l.clouds.size(); })
      .def_property_readonly("pressure_count", [](const SensorLog& l) { return l.pressure.size(); })
      .def_property_readonly("camera_count", [](const SensorLog& l) { return l.camera.size(); })
      .def("to_text", &format_log);
  m.def("read_log", [](const std::filesystem::path& p) { return read_log(p); }, py::arg("path"));
  m.def("write_log",
        [](const std::filesystem::path& p, const SensorLog& l) { write_log(p, l); },
        py::arg("path"), py::arg("log"));
  m.def("parse_log", [](const std::string& text) { return parse_log(text); }, py::arg("text"));

  m.def(
      "simulate",
      [](const AppConfig& config, std::uint64_t seed) {
        SimulationResult r;
        {
          py::gil_scoped_release release;
          r = simulate(config.simulation, seed);
        }
        return py::make_tuple(std::move(r.log), to_trajectory(r.truth));
      },
      py::arg("config"), py::arg("seed"),
      "Returns (sensor_log, ground_truth_trajectory).");

  py::class_<EstimatorResult>(m, "EstimatorResult")
      .def_readonly("trajectory", &EstimatorResult::trajectory)
      .def_property_readonly("position_covariance",
                             [](const EstimatorResult& r) {
                               py::array_t<double> a({r.position_covariance.size(),
                                                      std::size_t{3}, std::size_t{3}});
                               auto v = a.mutable_unchecked<3>();
                               for (std::size_t i = 0; i < r.position_covariance.size(); ++i)
                                 for (int j = 0; j < 3; ++j)
                                   for (int k = 0; k < 3; ++k)
                                     v(i, j, k) = r.position_covariance[i](j, k);
                               return a;
                             })
      .def_property_readonly("diagnostics",
                             [](const EstimatorResult& r) { return diagnostics_dict(r.diagnostics); });

  m.def(
      "run",
      [](const SensorLog& log, const AppConfig& config, bool no_dvl, bool no_visual,
         bool no_pressure, bool no_enhancement, bool no_keyframe) {
        EstimatorConfig est = config.estimator;
        if (no_dvl) est.dvl.enabled = false;
        if (no_visual) est.visual.enabled = false;
        if (no_pressure) est.pressure.enabled = false;
        if (no_enhancement) est.enhancement.enabled = false;
        if (no_keyframe) est.keyframe.enabled = false;
        py::gil_scoped_release release;
        return run_estimator(log, est);
      },
      py::arg("log"), py::arg("config"), py::kw_only(), py::arg("no_dvl") = false,
      py::arg("no_visual") = false, py::arg("no_pressure") = false,
      py::arg("no_enhancement") = false, py::arg("no_keyframe") = false);

  py::class_<AteReport>(m, "AteReport")
      .def_readonly("rmse_x", &AteReport::rmse_x)
      .def_readonly("rmse_y", &AteReport::rmse_y)
      .def_readonly("rmse_xy", &AteReport::rmse_xy)
      .def_readonly("rmse_planar", &AteReport::rmse_planar)
      .def_readonly("rmse_z", &AteReport::rmse_z)
      .def_readonly("pairs", &AteReport::pairs)
      .def_property_readonly("scale", [](const AteReport& r) { return r.alignment.scale; })
      .def_property_readonly("rotation", [](const AteReport& r) { return r.alignment.rotation; })
      .def_property_readonly("translation",
                             [](const AteReport& r) { return r.alignment.translation; })
      .def_property_readonly("errors",
                             [](const AteReport& r) {
                               RowMatrix e(r.series.size(), 4);
                               for (std::size_t i = 0; i < r.series.size(); ++i) {
                                 e(i, 0) = r.series[i].timestamp;
                                 e.row(i).tail<3>() = r.series[i].error.transpose();
                               }
                               return e;
                             },
                             "N x 4 array of (t, ex, ey, ez)")
      .def("to_text", &format_ate_report, py::arg("align_window"))
      .def("to_csv", &format_error_csv);

  m.def("evaluate", &evaluate_trajectory, py::arg("estimate"), py::arg("ground_truth"),
        py::arg("align_window"));
}
