#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <Eigen/Core>

#include "fedloc/error.hpp"
#include "fedloc/protocol.hpp"
#include "fedloc/scenario.hpp"
#include "fedloc/selector.hpp"
#include "fedloc/stitcher.hpp"
#include "fedloc/trajectory.hpp"

namespace py = pybind11;
using namespace fedloc;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Vec3> to_points(const Points& m) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

py::dict run_result(const MetricsReport& r) {
  py::dict d;
  d["cycles_csv"] = r.cycles_csv();
  d["summary_json"] = r.summary_json();
  return d;
}

py::dict experiment_result(const ExperimentResult& r) {
  py::dict d;
  d["name"] = r.name;
  d["csv"] = r.table.csv();
  d["summary_json"] = r.summary.dump(2);
  py::dict extras;
  for (std::size_t i = 0; i < r.extra_tables.size(); ++i) extras[py::str(r.extra_names[i])] = r.extra_tables[i].csv();
  d["extra_csv"] = extras;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fedloc, m) {
  m.doc() = "Federated localization core: poses, stitching, selection, protocol and scenarios.";

  auto base = py::register_exception<Error>(m, "FedlocError", PyExc_ValueError);
  py::register_exception<DecodeError>(m, "DecodeError", base.ptr());
  py::register_exception<DegenerateTrajectory>(m, "DegenerateTrajectory", base.ptr());

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Mat4& mat) { return Pose::from_matrix(mat); }), py::arg("matrix"))
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_static("from_quaternion",
                  [](double w, double x, double y, double z, const Vec3& t) {
                    return Pose::from_quaternion(Eigen::Quaterniond(w, x, y, z), t);
                  },
                  py::arg("w"), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("t"))
      .def_property_readonly("rotation", &Pose::rotation)
      .def_property_readonly("translation", &Pose::translation)
      .def("matrix", &Pose::matrix)
      .def("quaternion",
           [](const Pose& p) {
             const auto q = p.quaternion();
             return py::make_tuple(q.w(), q.x(), q.y(), q.z());
           })
      .def("inverse", &Pose::inverse)
      .def("apply", &Pose::apply)
      .def("__matmul__", &Pose::operator*)
      .def("__repr__", [](const Pose& p) {
        const Vec3& t = p.translation();
        return "Pose(t=[" + std::to_string(t.x()) + ", " + std::to_string(t.y()) + ", " + std::to_string(t.z()) +
               "])";
      });

  m.def("compose", &compose);
  m.def("translate", &translate);
  m.def("rot_z", &rot_z);
  m.def("rotation_angle", py::overload_cast<const Pose&, const Pose&>(&rotation_angle));
  m.def("translation_distance", &translation_distance);
  m.def("chordal_mean", [](const std::vector<Pose>& poses) { return chordal_mean(poses); });

  m.def(
      "align_points",
      [](const Points& ref, const Points& est) {
        const auto r = to_points(ref);
        const auto e = to_points(est);
        return align_points(r, e);
      },
      py::arg("ref"), py::arg("est"), "Rigid transform mapping est onto ref (N x 3 arrays).");
  m.def(
      "ate",
      [](const Points& ref, const Points& est) {
        const auto r = to_points(ref);
        const auto e = to_points(est);
        return ate_points(r, e);
      },
      py::arg("ref"), py::arg("est"));

  py::class_<StitchObservation>(m, "StitchObservation")
      .def(py::init([](const Pose& device, const Pose& service, const FrameId& frame, double confidence,
                       double timestamp) { return StitchObservation{device, service, frame, confidence, timestamp}; }),
           py::arg("device_pose"), py::arg("service_pose"), py::arg("frame"), py::arg("confidence") = 1.0,
           py::arg("timestamp") = 0.0)
      .def_readwrite("device_pose", &StitchObservation::device_pose)
      .def_readwrite("service_pose", &StitchObservation::service_pose)
      .def_readwrite("frame", &StitchObservation::service_frame)
      .def_readwrite("confidence", &StitchObservation::confidence)
      .def_readwrite("timestamp", &StitchObservation::timestamp);

  py::class_<TransformEstimate>(m, "TransformEstimate")
      .def_readonly("from_frame", &TransformEstimate::from_frame)
      .def_readonly("to_frame", &TransformEstimate::to_frame)
      .def_readonly("transform", &TransformEstimate::transform)
      .def_readonly("sample_count", &TransformEstimate::sample_count);

  m.def("pairwise_transform", &pairwise_transform, py::arg("obs1"), py::arg("obs2"));
  m.def(
      "estimate_transform",
      [](const std::vector<StitchObservation>& prev, const std::vector<StitchObservation>& next, int k) {
        return estimate_transform(prev, next, k);
      },
      py::arg("prev_obs"), py::arg("new_obs"), py::arg("k") = 5);

  py::class_<FrameGraph>(m, "FrameGraph")
      .def(py::init<>())
      .def("update", &FrameGraph::update)
      .def("connected", &FrameGraph::connected)
      .def("edge_count", &FrameGraph::edge_count)
      .def("to_frame", [](const FrameGraph& g, const Pose& p, const FrameId& from, const FrameId& to) {
        return to_frame(p, from, to, g);
      });

  py::class_<RankEntry>(m, "RankEntry")
      .def_readonly("service_id", &RankEntry::service_id)
      .def_readonly("ate_score", &RankEntry::ate_score)
      .def_readonly("rank", &RankEntry::rank);
  m.def(
      "rank_services",
      [](const std::map<std::string, std::pair<std::vector<Pose>, std::vector<Pose>>>& tracks) {
        std::vector<CandidateTrack> ts;
        for (const auto& [id, pair] : tracks) {
          const auto& [vio, service] = pair;
          if (vio.size() != service.size()) throw Error("track " + id + ": length mismatch");
          CandidateTrack t{id, {}};
          for (std::size_t i = 0; i < vio.size(); ++i) {
            t.push({static_cast<double>(i), vio[i], service[i], std::nullopt}, 0);
          }
          ts.push_back(std::move(t));
        }
        return rank_services(ts);
      },
      py::arg("tracks"), "tracks maps service id to (vio poses, service poses).");

  m.def("canonicalize_message", [](const std::string& text) { return encode_message(decode_message(text)); },
        py::arg("text"), "Decodes a wire message and re-encodes it canonically.");

  m.def(
      "run_scenario", [](const std::string& config_text) { return run_result(run_scenario(parse_config(config_text))); },
      py::arg("config_text"));
  m.def(
      "experiment",
      [](const std::string& kind, const std::string& config_text, int trials, int max_obs) {
        const auto cfg = parse_config(config_text);
        if (kind == "stitch") return experiment_result(experiment_stitch_convergence(cfg, trials, max_obs));
        if (kind == "selector") return experiment_result(experiment_selector(cfg, trials));
        if (kind == "recognizer") return experiment_result(experiment_recognizer(cfg, trials));
        throw Error("unknown experiment: " + kind);
      },
      py::arg("kind"), py::arg("config_text"), py::arg("trials"), py::arg("max_obs") = 10);
}
