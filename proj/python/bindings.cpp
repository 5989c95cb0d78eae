#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vjt/association.hpp"
#include "vjt/camera.hpp"
#include "vjt/error.hpp"
#include "vjt/eval.hpp"
#include "vjt/io.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/prior_model.hpp"
#include "vjt/simulator.hpp"
#include "vjt/ukf.hpp"

namespace py = pybind11;
using namespace vjt;

namespace {

// Tracking session configured from JSON text; frames and results cross the boundary as JSON.
class JsonSession {
 public:
  JsonSession(const std::string& camera_json, const std::string& config_json)
      : config_(tracker_config_from_json(json::parse(config_json))) {
    const CameraConfig cam = camera_config_from_json(json::parse(camera_json));
    session_ = Session(cam.camera, cam.extrinsics, config_);
  }

  std::string process_frame(const std::string& record) {
    return to_json(session_.process_frame(frame_from_json(json::parse(record), config_.min_confidence))).dump();
  }

 private:
  TrackerConfig config_;
  Session session_;
};

std::pair<std::vector<std::string>, std::vector<std::string>> simulate(const std::string& scenario_json) {
  const SimulationOutput out = generate(scenario_from_json(json::parse(scenario_json)));
  std::vector<std::string> dets, truth;
  for (const Frame& f : out.detections) dets.push_back(to_json(f).dump());
  for (const TruthFrame& t : out.truth) truth.push_back(to_json(t).dump());
  return {dets, truth};
}

std::string evaluate(const std::vector<std::string>& estimates, const std::vector<std::string>& truth,
                     double threshold_px) {
  std::vector<EstimateRecord> est;
  std::vector<TruthRecord> tru;
  for (const std::string& e : estimates) est.push_back(estimate_from_json(json::parse(e)));
  for (const std::string& t : truth) tru.push_back(truth_from_json(json::parse(t)));
  return report_to_json(localization_metrics(est, tru), tracking_accuracy(est, tru, threshold_px)).dump();
}

}  // namespace

PYBIND11_MODULE(_vjtrack, m) {
  m.doc() = "Partial-occlusion person localization and tracking";

  static py::handle error_type = py::exception<Error>(m, "VjtError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    } catch (const json::exception& e) {
      py::tuple args = py::make_tuple(std::string("ParseError"), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  py::enum_<JointKind>(m, "JointKind")
      .value("Neck", JointKind::Neck)
      .value("Hip", JointKind::Hip)
      .value("Knee", JointKind::Knee)
      .value("Ankle", JointKind::Ankle);

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init<double, double, double, double, int, int>(), py::arg("fx"), py::arg("fy"), py::arg("cx"),
           py::arg("cy"), py::arg("image_width"), py::arg("image_height"))
      .def_property_readonly("fx", &CameraModel::fx)
      .def_property_readonly("fy", &CameraModel::fy)
      .def_property_readonly("cx", &CameraModel::cx)
      .def_property_readonly("cy", &CameraModel::cy)
      .def_property_readonly("image_width", &CameraModel::image_width)
      .def_property_readonly("image_height", &CameraModel::image_height)
      .def("in_image", &CameraModel::in_image);

  py::class_<GroundPlane>(m, "GroundPlane")
      .def(py::init<const Vec3&, double>(), py::arg("normal"), py::arg("gamma"))
      .def_property_readonly("normal", &GroundPlane::normal)
      .def_property_readonly("gamma", &GroundPlane::gamma)
      .def("height_of", &GroundPlane::height_of);

  py::class_<GroundFrame>(m, "GroundFrame")
      .def(py::init<const GroundPlane&>())
      .def("to_camera", &GroundFrame::to_camera)
      .def("to_ground", &GroundFrame::to_ground);

  m.def("ground_plane_from_tilt", &ground_plane_from_tilt, py::arg("height"), py::arg("tilt"));
  m.def("project", &project, py::arg("camera"), py::arg("point"));
  m.def("ray_from_pixel", &ray_from_pixel, py::arg("camera"), py::arg("pixel"));
  m.def("localize_from_joint", &localize_from_joint, py::arg("camera"), py::arg("ground"), py::arg("pixel"),
        py::arg("joint_height"));

  py::class_<PriorModel>(m, "PriorModel")
      .def(py::init([](double h_neck, double h_hip, double h_knee, double body_width) {
             PriorModel p;
             p.h_neck = h_neck;
             p.h_hip = h_hip;
             p.h_knee = h_knee;
             p.body_width = body_width;
             return p;
           }),
           py::arg("h_neck") = PriorModel{}.h_neck, py::arg("h_hip") = PriorModel{}.h_hip,
           py::arg("h_knee") = PriorModel{}.h_knee, py::arg("body_width") = PriorModel{}.body_width)
      .def_readwrite("h_neck", &PriorModel::h_neck)
      .def_readwrite("h_hip", &PriorModel::h_hip)
      .def_readwrite("h_knee", &PriorModel::h_knee)
      .def_readwrite("body_width", &PriorModel::body_width)
      .def("height", &PriorModel::height)
      .def("anatomically_ordered", &PriorModel::anatomically_ordered);

  py::class_<PriorFit>(m, "PriorFit")
      .def_readonly("ankle", &PriorFit::ankle)
      .def_readonly("prior", &PriorFit::prior)
      .def_readonly("residual_rms", &PriorFit::residual_rms)
      .def_readonly("iterations", &PriorFit::iterations);

  m.def(
      "construct_prior",
      [](const CameraModel& camera, const GroundPlane& ground, const JointPixels& observation,
         const PriorModel& init) { return construct_prior(camera, ground, observation, init); },
      py::arg("camera"), py::arg("ground"), py::arg("observation"), py::arg("init") = PriorModel{});

  py::class_<UkfParams>(m, "UkfParams")
      .def(py::init<>())
      .def_readwrite("alpha", &UkfParams::alpha)
      .def_readwrite("beta", &UkfParams::beta)
      .def_readwrite("kappa", &UkfParams::kappa)
      .def_readwrite("process_accel_sigma", &UkfParams::process_accel_sigma)
      .def_readwrite("joint_pixel_sigma", &UkfParams::joint_pixel_sigma);

  py::class_<TrackState>(m, "TrackState")
      .def(py::init([](const StateVector& mean, const StateCovariance& covariance) {
             return TrackState{mean, covariance};
           }),
           py::arg("mean"), py::arg("covariance"))
      .def_readwrite("mean", &TrackState::mean)
      .def_readwrite("covariance", &TrackState::covariance);

  m.def("predict", &predict, py::arg("state"), py::arg("dt"), py::arg("params") = UkfParams{});
  m.def(
      "observe",
      [](const StateVector& mean, const CameraModel& camera, const GroundPlane& ground, const PriorModel& prior,
         const std::vector<JointKind>& visible) { return observe(mean, camera, ground, prior, visible); },
      py::arg("mean"), py::arg("camera"), py::arg("ground"), py::arg("prior"), py::arg("visible"));
  m.def(
      "update",
      [](const TrackState& state, const Eigen::VectorXd& z, const std::vector<JointKind>& visible,
         const CameraModel& camera, const GroundPlane& ground, const PriorModel& prior, const UkfParams& params) {
        return update(state, z, visible, camera, ground, prior, params);
      },
      py::arg("state"), py::arg("measurement"), py::arg("visible"), py::arg("camera"), py::arg("ground"),
      py::arg("prior"), py::arg("params") = UkfParams{});

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init([](double u, double v, double w, double h) { return BoundingBox{u, v, w, h}; }), py::arg("u"),
           py::arg("v"), py::arg("w"), py::arg("h"))
      .def_readwrite("u", &BoundingBox::u)
      .def_readwrite("v", &BoundingBox::v)
      .def_readwrite("w", &BoundingBox::w)
      .def_readwrite("h", &BoundingBox::h);

  py::class_<ExpectedBox>(m, "ExpectedBox")
      .def(py::init([](double u, double w) { return ExpectedBox{u, w}; }), py::arg("u"), py::arg("w"))
      .def_readwrite("u", &ExpectedBox::u)
      .def_readwrite("w", &ExpectedBox::w);

  py::class_<Match>(m, "Match")
      .def_readonly("track_id", &Match::track_id)
      .def_readonly("detection", &Match::detection)
      .def_readonly("distance", &Match::distance);

  py::class_<AssociationResult>(m, "AssociationResult")
      .def_readonly("matches", &AssociationResult::matches)
      .def_readonly("unmatched_tracks", &AssociationResult::unmatched_tracks)
      .def_readonly("unmatched_detections", &AssociationResult::unmatched_detections)
      .def("total_cost", &AssociationResult::total_cost);

  m.def("expected_box", &expected_box, py::arg("mean"), py::arg("camera"), py::arg("ground"), py::arg("prior"));
  m.def("distance", &distance, py::arg("expected"), py::arg("detected"));
  m.def(
      "match_gnn",
      [](const std::vector<std::pair<int, ExpectedBox>>& tracks, const std::vector<BoundingBox>& detections,
         double gate) {
        std::vector<TrackExpectation> t;
        for (const auto& [id, box] : tracks) t.push_back({id, box});
        return match_gnn(t, detections, gate);
      },
      py::arg("tracks"), py::arg("detections"), py::arg("gate") = kDefaultGatePx);

  py::class_<JsonSession>(m, "JsonSession")
      .def(py::init<const std::string&, const std::string&>(), py::arg("camera_json"), py::arg("config_json"))
      .def("process_frame", &JsonSession::process_frame, py::arg("record_json"));

  m.def("simulate", &simulate, py::arg("scenario_json"));
  m.def("evaluate", &evaluate, py::arg("estimates"), py::arg("truth"),
        py::arg("threshold_px") = kDefaultAccuracyThresholdPx);
  m.def("run_bench", [](const std::filesystem::path& dir) { return run_bench(dir); }, py::arg("scenario_dir"));
}
