#include "vjt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "vjt/error.hpp"
#include "vjt/io.hpp"

namespace vjt {

namespace {

constexpr int kSilhouetteSamples = 33;
constexpr double kMinDepth = 1e-6;

Vec2 perpendicular(const Vec2& v) {
  const double n = v.norm();
  if (n < 1e-12) return {0.0, 1.0};
  return Vec2(-v.y(), v.x()) / n;
}

struct Extent {
  double u_min = std::numeric_limits<double>::infinity();
  double u_max = -std::numeric_limits<double>::infinity();
  double v_min = std::numeric_limits<double>::infinity();
  double v_max = -std::numeric_limits<double>::infinity();

  void add(const Vec2& p) {
    u_min = std::min(u_min, p.x());
    u_max = std::max(u_max, p.x());
    v_min = std::min(v_min, p.y());
    v_max = std::max(v_max, p.y());
  }
  bool empty() const { return !(u_min <= u_max); }
  BoundingBox box() const {
    const double w = std::max(u_max - u_min, 1.0);
    const double h = std::max(v_max - v_min, 1.0);
    return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max), w, h};
  }
};

// Bounding box of the projected cylinder silhouette. Unless full_extent is set, only samples
// inside the image rows count and the horizontal span is clipped to the image.
std::optional<BoundingBox> silhouette_box(const CameraModel& camera, const GroundFrame& frame,
                                          const Vec3& ankle, const SimPerson& person,
                                          bool full_extent) {
  const Vec3& up = frame.plane().normal();
  const double top = person.body.h_neck + person.head_height;
  const double half_width = 0.5 * person.body.body_width;
  Extent extent;
  for (int k = 0; k < kSilhouetteSamples; ++k) {
    const double h = top * k / (kSilhouetteSamples - 1);
    for (double side : {-1.0, 1.0}) {
      const Vec3 p = ankle + h * up + side * half_width * frame.right();
      if (p.z() <= kMinDepth) continue;
      const Vec2 px = project(camera, p);
      if (!full_extent && (px.y() < 0.0 || px.y() >= camera.image_height())) continue;
      extent.add(px);
    }
  }
  if (extent.empty()) return std::nullopt;
  if (!full_extent) {
    extent.u_min = std::max(extent.u_min, 0.0);
    extent.u_max = std::min(extent.u_max, camera.image_width() - 1e-6);
    if (extent.u_min > extent.u_max) return std::nullopt;
  }
  return extent.box();
}

bool in_blackout(const Scenario& s, int frame) {
  return std::any_of(s.target_blackout.begin(), s.target_blackout.end(),
                     [&](const auto& r) { return frame >= r.first && frame < r.second; });
}

bool occluded(const Scenario& s, int person, const Vec2& p) {
  return std::any_of(s.occluders.begin(), s.occluders.end(),
                     [&](const Occluder& o) { return o.applies_to(person) && o.contains(p); });
}

bool hint_on_frame(const Scenario& s, int frame) {
  switch (s.hint) {
    case HintMode::Never: return false;
    case HintMode::First: return frame == 0;
    case HintMode::Always: return true;
    case HintMode::Frames:
      return std::find(s.hint_frames.begin(), s.hint_frames.end(), frame) != s.hint_frames.end();
  }
  return false;
}

}  // namespace

Vec2 TrajectorySpec::position(double t) const {
  switch (kind) {
    case TrajectoryKind::Line: return start + t * velocity;
    case TrajectoryKind::Arc: {
      const double a = start_angle + angular_speed * t;
      return center + radius * Vec2(std::cos(a), std::sin(a));
    }
    case TrajectoryKind::Sinusoid:
      return start + t * velocity +
             amplitude * std::sin(2.0 * std::numbers::pi * t / period) * perpendicular(velocity);
    case TrajectoryKind::Waypoints: {
      if (waypoints.empty()) return start;
      double remaining = speed * t;
      for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const Vec2 leg = waypoints[i] - waypoints[i - 1];
        const double len = leg.norm();
        if (remaining <= len && len > 0.0) return waypoints[i - 1] + (remaining / len) * leg;
        remaining -= len;
      }
      return waypoints.back();
    }
  }
  return start;
}

double TrajectorySpec::max_speed() const {
  switch (kind) {
    case TrajectoryKind::Line: return velocity.norm();
    case TrajectoryKind::Arc: return std::abs(radius * angular_speed);
    case TrajectoryKind::Sinusoid: {
      const double lateral = amplitude * 2.0 * std::numbers::pi / period;
      return std::hypot(velocity.norm(), lateral);
    }
    case TrajectoryKind::Waypoints: return waypoints.size() > 1 ? speed : 0.0;
  }
  return 0.0;
}

bool Occluder::applies_to(int person) const {
  return persons.empty() || std::find(persons.begin(), persons.end(), person) != persons.end();
}

int Scenario::frame_count() const {
  return static_cast<int>(std::floor(duration * rate + 1e-9));
}

void Scenario::validate() const {
  if (persons.empty()) throw Error(ErrorCode::EmptyScenario, "scenario has no persons");
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate must be positive");
  if (!(duration > 0.0) || frame_count() < 1) {
    throw Error(ErrorCode::EmptyScenario, "scenario duration yields no frames");
  }
  if (target < 0 || target >= static_cast<int>(persons.size())) {
    throw Error(ErrorCode::InvalidArgument, "target index out of range");
  }
  if (pixel_noise_sigma < 0.0 || box_noise_sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "noise sigmas must be non-negative");
  }
  for (double p : joint_dropout) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout outside [0, 1]");
  }
  for (const SimPerson& person : persons) {
    person.body.validate();
    if (!(person.head_height >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "head height must be non-negative");
    }
    if (person.trajectory.kind == TrajectoryKind::Sinusoid && !(person.trajectory.period > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "sinusoid period must be positive");
    }
    if (person.trajectory.max_speed() > kMaxWalkingSpeed + 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "trajectory exceeds 3 m/s");
    }
  }
  extrinsics.ground_plane();
}

SimulationOutput generate(const Scenario& scenario) {
  scenario.validate();
  const CameraModel& camera = scenario.camera;
  const GroundPlane ground = scenario.extrinsics.ground_plane();
  const GroundFrame frame(ground);

  std::mt19937_64 rng(scenario.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::student_t_distribution<double> student(3.0);
  auto noise = [&](double sigma) {
    const double unit = scenario.noise == NoiseKind::Gaussian ? gaussian(rng) : student(rng);
    return sigma * unit;
  };

  SimulationOutput out;
  const int frames = scenario.frame_count();
  for (int k = 0; k < frames; ++k) {
    const double t = k / scenario.rate;
    Frame det_frame;
    det_frame.timestamp = t;
    TruthFrame truth;
    truth.timestamp = t;
    truth.target = scenario.target;

    std::vector<Detection> detections;
    std::vector<int> owners;
    for (int p = 0; p < static_cast<int>(scenario.persons.size()); ++p) {
      const SimPerson& person = scenario.persons[p];
      PersonTruth pt;
      pt.id = p;
      pt.robot_xy = person.trajectory.position(t);
      pt.camera_ankle = robot_ground_to_camera(pt.robot_xy, scenario.extrinsics);

      // Fixed draw count per person and frame keeps the random stream aligned across scenarios.
      std::array<double, 4> drop_draw{};
      std::array<Vec2, 4> pixel_noise{};
      std::array<double, 4> box_noise{};
      for (double& d : drop_draw) d = uniform(rng);
      for (Vec2& n : pixel_noise) {
        const double nu = noise(scenario.pixel_noise_sigma);
        n = Vec2(nu, noise(scenario.pixel_noise_sigma));
      }
      for (double& b : box_noise) b = noise(scenario.box_noise_sigma);

      const bool hidden = p == scenario.target && in_blackout(scenario, k);
      std::optional<BoundingBox> box;
      if (pt.camera_ankle.z() > 0.1) {
        box = silhouette_box(camera, frame, pt.camera_ankle, person, scenario.full_extent_boxes);
      }
      pt.box = box;
      if (hidden || !box) {
        truth.persons.push_back(pt);
        continue;
      }

      Detection det;
      for (JointKind kind : kJointPriority) {
        const int j = static_cast<int>(kind);
        const Vec3 joint = joint_position(pt.camera_ankle, ground, person.body.height(kind));
        if (joint.z() <= kMinDepth) continue;
        const Vec2 exact = project(camera, joint);
        if (!camera.in_image(exact) || occluded(scenario, p, exact)) continue;
        if (drop_draw[j] < scenario.joint_dropout[j]) continue;
        const Vec2 noisy = exact + pixel_noise[j];
        if (!camera.in_image(noisy) || occluded(scenario, p, noisy)) continue;
        det.joints[kind] = {noisy, 1.0};
        pt.true_joints[kind] = exact;
      }

      BoundingBox emitted = *box;
      emitted.u += box_noise[0];
      emitted.v += box_noise[1];
      emitted.w = std::max(emitted.w + box_noise[2], 1.0);
      emitted.h = std::max(emitted.h + box_noise[3], 1.0);
      Extent extent;
      extent.add({emitted.u - 0.5 * emitted.w, emitted.v - 0.5 * emitted.h});
      extent.add({emitted.u + 0.5 * emitted.w, emitted.v + 0.5 * emitted.h});
      for (const auto& [kind, obs] : det.joints) extent.add(obs.pixel);
      det.box = extent.box();

      detections.push_back(std::move(det));
      owners.push_back(p);
      truth.persons.push_back(pt);
    }

    std::vector<std::size_t> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
      det_frame.detections.push_back(detections[order[slot]]);
      truth.persons[owners[order[slot]]].detection = slot;
    }

    const auto& target_truth = truth.persons[scenario.target];
    if (target_truth.detection && hint_on_frame(scenario, k)) {
      det_frame.reid_target_hint = target_truth.detection;
      truth.reid_hint = target_truth.detection;
    }
    out.detections.push_back(std::move(det_frame));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

OracleReport oracle_localize(const Scenario& scenario, const SimulationOutput& output,
                             double tolerance) {
  const GroundPlane ground = scenario.extrinsics.ground_plane();
  const Vec2 camera_foot = scenario.extrinsics.offset.head<2>();
  OracleReport report;
  for (std::size_t k = 0; k < output.truth.size(); ++k) {
    const TruthFrame& truth = output.truth[k];
    for (const PersonTruth& pt : truth.persons) {
      if (!pt.detection) continue;
      const Detection& det = output.detections[k].detections[*pt.detection];
      const PriorModel& body = scenario.persons[pt.id].body;
      for (const auto& [kind, obs] : det.joints) {
        OracleSample sample{static_cast<int>(k), pt.id, kind, (pt.robot_xy - camera_foot).norm(),
                            std::numeric_limits<double>::infinity()};
        try {
          const Vec3 ankle = localize_from_joint(scenario.camera, ground, obs.pixel, body.height(kind));
          const Vec2 xy =
              camera_to_robot(ankle, scenario.extrinsics.offset, scenario.extrinsics.tilt);
          sample.error = (xy - pt.robot_xy).norm();
        } catch (const Error&) {
          // degenerate geometry counts as an unbounded error
        }
        report.max_error = std::max(report.max_error, sample.error);
        if (!(sample.error <= tolerance)) {
          report.mismatches.push_back({sample.frame, sample.person, sample.joint, sample.error});
        }
        report.samples.push_back(sample);
      }
    }
  }
  return report;
}

namespace {

Vec2 vec2_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

TrajectorySpec trajectory_from_json(const nlohmann::json& j) {
  TrajectorySpec spec;
  const std::string kind = j.value("kind", "line");
  if (kind == "line") {
    spec.kind = TrajectoryKind::Line;
  } else if (kind == "arc") {
    spec.kind = TrajectoryKind::Arc;
  } else if (kind == "sinusoid") {
    spec.kind = TrajectoryKind::Sinusoid;
  } else if (kind == "waypoints") {
    spec.kind = TrajectoryKind::Waypoints;
  } else {
    throw Error(ErrorCode::ParseError, "unknown trajectory kind '" + kind + "'");
  }
  if (j.contains("start")) spec.start = vec2_from_json(j["start"]);
  if (j.contains("velocity")) spec.velocity = vec2_from_json(j["velocity"]);
  if (j.contains("center")) spec.center = vec2_from_json(j["center"]);
  spec.radius = j.value("radius", spec.radius);
  spec.angular_speed = j.value("angular_speed", spec.angular_speed);
  spec.start_angle = j.value("start_angle", spec.start_angle);
  spec.amplitude = j.value("amplitude", spec.amplitude);
  spec.period = j.value("period", spec.period);
  spec.speed = j.value("speed", spec.speed);
  if (j.contains("waypoints")) {
    for (const auto& w : j["waypoints"]) spec.waypoints.push_back(vec2_from_json(w));
  }
  return spec;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    if (j.contains("camera")) {
      const CameraConfig cam = camera_config_from_json(j["camera"]);
      s.camera = cam.camera;
      s.extrinsics = cam.extrinsics;
    }
    s.duration = j.value("duration_s", s.duration);
    s.rate = j.value("rate_hz", s.rate);
    s.pixel_noise_sigma = j.value("pixel_noise_sigma", s.pixel_noise_sigma);
    s.box_noise_sigma = j.value("box_noise_sigma", s.box_noise_sigma);
    const std::string noise = j.value("noise", "gaussian");
    if (noise == "gaussian") {
      s.noise = NoiseKind::Gaussian;
    } else if (noise == "student_t") {
      s.noise = NoiseKind::StudentT;
    } else {
      throw Error(ErrorCode::ParseError, "unknown noise kind '" + noise + "'");
    }
    if (j.contains("joint_dropout")) {
      for (const auto& [name, value] : j["joint_dropout"].items()) {
        const auto kind = joint_from_name(name);
        if (!kind) throw Error(ErrorCode::ParseError, "unknown joint '" + name + "' in joint_dropout");
        s.joint_dropout[static_cast<int>(*kind)] = value.get<double>();
      }
    }
    if (j.contains("occluders")) {
      for (const auto& o : j["occluders"]) {
        const auto rect = o.at("rect").get<std::vector<double>>();
        if (rect.size() != 4) throw Error(ErrorCode::ParseError, "occluder rect is [u0,v0,u1,v1]");
        Occluder occ{rect[0], rect[1], rect[2], rect[3], {}};
        if (o.contains("persons")) occ.persons = o["persons"].get<std::vector<int>>();
        s.occluders.push_back(occ);
      }
    }
    s.target = j.value("target", s.target);
    if (j.contains("target_blackout")) {
      for (const auto& r : j["target_blackout"]) {
        s.target_blackout.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
      }
    }
    if (j.contains("reid_hint")) {
      const auto& h = j["reid_hint"];
      if (h.is_array()) {
        s.hint = HintMode::Frames;
        s.hint_frames = h.get<std::vector<int>>();
      } else {
        const std::string mode = h.get<std::string>();
        if (mode == "never") {
          s.hint = HintMode::Never;
        } else if (mode == "first") {
          s.hint = HintMode::First;
        } else if (mode == "always") {
          s.hint = HintMode::Always;
        } else {
          throw Error(ErrorCode::ParseError, "unknown reid_hint mode '" + mode + "'");
        }
      }
    }
    s.full_extent_boxes = j.value("full_extent_boxes", s.full_extent_boxes);
    s.seed = j.value("seed", s.seed);
    if (j.contains("persons")) {
      for (const auto& pj : j["persons"]) {
        SimPerson person;
        person.body.h_neck = pj.value("h_neck", person.body.h_neck);
        person.body.h_hip = pj.value("h_hip", person.body.h_hip);
        person.body.h_knee = pj.value("h_knee", person.body.h_knee);
        person.body.body_width = pj.value("body_width", person.body.body_width);
        person.head_height = pj.value("head_height", person.head_height);
        if (pj.contains("trajectory")) person.trajectory = trajectory_from_json(pj["trajectory"]);
        s.persons.push_back(person);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  nlohmann::json j = read_json_file(path);
  if (j.contains("camera") && j["camera"].is_string()) {
    std::filesystem::path cam = j["camera"].get<std::string>();
    j["camera"] = read_json_file(cam.is_absolute() ? cam : path.parent_path() / cam);
  }
  if (!j.contains("name")) j["name"] = path.stem().string();
  return scenario_from_json(j);
}

nlohmann::json to_json(const TruthFrame& truth) {
  nlohmann::json persons = nlohmann::json::array();
  for (const PersonTruth& p : truth.persons) {
    nlohmann::json visible = nlohmann::json::array();
    for (const auto& [kind, px] : p.true_joints) visible.push_back(std::string(joint_name(kind)));
    persons.push_back({{"id", p.id},
                       {"xy", {p.robot_xy.x(), p.robot_xy.y()}},
                       {"box", p.box ? box_to_json(*p.box) : nlohmann::json(nullptr)},
                       {"detection", p.detection ? nlohmann::json(*p.detection) : nlohmann::json(nullptr)},
                       {"visible", visible}});
  }
  return {{"t", truth.timestamp},
          {"target", truth.target},
          {"persons", persons},
          {"reid_hint", truth.reid_hint ? nlohmann::json(*truth.reid_hint) : nlohmann::json(nullptr)}};
}

}  // namespace vjt
