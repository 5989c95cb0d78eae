#include "vjt/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vjt/error.hpp"

namespace vjt {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) parse_fail(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) parse_fail("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) parse_fail("missing key '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

template <typename T>
void optional_into(const json& j, const std::string& key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail("bad value for '" + key + "': " + std::string(e.what()));
  }
}

json vec_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

json box_to_json(const BoundingBox& box) { return json::array({box.u, box.v, box.w, box.h}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) parse_fail("box must be [u, v, w, h]");
  BoundingBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!(box.w > 0.0) || !(box.h > 0.0)) parse_fail("box width and height must be positive");
  return box;
}

CameraConfig camera_config_from_json(const json& j) {
  const std::string where = "camera config";
  reject_unknown_keys(j, {"fx", "fy", "cx", "cy", "image_width", "image_height", "camera_height_m",
                          "tilt_rad", "offset_m"},
                      where);
  CameraModel camera(required<double>(j, "fx", where), required<double>(j, "fy", where),
                     required<double>(j, "cx", where), required<double>(j, "cy", where),
                     required<int>(j, "image_width", where), required<int>(j, "image_height", where));
  CameraExtrinsics extrinsics;
  extrinsics.height = required<double>(j, "camera_height_m", where);
  extrinsics.tilt = required<double>(j, "tilt_rad", where);
  if (j.contains("offset_m")) {
    const auto offset = required<std::vector<double>>(j, "offset_m", where);
    if (offset.size() != 3) parse_fail("offset_m must have three components");
    extrinsics.offset = Vec3(offset[0], offset[1], offset[2]);
  }
  extrinsics.ground_plane();  // validates height and tilt
  return {camera, extrinsics};
}

json to_json(const CameraConfig& config) {
  const CameraModel& c = config.camera;
  const CameraExtrinsics& e = config.extrinsics;
  return {{"fx", c.fx()},
          {"fy", c.fy()},
          {"cx", c.cx()},
          {"cy", c.cy()},
          {"image_width", c.image_width()},
          {"image_height", c.image_height()},
          {"camera_height_m", e.height},
          {"tilt_rad", e.tilt},
          {"offset_m", json::array({e.offset.x(), e.offset.y(), e.offset.z()})}};
}

PriorModel prior_from_json(const json& j) {
  const std::string where = "prior model";
  reject_unknown_keys(j, {"h_neck", "h_hip", "h_knee", "body_width"}, where);
  PriorModel prior;
  prior.h_neck = required<double>(j, "h_neck", where);
  prior.h_hip = required<double>(j, "h_hip", where);
  prior.h_knee = required<double>(j, "h_knee", where);
  optional_into(j, "body_width", prior.body_width);
  prior.validate();
  return prior;
}

json to_json(const PriorModel& prior) {
  return {{"h_neck", prior.h_neck},
          {"h_hip", prior.h_hip},
          {"h_knee", prior.h_knee},
          {"body_width", prior.body_width}};
}

TrackerConfig tracker_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"camera", "prior", "default_prior", "gate_px", "max_misses", "confirm_hits",
                       "tentative_max_misses", "min_confidence", "init_position_sigma",
                       "init_velocity_sigma", "update_joints", "ukf"},
                      "run config");
  TrackerConfig cfg;
  optional_into(j, "gate_px", cfg.gate_px);
  optional_into(j, "max_misses", cfg.max_misses);
  optional_into(j, "confirm_hits", cfg.confirm_hits);
  optional_into(j, "tentative_max_misses", cfg.tentative_max_misses);
  optional_into(j, "min_confidence", cfg.min_confidence);
  optional_into(j, "init_position_sigma", cfg.init_position_sigma);
  optional_into(j, "init_velocity_sigma", cfg.init_velocity_sigma);
  if (j.contains("prior") && !j["prior"].is_null()) cfg.target_prior = prior_from_json(j["prior"]);
  if (j.contains("default_prior")) cfg.default_prior = prior_from_json(j["default_prior"]);
  if (j.contains("update_joints")) {
    cfg.update_joints = {false, false, false, false};
    for (const auto& name : j["update_joints"]) {
      const auto kind = joint_from_name(name.get<std::string>());
      if (!kind) parse_fail("unknown joint '" + name.get<std::string>() + "' in update_joints");
      cfg.update_joints[static_cast<int>(*kind)] = true;
    }
  }
  if (j.contains("ukf")) {
    const json& u = j["ukf"];
    reject_unknown_keys(u, {"alpha", "beta", "kappa", "process_accel_sigma", "joint_pixel_sigma"},
                        "ukf config");
    optional_into(u, "alpha", cfg.ukf.alpha);
    optional_into(u, "beta", cfg.ukf.beta);
    optional_into(u, "kappa", cfg.ukf.kappa);
    optional_into(u, "process_accel_sigma", cfg.ukf.process_accel_sigma);
    if (u.contains("joint_pixel_sigma")) {
      for (const auto& [name, value] : u["joint_pixel_sigma"].items()) {
        const auto kind = joint_from_name(name);
        if (!kind) parse_fail("unknown joint '" + name + "' in joint_pixel_sigma");
        cfg.ukf.joint_pixel_sigma[static_cast<int>(*kind)] = value.get<double>();
      }
    }
  }
  cfg.validate();
  return cfg;
}

json to_json(const TrackerConfig& cfg) {
  json sigmas = json::object();
  json joints = json::array();
  for (JointKind kind : kJointPriority) {
    sigmas[std::string(joint_name(kind))] = cfg.ukf.pixel_sigma(kind);
    if (cfg.update_joints[static_cast<int>(kind)]) joints.push_back(joint_name(kind));
  }
  json j = {{"gate_px", cfg.gate_px},
            {"max_misses", cfg.max_misses},
            {"confirm_hits", cfg.confirm_hits},
            {"tentative_max_misses", cfg.tentative_max_misses},
            {"min_confidence", cfg.min_confidence},
            {"init_position_sigma", cfg.init_position_sigma},
            {"init_velocity_sigma", cfg.init_velocity_sigma},
            {"update_joints", joints},
            {"default_prior", to_json(cfg.default_prior)},
            {"ukf",
             {{"alpha", cfg.ukf.alpha},
              {"beta", cfg.ukf.beta},
              {"kappa", cfg.ukf.kappa},
              {"process_accel_sigma", cfg.ukf.process_accel_sigma},
              {"joint_pixel_sigma", sigmas}}}};
  if (cfg.target_prior) j["prior"] = to_json(*cfg.target_prior);
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  RunConfig run;
  run.tracker = tracker_config_from_json(j);
  if (j.contains("camera")) {
    if (!j["camera"].is_string()) parse_fail("run config 'camera' must be a camera file path");
    std::filesystem::path cam = j["camera"].get<std::string>();
    run.camera_file = cam.is_absolute() ? cam : path.parent_path() / cam;
  }
  return run;
}

Frame frame_from_json(const json& j, double min_confidence) {
  reject_unknown_keys(j, {"t", "detections", "reid_hint"}, "detection record");
  Frame frame;
  frame.timestamp = required<double>(j, "t", "detection record");
  if (j.contains("detections")) {
    for (const json& d : j["detections"]) {
      reject_unknown_keys(d, {"box", "joints"}, "detection");
      Detection det;
      det.box = box_from_json(d.at("box"));
      if (d.contains("joints")) {
        RawKeypoints raw;
        for (const auto& [name, value] : d["joints"].items()) {
          if (!value.is_array() || value.size() != 3) {
            parse_fail("joint '" + name + "' must be [u, v, confidence]");
          }
          const double conf = value[2].get<double>();
          if (!(conf >= 0.0 && conf <= 1.0)) parse_fail("joint confidence outside [0, 1]");
          raw[name] = {Vec2(value[0].get<double>(), value[1].get<double>()), conf};
        }
        det.joints = merge_joint_pairs(raw, det.box, min_confidence);
      }
      frame.detections.push_back(std::move(det));
    }
  }
  if (j.contains("reid_hint") && !j["reid_hint"].is_null()) {
    frame.reid_target_hint = j["reid_hint"].get<std::size_t>();
    if (*frame.reid_target_hint >= frame.detections.size()) {
      parse_fail("reid_hint does not index a detection");
    }
  }
  return frame;
}

json to_json(const Frame& frame) {
  json dets = json::array();
  for (const Detection& d : frame.detections) {
    json joints = json::object();
    for (const auto& [kind, obs] : d.joints) {
      joints[std::string(joint_name(kind))] =
          json::array({obs.pixel.x(), obs.pixel.y(), obs.confidence});
    }
    dets.push_back({{"box", box_to_json(d.box)}, {"joints", joints}});
  }
  json j = {{"t", frame.timestamp}, {"detections", dets}};
  if (frame.reid_target_hint) j["reid_hint"] = *frame.reid_target_hint;
  return j;
}

json to_json(const FrameResult& result) {
  json j = {{"t", result.timestamp}, {"status", to_string(result.status)}};
  if (result.target_location) j["target_xy"] = vec_to_json(*result.target_location);
  if (result.target_box) j["target_box"] = box_to_json(*result.target_box);
  if (result.target_detection) j["target_detection"] = *result.target_detection;
  if (result.reinit_joint) j["reinit_joint"] = joint_name(*result.reinit_joint);
  json tracks = json::array();
  for (const TrackRecord& t : result.tracks) {
    tracks.push_back({{"id", t.id},
                      {"status", to_string(t.status)},
                      {"is_target", t.is_target},
                      {"misses", t.misses},
                      {"xy", vec_to_json(t.robot_xy)}});
  }
  j["tracks"] = tracks;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      parse_fail(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace vjt
