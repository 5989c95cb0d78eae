#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vjt/camera.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/prior_model.hpp"

namespace vjt {

using json = nlohmann::json;

struct CameraConfig {
  CameraModel camera;
  CameraExtrinsics extrinsics;
};

// Camera file keys: fx, fy, cx, cy, image_width, image_height, camera_height_m, tilt_rad and
// optionally offset_m [x, y, z] (camera origin in the robot frame).
CameraConfig camera_config_from_json(const json& j);
json to_json(const CameraConfig& config);

PriorModel prior_from_json(const json& j);
json to_json(const PriorModel& prior);

// Missing keys keep their defaults; unknown keys are rejected.
TrackerConfig tracker_config_from_json(const json& j);
json to_json(const TrackerConfig& config);

// Run config: tracker tunables plus an optional "camera" file reference (resolved relative to
// the config file) and an optional fitted "prior".
struct RunConfig {
  TrackerConfig tracker;
  std::optional<std::filesystem::path> camera_file;
};
RunConfig load_run_config(const std::filesystem::path& path);

// Detection stream record: {"t", "detections": [{"box": [u,v,w,h], "joints": {name: [u,v,c]}}],
// "reid_hint"?}. Joint names may be merged (neck/hip/knee/ankle) or left_/right_ keypoints.
Frame frame_from_json(const json& j, double min_confidence);
json to_json(const Frame& frame);

json to_json(const FrameResult& result);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<json>& records);

json box_to_json(const BoundingBox& box);
BoundingBox box_from_json(const json& j);

}  // namespace vjt
