#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vjt/error.hpp"
#include "vjt/io.hpp"

using namespace vjt;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected vjt::Error");
  return ErrorCode::InvalidArgument;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "vjt_test_io";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("camera config") {
  const json j = json::parse(R"({"fx": 500, "fy": 510, "cx": 320, "cy": 240, "image_width": 640,
                                 "image_height": 480, "camera_height_m": 1.4, "tilt_rad": 0.1})");
  const CameraConfig c = camera_config_from_json(j);
  CHECK(c.camera.fy() == 510);
  CHECK(c.extrinsics.height == 1.4);
  CHECK(c.extrinsics.tilt == 0.1);
  CHECK(c.extrinsics.offset == Vec3::Zero());
  const CameraConfig again = camera_config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));

  json missing = j;
  missing.erase("fx");
  CHECK(code_of([&] { camera_config_from_json(missing); }) == ErrorCode::ParseError);
  json extra = j;
  extra["focal"] = 3;
  CHECK(code_of([&] { camera_config_from_json(extra); }) == ErrorCode::ParseError);
  json bad_tilt = j;
  bad_tilt["tilt_rad"] = 2.0;
  CHECK(code_of([&] { camera_config_from_json(bad_tilt); }) == ErrorCode::InvalidTilt);
  json offset = j;
  offset["offset_m"] = {0.2, 0.0, 1.4};
  CHECK(camera_config_from_json(offset).extrinsics.offset == Vec3(0.2, 0.0, 1.4));
}

TEST_CASE("prior and tracker config round trip") {
  PriorModel p;
  p.h_neck = 1.52;
  p.h_hip = 1.01;
  p.h_knee = 0.55;
  p.body_width = 0.45;
  CHECK(prior_from_json(to_json(p)) == p);
  CHECK_THROWS_AS(prior_from_json(json::parse(R"({"h_neck": 0.5, "h_hip": 0.9, "h_knee": 0.4})")), Error);

  const json j = json::parse(R"({"gate_px": 60, "max_misses": 10, "update_joints": ["neck"],
                                 "prior": {"h_neck": 1.5, "h_hip": 1.0, "h_knee": 0.5},
                                 "ukf": {"alpha": 0.3, "joint_pixel_sigma": {"knee": 3}}})");
  const TrackerConfig cfg = tracker_config_from_json(j);
  CHECK(cfg.gate_px == 60);
  CHECK(cfg.max_misses == 10);
  CHECK(cfg.update_joints == std::array<bool, 4>{true, false, false, false});
  REQUIRE(cfg.target_prior.has_value());
  CHECK(cfg.target_prior->h_neck == 1.5);
  CHECK(cfg.ukf.alpha == 0.3);
  CHECK(cfg.ukf.pixel_sigma(JointKind::Knee) == 3);
  CHECK(cfg.ukf.pixel_sigma(JointKind::Neck) == 4);
  CHECK(to_json(tracker_config_from_json(to_json(cfg))) == to_json(cfg));

  const TrackerConfig defaults = tracker_config_from_json(json::object());
  CHECK(defaults.gate_px == 80);
  CHECK(defaults.max_misses == 15);
  CHECK(defaults.min_confidence == 0.3);
  CHECK_FALSE(defaults.target_prior.has_value());

  CHECK(code_of([] { tracker_config_from_json(json::parse(R"({"gating": 3})")); }) == ErrorCode::ParseError);
  CHECK(code_of([] { tracker_config_from_json(json::parse(R"({"update_joints": ["elbow"]})")); }) ==
        ErrorCode::ParseError);
  CHECK_THROWS_AS(tracker_config_from_json(json::parse(R"({"ukf": {"alpha": 2}})")), Error);
}

TEST_CASE("run config resolves the camera next to the config file") {
  const fs::path dir = scratch_dir() / "run";
  fs::create_directories(dir);
  write_text_file(dir / "run.json", R"({"camera": "cam.json", "gate_px": 70})");
  const RunConfig run = load_run_config(dir / "run.json");
  REQUIRE(run.camera_file.has_value());
  CHECK(*run.camera_file == dir / "cam.json");
  CHECK(run.tracker.gate_px == 70);

  write_text_file(dir / "inline.json", R"({"camera": {"fx": 500}})");
  CHECK(code_of([&] { load_run_config(dir / "inline.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("detection records") {
  const json j = json::parse(R"({"t": 0.25, "reid_hint": 1, "detections": [
      {"box": [100, 200, 40, 120], "joints": {}},
      {"box": [400, 500, 120, 400], "joints": {
          "left_shoulder": [370, 320, 0.9], "right_shoulder": [430, 330, 0.8],
          "left_hip": [380, 500, 0.1], "right_hip": [420, 520, 0.7],
          "left_ankle": [380, 700, 0.9], "right_ankle": [420, 710, 0.9]}}]})");
  const Frame f = frame_from_json(j, 0.3);
  CHECK(f.timestamp == 0.25);
  CHECK(f.reid_target_hint == 1u);
  REQUIRE(f.detections.size() == 2);
  CHECK(f.detections[0].joints.empty());
  const JointSet& joints = f.detections[1].joints;
  CHECK(joints.at(JointKind::Neck).pixel == Vec2(400, 325));
  CHECK(joints.at(JointKind::Hip).pixel == Vec2(400, 520));
  CHECK(joints.at(JointKind::Ankle).pixel == Vec2(400, 705));
  CHECK_FALSE(joints.contains(JointKind::Knee));

  // Serialized frames are pre-merged and parse back to the same content.
  const Frame again = frame_from_json(to_json(f), 0.3);
  CHECK(to_json(again) == to_json(f));

  CHECK(code_of([] { frame_from_json(json::parse(R"({"t": 0, "detections": [], "reid_hint": 0})"), 0.3); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] {
          frame_from_json(json::parse(R"({"t": 0, "detections": [{"box": [1, 2, 3, 4], "joints": {"neck": [1, 2]}}]})"), 0.3);
        }) == ErrorCode::ParseError);
  CHECK(code_of([] {
          frame_from_json(json::parse(R"({"t": 0, "detections": [{"box": [1, 2, 3, 4], "joints": {"neck": [1, 2, 1.5]}}]})"), 0.3);
        }) == ErrorCode::ParseError);
  CHECK(code_of([] { frame_from_json(json::parse(R"({"detections": []})"), 0.3); }) == ErrorCode::ParseError);
  CHECK(code_of([] { frame_from_json(json::parse(R"({"t": 0, "extra": 1})"), 0.3); }) == ErrorCode::ParseError);
}

TEST_CASE("frame results serialize status-dependent fields") {
  FrameResult r;
  r.timestamp = 1.5;
  r.status = TargetStatus::Lost;
  TrackRecord t;
  t.id = 4;
  t.is_target = true;
  t.status = TrackStatus::Lost;
  t.misses = 16;
  r.tracks.push_back(t);
  const json j = to_json(r);
  CHECK(j["status"] == "lost");
  CHECK_FALSE(j.contains("target_xy"));
  CHECK(j["tracks"][0]["misses"] == 16);
  CHECK(j["tracks"][0]["status"] == "lost");

  r.status = TargetStatus::Tracking;
  r.target_location = Vec2(1, 2);
  r.reinit_joint = JointKind::Knee;
  const json k = to_json(r);
  CHECK(k["target_xy"] == json::array({1.0, 2.0}));
  CHECK(k["reinit_joint"] == "knee");
}

TEST_CASE("files") {
  const fs::path dir = scratch_dir();
  write_text_file(dir / "a.jsonl", "{\"x\": 1}\n\n{\"x\": 2}\n");
  const std::vector<json> recs = read_jsonl(dir / "a.jsonl");
  REQUIRE(recs.size() == 2);
  CHECK(to_jsonl(recs) == "{\"x\":1}\n{\"x\":2}\n");

  write_text_file(dir / "bad.jsonl", "{\"x\": 1}\n{oops\n");
  CHECK(code_of([&] { read_jsonl(dir / "bad.jsonl"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_jsonl(dir / "missing.jsonl"); }) == ErrorCode::IoFailure);
  CHECK(code_of([&] { read_json_file(dir / "missing.json"); }) == ErrorCode::IoFailure);
  CHECK(code_of([&] { write_text_file(dir / "no" / "such" / "dir.txt", "x"); }) == ErrorCode::IoFailure);

  CHECK(box_from_json(box_to_json({1, 2, 3, 4})) == BoundingBox{1, 2, 3, 4});
  CHECK_THROWS_AS(box_from_json(json::parse("[1, 2, 3]")), Error);
  CHECK_THROWS_AS(box_from_json(json::parse("[1, 2, 0, 4]")), Error);
}
