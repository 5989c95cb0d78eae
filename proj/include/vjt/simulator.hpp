#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vjt/camera.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/prior_model.hpp"

namespace vjt {

inline constexpr double kMaxWalkingSpeed = 3.0;  // m/s

enum class TrajectoryKind { Line, Arc, Sinusoid, Waypoints };

// Ground trajectory in the robot frame (x forward, y left), meters and seconds.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Line;
  Vec2 start = Vec2(4.0, 0.0);
  Vec2 velocity = Vec2::Zero();  // line and sinusoid carrier
  Vec2 center = Vec2::Zero();    // arc
  double radius = 1.0;
  double angular_speed = 0.0;  // rad/s
  double start_angle = 0.0;
  double amplitude = 0.0;  // sinusoid, lateral to the carrier velocity
  double period = 1.0;
  std::vector<Vec2> waypoints;
  double speed = 1.0;  // waypoints

  Vec2 position(double t) const;
  double max_speed() const;
};

struct SimPerson {
  PriorModel body;
  double head_height = 0.25;  // top of head above the neck
  TrajectorySpec trajectory;
};

struct Occluder {
  double u0 = 0.0, v0 = 0.0, u1 = 0.0, v1 = 0.0;
  std::vector<int> persons;  // empty: occludes everyone

  bool contains(const Vec2& p) const { return p.x() >= u0 && p.x() <= u1 && p.y() >= v0 && p.y() <= v1; }
  bool applies_to(int person) const;
};

enum class NoiseKind { Gaussian, StudentT };
enum class HintMode { Never, First, Always, Frames };

struct Scenario {
  std::string name = "scenario";
  CameraModel camera{900.0, 900.0, 640.0, 360.0, 1280, 720};
  CameraExtrinsics extrinsics;
  std::vector<SimPerson> persons;
  int target = 0;
  double duration = 1.0;  // seconds
  double rate = 30.0;     // Hz
  double pixel_noise_sigma = 0.0;
  double box_noise_sigma = 0.0;
  NoiseKind noise = NoiseKind::Gaussian;
  std::array<double, 4> joint_dropout = {0.0, 0.0, 0.0, 0.0};  // indexed by JointKind
  std::vector<Occluder> occluders;
  std::vector<std::pair<int, int>> target_blackout;  // [first, last) frame ranges
  HintMode hint = HintMode::Always;
  std::vector<int> hint_frames;
  bool full_extent_boxes = false;
  std::uint64_t seed = 0;

  int frame_count() const;
  void validate() const;
};

struct PersonTruth {
  int id = 0;
  Vec2 robot_xy = Vec2::Zero();
  Vec3 camera_ankle = Vec3::Zero();
  std::optional<BoundingBox> box;  // noise-free visible extent
  std::optional<std::size_t> detection;
  JointPixels true_joints;         // exact projections of the emitted joints
};

struct TruthFrame {
  double timestamp = 0.0;
  int target = 0;
  std::vector<PersonTruth> persons;
  std::optional<std::size_t> reid_hint;
};

struct SimulationOutput {
  std::vector<Frame> detections;
  std::vector<TruthFrame> truth;
};

SimulationOutput generate(const Scenario& scenario);

struct OracleMismatch {
  int frame = 0;
  int person = 0;
  JointKind joint = JointKind::Ankle;
  double error = 0.0;
};

struct OracleSample {
  int frame = 0;
  int person = 0;
  JointKind joint = JointKind::Ankle;
  double depth = 0.0;  // ground distance from the camera foot point, meters
  double error = 0.0;  // meters
};

struct OracleReport {
  std::vector<OracleSample> samples;
  std::vector<OracleMismatch> mismatches;
  double max_error = 0.0;
};

// Ray-casts every emitted joint with the person's true heights and compares the ground location
// with the truth stream. Mismatches are samples whose error exceeds `tolerance`.
OracleReport oracle_localize(const Scenario& scenario, const SimulationOutput& output,
                             double tolerance = 1e-9);

Scenario scenario_from_json(const nlohmann::json& j);
// Like scenario_from_json, but "camera" may also name a camera file relative to `path`.
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const TruthFrame& truth);

}  // namespace vjt
