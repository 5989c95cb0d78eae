#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vjt/association.hpp"
#include "vjt/camera.hpp"
#include "vjt/prior_model.hpp"
#include "vjt/ukf.hpp"

namespace vjt {

struct JointObservation {
  Vec2 pixel = Vec2::Zero();
  double confidence = 1.0;
};

using JointSet = std::map<JointKind, JointObservation>;
// Detector keypoints keyed by name, e.g. "left_knee" or "neck".
using RawKeypoints = std::map<std::string, JointObservation>;

struct Detection {
  BoundingBox box;
  JointSet joints;  // may be empty for box-only detections
};

struct Frame {
  double timestamp = 0.0;
  std::vector<Detection> detections;
  std::optional<std::size_t> reid_target_hint;
};

enum class TrackStatus { Tentative, Confirmed, Lost };
enum class TargetStatus { Tracking, Lost, Uninitialized };

std::string_view to_string(TrackStatus status);
std::string_view to_string(TargetStatus status);

struct TrackRecord {
  int id = 0;
  TrackState state;
  TrackStatus status = TrackStatus::Tentative;
  bool is_target = false;
  int misses = 0;  // consecutive frames without a measurement update
  int hits = 0;    // consecutive frames with a measurement update
  PriorModel prior;
  Vec2 robot_xy = Vec2::Zero();  // refreshed when a FrameResult is produced
};

struct FrameResult {
  double timestamp = 0.0;
  TargetStatus status = TargetStatus::Uninitialized;
  std::optional<Vec2> target_location;  // robot frame, meters
  std::optional<BoundingBox> target_box;
  std::optional<std::size_t> target_detection;
  std::optional<JointKind> reinit_joint;  // set on frames where the target was (re)initialized
  std::vector<TrackRecord> tracks;
  std::vector<std::size_t> matched_detections;
  std::vector<std::size_t> spawned_detections;
  std::vector<std::size_t> unmatched_detections;
};

// Collapses left/right keypoint pairs into the four tracked joints. Pairs take the box center as
// horizontal coordinate and the mean (or single) vertical coordinate. The neck is taken directly
// when present, otherwise built from the shoulders. Joints below min_confidence are dropped.
JointSet merge_joint_pairs(const RawKeypoints& raw, const BoundingBox& box, double min_confidence);

struct TrackerConfig {
  double gate_px = kDefaultGatePx;
  int max_misses = 15;
  int confirm_hits = 3;
  int tentative_max_misses = 3;
  double min_confidence = 0.3;
  double init_position_sigma = 0.3;  // meters
  double init_velocity_sigma = 1.0;  // m/s
  UkfParams ukf;
  PriorModel default_prior;
  std::optional<PriorModel> target_prior;  // skips full-body construction when set
  std::array<bool, 4> update_joints = {true, true, true, true};  // indexed by JointKind

  void validate() const;
};

// Single-writer tracking state machine for one camera stream.
class Session {
 public:
  Session() = default;
  Session(const CameraModel& camera, const CameraExtrinsics& extrinsics, TrackerConfig config);

  FrameResult process_frame(const Frame& frame);

  bool configured() const { return setup_.has_value(); }
  const std::vector<TrackRecord>& tracks() const { return tracks_; }
  std::optional<PriorModel> target_prior() const { return target_prior_; }

 private:
  struct Setup {
    CameraModel camera;
    CameraExtrinsics extrinsics;
    GroundPlane ground;
    TrackerConfig config;
  };

  JointPixels usable_joints(const Detection& detection) const;
  TrackState fresh_state(const Vec3& ankle) const;
  bool update_track(TrackRecord& track, const Detection& detection) const;
  struct TargetPlan {
    Vec3 ankle;
    JointKind used;
    PriorModel prior;
  };
  std::optional<TargetPlan> plan_target_init(const Detection& detection) const;
  void apply_target_init(const TargetPlan& plan);
  Vec2 to_robot(const StateVector& mean) const;
  std::optional<BoundingBox> predicted_box(const TrackRecord& track) const;

  std::optional<Setup> setup_;
  std::vector<TrackRecord> tracks_;
  std::optional<PriorModel> target_prior_;
  std::optional<double> last_timestamp_;
  int next_id_ = 1;
};

}  // namespace vjt
