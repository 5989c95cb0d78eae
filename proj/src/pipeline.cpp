#include "vjt/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "vjt/error.hpp"

namespace vjt {

std::string_view to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Lost: return "lost";
  }
  return "unknown";
}

std::string_view to_string(TargetStatus status) {
  switch (status) {
    case TargetStatus::Tracking: return "tracking";
    case TargetStatus::Lost: return "lost";
    case TargetStatus::Uninitialized: return "uninitialized";
  }
  return "unknown";
}

namespace {

const JointObservation* accepted(const RawKeypoints& raw, const std::string& name,
                                 double min_confidence) {
  const auto it = raw.find(name);
  if (it == raw.end() || it->second.confidence < min_confidence) return nullptr;
  return &it->second;
}

// Pair rule: horizontal from the box, vertical averaged over the visible members.
std::optional<JointObservation> merge_pair(const JointObservation* left,
                                           const JointObservation* right, double box_u) {
  if (left && right) {
    return JointObservation{Vec2(box_u, 0.5 * (left->pixel.y() + right->pixel.y())),
                            0.5 * (left->confidence + right->confidence)};
  }
  const JointObservation* single = left ? left : right;
  if (!single) return std::nullopt;
  return JointObservation{Vec2(box_u, single->pixel.y()), single->confidence};
}

}  // namespace

JointSet merge_joint_pairs(const RawKeypoints& raw, const BoundingBox& box, double min_confidence) {
  JointSet merged;

  if (const auto* neck = accepted(raw, "neck", min_confidence)) {
    merged[JointKind::Neck] = *neck;
  } else {
    const auto* left = accepted(raw, "left_shoulder", min_confidence);
    const auto* right = accepted(raw, "right_shoulder", min_confidence);
    if (left && right) {
      merged[JointKind::Neck] = {0.5 * (left->pixel + right->pixel),
                                 0.5 * (left->confidence + right->confidence)};
    } else if (auto single = merge_pair(left, right, box.u)) {
      merged[JointKind::Neck] = *single;
    }
  }

  for (JointKind kind : {JointKind::Hip, JointKind::Knee, JointKind::Ankle}) {
    const std::string name(joint_name(kind));
    if (const auto* direct = accepted(raw, name, min_confidence)) {
      merged[kind] = *direct;
      continue;
    }
    if (auto pair = merge_pair(accepted(raw, "left_" + name, min_confidence),
                               accepted(raw, "right_" + name, min_confidence), box.u)) {
      merged[kind] = *pair;
    }
  }
  return merged;
}

void TrackerConfig::validate() const {
  if (!(gate_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "gate must be positive");
  if (max_misses < 0 || confirm_hits < 1 || tentative_max_misses < 1) {
    throw Error(ErrorCode::InvalidArgument, "track lifecycle counters out of range");
  }
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_confidence must lie in [0, 1]");
  }
  if (!(init_position_sigma > 0.0) || !(init_velocity_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "initial sigmas must be positive");
  }
  ukf.validate();
  default_prior.validate();
  if (target_prior) target_prior->validate();
  if (std::none_of(update_joints.begin(), update_joints.end(), [](bool b) { return b; })) {
    throw Error(ErrorCode::InvalidArgument, "at least one joint must be enabled for updates");
  }
}

Session::Session(const CameraModel& camera, const CameraExtrinsics& extrinsics,
                 TrackerConfig config) {
  config.validate();
  setup_.emplace(Setup{camera, extrinsics, extrinsics.ground_plane(), std::move(config)});
}

JointPixels Session::usable_joints(const Detection& detection) const {
  JointPixels joints;
  for (const auto& [kind, obs] : detection.joints) {
    if (obs.confidence < setup_->config.min_confidence) continue;
    if (!setup_->config.update_joints[static_cast<int>(kind)]) continue;
    joints[kind] = obs.pixel;
  }
  return joints;
}

TrackState Session::fresh_state(const Vec3& ankle) const {
  const TrackerConfig& cfg = setup_->config;
  TrackState state;
  state.mean << GroundFrame(setup_->ground).to_ground(ankle), 0.0, 0.0;
  const double pos_var = cfg.init_position_sigma * cfg.init_position_sigma;
  const double vel_var = cfg.init_velocity_sigma * cfg.init_velocity_sigma;
  state.covariance = StateVector(pos_var, pos_var, vel_var, vel_var).asDiagonal();
  return state;
}

bool Session::update_track(TrackRecord& track, const Detection& detection) const {
  const JointPixels joints = usable_joints(detection);
  if (joints.empty()) return false;
  const StackedMeasurement z = stack_measurement(joints);
  try {
    track.state = update(track.state, z.pixels, z.visible, setup_->camera, setup_->ground,
                         track.prior, setup_->config.ukf);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BehindCamera) throw;
    return false;
  }
  return true;
}

std::optional<Session::TargetPlan> Session::plan_target_init(const Detection& detection) const {
  const Setup& s = *setup_;
  std::optional<PriorModel> prior = target_prior_ ? target_prior_ : s.config.target_prior;

  if (!prior) {
    JointPixels full;
    for (const auto& [kind, obs] : detection.joints) {
      if (obs.confidence >= s.config.min_confidence) full[kind] = obs.pixel;
    }
    if (full.size() != kJointPriority.size()) return std::nullopt;
    try {
      const PriorFit fit = construct_prior(s.camera, s.ground, full, s.config.default_prior);
      return TargetPlan{fit.ankle, JointKind::Ankle, fit.prior};
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  const JointPixels joints = usable_joints(detection);
  if (joints.empty()) return std::nullopt;
  try {
    const JointInit init = init_from_best_joint(s.camera, s.ground, *prior, joints);
    return TargetPlan{init.ankle, init.used, *prior};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoUsableJoint) throw;
    return std::nullopt;
  }
}

void Session::apply_target_init(const TargetPlan& plan) {
  target_prior_ = plan.prior;
  auto target = std::find_if(tracks_.begin(), tracks_.end(),
                             [](const TrackRecord& t) { return t.is_target; });
  if (target == tracks_.end()) {
    tracks_.push_back(TrackRecord{});
    target = std::prev(tracks_.end());
    target->id = next_id_++;
    target->is_target = true;
  }
  target->state = fresh_state(plan.ankle);
  target->status = TrackStatus::Confirmed;
  target->misses = 0;
  target->hits = 1;
  target->prior = plan.prior;
}

Vec2 Session::to_robot(const StateVector& mean) const {
  const Vec3 ankle = GroundFrame(setup_->ground).to_camera(mean.head<2>());
  return camera_to_robot(ankle, setup_->extrinsics.offset, setup_->extrinsics.tilt);
}

std::optional<BoundingBox> Session::predicted_box(const TrackRecord& track) const {
  try {
    const ExpectedBox eb = expected_box(track.state.mean, setup_->camera, setup_->ground, track.prior);
    const Vec3 ankle = GroundFrame(setup_->ground).to_camera(track.state.mean.head<2>());
    const double bottom = project(setup_->camera, ankle).y();
    // Head top approximated as 1.2 x neck height.
    const double top =
        project(setup_->camera, joint_position(ankle, setup_->ground, 1.2 * track.prior.h_neck)).y();
    return BoundingBox{eb.u, 0.5 * (top + bottom), eb.w, std::max(bottom - top, 1.0)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

FrameResult Session::process_frame(const Frame& frame) {
  if (!setup_) throw Error(ErrorCode::UninitializedSession, "session has no camera or config");
  if (last_timestamp_ && !(frame.timestamp > *last_timestamp_)) {
    throw Error(ErrorCode::NonMonotonicTimestamp, "frame timestamps must strictly increase");
  }
  if (frame.reid_target_hint && *frame.reid_target_hint >= frame.detections.size()) {
    throw Error(ErrorCode::InvalidArgument, "reid hint does not index a detection");
  }
  const Setup& s = *setup_;
  const TrackerConfig& cfg = s.config;
  const double dt = last_timestamp_ ? frame.timestamp - *last_timestamp_ : 0.0;
  last_timestamp_ = frame.timestamp;

  FrameResult result;
  result.timestamp = frame.timestamp;

  // 1. predict every live track
  if (dt > 0.0) {
    for (TrackRecord& track : tracks_) {
      if (track.status != TrackStatus::Lost) track.state = predict(track.state, dt, cfg.ukf);
    }
  }

  // 2. associate in box space
  std::vector<TrackExpectation> expectations;
  for (const TrackRecord& track : tracks_) {
    if (track.status == TrackStatus::Lost) continue;
    try {
      expectations.push_back(
          {track.id, expected_box(track.state.mean, s.camera, s.ground, track.prior)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BehindCamera) throw;
    }
  }
  std::vector<BoundingBox> boxes;
  boxes.reserve(frame.detections.size());
  for (const Detection& d : frame.detections) boxes.push_back(d.box);
  const AssociationResult assoc = match_gnn(expectations, boxes, cfg.gate_px);

  const auto target_it = std::find_if(tracks_.begin(), tracks_.end(),
                                      [](const TrackRecord& t) { return t.is_target; });
  const bool target_needs_reid =
      target_it == tracks_.end() || target_it->status == TrackStatus::Lost;
  std::optional<TargetPlan> target_plan;
  if (target_needs_reid && frame.reid_target_hint) {
    target_plan = plan_target_init(frame.detections[*frame.reid_target_hint]);
  }
  // Only a hint that actually re-initializes the target claims its detection.
  const std::optional<std::size_t> reid_detection =
      target_plan ? frame.reid_target_hint : std::nullopt;

  std::vector<char> det_claimed(frame.detections.size(), 0);
  std::vector<int> updated_ids;
  std::vector<int> drop_ids;

  // 3. measurement updates for matched tracks
  for (const Match& m : assoc.matches) {
    auto track = std::find_if(tracks_.begin(), tracks_.end(),
                              [&](const TrackRecord& t) { return t.id == m.track_id; });
    if (reid_detection && m.detection == *reid_detection) {
      // A non-target track was following the re-identified person; the target takes over.
      if (!track->is_target) drop_ids.push_back(track->id);
      continue;
    }
    det_claimed[m.detection] = 1;
    result.matched_detections.push_back(m.detection);
    if (track->is_target) result.target_detection = m.detection;
    if (update_track(*track, frame.detections[m.detection])) updated_ids.push_back(track->id);
  }

  // 4. lifecycle bookkeeping
  for (TrackRecord& track : tracks_) {
    if (track.status == TrackStatus::Lost) continue;
    if (std::find(updated_ids.begin(), updated_ids.end(), track.id) != updated_ids.end()) {
      track.misses = 0;
      ++track.hits;
      if (track.status == TrackStatus::Tentative && track.hits >= cfg.confirm_hits) {
        track.status = TrackStatus::Confirmed;
      }
    } else {
      ++track.misses;
      track.hits = 0;
      if (track.status == TrackStatus::Tentative && track.misses >= cfg.tentative_max_misses) {
        drop_ids.push_back(track.id);
      } else if (track.status == TrackStatus::Confirmed && track.misses > cfg.max_misses) {
        if (track.is_target) {
          track.status = TrackStatus::Lost;
        } else {
          drop_ids.push_back(track.id);
        }
      }
    }
  }
  std::erase_if(tracks_, [&](const TrackRecord& t) {
    return !t.is_target && std::find(drop_ids.begin(), drop_ids.end(), t.id) != drop_ids.end();
  });

  // 5. target (re)initialization from the identification hint
  if (target_plan) {
    apply_target_init(*target_plan);
    det_claimed[*reid_detection] = 1;
    result.matched_detections.push_back(*reid_detection);
    result.target_detection = *reid_detection;
    result.reinit_joint = target_plan->used;
  }

  // 6. spawn tentative tracks from leftover detections
  for (std::size_t d = 0; d < frame.detections.size(); ++d) {
    if (det_claimed[d]) continue;
    const JointPixels joints = usable_joints(frame.detections[d]);
    std::optional<JointInit> init;
    if (!joints.empty()) {
      try {
        init = init_from_best_joint(s.camera, s.ground, cfg.default_prior, joints);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoUsableJoint) throw;
      }
    }
    if (!init) {
      result.unmatched_detections.push_back(d);
      continue;
    }
    TrackRecord track;
    track.id = next_id_++;
    track.state = fresh_state(init->ankle);
    track.prior = cfg.default_prior;
    tracks_.push_back(track);
    result.spawned_detections.push_back(d);
  }
  std::sort(result.matched_detections.begin(), result.matched_detections.end());

  // 7. report
  for (TrackRecord& track : tracks_) track.robot_xy = to_robot(track.state.mean);
  const auto target = std::find_if(tracks_.begin(), tracks_.end(),
                                   [](const TrackRecord& t) { return t.is_target; });
  if (target == tracks_.end()) {
    result.status = TargetStatus::Uninitialized;
  } else if (target->status == TrackStatus::Lost) {
    result.status = TargetStatus::Lost;
  } else {
    result.status = TargetStatus::Tracking;
    result.target_location = target->robot_xy;
    if (result.target_detection) {
      result.target_box = frame.detections[*result.target_detection].box;
    } else {
      result.target_box = predicted_box(*target);
    }
  }
  if (result.status != TargetStatus::Tracking) result.target_detection.reset();
  result.tracks = tracks_;
  return result;
}

}  // namespace vjt
