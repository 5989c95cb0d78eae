#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vjt/error.hpp"
#include "vjt/io.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/simulator.hpp"

using namespace vjt;

namespace {

Scenario walker(double noise = 0.0) {
  Scenario s;
  s.extrinsics.height = 1.0;
  s.extrinsics.tilt = 0.1;
  s.duration = 4.0;
  s.pixel_noise_sigma = noise;
  s.hint = HintMode::First;
  s.seed = 17;
  SimPerson p;
  p.trajectory.start = Vec2(6.0, 0.5);
  p.trajectory.velocity = Vec2(-0.6, -0.2);
  s.persons.push_back(p);
  return s;
}

Scenario two_people() {
  Scenario s = walker(1.0);
  s.duration = 5.0;
  s.hint = HintMode::Always;
  SimPerson other;
  other.body.h_neck = 1.5;
  other.body.h_hip = 1.0;
  other.body.h_knee = 0.52;
  other.trajectory.start = Vec2(3.0, -1.5);
  other.trajectory.velocity = Vec2(0.0, 0.6);
  s.persons.push_back(other);
  s.occluders.push_back({600, 0, 700, 720, {0}});
  return s;
}

std::vector<FrameResult> run(const Scenario& s, const TrackerConfig& cfg, const SimulationOutput& sim) {
  Session session(s.camera, s.extrinsics, cfg);
  std::vector<FrameResult> out;
  for (const Frame& f : sim.detections) out.push_back(session.process_frame(f));
  return out;
}

Detection full_detection(const CameraModel& cam, const GroundPlane& g, const Vec3& ankle,
                         const PriorModel& body) {
  Detection d;
  for (const auto& [k, px] : vjt::test::full_body_pixels(cam, g, ankle, body)) d.joints[k] = {px, 0.9};
  const Vec2 top = d.joints[JointKind::Neck].pixel;
  const Vec2 bottom = d.joints[JointKind::Ankle].pixel;
  const double w = cam.fx() * body.body_width / ankle.z();
  d.box = {bottom.x(), 0.5 * (top.y() + bottom.y()), w, bottom.y() - top.y()};
  return d;
}

}  // namespace

TEST_CASE("merge_joint_pairs examples") {
  const BoundingBox box{400, 500, 120, 400};
  SUBCASE("both ankles average vertically at the box center") {
    const JointSet j = merge_joint_pairs({{"left_ankle", {Vec2(380, 700), 0.9}},
                                          {"right_ankle", {Vec2(420, 710), 0.8}}},
                                         box, 0.3);
    REQUIRE(j.contains(JointKind::Ankle));
    CHECK(j.at(JointKind::Ankle).pixel == Vec2(400, 705));
  }
  SUBCASE("a single knee keeps its height") {
    const JointSet j = merge_joint_pairs({{"left_knee", {Vec2(380, 600), 0.9}}}, box, 0.3);
    REQUIRE(j.contains(JointKind::Knee));
    CHECK(j.at(JointKind::Knee).pixel == Vec2(400, 600));
  }
  SUBCASE("low-confidence hips are dropped") {
    const JointSet j = merge_joint_pairs({{"left_hip", {Vec2(380, 500), 0.1}},
                                          {"right_hip", {Vec2(420, 500), 0.1}}},
                                         box, 0.3);
    CHECK_FALSE(j.contains(JointKind::Hip));
    CHECK(j.empty());
  }
  SUBCASE("one confident member of a pair survives alone") {
    const JointSet j = merge_joint_pairs({{"left_hip", {Vec2(380, 500), 0.1}},
                                          {"right_hip", {Vec2(420, 520), 0.7}}},
                                         box, 0.3);
    CHECK(j.at(JointKind::Hip).pixel == Vec2(400, 520));
  }
  SUBCASE("neck from shoulders or taken directly") {
    const JointSet s = merge_joint_pairs({{"left_shoulder", {Vec2(370, 320), 0.9}},
                                          {"right_shoulder", {Vec2(430, 330), 0.9}}},
                                         box, 0.3);
    CHECK(s.at(JointKind::Neck).pixel == Vec2(400, 325));
    const JointSet d = merge_joint_pairs({{"neck", {Vec2(398, 310), 0.9}},
                                          {"left_shoulder", {Vec2(370, 320), 0.9}}},
                                         box, 0.3);
    CHECK(d.at(JointKind::Neck).pixel == Vec2(398, 310));
  }
  SUBCASE("pre-merged names pass through") {
    const JointSet j = merge_joint_pairs({{"hip", {Vec2(405, 480), 0.5}}, {"ankle", {Vec2(401, 690), 0.5}}},
                                         box, 0.3);
    CHECK(j.at(JointKind::Hip).pixel == Vec2(405, 480));
    CHECK(j.at(JointKind::Ankle).pixel == Vec2(401, 690));
  }
}

TEST_CASE("camera_to_robot examples") {
  CHECK((camera_to_robot(Vec3(0, 1.4, 5), Vec3::Zero(), 0.0) - Vec2(5, 0)).norm() < 1e-15);
  CHECK((camera_to_robot(Vec3(0, 1.4, 5), Vec3(0.2, 0, 0), 0.0) - Vec2(5.2, 0)).norm() < 1e-15);
  CHECK((camera_to_robot(Vec3(1, 1.4, 5), Vec3::Zero(), 0.0) - Vec2(5, -1)).norm() < 1e-15);

  CameraExtrinsics ext;
  ext.tilt = 0.1;
  ext.height = 1.2;
  ext.offset = Vec3(0.3, -0.1, 1.2);
  const Vec3 cam = robot_ground_to_camera(Vec2(4, 1), ext);
  CHECK(std::abs(ext.ground_plane().height_of(cam)) < 1e-12);
  CHECK((camera_to_robot(cam, ext.offset, ext.tilt) - Vec2(4, 1)).norm() < 1e-9);

  // Independent construction: rotate the level point (lateral, height, depth) into the camera.
  const Vec3 level_pt = vjt::test::ground_point(1.2, 0.1, -(1.0 - ext.offset.y()), 4.0 - ext.offset.x());
  CHECK((level_pt - cam).norm() < 1e-12);
}

TEST_CASE("session preconditions") {
  Session blank;
  CHECK_FALSE(blank.configured());
  try {
    blank.process_frame(Frame{});
    FAIL("unconfigured session accepted a frame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UninitializedSession);
  }

  const Scenario s = walker();
  Session session(s.camera, s.extrinsics, TrackerConfig{});
  session.process_frame(Frame{1.0, {}, std::nullopt});
  try {
    session.process_frame(Frame{1.0, {}, std::nullopt});
    FAIL("repeated timestamp accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonMonotonicTimestamp);
  }
  CHECK_THROWS_AS(session.process_frame(Frame{2.0, {}, 0}), Error);

  TrackerConfig bad;
  bad.gate_px = 0.0;
  CHECK_THROWS_AS(Session(s.camera, s.extrinsics, bad), Error);
  TrackerConfig none;
  none.update_joints = {false, false, false, false};
  CHECK_THROWS_AS(Session(s.camera, s.extrinsics, none), Error);
}

TEST_CASE("a fully visible target is tracked") {
  const Scenario s = walker(1.0);
  const SimulationOutput sim = generate(s);
  const std::vector<FrameResult> res = run(s, TrackerConfig{}, sim);
  CHECK(res.front().reinit_joint == JointKind::Ankle);  // full-body construction
  for (std::size_t k = 0; k < res.size(); ++k) {
    REQUIRE(res[k].status == TargetStatus::Tracking);
    REQUIRE(res[k].target_location.has_value());
    CHECK((*res[k].target_location - sim.truth[k].persons[0].robot_xy).norm() < 0.15);
    CHECK(res[k].target_detection == sim.truth[k].persons[0].detection);
  }
}

TEST_CASE("noiseless single person stays within a millimetre") {
  const Scenario s = walker(0.0);
  const SimulationOutput sim = generate(s);
  TrackerConfig cfg;
  // Measurement noise matched to a noiseless stream.
  cfg.ukf.joint_pixel_sigma = {0.05, 0.05, 0.05, 0.05};
  const std::vector<FrameResult> res = run(s, cfg, sim);
  double worst = 0.0;
  for (std::size_t k = 5; k < res.size(); ++k) {
    REQUIRE(res[k].status == TargetStatus::Tracking);
    worst = std::max(worst, (*res[k].target_location - sim.truth[k].persons[0].robot_xy).norm());
  }
  MESSAGE("worst noiseless error " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("target becomes lost after max_misses empty frames") {
  const Scenario s = walker();
  const SimulationOutput sim = generate(s);
  TrackerConfig cfg;
  cfg.max_misses = 15;
  Session session(s.camera, s.extrinsics, cfg);
  for (int k = 0; k < 5; ++k) REQUIRE(session.process_frame(sim.detections[k]).status == TargetStatus::Tracking);
  double t = sim.detections[4].timestamp;
  int lost_at = -1;
  for (int k = 1; k <= 30; ++k) {
    t += 1.0 / 30.0;
    const FrameResult r = session.process_frame(Frame{t, {}, std::nullopt});
    if (r.status == TargetStatus::Lost && lost_at < 0) lost_at = k;
    CHECK(r.target_location.has_value() == (r.status == TargetStatus::Tracking));
  }
  CHECK(lost_at == 16);
  REQUIRE(session.tracks().size() == 1);
  CHECK(session.tracks()[0].is_target);
}

TEST_CASE("lost target re-initializes from the knee") {
  Scenario s = walker();
  const SimulationOutput sim = generate(s);
  Session session(s.camera, s.extrinsics, TrackerConfig{});
  for (int k = 0; k < 5; ++k) session.process_frame(sim.detections[k]);
  double t = sim.detections[4].timestamp;
  for (int k = 0; k < 20; ++k) session.process_frame(Frame{t += 0.1, {}, std::nullopt});
  REQUIRE(session.tracks()[0].status == TrackStatus::Lost);

  const GroundPlane g = s.extrinsics.ground_plane();
  const Vec2 truth_xy(2.5, 0.4);
  const Vec3 ankle = robot_ground_to_camera(truth_xy, s.extrinsics);
  Detection d = full_detection(s.camera, g, ankle, s.persons[0].body);
  d.joints.erase(JointKind::Neck);
  d.joints.erase(JointKind::Hip);
  const FrameResult r = session.process_frame(Frame{t + 0.1, {d}, 0});
  CHECK(r.status == TargetStatus::Tracking);
  CHECK(r.reinit_joint == JointKind::Knee);
  REQUIRE(r.target_location.has_value());
  CHECK((*r.target_location - truth_xy).norm() < 1e-6);
}

TEST_CASE("target is not initialized without a full body or preloaded prior") {
  const Scenario s = walker();
  const GroundPlane g = s.extrinsics.ground_plane();
  const Vec3 ankle = robot_ground_to_camera(Vec2(4, 0), s.extrinsics);
  Detection partial = full_detection(s.camera, g, ankle, PriorModel{});
  partial.joints.erase(JointKind::Neck);

  Session session(s.camera, s.extrinsics, TrackerConfig{});
  const FrameResult r = session.process_frame(Frame{0.0, {partial}, 0});
  CHECK(r.status == TargetStatus::Uninitialized);
  CHECK(r.spawned_detections == std::vector<std::size_t>{0});

  TrackerConfig preload;
  preload.target_prior = PriorModel{};
  Session with_prior(s.camera, s.extrinsics, preload);
  const FrameResult p = with_prior.process_frame(Frame{0.0, {partial}, 0});
  CHECK(p.status == TargetStatus::Tracking);
  CHECK(p.reinit_joint == JointKind::Hip);
  CHECK((*p.target_location - Vec2(4, 0)).norm() < 1e-9);
}

TEST_CASE("box-only detections are reported unmatched") {
  const Scenario s = walker();
  Session session(s.camera, s.extrinsics, TrackerConfig{});
  Detection box_only;
  box_only.box = {640, 300, 80, 200};
  const FrameResult r = session.process_frame(Frame{0.0, {box_only}, std::nullopt});
  CHECK(r.unmatched_detections == std::vector<std::size_t>{0});
  CHECK(r.tracks.empty());
}

TEST_CASE("tentative tracks confirm after three hits and die after three misses") {
  const Scenario s = walker();
  const SimulationOutput sim = generate(s);
  Session session(s.camera, s.extrinsics, TrackerConfig{});
  // No hint: the person only gets a non-target track.
  for (int k = 0; k < 3; ++k) {
    Frame f = sim.detections[k];
    f.reid_target_hint.reset();
    const FrameResult r = session.process_frame(f);
    REQUIRE(r.tracks.size() == 1);
    CHECK(r.tracks[0].status == TrackStatus::Tentative);
  }
  Frame f = sim.detections[3];
  f.reid_target_hint.reset();
  CHECK(session.process_frame(f).tracks[0].status == TrackStatus::Confirmed);

  Session fresh(s.camera, s.extrinsics, TrackerConfig{});
  Frame first = sim.detections[0];
  first.reid_target_hint.reset();
  fresh.process_frame(first);
  double t = first.timestamp;
  CHECK(fresh.process_frame(Frame{t += 0.1, {}, std::nullopt}).tracks.size() == 1);
  CHECK(fresh.process_frame(Frame{t += 0.1, {}, std::nullopt}).tracks.size() == 1);
  CHECK(fresh.process_frame(Frame{t += 0.1, {}, std::nullopt}).tracks.empty());
}

TEST_CASE("neck-only updates stall once the neck is gone") {
  Scenario s = walker();
  s.extrinsics.height = 0.3;
  s.extrinsics.tilt = 0.17;
  s.persons[0].trajectory.start = Vec2(6.0, 0.0);
  s.persons[0].trajectory.velocity = Vec2(-1.0, 0.0);
  s.duration = 4.0;
  const SimulationOutput sim = generate(s);
  TrackerConfig neck_only;
  neck_only.update_joints = {true, false, false, false};
  const std::vector<FrameResult> res = run(s, neck_only, sim);
  const auto lost = std::count_if(res.begin(), res.end(),
                                  [](const FrameResult& r) { return r.status == TargetStatus::Lost; });
  CHECK(lost > 0);
  const std::vector<FrameResult> full = run(s, TrackerConfig{}, sim);
  CHECK(std::all_of(full.begin(), full.end(),
                    [](const FrameResult& r) { return r.status == TargetStatus::Tracking; }));
}

TEST_CASE("hint on a detection followed by a non-target track hands it to the target") {
  Scenario s = walker();
  s.hint = HintMode::Frames;
  s.hint_frames = {10};
  const SimulationOutput sim = generate(s);
  Session session(s.camera, s.extrinsics, TrackerConfig{});
  for (int k = 0; k < 10; ++k) {
    const FrameResult r = session.process_frame(sim.detections[k]);
    CHECK(r.status == TargetStatus::Uninitialized);
  }
  REQUIRE(session.tracks().size() == 1);
  CHECK_FALSE(session.tracks()[0].is_target);
  const FrameResult r = session.process_frame(sim.detections[10]);
  CHECK(r.status == TargetStatus::Tracking);
  REQUIRE(r.tracks.size() == 1);
  CHECK(r.tracks[0].is_target);
  CHECK(r.matched_detections == std::vector<std::size_t>{0});
}

TEST_CASE("property: determinism, single target and detection partition") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Scenario s = two_people();
    s.seed = seed;
    s.joint_dropout = {0.1, 0.1, 0.2, 0.2};
    const SimulationOutput sim = generate(s);
    const std::vector<FrameResult> a = run(s, TrackerConfig{}, sim);
    const std::vector<FrameResult> b = run(s, TrackerConfig{}, sim);
    REQUIRE(a.size() == b.size());
    bool initialized = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      REQUIRE(to_json(a[k]).dump() == to_json(b[k]).dump());
      REQUIRE(a[k].tracks.size() == b[k].tracks.size());
      for (std::size_t i = 0; i < a[k].tracks.size(); ++i) {
        REQUIRE(a[k].tracks[i].state.mean == b[k].tracks[i].state.mean);
        REQUIRE(a[k].tracks[i].state.covariance == b[k].tracks[i].state.covariance);
      }
      const auto targets = std::count_if(a[k].tracks.begin(), a[k].tracks.end(),
                                         [](const TrackRecord& t) { return t.is_target; });
      initialized = initialized || targets > 0;
      if (initialized) REQUIRE(targets == 1);

      std::multiset<std::size_t> seen;
      for (auto* v : {&a[k].matched_detections, &a[k].spawned_detections, &a[k].unmatched_detections}) {
        seen.insert(v->begin(), v->end());
      }
      REQUIRE(seen.size() == sim.detections[k].detections.size());
      for (std::size_t d = 0; d < sim.detections[k].detections.size(); ++d) REQUIRE(seen.count(d) == 1);
      REQUIRE(a[k].target_location.has_value() == (a[k].status == TargetStatus::Tracking));
    }
    CHECK(initialized);
  }
}
