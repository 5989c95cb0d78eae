#include "vjt/camera.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "vjt/error.hpp"

namespace vjt {

std::string_view joint_name(JointKind kind) {
  switch (kind) {
    case JointKind::Neck: return "neck";
    case JointKind::Hip: return "hip";
    case JointKind::Knee: return "knee";
    case JointKind::Ankle: return "ankle";
  }
  return "unknown";
}

std::optional<JointKind> joint_from_name(std::string_view name) {
  for (JointKind kind : kJointPriority) {
    if (joint_name(kind) == name) return kind;
  }
  return std::nullopt;
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy, int image_width,
                         int image_height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(image_width), height_(image_height) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < image_width) || !(cy >= 0.0 && cy < image_height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

bool CameraModel::in_image(const Vec2& pixel) const {
  return pixel.x() >= 0.0 && pixel.x() < width_ && pixel.y() >= 0.0 && pixel.y() < height_;
}

GroundPlane::GroundPlane(const Vec3& normal, double gamma) : normal_(normal), gamma_(gamma) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "ground normal must be unit length");
  }
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ground offset gamma must be positive");
  }
}

Vec2 project(const CameraModel& camera, const Vec3& point) {
  if (point.z() <= 1e-9) {
    std::ostringstream msg;
    msg << "point depth " << point.z() << " is not in front of the camera";
    throw Error(ErrorCode::NonPositiveDepth, msg.str());
  }
  return {camera.fx() * point.x() / point.z() + camera.cx(),
          camera.fy() * point.y() / point.z() + camera.cy()};
}

Vec3 ray_from_pixel(const CameraModel& camera, const Vec2& pixel) {
  return {(pixel.x() - camera.cx()) / camera.fx(), (pixel.y() - camera.cy()) / camera.fy(), 1.0};
}

Vec3 localize_from_joint(const CameraModel& camera, const GroundPlane& ground, const Vec2& pixel,
                         double joint_height) {
  const Vec3 ray = ray_from_pixel(camera, pixel);
  const Vec3& normal = ground.normal();
  const double along_normal = normal.dot(ray);
  const double clearance = ground.gamma() - joint_height;
  if (std::abs(clearance) <= kHeightEpsilon) {
    throw Error(ErrorCode::JointAtCameraHeight, "joint plane passes through the optical center");
  }
  if (std::abs(along_normal) <= kRayEpsilon) {
    throw Error(ErrorCode::DegenerateRay, "pixel ray is parallel to the joint height plane");
  }
  // The joint plane is N.X = h - gamma. A ray pointing away from it only meets the mirrored
  // plane, which the absolute-value form would silently accept.
  if ((joint_height - ground.gamma()) / along_normal <= 0.0) {
    throw Error(ErrorCode::BehindCamera, "joint plane is met behind the camera");
  }
  const Vec3 joint = (std::abs(clearance) / std::abs(along_normal)) * ray;
  const Vec3 ankle = joint - joint_height * normal;
  if (ankle.z() <= 0.0) {
    throw Error(ErrorCode::BehindCamera, "localized ankle lies behind the camera");
  }
  return ankle;
}

GroundPlane ground_plane_from_tilt(double height, double tilt) {
  if (!(std::abs(tilt) < std::numbers::pi / 2.0)) {
    throw Error(ErrorCode::InvalidTilt, "tilt must satisfy |tilt| < pi/2");
  }
  if (!(height > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "camera height must be positive");
  }
  return GroundPlane(Vec3(0.0, -std::cos(tilt), -std::sin(tilt)), height);
}

GroundFrame::GroundFrame(const GroundPlane& ground) : plane_(ground) {
  const Vec3& normal = ground.normal();
  origin_ = -ground.gamma() * normal;
  Vec3 right = Vec3::UnitX() - Vec3::UnitX().dot(normal) * normal;
  if (right.norm() < 1e-6) {
    right = Vec3::UnitZ() - Vec3::UnitZ().dot(normal) * normal;
  }
  right_ = right.normalized();
  forward_ = normal.cross(right_);
}

Vec3 GroundFrame::to_camera(const Vec2& ground_xy) const {
  return origin_ + ground_xy.x() * right_ + ground_xy.y() * forward_;
}

Vec2 GroundFrame::to_ground(const Vec3& camera_point) const {
  const Vec3 rel = camera_point - origin_;
  return {rel.dot(right_), rel.dot(forward_)};
}

Vec2 camera_to_robot(const Vec3& camera_point, const Vec3& offset, double tilt) {
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  // Level the camera frame, then permute (right, down, forward) -> (forward, left, up).
  const Vec3 level(camera_point.x(), c * camera_point.y() + s * camera_point.z(),
                   -s * camera_point.y() + c * camera_point.z());
  const Vec3 robot = Vec3(level.z(), -level.x(), -level.y()) + offset;
  return robot.head<2>();
}

Vec3 robot_ground_to_camera(const Vec2& robot_xy, const CameraExtrinsics& extrinsics) {
  const double c = std::cos(extrinsics.tilt);
  const double s = std::sin(extrinsics.tilt);
  const Vec3 level(-(robot_xy.y() - extrinsics.offset.y()), extrinsics.height,
                   robot_xy.x() - extrinsics.offset.x());
  return {level.x(), c * level.y() - s * level.z(), s * level.y() + c * level.z()};
}

}  // namespace vjt
