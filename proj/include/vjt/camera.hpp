#pragma once

#include <array>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace vjt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kRayEpsilon = 1e-6;
inline constexpr double kHeightEpsilon = 1e-3;

// Tracked body joints, declared in initialization priority order.
enum class JointKind { Neck = 0, Hip = 1, Knee = 2, Ankle = 3 };

inline constexpr std::array<JointKind, 4> kJointPriority = {JointKind::Neck, JointKind::Hip,
                                                            JointKind::Knee, JointKind::Ankle};

std::string_view joint_name(JointKind kind);
std::optional<JointKind> joint_from_name(std::string_view name);

// Pinhole intrinsics. Camera frame is x right, y down, z along the optical axis.
class CameraModel {
 public:
  CameraModel(double fx, double fy, double cx, double cy, int image_width, int image_height);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int image_width() const { return width_; }
  int image_height() const { return height_; }

  bool in_image(const Vec2& pixel) const;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

// Ground plane N.X + gamma = 0 in camera coordinates. N points from the ground to the sky.
class GroundPlane {
 public:
  GroundPlane(const Vec3& normal, double gamma);

  const Vec3& normal() const { return normal_; }
  double gamma() const { return gamma_; }

  // Signed height of a camera-frame point above the plane.
  double height_of(const Vec3& point) const { return normal_.dot(point) + gamma_; }

 private:
  Vec3 normal_;
  double gamma_;
};

Vec2 project(const CameraModel& camera, const Vec3& point);
Vec3 ray_from_pixel(const CameraModel& camera, const Vec2& pixel);

// Intersects the pixel ray with the plane at height joint_height and drops the result onto the
// ground along -N. Returns the ankle location in the camera frame.
Vec3 localize_from_joint(const CameraModel& camera, const GroundPlane& ground, const Vec2& pixel,
                         double joint_height);

GroundPlane ground_plane_from_tilt(double height, double tilt);

inline Vec3 joint_position(const Vec3& ankle, const GroundPlane& ground, double height) {
  return ankle + height * ground.normal();
}

// Orthonormal 2D coordinates on the ground plane. The origin is the foot of the perpendicular
// from the optical center; `right` follows the camera x axis and `forward` = N x right.
class GroundFrame {
 public:
  explicit GroundFrame(const GroundPlane& ground);

  Vec3 to_camera(const Vec2& ground_xy) const;
  Vec2 to_ground(const Vec3& camera_point) const;

  const Vec3& right() const { return right_; }
  const Vec3& forward() const { return forward_; }
  const GroundPlane& plane() const { return plane_; }

 private:
  GroundPlane plane_;
  Vec3 origin_;
  Vec3 right_;
  Vec3 forward_;
};

// Camera mounting on the robot: orientation equals the robot frame except a downward pitch.
struct CameraExtrinsics {
  Vec3 offset = Vec3::Zero();  // camera origin in the robot frame (x forward, y left, z up)
  double tilt = 0.0;           // radians, positive pitches the optical axis toward the ground
  double height = 1.0;         // optical center above the ground, meters

  GroundPlane ground_plane() const { return ground_plane_from_tilt(height, tilt); }
};

Vec2 camera_to_robot(const Vec3& camera_point, const Vec3& offset, double tilt);

// Inverse of camera_to_robot for points on the ground.
Vec3 robot_ground_to_camera(const Vec2& robot_xy, const CameraExtrinsics& extrinsics);

}  // namespace vjt
