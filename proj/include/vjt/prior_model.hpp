#pragma once

#include <map>
#include <optional>

#include <Eigen/Core>

#include "vjt/camera.hpp"

namespace vjt {

// Joint heights above the ankle plus the body width used for box association.
struct PriorModel {
  double h_neck = 1.40;
  double h_hip = 0.95;
  double h_knee = 0.50;
  double body_width = 0.5;

  // Ankle height is zero by definition.
  double height(JointKind kind) const;

  bool anatomically_ordered() const { return 0.0 < h_knee && h_knee < h_hip && h_hip < h_neck; }

  // Throws AnatomicalOrderViolated or InvalidArgument.
  void validate() const;

  bool operator==(const PriorModel&) const = default;
};

using JointPixels = std::map<JointKind, Vec2>;

struct PriorFit {
  Vec3 ankle;
  PriorModel prior;
  double residual_rms = 0.0;  // sqrt(mean squared per-joint reprojection error), pixels
  int iterations = 0;
};

// Solver unknowns: ground coordinates (right, forward) followed by neck, hip and knee heights.
using PriorParams = Eigen::Matrix<double, 5, 1>;
using PriorResiduals = Eigen::Matrix<double, 8, 1>;
using PriorJacobian = Eigen::Matrix<double, 8, 5>;

// Stacked observed-minus-projected pixels, joints in priority order.
PriorResiduals prior_residuals(const CameraModel& camera, const GroundFrame& frame,
                               const JointPixels& observation, const PriorParams& params);
PriorJacobian prior_jacobian(const CameraModel& camera, const GroundFrame& frame,
                             const PriorParams& params);

// Fits the ankle location and joint heights to a full-body observation by minimizing the
// reprojection error with Levenberg-Marquardt. The ankle stays on the ground plane exactly.
// When `initial_ankle` is absent, the ankle pixel is ray-cast onto the ground for the start point.
PriorFit construct_prior(const CameraModel& camera, const GroundPlane& ground,
                         const JointPixels& observation, const PriorModel& init = {},
                         std::optional<Vec3> initial_ankle = std::nullopt);

struct JointInit {
  Vec3 ankle;
  JointKind used;
};

// Ray-casts from the highest-priority visible joint, falling back down the priority list when a
// joint is geometrically degenerate.
JointInit init_from_best_joint(const CameraModel& camera, const GroundPlane& ground,
                               const PriorModel& prior, const JointPixels& joints);

}  // namespace vjt
