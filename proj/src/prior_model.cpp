#include "vjt/prior_model.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "vjt/error.hpp"

namespace vjt {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kStepTolerance = 1e-10;
constexpr double kDecreaseTolerance = 1e-12;
constexpr double kInitialDamping = 1e-3;
constexpr double kMaxDamping = 1e16;
// Steps whose cost differs by less than this relative amount are indistinguishable by rounding.
constexpr double kCostRoundoff = 1e-13;
// Fitted heights closer than this to zero or to each other carry no anatomical information.
constexpr double kMinSegment = 1e-3;

Vec3 joint_point(const GroundFrame& frame, const PriorParams& params, int joint) {
  const Vec3 ankle = frame.to_camera(params.head<2>());
  // joints 0..2 carry a fitted height, joint 3 is the ankle
  return joint < 3 ? Vec3(ankle + params(2 + joint) * frame.plane().normal()) : ankle;
}

}  // namespace

double PriorModel::height(JointKind kind) const {
  switch (kind) {
    case JointKind::Neck: return h_neck;
    case JointKind::Hip: return h_hip;
    case JointKind::Knee: return h_knee;
    case JointKind::Ankle: return 0.0;
  }
  return 0.0;
}

void PriorModel::validate() const {
  if (!anatomically_ordered()) {
    throw Error(ErrorCode::AnatomicalOrderViolated,
                "joint heights must satisfy 0 < knee < hip < neck");
  }
  if (!(body_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "body width must be positive");
  }
}

PriorResiduals prior_residuals(const CameraModel& camera, const GroundFrame& frame,
                               const JointPixels& observation, const PriorParams& params) {
  PriorResiduals residuals;
  for (int j = 0; j < 4; ++j) {
    const Vec2& observed = observation.at(kJointPriority[j]);
    residuals.segment<2>(2 * j) = observed - project(camera, joint_point(frame, params, j));
  }
  return residuals;
}

PriorJacobian prior_jacobian(const CameraModel& camera, const GroundFrame& frame,
                             const PriorParams& params) {
  PriorJacobian jacobian = PriorJacobian::Zero();
  for (int j = 0; j < 4; ++j) {
    const Vec3 p = joint_point(frame, params, j);
    if (p.z() <= 1e-9) {
      throw Error(ErrorCode::NonPositiveDepth, "joint behind camera while linearizing");
    }
    Eigen::Matrix<double, 2, 3> d_proj;
    const double iz = 1.0 / p.z();
    d_proj << camera.fx() * iz, 0.0, -camera.fx() * p.x() * iz * iz,
              0.0, camera.fy() * iz, -camera.fy() * p.y() * iz * iz;
    jacobian.block<2, 1>(2 * j, 0) = -d_proj * frame.right();
    jacobian.block<2, 1>(2 * j, 1) = -d_proj * frame.forward();
    if (j < 3) jacobian.block<2, 1>(2 * j, 2 + j) = -d_proj * frame.plane().normal();
  }
  return jacobian;
}

PriorFit construct_prior(const CameraModel& camera, const GroundPlane& ground,
                         const JointPixels& observation, const PriorModel& init,
                         std::optional<Vec3> initial_ankle) {
  for (JointKind kind : kJointPriority) {
    if (!observation.contains(kind)) {
      throw Error(ErrorCode::MissingJoint,
                  "full-body observation lacks the " + std::string(joint_name(kind)));
    }
  }
  init.validate();

  const GroundFrame frame(ground);
  const Vec3 start = initial_ankle
                         ? *initial_ankle
                         : localize_from_joint(camera, ground, observation.at(JointKind::Ankle), 0.0);
  PriorParams params;
  params << frame.to_ground(start), init.h_neck, init.h_hip, init.h_knee;

  PriorResiduals residuals = prior_residuals(camera, frame, observation, params);
  double cost = residuals.squaredNorm();
  double damping = kInitialDamping;
  bool converged = false;
  bool accepted_any = false;
  int iteration = 0;

  while (iteration < kMaxIterations && !converged) {
    ++iteration;
    const PriorJacobian jacobian = prior_jacobian(camera, frame, params);
    const Eigen::Matrix<double, 5, 5> normal = jacobian.transpose() * jacobian;
    const PriorParams gradient = jacobian.transpose() * residuals;

    Eigen::Matrix<double, 5, 5> damped = normal;
    for (int i = 0; i < 5; ++i) damped(i, i) += damping * std::max(normal(i, i), 1e-12);
    const PriorParams step = damped.ldlt().solve(-gradient);
    if (!step.allFinite()) break;
    if (step.norm() < kStepTolerance) {
      converged = true;
      break;
    }

    const PriorParams candidate = params + step;
    double candidate_cost = std::numeric_limits<double>::infinity();
    PriorResiduals candidate_residuals;
    try {
      candidate_residuals = prior_residuals(camera, frame, observation, candidate);
      candidate_cost = candidate_residuals.squaredNorm();
    } catch (const Error&) {
      // step left the camera's visible half-space; treat as a rejected step
    }

    if (candidate_cost <= cost * (1.0 + kCostRoundoff)) {
      const double decrease = cost - candidate_cost;
      params = candidate;
      residuals = candidate_residuals;
      cost = candidate_cost;
      damping = std::max(damping / 10.0, 1e-12);
      accepted_any = true;
      if (decrease < kDecreaseTolerance) converged = true;
    } else {
      damping *= 10.0;
      if (damping > kMaxDamping) {
        converged = accepted_any || cost < kDecreaseTolerance;
        break;
      }
    }
  }

  if (!std::isfinite(cost) || !params.allFinite() || (!converged && !accepted_any)) {
    throw Error(ErrorCode::SolverDiverged, "reprojection minimization made no progress");
  }

  PriorFit fit;
  fit.ankle = frame.to_camera(params.head<2>());
  fit.prior = PriorModel{params(2), params(3), params(4), init.body_width};
  fit.residual_rms = std::sqrt(cost / 4.0);
  fit.iterations = iteration;
  const PriorModel& h = fit.prior;
  if (!h.anatomically_ordered() || h.h_knee < kMinSegment || h.h_hip - h.h_knee < kMinSegment ||
      h.h_neck - h.h_hip < kMinSegment) {
    throw Error(ErrorCode::AnatomicalOrderViolated,
                "fitted heights violate 0 < knee < hip < neck");
  }
  return fit;
}

JointInit init_from_best_joint(const CameraModel& camera, const GroundPlane& ground,
                               const PriorModel& prior, const JointPixels& joints) {
  for (JointKind kind : kJointPriority) {
    const auto it = joints.find(kind);
    if (it == joints.end()) continue;
    try {
      return {localize_from_joint(camera, ground, it->second, prior.height(kind)), kind};
    } catch (const Error& e) {
      const ErrorCode code = e.code();
      if (code != ErrorCode::DegenerateRay && code != ErrorCode::JointAtCameraHeight &&
          code != ErrorCode::BehindCamera) {
        throw;
      }
    }
  }
  throw Error(ErrorCode::NoUsableJoint, "no visible joint yields a valid ray-cast location");
}

}  // namespace vjt
