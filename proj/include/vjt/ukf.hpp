#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vjt/camera.hpp"
#include "vjt/prior_model.hpp"

namespace vjt {

using StateVector = Eigen::Matrix<double, 4, 1>;
using StateCovariance = Eigen::Matrix<double, 4, 4>;

// Ground-plane state [x, y, vx, vy] in GroundFrame coordinates.
struct TrackState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();
};

struct UkfParams {
  double alpha = 0.5;
  double beta = 2.0;
  double kappa = 0.0;
  double process_accel_sigma = 2.0;                              // m/s^2
  std::array<double, 4> joint_pixel_sigma = {4.0, 6.0, 8.0, 10.0};  // indexed by JointKind

  double pixel_sigma(JointKind kind) const { return joint_pixel_sigma[static_cast<int>(kind)]; }
  void validate() const;
};

inline constexpr int kSigmaPointCount = 9;

struct SigmaPoints {
  Eigen::Matrix<double, 4, kSigmaPointCount> points;
  Eigen::Matrix<double, kSigmaPointCount, 1> mean_weights;
  Eigen::Matrix<double, kSigmaPointCount, 1> cov_weights;
};

// Scaled sigma points. Retries the Cholesky factor once with 1e-9 diagonal jitter.
SigmaPoints make_sigma_points(const TrackState& state, const UkfParams& params);

StateCovariance constant_velocity_transition(double dt);
// Discrete white-noise acceleration model.
StateCovariance process_noise(double dt, double accel_sigma);

TrackState predict(const TrackState& state, double dt, const UkfParams& params);

// Predicted pixels of the visible joints, stacked in Neck, Hip, Knee, Ankle order.
// `visible` must be non-empty and strictly increasing in that order.
Eigen::VectorXd observe(const StateVector& mean, const CameraModel& camera,
                        const GroundPlane& ground, const PriorModel& prior,
                        std::span<const JointKind> visible);

TrackState update(const TrackState& state, const Eigen::VectorXd& measurement,
                  std::span<const JointKind> visible, const CameraModel& camera,
                  const GroundPlane& ground, const PriorModel& prior, const UkfParams& params);

struct StackedMeasurement {
  Eigen::VectorXd pixels;
  std::vector<JointKind> visible;
};

// Flattens a joint map into the canonical measurement layout expected by update().
StackedMeasurement stack_measurement(const JointPixels& joints);

}  // namespace vjt
