#include "vjt/ukf.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "vjt/error.hpp"

namespace vjt {

namespace {

constexpr int kStateDim = 4;

void check_visible(std::span<const JointKind> visible) {
  if (visible.empty()) {
    throw Error(ErrorCode::InvalidArgument, "observation needs at least one visible joint");
  }
  for (std::size_t i = 1; i < visible.size(); ++i) {
    if (static_cast<int>(visible[i - 1]) >= static_cast<int>(visible[i])) {
      throw Error(ErrorCode::InvalidArgument, "visible joints must be in Neck..Ankle order");
    }
  }
}

}  // namespace

void UkfParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  }
  if (!(2.0 * kStateDim + kappa > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "2*dim + kappa must be positive");
  }
  if (!(process_accel_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "process noise sigma must be positive");
  }
  for (double s : joint_pixel_sigma) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "joint pixel sigmas must be positive");
  }
}

SigmaPoints make_sigma_points(const TrackState& state, const UkfParams& params) {
  const double n = kStateDim;
  const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double spread = n + lambda;

  Eigen::LLT<StateCovariance> llt(state.covariance);
  if (llt.info() != Eigen::Success) {
    llt.compute(state.covariance + 1e-9 * StateCovariance::Identity());
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SigmaPointFailure, "covariance is not positive definite");
    }
  }
  const StateCovariance root = std::sqrt(spread) * StateCovariance(llt.matrixL());

  SigmaPoints sp;
  sp.points.col(0) = state.mean;
  for (int i = 0; i < kStateDim; ++i) {
    sp.points.col(1 + i) = state.mean + root.col(i);
    sp.points.col(1 + kStateDim + i) = state.mean - root.col(i);
  }
  sp.mean_weights.setConstant(1.0 / (2.0 * spread));
  sp.cov_weights = sp.mean_weights;
  sp.mean_weights(0) = lambda / spread;
  sp.cov_weights(0) = lambda / spread + (1.0 - params.alpha * params.alpha + params.beta);
  return sp;
}

StateCovariance constant_velocity_transition(double dt) {
  StateCovariance f = StateCovariance::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

StateCovariance process_noise(double dt, double accel_sigma) {
  const double var = accel_sigma * accel_sigma;
  const double dt2 = dt * dt;
  StateCovariance q = StateCovariance::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    q(axis, axis) = 0.25 * dt2 * dt2 * var;
    q(axis, axis + 2) = 0.5 * dt2 * dt * var;
    q(axis + 2, axis) = 0.5 * dt2 * dt * var;
    q(axis + 2, axis + 2) = dt2 * var;
  }
  return q;
}

TrackState predict(const TrackState& state, double dt, const UkfParams& params) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveDt, "prediction interval must be positive");
  // The motion model is linear, so the unscented transform reduces to the exact propagation.
  const StateCovariance f = constant_velocity_transition(dt);
  TrackState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + process_noise(dt, params.process_accel_sigma);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

Eigen::VectorXd observe(const StateVector& mean, const CameraModel& camera,
                        const GroundPlane& ground, const PriorModel& prior,
                        std::span<const JointKind> visible) {
  check_visible(visible);
  const GroundFrame frame(ground);
  const Vec3 ankle = frame.to_camera(mean.head<2>());
  Eigen::VectorXd z(2 * visible.size());
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const Vec3 joint = joint_position(ankle, ground, prior.height(visible[i]));
    if (joint.z() <= 1e-9) {
      throw Error(ErrorCode::BehindCamera, "predicted person is behind the camera");
    }
    z.segment<2>(2 * i) = project(camera, joint);
  }
  return z;
}

TrackState update(const TrackState& state, const Eigen::VectorXd& measurement,
                  std::span<const JointKind> visible, const CameraModel& camera,
                  const GroundPlane& ground, const PriorModel& prior, const UkfParams& params) {
  check_visible(visible);
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(visible.size());
  if (measurement.size() != m) {
    throw Error(ErrorCode::ObservationDimensionMismatch,
                "measurement length does not match the visible joint count");
  }

  const SigmaPoints sp = make_sigma_points(state, params);
  Eigen::MatrixXd predicted(m, kSigmaPointCount);
  for (int i = 0; i < kSigmaPointCount; ++i) {
    predicted.col(i) = observe(sp.points.col(i), camera, ground, prior, visible);
  }

  const Eigen::VectorXd z_mean = predicted * sp.mean_weights;
  Eigen::MatrixXd innovation_cov = Eigen::MatrixXd::Zero(m, m);
  Eigen::Matrix<double, 4, Eigen::Dynamic> cross = Eigen::MatrixXd::Zero(kStateDim, m);
  for (int i = 0; i < kSigmaPointCount; ++i) {
    const Eigen::VectorXd dz = predicted.col(i) - z_mean;
    const StateVector dx = sp.points.col(i) - state.mean;
    innovation_cov += sp.cov_weights(i) * dz * dz.transpose();
    cross += sp.cov_weights(i) * dx * dz.transpose();
  }
  for (std::size_t j = 0; j < visible.size(); ++j) {
    const double var = params.pixel_sigma(visible[j]) * params.pixel_sigma(visible[j]);
    innovation_cov(2 * j, 2 * j) += var;
    innovation_cov(2 * j + 1, 2 * j + 1) += var;
  }

  const Eigen::LDLT<Eigen::MatrixXd> s_solver(innovation_cov);
  const Eigen::Matrix<double, 4, Eigen::Dynamic> gain =
      s_solver.solve(cross.transpose()).transpose();

  TrackState out;
  out.mean = state.mean + gain * (measurement - z_mean);
  out.covariance = state.covariance - gain * innovation_cov * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

StackedMeasurement stack_measurement(const JointPixels& joints) {
  StackedMeasurement out;
  out.pixels.resize(2 * static_cast<Eigen::Index>(joints.size()));
  Eigen::Index row = 0;
  for (JointKind kind : kJointPriority) {
    const auto it = joints.find(kind);
    if (it == joints.end()) continue;
    out.pixels.segment<2>(row) = it->second;
    out.visible.push_back(kind);
    row += 2;
  }
  return out;
}

}  // namespace vjt
