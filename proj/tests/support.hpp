#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vjt/camera.hpp"
#include "vjt/prior_model.hpp"

namespace vjt::test {

// Hand-rolled generators over a seeded engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  // Plausible adult body with strictly ordered joint heights.
  PriorModel body() {
    PriorModel m;
    m.h_neck = uniform(1.25, 1.60);
    m.h_hip = uniform(0.80, 1.05);
    m.h_knee = uniform(0.40, 0.58);
    m.body_width = uniform(0.35, 0.65);
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

inline CameraModel hd_camera() { return CameraModel(900.0, 900.0, 640.0, 360.0, 1280, 720); }
inline CameraModel vga_camera() { return CameraModel(500.0, 500.0, 320.0, 240.0, 640, 480); }

// Projection through the full intrinsic matrix, independent of vjt::project.
inline Vec2 oracle_project(const CameraModel& c, const Vec3& p) {
  Eigen::Matrix3d K;
  K << c.fx(), 0.0, c.cx(), 0.0, c.fy(), c.cy(), 0.0, 0.0, 1.0;
  const Vec3 h = K * p;
  return h.head<2>() / h.z();
}

// Ankle location in the camera frame for a person standing `depth` meters ahead along the
// ground and `lateral` meters to the right of a camera pitched down by `tilt`.
inline Vec3 ground_point(double height, double tilt, double lateral, double depth) {
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  // Level-frame point (lateral, height, depth) rotated into the pitched camera frame.
  Eigen::Matrix3d R;
  R << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return R * Vec3(lateral, height, depth);
}

inline JointPixels full_body_pixels(const CameraModel& camera, const GroundPlane& ground,
                                    const Vec3& ankle, const PriorModel& body) {
  JointPixels px;
  for (JointKind k : kJointPriority) {
    px[k] = oracle_project(camera, ankle + body.height(k) * ground.normal());
  }
  return px;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
}

inline double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

inline double max_abs_eigen_asym(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

}  // namespace vjt::test
