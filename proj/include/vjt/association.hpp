#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vjt/camera.hpp"
#include "vjt/prior_model.hpp"
#include "vjt/ukf.hpp"

namespace vjt {

inline constexpr double kDefaultGatePx = 80.0;

struct BoundingBox {
  double u = 0.0;  // center
  double v = 0.0;
  double w = 1.0;
  double h = 1.0;

  Vec2 center() const { return {u, v}; }
  bool contains(const Vec2& p) const {
    return std::abs(p.x() - u) <= 0.5 * w && std::abs(p.y() - v) <= 0.5 * h;
  }
  bool operator==(const BoundingBox&) const = default;
};

// Box-space prediction of a track: horizontal center and width.
struct ExpectedBox {
  double u = 0.0;
  double w = 0.0;
};

ExpectedBox expected_box(const StateVector& mean, const CameraModel& camera,
                         const GroundPlane& ground, const PriorModel& prior);

double distance(const ExpectedBox& expected, const BoundingBox& detected);

struct TrackExpectation {
  int track_id = 0;
  ExpectedBox expected;
};

struct Match {
  int track_id = 0;
  std::size_t detection = 0;
  double distance = 0.0;
};

struct AssociationResult {
  std::vector<Match> matches;
  std::vector<int> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;

  double total_cost() const;
};

// Minimum-cost perfect assignment on a square matrix (Hungarian method with potentials).
// Returns the column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

// Global nearest neighbour: among assignments that only use pairs with distance <= gate, picks
// one with the most matches and, among those, the least total distance.
AssociationResult match_gnn(std::span<const TrackExpectation> tracks,
                            std::span<const BoundingBox> detections, double gate = kDefaultGatePx);

}  // namespace vjt
