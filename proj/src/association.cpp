#include "vjt/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vjt/error.hpp"

namespace vjt {

ExpectedBox expected_box(const StateVector& mean, const CameraModel& camera,
                         const GroundPlane& ground, const PriorModel& prior) {
  const Vec3 ankle = GroundFrame(ground).to_camera(mean.head<2>());
  if (ankle.z() <= 0.1) {
    throw Error(ErrorCode::BehindCamera, "track is too close to or behind the camera plane");
  }
  return {project(camera, ankle).x(), camera.fx() * prior.body_width / ankle.z()};
}

double distance(const ExpectedBox& expected, const BoundingBox& detected) {
  return std::hypot(expected.u - detected.u, expected.w - detected.w);
}

double AssociationResult::total_cost() const {
  double total = 0.0;
  for (const Match& m : matches) total += m.distance;
  return total;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "assignment cost matrix must be square");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual start column.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    col_owner[0] = row;
    int col0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = col_owner[col0];
      double delta = kInf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double slack = cost(r0 - 1, col - 1) - row_pot[r0] - col_pot[col];
        if (slack < min_slack[col]) {
          min_slack[col] = slack;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          row_pot[col_owner[col]] += delta;
          col_pot[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (col_owner[col0] != 0);
    do {
      const int col1 = way[col0];
      col_owner[col0] = col_owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int col = 1; col <= n; ++col) {
    if (col_owner[col] != 0) assignment[col_owner[col] - 1] = col - 1;
  }
  return assignment;
}

AssociationResult match_gnn(std::span<const TrackExpectation> tracks,
                            std::span<const BoundingBox> detections, double gate) {
  if (!(gate > 0.0)) throw Error(ErrorCode::InvalidArgument, "gate must be positive");

  AssociationResult result;
  const int n_tracks = static_cast<int>(tracks.size());
  const int n_dets = static_cast<int>(detections.size());
  const int n = std::max(n_tracks, n_dets);

  Eigen::MatrixXd dist(n_tracks, n_dets);
  double finite_sum = 0.0;
  for (int t = 0; t < n_tracks; ++t) {
    for (int d = 0; d < n_dets; ++d) {
      dist(t, d) = distance(tracks[t].expected, detections[d]);
      if (dist(t, d) <= gate) finite_sum += dist(t, d);
    }
  }

  // Forbidden pairs cost more than any complete set of gated pairs, so the optimum first
  // maximizes the number of gated matches and then minimizes their total distance.
  const double forbidden = finite_sum + 1.0;
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < n_tracks; ++t) {
    for (int d = 0; d < n_dets; ++d) cost(t, d) = dist(t, d) <= gate ? dist(t, d) : forbidden;
  }

  const std::vector<int> assignment = n > 0 ? solve_assignment(cost) : std::vector<int>{};
  std::vector<char> det_used(n_dets, 0);
  for (int t = 0; t < n_tracks; ++t) {
    const int d = assignment[t];
    if (d >= 0 && d < n_dets && dist(t, d) <= gate) {
      result.matches.push_back({tracks[t].track_id, static_cast<std::size_t>(d), dist(t, d)});
      det_used[d] = 1;
    } else {
      result.unmatched_tracks.push_back(tracks[t].track_id);
    }
  }
  for (int d = 0; d < n_dets; ++d) {
    if (!det_used[d]) result.unmatched_detections.push_back(static_cast<std::size_t>(d));
  }
  return result;
}

}  // namespace vjt
