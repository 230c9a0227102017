#pragma once

#include <Eigen/Core>
#include <vector>

#include "metricforge/semimetric.hpp"

namespace metricforge {

// Label reserved for DBSCAN points unreachable from any core point.
inline constexpr int kNoiseLabel = -1;

struct ClusterAssignment {
  std::vector<int> labels;      // cluster index per point (kmeans: 0..k-1;
                                // dbscan: 1..n_clusters or kNoiseLabel)
  Eigen::MatrixXd centers;      // kmeans only: k x ell final centers
  int iterations_run = 0;
  int empty_cluster_events = 0; // kmeans: rounds x clusters left empty
  int n_clusters = 0;
};

// Lloyd iterations under an arbitrary distance: exactly `iterations` rounds
// of assign-to-nearest-center (ties to the lowest center index) followed by
// recomputing each center as the coordinate arithmetic mean of its members.
// The mean is intentionally metric-agnostic. An empty cluster keeps its
// previous center (recorded). Deterministic for deterministic inputs.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, const Eigen::MatrixXd& init_centers,
                         const DistanceFn& distance, int iterations);

// Classic density clustering under an arbitrary distance. The neighborhood
// of a point contains the point itself, so with min_pts = 2 any point with
// one other neighbor within eps is core. Points are visited in index order;
// border points join the first cluster that reaches them; unreachable points
// get kNoiseLabel. Deterministic given the input order.
ClusterAssignment dbscan(const Eigen::MatrixXd& points, double eps, int min_pts,
                         const DistanceFn& distance);

}  // namespace metricforge
