#include "metricforge/clustering.hpp"

#include <limits>
#include <vector>

#include "metricforge/errors.hpp"

namespace metricforge {

ClusterAssignment kmeans(const Eigen::MatrixXd& points, const Eigen::MatrixXd& init_centers,
                         const DistanceFn& distance, int iterations) {
  const int m = static_cast<int>(points.rows());
  const int k = static_cast<int>(init_centers.rows());
  if (m < 1 || k < 1) throw InputError("kmeans: needs points and at least one center");
  if (points.cols() != init_centers.cols()) {
    throw DimensionError("kmeans: centers and points have different dimensions");
  }
  if (iterations < 1) throw InputError("kmeans: iterations must be >= 1");

  ClusterAssignment result;
  result.labels.assign(m, 0);
  result.centers = init_centers;
  result.n_clusters = k;

  for (int round = 0; round < iterations; ++round) {
    // Assign. Ties go to the lowest center index.
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd p = points.row(i).transpose();
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = distance(p, result.centers.row(c).transpose());
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      result.labels[i] = best;
    }
    // Update: coordinate arithmetic means, whatever the distance was.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < m; ++i) {
      sums.row(result.labels[i]) += points.row(i);
      ++counts[result.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        ++result.empty_cluster_events;  // keep the previous center
        continue;
      }
      result.centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    ++result.iterations_run;
  }
  return result;
}

ClusterAssignment dbscan(const Eigen::MatrixXd& points, double eps, int min_pts,
                         const DistanceFn& distance) {
  const int m = static_cast<int>(points.rows());
  if (m < 1) throw InputError("dbscan: needs at least one point");
  if (!(eps > 0.0)) throw InputError("dbscan: eps must be positive");
  if (min_pts < 1) throw InputError("dbscan: min_pts must be >= 1");

  const auto region_query = [&](int i) {
    std::vector<int> neighbors;  // includes i itself (d(x,x) = 0 <= eps)
    const Eigen::VectorXd p = points.row(i).transpose();
    for (int j = 0; j < m; ++j) {
      if (distance(p, points.row(j).transpose()) <= eps) neighbors.push_back(j);
    }
    return neighbors;
  };

  ClusterAssignment result;
  result.labels.assign(m, kNoiseLabel);
  std::vector<bool> visited(m, false);
  int cluster = 0;

  for (int i = 0; i < m; ++i) {
    if (visited[i]) continue;
    visited[i] = true;
    std::vector<int> seeds = region_query(i);
    if (static_cast<int>(seeds.size()) < min_pts) continue;  // not core; noise unless reached

    ++cluster;
    result.labels[i] = cluster;
    // Expand; seeds act as a FIFO queue so discovery order is by index waves.
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const int q = seeds[s];
      if (result.labels[q] == kNoiseLabel) result.labels[q] = cluster;
      if (visited[q]) continue;
      visited[q] = true;
      const std::vector<int> qn = region_query(q);
      if (static_cast<int>(qn.size()) >= min_pts) {
        seeds.insert(seeds.end(), qn.begin(), qn.end());
      }
    }
  }
  result.n_clusters = cluster;
  result.iterations_run = 1;
  return result;
}

}  // namespace metricforge
