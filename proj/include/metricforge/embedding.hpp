#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "metricforge/quadform.hpp"
#include "metricforge/rng.hpp"

namespace metricforge {

namespace defaults {
inline constexpr double eps_factor = 0.45;  // default eps = 0.45 * min pairwise distance
inline constexpr int rank_retries = 8;      // total sampling attempts before giving up
}  // namespace defaults

inline int pair_count(int m) { return m * (m - 1) / 2; }

// Unordered pairs (i, j), i < j, in lexicographic order. This order fixes the
// column layout of every difference matrix and distance table in the project.
std::vector<std::pair<int, int>> pair_order(int m);
int pair_index(int i, int j, int m);

// m points in R^ell (rows), optionally labeled with integer classes.
struct PointCloud {
  Eigen::MatrixXd points;  // m x ell
  std::optional<std::vector<int>> labels;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  Eigen::VectorXd point(int i) const { return points.row(i).transpose(); }

  double min_pairwise_distance() const;
  double max_pairwise_distance() const;
  // InputError when two rows coincide bitwise or labels mismatch the row count.
  void validate() const;
};

// Complete table of positive target distances, one per unordered pair,
// stored in pair_order.
class DistanceSpec {
 public:
  struct Entry {
    int i, j;       // 0-based, i < j
    double delta;
  };

  template <typename F>
  static DistanceSpec from_function(int m, F&& delta_of_pair) {
    DistanceSpec s;
    s.m_ = m;
    s.values_.reserve(pair_count(m));
    for (const auto& [i, j] : pair_order(m)) s.values_.push_back(delta_of_pair(i, j));
    s.validate_positive();
    return s;
  }

  // Validates range, i < j, duplicates, completeness (missing pairs are
  // reported 1-based, e.g. "(2,5)"), and positivity.
  static DistanceSpec from_entries(int m, const std::vector<Entry>& entries);

  int point_count() const { return m_; }
  double delta(int i, int j) const { return values_[pair_index(i, j, m_)]; }
  const std::vector<double>& values() const { return values_; }

 private:
  void validate_positive() const;
  int m_ = 0;
  std::vector<double> values_;
};

// Canonic embedding y -> (y, 0, ..., 0) in R^h.
Eigen::VectorXd lift(const Eigen::VectorXd& y, int h);

// 0.45 * min pairwise distance, the default ball radius.
double default_eps(const PointCloud& cloud);

// Two fresh neighbors per unordered pair: z_fwd[k] near lift(y_i), z_rev[k]
// near lift(y_j), each strictly inside the Euclidean eps-ball. diff column k
// is z_fwd[k] - z_rev[k].
struct NeighborAssignment {
  int m = 0, ell = 0, h = 0;
  int attempts = 0;  // sampling rounds until the difference matrix had full rank
  double eps = 0.0;
  std::vector<std::pair<int, int>> pairs;
  Eigen::MatrixXd z_fwd;  // h x pair_count(m)
  Eigen::MatrixXd z_rev;  // h x pair_count(m)
  Eigen::MatrixXd diff;   // h x pair_count(m)

  // z_{i,j} for an ordered pair of distinct point indices.
  Eigen::VectorXd neighbor(int i, int j) const;
};

// True iff the square matrix has full numerical rank under the relative
// singular-value cutoff.
bool rank_check(const Eigen::MatrixXd& m, double rel_tol = defaults::rank_rel_tol);

// Samples neighbors uniformly from the full h-dimensional open eps-balls
// around the lifted points, h = C(m,2), resampling (up to
// defaults::rank_retries attempts) until the difference matrix is full rank.
// InputError when eps is not in (0, min distance / 2); RankError when
// C(m,2) < ell or retries are exhausted.
NeighborAssignment sample_neighbors(const PointCloud& cloud, double eps, SplitMix64& gen);

// Interpolating form on the pair differences plus its 1/lambda_max rescale.
// The unscaled form realizes ||diff_k|| = delta_k; the scaled one realizes
// sqrt(alpha) * delta_k and never exceeds the Euclidean norm.
struct ScaledNorm {
  QuadraticNorm unscaled;
  QuadraticNorm scaled;
  double alpha = 0.0;       // 1 / lambda_max(unscaled)
  double lambda_max = 0.0;
  FormDiagnostics diagnostics;
};

ScaledNorm scaled_form(const NeighborAssignment& assignment, const DistanceSpec& spec);

// Order relations between designated and realized distances, plus Euclidean
// domination probes for the scaled norm.
struct RelationReport {
  long long triples_checked = 0;
  long long sign_violations = 0;
  std::vector<std::array<int, 3>> violation_witnesses;  // (i, j, k): pair ij vs ik
  int probes_checked = 0;
  int domination_violations = 0;
  double max_norm_ratio = 0.0;  // max ||x||_Q / ||x||_2 over probes
};

RelationReport verify_relations(const ScaledNorm& norm, const NeighborAssignment& assignment,
                                const DistanceSpec& spec, int probes, SplitMix64& gen,
                                double rel_tol = 1e-8);

}  // namespace metricforge
