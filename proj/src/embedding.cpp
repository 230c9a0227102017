#include "metricforge/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metricforge/errors.hpp"

namespace metricforge {

std::vector<std::pair<int, int>> pair_order(int m) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(pair_count(m));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  return pairs;
}

int pair_index(int i, int j, int m) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= m || i == j) throw InputError("pair_index: invalid pair");
  // Pairs (0,1), (0,2), ..., (0,m-1), (1,2), ... in lexicographic order.
  return i * (2 * m - i - 1) / 2 + (j - i - 1);
}

double PointCloud::min_pairwise_distance() const {
  const int m = size();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      best = std::min(best, (points.row(i) - points.row(j)).norm());
  return best;
}

double PointCloud::max_pairwise_distance() const {
  const int m = size();
  double best = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      best = std::max(best, (points.row(i) - points.row(j)).norm());
  return best;
}

void PointCloud::validate() const {
  if (size() < 1 || dim() < 1) throw InputError("point cloud: empty");
  if (!points.allFinite()) throw InputError("point cloud: non-finite coordinates");
  if (labels && static_cast<int>(labels->size()) != size()) {
    throw InputError("point cloud: label count does not match point count");
  }
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if ((points.row(i).array() == points.row(j).array()).all()) {
        std::ostringstream os;
        os << "point cloud: rows " << (i + 1) << " and " << (j + 1)
           << " coincide (minimum pairwise distance is zero)";
        throw InputError(os.str());
      }
    }
  }
}

DistanceSpec DistanceSpec::from_entries(int m, const std::vector<Entry>& entries) {
  if (m < 2) throw InputError("distance spec: needs at least two points");
  DistanceSpec s;
  s.m_ = m;
  const int n = pair_count(m);
  s.values_.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (const Entry& e : entries) {
    if (e.i >= e.j) {
      std::ostringstream os;
      os << "distance spec: pair (" << (e.i + 1) << "," << (e.j + 1) << ") must have i < j";
      throw InputError(os.str());
    }
    if (e.i < 0 || e.j >= m) {
      std::ostringstream os;
      os << "distance spec: pair (" << (e.i + 1) << "," << (e.j + 1)
         << ") out of range for " << m << " points";
      throw InputError(os.str());
    }
    const int k = pair_index(e.i, e.j, m);
    if (!std::isnan(s.values_[k])) {
      std::ostringstream os;
      os << "distance spec: duplicate pair (" << (e.i + 1) << "," << (e.j + 1) << ")";
      throw InputError(os.str());
    }
    s.values_[k] = e.delta;
  }
  std::vector<std::pair<int, int>> missing;
  const auto pairs = pair_order(m);
  for (int k = 0; k < n; ++k) {
    if (std::isnan(s.values_[k])) missing.push_back(pairs[k]);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "distance spec: missing " << missing.size() << " pair(s):";
    for (const auto& [i, j] : missing) os << " (" << (i + 1) << "," << (j + 1) << ")";
    throw InputError(os.str());
  }
  s.validate_positive();
  return s;
}

void DistanceSpec::validate_positive() const {
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError("distance spec: distances must be positive and finite");
    }
  }
}

Eigen::VectorXd lift(const Eigen::VectorXd& y, int h) {
  if (h < y.size()) throw DimensionError("lift: target dimension below point dimension");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(h);
  z.head(y.size()) = y;
  return z;
}

double default_eps(const PointCloud& cloud) {
  return defaults::eps_factor * cloud.min_pairwise_distance();
}

Eigen::VectorXd NeighborAssignment::neighbor(int i, int j) const {
  if (i == j) throw InputError("neighbor: indices must differ");
  const int k = pair_index(i, j, m);
  return i < j ? z_fwd.col(k) : z_rev.col(k);
}

bool rank_check(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) throw DimensionError("rank_check: matrix must be square");
  return numerical_rank(m, rel_tol) == m.rows();
}

namespace {

void validate_eps(const PointCloud& cloud, double eps) {
  const double limit = 0.5 * cloud.min_pairwise_distance();
  if (!(eps > 0.0) || !(eps < limit)) {
    std::ostringstream os;
    os << "eps must lie in (0, " << limit << ") so the neighbor balls stay disjoint; got "
       << eps;
    throw InputError(os.str());
  }
}

}  // namespace

NeighborAssignment sample_neighbors(const PointCloud& cloud, double eps, SplitMix64& gen) {
  cloud.validate();
  validate_eps(cloud, eps);
  const int m = cloud.size();
  const int ell = cloud.dim();
  if (m < 2) throw InputError("sample_neighbors: needs at least two points");
  const int h = pair_count(m);
  if (h < ell) {
    std::ostringstream os;
    os << "capacity: C(m,2) = " << h << " is below the point dimension " << ell
       << "; add points or reduce the dimension";
    throw RankError(os.str());
  }

  NeighborAssignment a;
  a.m = m;
  a.ell = ell;
  a.h = h;
  a.eps = eps;
  a.pairs = pair_order(m);
  a.z_fwd.resize(h, h);
  a.z_rev.resize(h, h);
  a.diff.resize(h, h);

  for (int attempt = 0; attempt < defaults::rank_retries; ++attempt) {
    for (int k = 0; k < h; ++k) {
      const auto& [i, j] = a.pairs[k];
      a.z_fwd.col(k) = lift(cloud.point(i), h) + sample_in_ball(gen, h, eps);
      a.z_rev.col(k) = lift(cloud.point(j), h) + sample_in_ball(gen, h, eps);
      a.diff.col(k) = a.z_fwd.col(k) - a.z_rev.col(k);
    }
    if (rank_check(a.diff)) {
      a.attempts = attempt + 1;
      return a;
    }
  }
  throw RankError("sample_neighbors: difference matrix rank-deficient after retries");
}

ScaledNorm scaled_form(const NeighborAssignment& assignment, const DistanceSpec& spec) {
  if (spec.point_count() != assignment.m) {
    throw DimensionError("scaled_form: spec and assignment point counts differ");
  }
  Eigen::VectorXd targets(assignment.h);
  for (int k = 0; k < assignment.h; ++k) targets[k] = spec.values()[k];

  const IndependentSystem system = IndependentSystem::create(assignment.diff, targets);
  ScaledNorm result;
  result.unscaled = interpolating_form(system);
  result.diagnostics = diagnose_form(result.unscaled);
  result.lambda_max = result.diagnostics.lambda_max;
  if (!std::isfinite(result.lambda_max) || result.lambda_max <= 0.0) {
    throw NumericalError("eigenvalues", "largest eigenvalue is not finite and positive");
  }
  result.alpha = 1.0 / result.lambda_max;
  result.scaled.matrix = result.alpha * result.unscaled.matrix;
  result.scaled.factor = std::sqrt(result.alpha) * result.unscaled.factor;
  if (!all_finite(result.scaled.matrix)) {
    throw NumericalError("scaling", "non-finite entries in the scaled form");
  }
  return result;
}

namespace {

// Three-way comparison with a relative tolerance: -1, 0, +1.
int fuzzy_compare(double a, double b, double rel_tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  if (std::abs(a - b) <= rel_tol * scale) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

RelationReport verify_relations(const ScaledNorm& norm, const NeighborAssignment& assignment,
                                const DistanceSpec& spec, int probes, SplitMix64& gen,
                                double rel_tol) {
  RelationReport report;
  const int m = assignment.m;

  std::vector<double> realized(assignment.h);
  for (int k = 0; k < assignment.h; ++k) {
    realized[k] = norm.scaled.norm(assignment.diff.col(k));
  }

  // Order relations: every ordered triple (i; j, k) compares the designated
  // deltas against the realized scaled distances.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < m; ++k) {
        if (k == i) continue;
        ++report.triples_checked;
        const double dj = spec.delta(std::min(i, j), std::max(i, j));
        const double dk = spec.delta(std::min(i, k), std::max(i, k));
        const double rj = realized[pair_index(i, j, m)];
        const double rk = realized[pair_index(i, k, m)];
        if (fuzzy_compare(dj, dk, rel_tol) != fuzzy_compare(rj, rk, rel_tol)) {
          ++report.sign_violations;
          if (report.violation_witnesses.size() < 16) {
            report.violation_witnesses.push_back({i, j, k});
          }
        }
      }
    }
  }

  report.probes_checked = probes;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd x(assignment.h);
    for (int i = 0; i < assignment.h; ++i) x[i] = gen.next_gaussian();
    const double e2 = x.norm();
    if (e2 == 0.0) continue;
    const double q = norm.scaled.norm(x);
    report.max_norm_ratio = std::max(report.max_norm_ratio, q / e2);
    if (q > (1.0 + 1e-10) * e2) ++report.domination_violations;
  }
  return report;
}

}  // namespace metricforge
