#include "metricforge/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "metricforge/errors.hpp"

namespace metricforge {

AttackPlan assign_target_distances(const PointCloud& cloud) {
  cloud.validate();
  if (!cloud.labels) throw InputError("attack: point cloud must carry class labels");
  if (cloud.size() < 2) throw InputError("attack: needs at least two points");

  AttackPlan plan;
  plan.cloud = cloud;
  plan.delta_min = cloud.min_pairwise_distance();
  plan.delta_max = cloud.max_pairwise_distance();
  plan.delta_small = plan.delta_min / defaults::separation_factor;
  plan.delta_large = defaults::separation_factor * plan.delta_max;
  const std::vector<int>& labels = *cloud.labels;
  plan.spec = DistanceSpec::from_function(cloud.size(), [&](int i, int j) {
    return labels[i] == labels[j] ? plan.delta_small : plan.delta_large;
  });
  return plan;
}

namespace {

double resolve_eps(const PointCloud& cloud, double requested) {
  if (requested == 0.0) return default_eps(cloud);
  const double limit = 0.5 * cloud.min_pairwise_distance();
  if (!(requested > 0.0) || !(requested < limit)) {
    std::ostringstream os;
    os << "eps must lie in (0, " << limit << ") so the neighbor balls stay disjoint; got "
       << requested;
    throw InputError(os.str());
  }
  return requested;
}

}  // namespace

ForgeResult forge_semimetric(const AttackPlan& plan) {
  plan.cloud.validate();
  const int m = plan.cloud.size();
  const int ell = plan.cloud.dim();
  if (plan.spec.point_count() != m) {
    throw DimensionError("forge: distance spec does not match the point count");
  }
  const int h = pair_count(m);
  if (h < ell) {
    std::ostringstream os;
    os << "capacity: C(m,2) = " << h << " is below the point dimension " << ell
       << "; add points or reduce the dimension";
    throw RankError(os.str());
  }

  ForgeResult result;
  result.eps_used = resolve_eps(plan.cloud, plan.eps);

  const auto pairs = pair_order(m);
  const int pad = h - ell;
  Eigen::VectorXd targets(h);
  for (int k = 0; k < h; ++k) targets[k] = plan.spec.values()[k];

  // The padding noise is a deterministic function of the pair coordinates, so
  // a retry re-derives every pair under a fresh salt rather than redrawing
  // from a shared stream. Most salts realize the targets to near working
  // precision; the rare outlier draw (a too-small singular value of the
  // difference matrix) is detected by measuring and retried. Candidates are
  // measured on the unscaled form -- rescaling multiplies every distance by
  // the same factor, so relative errors carry over -- and the eigenvalue work
  // is spent on the winner only.
  bool have_candidate = false;
  ForgeResult best;
  Eigen::MatrixXd diff(h, h);
  for (int attempt = 0; attempt < defaults::realization_retries; ++attempt) {
    const NoiseFunction noise =
        NoiseFunction::seeded(result.eps_used, h, ell, plan.noise, attempt);
    for (int k = 0; k < h; ++k) {
      const auto& [i, j] = pairs[k];
      const Eigen::VectorXd yi = plan.cloud.point(i);
      const Eigen::VectorXd yj = plan.cloud.point(j);
      Eigen::VectorXd zi = lift(yi, h);
      Eigen::VectorXd zj = lift(yj, h);
      if (pad > 0) {
        zi.tail(pad) = noise(yi, yj);
        zj.tail(pad) = noise(yj, yi);
      }
      diff.col(k) = zi - zj;
    }

    EpsilonSemimetric sm;
    sm.noise = noise;
    sm.eps = result.eps_used;
    try {
      sm.form = interpolating_form(IndependentSystem::create(diff, targets));
    } catch (const RankError&) {
      continue;  // dependent draw: the next salt gives a fresh difference matrix
    }

    ForgeResult candidate;
    candidate.eps_used = result.eps_used;
    candidate.realized.resize(h);
    candidate.max_rel_error = 0.0;
    for (int k = 0; k < h; ++k) {
      const auto& [i, j] = pairs[k];
      const double d = sm.eval(plan.cloud.point(i), plan.cloud.point(j));
      candidate.realized[k] = d;
      candidate.max_rel_error =
          std::max(candidate.max_rel_error, std::abs(d - targets[k]) / targets[k]);
    }
    candidate.semimetric = std::move(sm);

    const double err = candidate.max_rel_error;
    const double previous_best =
        have_candidate ? best.max_rel_error : std::numeric_limits<double>::infinity();
    if (err < previous_best) {
      best = std::move(candidate);
      have_candidate = true;
    }
    if (best.max_rel_error <= defaults::realization_accept_tol) break;
    if (err * defaults::realization_stall_factor > previous_best) break;
  }
  if (!have_candidate) {
    std::string message =
        "forge: difference matrix rank-deficient; the data differences may not span "
        "the data dimensions";
    if (plan.noise == NoiseFunction::Scheme::ProductSum) {
      message +=
          "; the product-sum offset stream collides on zero coordinates and on "
          "coincident product/sum pairs -- the hashed scheme avoids this";
    }
    throw RankError(message);
  }

  result = std::move(best);
  result.diagnostics = diagnose_form(result.semimetric.form);
  result.lambda_max = result.diagnostics.lambda_max;
  if (!std::isfinite(result.lambda_max) || result.lambda_max <= 0.0) {
    throw NumericalError("eigenvalues", "largest eigenvalue is not finite and positive");
  }
  result.alpha = 1.0 / result.lambda_max;
  if (plan.scaled) {
    EpsilonSemimetric& sm = result.semimetric;
    sm.scaled = true;
    sm.alpha = result.alpha;
    sm.form.matrix *= result.alpha;
    sm.form.factor *= std::sqrt(result.alpha);
    if (!all_finite(sm.form.matrix)) {
      throw NumericalError("scaling", "non-finite entries in the form matrix");
    }
    // Re-measure through the rescaled form so the report describes the
    // semimetric actually returned.
    const double target_scale = std::sqrt(result.alpha);
    result.max_rel_error = 0.0;
    for (int k = 0; k < h; ++k) {
      const auto& [i, j] = pairs[k];
      const double d = result.semimetric.eval(plan.cloud.point(i), plan.cloud.point(j));
      result.realized[k] = d;
      const double want = target_scale * targets[k];
      result.max_rel_error = std::max(result.max_rel_error, std::abs(d - want) / want);
    }
  }
  if (result.diagnostics.spread() > defaults::cond_warn_threshold) {
    std::ostringstream os;
    os << "eigenvalue spread lambda_max/lambda_min+ = " << result.diagnostics.spread()
       << " exceeds " << defaults::cond_warn_threshold
       << "; realized distances may lose precision";
    result.warnings.push_back({"conditioning", os.str()});
  }
  if (result.max_rel_error > defaults::realization_flag_tol) {
    std::ostringstream os;
    os << "max relative error of realized designated distances is " << result.max_rel_error;
    result.warnings.push_back({"realization", os.str()});
  }
  return result;
}

SeparationTable separation_report(const DistanceFn& distance, const PointCloud& cloud,
                                  const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != cloud.size()) {
    throw DimensionError("separation_report: one label per point required");
  }
  const std::set<int> classes(labels.begin(), labels.end());
  SeparationTable table;

  for (int c : classes) {
    SeparationTable::Within w{c, 0, 0.0};
    for (int i = 0; i < cloud.size(); ++i) {
      if (labels[i] != c) continue;
      for (int j = i + 1; j < cloud.size(); ++j) {
        if (labels[j] != c) continue;
        ++w.pairs;
        w.max_distance = std::max(w.max_distance, distance(cloud.point(i), cloud.point(j)));
      }
    }
    if (w.pairs > 0) {
      table.within.push_back(w);
      table.max_within = std::max(table.max_within.value_or(0.0), w.max_distance);
    }
  }

  for (auto a = classes.begin(); a != classes.end(); ++a) {
    for (auto b = std::next(a); b != classes.end(); ++b) {
      SeparationTable::Between bt{*a, *b, std::numeric_limits<double>::infinity()};
      for (int i = 0; i < cloud.size(); ++i) {
        if (labels[i] != *a) continue;
        for (int j = 0; j < cloud.size(); ++j) {
          if (labels[j] != *b) continue;
          bt.min_distance = std::min(bt.min_distance, distance(cloud.point(i), cloud.point(j)));
        }
      }
      table.between.push_back(bt);
      table.min_between = std::min(table.min_between.value_or(bt.min_distance), bt.min_distance);
    }
  }

  if (table.max_within && table.min_between && *table.max_within > 0.0) {
    table.ratio = *table.min_between / *table.max_within;
  }
  return table;
}

std::optional<std::unordered_map<int, int>> label_isomorphism(const std::vector<int>& desired,
                                                              const std::vector<int>& recovered) {
  if (desired.size() != recovered.size()) return std::nullopt;
  std::unordered_map<int, int> fwd, rev;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const int a = desired[i];
    const int b = recovered[i];
    if ((a == kNoiseLabel) != (b == kNoiseLabel)) return std::nullopt;
    const auto [fit, finserted] = fwd.emplace(a, b);
    if (!finserted && fit->second != b) return std::nullopt;
    const auto [rit, rinserted] = rev.emplace(b, a);
    if (!rinserted && rit->second != a) return std::nullopt;
  }
  return fwd;
}

namespace {

std::vector<int> sorted_classes(const std::vector<int>& labels) {
  const std::set<int> s(labels.begin(), labels.end());
  return std::vector<int>(s.begin(), s.end());
}

Eigen::MatrixXd class_mean_centers(const PointCloud& cloud, const std::vector<int>& classes) {
  const std::vector<int>& labels = *cloud.labels;
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(classes.size(), cloud.dim());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    int count = 0;
    for (int i = 0; i < cloud.size(); ++i) {
      if (labels[i] == classes[c]) {
        centers.row(c) += cloud.points.row(i);
        ++count;
      }
    }
    centers.row(c) /= static_cast<double>(count);
  }
  return centers;
}

bool bitwise_row_equal(const Eigen::MatrixXd& m, int row, const Eigen::VectorXd& v) {
  return (m.row(row).transpose().array() == v.array()).all();
}

}  // namespace

AttackReport attack_kmeans(const AttackPlan& plan, const KMeansAttackOptions& options) {
  if (!plan.cloud.labels) throw InputError("attack: point cloud must carry class labels");
  const PointCloud& cloud = plan.cloud;
  const std::vector<int>& desired = *cloud.labels;
  const std::vector<int> classes = sorted_classes(desired);
  const int k = static_cast<int>(classes.size());
  const int m = cloud.size();
  const int ell = cloud.dim();

  AttackReport report;
  report.algorithm = "kmeans";
  report.desired = desired;
  report.delta_small = plan.delta_small;
  report.delta_large = plan.delta_large;
  report.iterations = options.iterations;

  Eigen::MatrixXd centers(k, ell);
  ForgeResult forged;

  if (options.centers == CentersMode::ClassMean) {
    centers = class_mean_centers(cloud, classes);

    // The centers join the design: center-to-point distances are forged like
    // every other pair. A single-member class has its mean coincide with the
    // member, so such centers are not duplicated into the construction.
    Eigen::MatrixXd aug_points(k + m, ell);
    std::vector<int> aug_labels;
    int rows = 0;
    for (int c = 0; c < k; ++c) {
      bool existing = false;
      for (int i = 0; i < m; ++i) {
        if (bitwise_row_equal(cloud.points, i, centers.row(c).transpose())) {
          existing = true;
          break;
        }
      }
      if (existing) continue;
      aug_points.row(rows) = centers.row(c);
      aug_labels.push_back(classes[c]);
      ++rows;
    }
    for (int i = 0; i < m; ++i) {
      aug_points.row(rows + i) = cloud.points.row(i);
    }
    aug_labels.insert(aug_labels.end(), desired.begin(), desired.end());

    PointCloud aug;
    aug.points = aug_points.topRows(rows + m);
    aug.labels = aug_labels;

    AttackPlan aug_plan;
    aug_plan.cloud = aug;
    aug_plan.delta_min = plan.delta_min;
    aug_plan.delta_max = plan.delta_max;
    aug_plan.delta_small = plan.delta_small;
    aug_plan.delta_large = plan.delta_large;
    aug_plan.noise = plan.noise;
    aug_plan.scaled = plan.scaled;
    aug_plan.eps = plan.eps;  // 0 -> auto against the augmented cloud
    aug_plan.spec = DistanceSpec::from_function(aug.size(), [&](int i, int j) {
      return aug_labels[i] == aug_labels[j] ? plan.delta_small : plan.delta_large;
    });

    forged = forge_semimetric(aug_plan);
  } else {
    // Negative control: centers are perturbed member points, not part of the
    // design; the forged distances around them are whatever the form gives.
    forged = forge_semimetric(plan);
    SplitMix64 gen(options.seed);
    for (int c = 0; c < k; ++c) {
      int first = 0;
      while (desired[first] != classes[c]) ++first;
      centers.row(c) =
          (cloud.point(first) + sample_in_ball(gen, ell, forged.eps_used)).transpose();
    }
  }

  Eigen::MatrixXd input(k + m, ell);
  input.topRows(k) = centers;
  input.bottomRows(m) = cloud.points;

  const ClusterAssignment run =
      kmeans(input, centers, forged.semimetric.fn(), options.iterations);

  report.recovered.resize(m);
  for (int i = 0; i < m; ++i) report.recovered[i] = classes[run.labels[k + i]];
  report.success = report.recovered == desired;
  if (report.success) {
    std::unordered_map<int, int> identity;
    for (int c : classes) identity[c] = c;
    report.bijection = identity;
  }

  report.eps_used = forged.eps_used;
  report.realized_max_rel_error = forged.max_rel_error;
  report.alpha = forged.alpha;
  report.lambda_max = forged.lambda_max;
  report.empty_cluster_events = run.empty_cluster_events;
  report.warnings = forged.warnings;
  report.separation = separation_report(forged.semimetric.fn(), cloud, desired);
  return report;
}

AttackReport attack_dbscan(const AttackPlan& plan) {
  if (!plan.cloud.labels) throw InputError("attack: point cloud must carry class labels");
  const PointCloud& cloud = plan.cloud;
  const std::vector<int>& desired = *cloud.labels;
  const int m = cloud.size();

  AttackReport report;
  report.algorithm = "dbscan";
  report.desired = desired;
  report.delta_small = plan.delta_small;
  report.delta_large = plan.delta_large;
  report.min_pts = 2;

  const ForgeResult forged = forge_semimetric(plan);

  // eps sits midway between the realized small and large distances; fall back
  // to the designed values (at the active scale) when a side has no pairs.
  const double scale = plan.scaled ? std::sqrt(forged.alpha) : 1.0;
  double realized_small = 0.0;
  bool has_small = false;
  double realized_large = std::numeric_limits<double>::infinity();
  bool has_large = false;
  const auto pairs = pair_order(m);
  for (int p = 0; p < static_cast<int>(pairs.size()); ++p) {
    const auto& [i, j] = pairs[p];
    if (desired[i] == desired[j]) {
      realized_small = std::max(realized_small, forged.realized[p]);
      has_small = true;
    } else {
      realized_large = std::min(realized_large, forged.realized[p]);
      has_large = true;
    }
  }
  if (!has_small) realized_small = scale * plan.delta_small;
  if (!has_large) realized_large = scale * plan.delta_large;
  report.dbscan_eps = 0.5 * (realized_small + realized_large);

  const ClusterAssignment run =
      dbscan(cloud.points, report.dbscan_eps, report.min_pts, forged.semimetric.fn());

  report.recovered_raw = run.labels;
  // Designed singleton classes are unreachable under min_pts = 2; they come
  // back as noise and are promoted to singleton clusters for the partition
  // comparison.
  report.recovered = run.labels;
  int next_cluster = run.n_clusters;
  for (int i = 0; i < m; ++i) {
    if (report.recovered[i] == kNoiseLabel) report.recovered[i] = ++next_cluster;
  }

  report.bijection = label_isomorphism(desired, report.recovered);
  report.success = report.bijection.has_value();

  report.eps_used = forged.eps_used;
  report.realized_max_rel_error = forged.max_rel_error;
  report.alpha = forged.alpha;
  report.lambda_max = forged.lambda_max;
  report.warnings = forged.warnings;
  report.separation = separation_report(forged.semimetric.fn(), cloud, desired);
  return report;
}

PointCloud random_cloud(int m, int ell, SplitMix64& gen) {
  if (m < 1 || ell < 1) throw InputError("random_cloud: m and ell must be >= 1");
  PointCloud cloud;
  cloud.points.resize(m, ell);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < ell; ++j) cloud.points(i, j) = gen.next_gaussian();
  return cloud;
}

std::vector<int> random_labels(int m, int n_classes, SplitMix64& gen) {
  if (n_classes < 1) throw InputError("random_labels: need at least one class");
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) labels[i] = 1 + static_cast<int>(gen.next() % n_classes);
  return labels;
}

}  // namespace metricforge
