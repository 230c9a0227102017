// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Every tolerance and time budget is pinned here; the run is
// fully deterministic from the master seeds below.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metricforge/attack.hpp"
#include "metricforge/errors.hpp"

using namespace metricforge;

namespace {

// Pinned tolerances and budgets.
constexpr double kRealizeRelTol = 1e-8;      // realized vs designated lengths
constexpr double kLambdaTol = 1e-8;          // |lambda_max(scaled) - 1|
constexpr double kSymmetryTol = 1e-15;       // semimetric asymmetry defect
constexpr double kAxiomEps = 0.1;            // triangle slack under audit
constexpr double kRatioRelTol = 1e-6;        // separation ratio vs design
constexpr int kDominationProbes = 10000;     // per embedding run
constexpr long long kMinTriples = 10000;     // triangle triples audited
constexpr int kEmbeddingRuns = 50;
constexpr int kAttackRuns = 50;
constexpr int kRankTrials = 1000;
constexpr int kRankMinFirstSample = 999;
constexpr int kBlobRuns = 20;
constexpr double kFormBudgetSec = 1.0;
constexpr double kEmbeddingBudgetSec = 10.0;
constexpr double kAxiomBudgetSec = 30.0;
constexpr double kAttackBudgetSec = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, const Outcome& outcome) {
  if (!outcome.pass) ++failures;
  std::printf("%s criterion %2d: %s%s%s\n", outcome.pass ? "PASS" : "FAIL", number,
              title.c_str(), outcome.detail.empty() ? "" : " ", outcome.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

PointCloud gaussian_cloud(int m, int ell, SplitMix64& gen) {
  PointCloud cloud;
  cloud.points.resize(m, ell);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < ell; ++j) cloud.points(i, j) = gen.next_gaussian();
  return cloud;
}

// --- criterion 1 -----------------------------------------------------------

Outcome random_systems_realize_targets() {
  SplitMix64 gen(101);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(gen.next() % 10);
    const int d = n + static_cast<int>(gen.next() % (21 - n));
    Eigen::MatrixXd vectors(d, n);
    Eigen::VectorXd targets(n);
    for (;;) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < n; ++j) vectors(i, j) = gen.next_gaussian();
      const Svd svd = one_sided_jacobi_svd(vectors);
      if (svd.singular_values(n - 1) >= 1e-3 * svd.singular_values(0)) break;
    }
    for (int k = 0; k < n; ++k) targets(k) = 0.5 + 4.5 * gen.next_double();

    const IndependentSystem system = IndependentSystem::create(vectors, targets);
    const QuadraticNorm q = interpolating_form(system);
    for (int k = 0; k < n; ++k) {
      const double realized = q.norm(system.vectors.col(k));
      worst = std::max(worst, std::abs(realized - targets(k)) / targets(k));
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = worst <= kRealizeRelTol && elapsed < kFormBudgetSec;
  out.detail = fmt("(100 systems, max rel error %.2e <= %.0e, %.3fs < %.0fs)", worst,
                   kRealizeRelTol, elapsed, kFormBudgetSec);
  return out;
}

// --- criterion 2 -----------------------------------------------------------

Outcome capacity_and_overfull_rejection() {
  const int cap = check_capacity(45);
  bool threw_rank = false;
  Eigen::MatrixXd three(2, 3);
  three << 1, 0, 1, 0, 1, 1;
  try {
    IndependentSystem::create(three, Eigen::VectorXd::Ones(3));
  } catch (const RankError&) {
    threw_rank = true;
  }
  Outcome out;
  out.pass = cap == 10 && threw_rank;
  out.detail = fmt("(capacity(45) = %d, 3 vectors in R^2 %s)", cap,
                   threw_rank ? "rejected as rank-deficient" : "NOT rejected");
  return out;
}

// --- criteria 3 and 4 (shared embedding runs) ------------------------------

struct EmbeddingStats {
  bool computed = false;
  double max_lambda_dev = 0.0;
  double max_norm_ratio = 0.0;
  int domination_violations = 0;
  long long probes = 0;
  long long sign_violations = 0;
  long long triples = 0;
  double elapsed = 0.0;
};

const EmbeddingStats& embedding_stats() {
  static EmbeddingStats stats;
  if (stats.computed) return stats;
  SplitMix64 gen(303);
  const auto start = Clock::now();
  for (int run = 0; run < kEmbeddingRuns; ++run) {
    const int m = 6 + run % 5;
    PointCloud cloud = gaussian_cloud(m, 2, gen);
    const DistanceSpec spec = DistanceSpec::from_function(
        m, [&](int, int) { return 0.5 + 4.5 * gen.next_double(); });
    NeighborAssignment assignment = sample_neighbors(cloud, default_eps(cloud), gen);
    const ScaledNorm norm = scaled_form(assignment, spec);

    stats.max_lambda_dev = std::max(
        stats.max_lambda_dev, std::abs(largest_eigenvalue(norm.scaled.matrix) - 1.0));

    const RelationReport rel =
        verify_relations(norm, assignment, spec, kDominationProbes, gen);
    stats.max_norm_ratio = std::max(stats.max_norm_ratio, rel.max_norm_ratio);
    stats.domination_violations += rel.domination_violations;
    stats.probes += rel.probes_checked;
    stats.sign_violations += rel.sign_violations;
    stats.triples += rel.triples_checked;
  }
  stats.elapsed = seconds_since(start);
  stats.computed = true;
  return stats;
}

Outcome scaled_form_unit_eigenvalue_and_domination() {
  const EmbeddingStats& s = embedding_stats();
  Outcome out;
  out.pass = s.max_lambda_dev <= kLambdaTol && s.domination_violations == 0 &&
             s.probes == static_cast<long long>(kEmbeddingRuns) * kDominationProbes &&
             s.elapsed < kEmbeddingBudgetSec;
  out.detail = fmt("(%d runs, max |lambda_max-1| %.2e <= %.0e, %lld probes, "
                   "%d domination breaches, max ratio %.12f, %.2fs < %.0fs)",
                   kEmbeddingRuns, s.max_lambda_dev, kLambdaTol, s.probes,
                   s.domination_violations, s.max_norm_ratio, s.elapsed,
                   kEmbeddingBudgetSec);
  return out;
}

Outcome order_relations_preserved() {
  const EmbeddingStats& s = embedding_stats();
  Outcome out;
  out.pass = s.sign_violations == 0 && s.triples > 0;
  out.detail = fmt("(%lld ordered pair comparisons, %lld sign violations)", s.triples,
                   s.sign_violations);
  return out;
}

// --- criterion 5 -----------------------------------------------------------

Outcome semimetric_axioms_within_eps() {
  SplitMix64 gen(505);
  const auto start = Clock::now();

  double worst_identity = 0.0;
  double worst_asymmetry = 0.0;
  long long positivity = 0;
  double worst_triangle = 0.0;
  long long triples = 0;
  bool any_positive_defect = false;
  bool all_within_eps = true;

  for (int run = 0; run < 5; ++run) {
    PointCloud cloud = gaussian_cloud(10, 2, gen);
    cloud.points /= cloud.min_pairwise_distance();  // eps 0.1 is then valid

    AttackPlan plan;
    plan.cloud = cloud;
    plan.spec = DistanceSpec::from_function(
        10, [&](int, int) { return 1.0 + 2.0 * gen.next_double(); });
    plan.eps = kAxiomEps;
    plan.scaled = true;  // the eps triangle bound holds for the rescaled form
    const ForgeResult forged = forge_semimetric(plan);

    // Audit sample: the 10 designed points, 12 background points, and one
    // deliberately collinear triple (a tight triangle that the pair noise
    // perturbs into a strictly positive defect with high probability).
    std::vector<Eigen::VectorXd> sample;
    for (int i = 0; i < 10; ++i) sample.push_back(cloud.point(i));
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd p(2);
      p << 2.0 * gen.next_gaussian(), 2.0 * gen.next_gaussian();
      sample.push_back(p);
    }
    Eigen::VectorXd base(2), dir(2);
    base << gen.next_gaussian(), gen.next_gaussian();
    dir << gen.next_gaussian(), gen.next_gaussian();
    sample.push_back(base);
    sample.push_back(base + 0.4 * dir);
    sample.push_back(base + dir);

    AxiomOptions options;
    options.eps = kAxiomEps;
    options.seed = 505 + run;
    options.symmetry_tol = kSymmetryTol;
    const AxiomReport report = check_axioms(forged.semimetric.fn(), sample, options);

    worst_identity = std::max(worst_identity, report.identity_defect);
    worst_asymmetry = std::max(worst_asymmetry, report.asymmetry_defect);
    positivity += report.positivity_violations;
    worst_triangle = std::max(worst_triangle, report.triangle_defect);
    triples += report.triples_checked;
    if (report.triangle_defect > 0.0) any_positive_defect = true;
    if (report.triangle_defect > kAxiomEps) all_within_eps = false;
  }
  const double elapsed = seconds_since(start);

  Outcome out;
  out.pass = worst_identity == 0.0 && worst_asymmetry <= kSymmetryTol && positivity == 0 &&
             all_within_eps && any_positive_defect && triples >= kMinTriples &&
             elapsed < kAxiomBudgetSec;
  out.detail = fmt("(identity %.1e, asymmetry %.1e, %lld positivity breaches, "
                   "max triangle defect %.4f in [0, %.1f], %lld triples, %.2fs < %.0fs)",
                   worst_identity, worst_asymmetry, positivity, worst_triangle, kAxiomEps,
                   triples, elapsed, kAxiomBudgetSec);
  return out;
}

// --- criterion 6 -----------------------------------------------------------

Outcome euclidean_dominated_targets_realized() {
  SplitMix64 gen(606);
  double worst = 0.0;
  for (int run = 0; run < 10; ++run) {
    PointCloud cloud = gaussian_cloud(10, 2, gen);
    AttackPlan plan;
    plan.cloud = cloud;
    // Designated distances kept strictly below the Euclidean ones.
    plan.spec = DistanceSpec::from_function(10, [&](int i, int j) {
      const double gap = (cloud.point(i) - cloud.point(j)).norm();
      return (0.3 + 0.6 * gen.next_double()) * gap;
    });
    const ForgeResult forged = forge_semimetric(plan);
    worst = std::max(worst, forged.max_rel_error);
  }
  Outcome out;
  out.pass = worst <= kRealizeRelTol;
  out.detail = fmt("(10 runs at m = 10, max rel error %.2e <= %.0e)", worst, kRealizeRelTol);
  return out;
}

// --- criteria 7, 8, 9 (shared attack runs) ---------------------------------

struct AttackStats {
  bool computed = false;
  std::vector<AttackPlan> plans;
  std::vector<std::optional<AttackReport>> kmeans_reports;  // nullopt = flagged
  int flagged = 0;
  bool flagged_stages_named = true;
  double kmeans_elapsed = 0.0;
  std::vector<AttackReport> dbscan_reports;
  double dbscan_elapsed = 0.0;
};

const AttackStats& attack_stats() {
  static AttackStats stats;
  if (stats.computed) return stats;

  for (int run = 0; run < kAttackRuns; ++run) {
    SplitMix64 gen(700 + run);
    PointCloud cloud = gaussian_cloud(10, 2, gen);
    cloud.labels = random_labels(10, 3, gen);
    stats.plans.push_back(assign_target_distances(cloud));
  }

  const auto kmeans_start = Clock::now();
  for (const AttackPlan& plan : stats.plans) {
    try {
      stats.kmeans_reports.emplace_back(attack_kmeans(plan, KMeansAttackOptions{}));
    } catch (const NumericalError& e) {
      ++stats.flagged;
      if (e.stage.empty()) stats.flagged_stages_named = false;
      stats.kmeans_reports.emplace_back(std::nullopt);
    }
  }
  stats.kmeans_elapsed = seconds_since(kmeans_start);

  const auto dbscan_start = Clock::now();
  for (const AttackPlan& plan : stats.plans) {
    stats.dbscan_reports.push_back(attack_dbscan(plan));
  }
  stats.dbscan_elapsed = seconds_since(dbscan_start);

  stats.computed = true;
  return stats;
}

Outcome kmeans_attack_recovers_labels() {
  const AttackStats& s = attack_stats();
  int recovered = 0;
  for (const auto& report : s.kmeans_reports) {
    if (report && report->success) ++recovered;
  }
  const int unflagged = kAttackRuns - s.flagged;
  Outcome out;
  out.pass = recovered == unflagged && s.flagged_stages_named &&
             s.kmeans_elapsed < kAttackBudgetSec;
  out.detail = fmt("(%d/%d unflagged runs recovered exactly, %d flagged%s, %.2fs < %.0fs)",
                   recovered, unflagged, s.flagged,
                   s.flagged_stages_named ? "" : " with unnamed stages", s.kmeans_elapsed,
                   kAttackBudgetSec);
  return out;
}

Outcome dbscan_attack_recovers_partitions() {
  const AttackStats& s = attack_stats();
  int recovered = 0;
  int with_bijection = 0;
  for (const AttackReport& report : s.dbscan_reports) {
    if (report.success) ++recovered;
    if (report.bijection) ++with_bijection;
  }
  Outcome out;
  out.pass = recovered == kAttackRuns && with_bijection == kAttackRuns &&
             s.dbscan_elapsed < kAttackBudgetSec;
  out.detail = fmt("(%d/%d runs isomorphic with a reported bijection, %.2fs < %.0fs)",
                   recovered, kAttackRuns, s.dbscan_elapsed, kAttackBudgetSec);
  return out;
}

Outcome separation_ratio_matches_design() {
  const AttackStats& s = attack_stats();
  double worst = 0.0;
  int checked = 0;
  bool all_present = true;
  const auto check = [&](const AttackReport& report, const AttackPlan& plan) {
    if (!report.success) return;
    if (!report.separation.ratio) {
      all_present = false;
      return;
    }
    const double designed = 40000.0 * plan.delta_max / plan.delta_min;
    worst = std::max(worst, std::abs(*report.separation.ratio - designed) / designed);
    ++checked;
  };
  for (int run = 0; run < kAttackRuns; ++run) {
    if (s.kmeans_reports[run]) check(*s.kmeans_reports[run], s.plans[run]);
    check(s.dbscan_reports[run], s.plans[run]);
  }
  Outcome out;
  out.pass = all_present && checked > 0 && worst <= kRatioRelTol;
  out.detail = fmt("(%d successful runs, max |ratio/design - 1| %.2e <= %.0e)", checked,
                   worst, kRatioRelTol);
  return out;
}

// --- criterion 10 ----------------------------------------------------------

Outcome difference_matrices_full_rank_first_try() {
  SplitMix64 gen(1010);
  int first_sample = 0;
  for (int trial = 0; trial < kRankTrials; ++trial) {
    PointCloud cloud = gaussian_cloud(10, 2, gen);
    const NeighborAssignment a = sample_neighbors(cloud, default_eps(cloud), gen);
    if (a.attempts == 1) ++first_sample;
  }
  Outcome out;
  out.pass = first_sample >= kRankMinFirstSample;
  out.detail = fmt("(%d/%d trials full rank on the first sample, need >= %d)", first_sample,
                   kRankTrials, kRankMinFirstSample);
  return out;
}

// --- criterion 11 ----------------------------------------------------------

Outcome euclidean_baselines_recover_blobs() {
  const auto euclid = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm();
  };
  const double radius = 1.0;
  Eigen::MatrixXd centers(3, 2);
  centers << 0, 0, 25, 0, 12.5, 21.650635094610966;  // pairwise 25 >= 10 * radius

  SplitMix64 gen(1111);
  int kmeans_ok = 0;
  int dbscan_ok = 0;
  for (int run = 0; run < kBlobRuns; ++run) {
    const int per_blob = 6;
    Eigen::MatrixXd points(3 * per_blob, 2);
    std::vector<int> desired;
    for (int b = 0; b < 3; ++b) {
      for (int i = 0; i < per_blob; ++i) {
        points.row(b * per_blob + i) =
            centers.row(b) + sample_in_ball(gen, 2, radius).transpose();
        desired.push_back(b + 1);
      }
    }

    const ClusterAssignment km = kmeans(points, centers, euclid, 20);
    if (label_isomorphism(desired, km.labels)) ++kmeans_ok;

    const ClusterAssignment db = dbscan(points, 2.5 * radius, 2, euclid);
    if (label_isomorphism(desired, db.labels)) ++dbscan_ok;
  }
  Outcome out;
  out.pass = kmeans_ok == kBlobRuns && dbscan_ok == kBlobRuns;
  out.detail = fmt("(k-means %d/%d, dbscan %d/%d planted blobs recovered)", kmeans_ok,
                   kBlobRuns, dbscan_ok, kBlobRuns);
  return out;
}

}  // namespace

int main() {
  report(1, "interpolating forms realize designated lengths on random systems",
         random_systems_realize_targets());
  report(2, "pair capacity of R^45 is 10 and overfull systems are rejected",
         capacity_and_overfull_rejection());
  report(3, "rescaled forms have unit top eigenvalue and never exceed the euclidean norm",
         scaled_form_unit_eigenvalue_and_domination());
  report(4, "designed order relations survive the embedding with zero sign violations",
         order_relations_preserved());
  report(5, "forged semimetrics satisfy the axioms with triangle defects inside eps",
         semimetric_axioms_within_eps());
  report(6, "euclidean-dominated designated distances are realized exactly",
         euclidean_dominated_targets_realized());
  report(7, "k-means with designed centers recovers the planted labels",
         kmeans_attack_recovers_labels());
  report(8, "dbscan recovers the planted partition up to relabeling",
         dbscan_attack_recovers_partitions());
  report(9, "realized class separation matches the designed ratio",
         separation_ratio_matches_design());
  report(10, "fresh-neighbor difference matrices are full rank on the first sample",
         difference_matrices_full_rank_first_try());
  report(11, "euclidean baselines recover well-separated planted blobs",
         euclidean_baselines_recover_blobs());

  std::printf("acceptance: %d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
