#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "metricforge/attack.hpp"
#include "metricforge/errors.hpp"

using namespace metricforge;

namespace {

PointCloud labeled_cloud(std::initializer_list<double> xs, std::vector<int> labels) {
  PointCloud cloud;
  cloud.points.resize(static_cast<int>(xs.size()), 1);
  int i = 0;
  for (double x : xs) cloud.points(i++, 0) = x;
  cloud.labels = std::move(labels);
  return cloud;
}

PointCloud demo_cloud(int m, int ell, int classes, std::uint64_t seed) {
  SplitMix64 gen(seed);
  PointCloud cloud = random_cloud(m, ell, gen);
  cloud.labels = random_labels(m, classes, gen);
  return cloud;
}

}  // namespace

TEST_CASE("target distances collapse classes and repel the rest") {
  // Gaps 1, 9, 10 on the line: delta_min 1, delta_max 10.
  PointCloud cloud = labeled_cloud({0, 1, 10}, {1, 2, 2});
  AttackPlan plan = assign_target_distances(cloud);

  CHECK(plan.delta_min == 1.0);
  CHECK(plan.delta_max == 10.0);
  CHECK(plan.delta_small == 0.005);
  CHECK(plan.delta_large == 2000.0);
  CHECK(plan.spec.delta(0, 1) == 2000.0);
  CHECK(plan.spec.delta(0, 2) == 2000.0);
  CHECK(plan.spec.delta(1, 2) == 0.005);

  PointCloud single = labeled_cloud({0, 1, 10}, {7, 7, 7});
  AttackPlan all_small = assign_target_distances(single);
  for (double v : all_small.spec.values()) CHECK(v == all_small.delta_small);

  PointCloud unlabeled;
  unlabeled.points = cloud.points;
  CHECK_THROWS_AS(assign_target_distances(unlabeled), InputError);
}

TEST_CASE("label isomorphism finds the bijection or rejects the partition") {
  const auto iso = label_isomorphism({1, 2, 3}, {3, 1, 2});
  REQUIRE(iso.has_value());
  CHECK(iso->at(1) == 3);
  CHECK(iso->at(2) == 1);
  CHECK(iso->at(3) == 2);

  CHECK(label_isomorphism({1, 1, 2}, {1, 1, 2}).has_value());
  CHECK_FALSE(label_isomorphism({1, 1, 2}, {1, 2, 2}).has_value());
  CHECK_FALSE(label_isomorphism({1, 2}, {1, 1}).has_value());
  CHECK_FALSE(label_isomorphism({1, 2, 3}, {1, 2}).has_value());

  // Noise must map to noise, never to a real cluster.
  CHECK(label_isomorphism({1, kNoiseLabel}, {5, kNoiseLabel}).has_value());
  CHECK_FALSE(label_isomorphism({1, kNoiseLabel}, {1, 2}).has_value());
}

TEST_CASE("forged semimetric realizes the designated distances") {
  PointCloud cloud = demo_cloud(8, 2, 2, 51);
  AttackPlan plan = assign_target_distances(cloud);
  ForgeResult forged = forge_semimetric(plan);

  CHECK(forged.eps_used == doctest::Approx(0.45 * plan.delta_min).epsilon(1e-15));
  CHECK(forged.max_rel_error <= 1e-8);
  CHECK(forged.alpha == doctest::Approx(1.0 / forged.lambda_max).epsilon(1e-15));
  CHECK(forged.semimetric.alpha == 1.0);
  CHECK_FALSE(forged.semimetric.scaled);

  const auto pairs = pair_order(8);
  const auto& labels = *cloud.labels;
  for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
    const auto& [i, j] = pairs[k];
    const double want = labels[i] == labels[j] ? plan.delta_small : plan.delta_large;
    CHECK(forged.realized[k] == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("forging the scaled variant rescales the realized distances") {
  PointCloud cloud = demo_cloud(6, 2, 2, 52);
  AttackPlan plan = assign_target_distances(cloud);
  plan.scaled = true;
  ForgeResult forged = forge_semimetric(plan);

  CHECK(forged.semimetric.scaled);
  CHECK(forged.semimetric.alpha == doctest::Approx(forged.alpha).epsilon(1e-15));
  CHECK(forged.max_rel_error <= 1e-8);
  const double root_alpha = std::sqrt(forged.alpha);
  CHECK(forged.realized[0] ==
        doctest::Approx(root_alpha * plan.spec.values()[0]).epsilon(1e-8));
  CHECK(largest_eigenvalue(forged.semimetric.form.matrix) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("extreme designed spreads raise a conditioning warning") {
  // One within pair keeps a single designed-small eigenvalue. Its measured
  // location is near 1.7e-13 * lambda_max: above the 1e-14 spectral floor
  // (below which it would read as a null direction) yet with spread near
  // 6e12, past the 1e12 warning threshold.
  PointCloud cloud = labeled_cloud({0, 1, 3, 7}, {1, 1, 2, 3});
  AttackPlan plan = assign_target_distances(cloud);
  plan.spec = DistanceSpec::from_function(4, [&](int i, int j) {
    return (*cloud.labels)[i] == (*cloud.labels)[j] ? 1e-4 : 1.0;
  });
  ForgeResult forged = forge_semimetric(plan);
  const bool warned = std::any_of(
      forged.warnings.begin(), forged.warnings.end(),
      [](const Warning& w) { return w.kind == "conditioning"; });
  CHECK(warned);
  // The factored evaluation keeps the realization accurate regardless.
  CHECK(forged.max_rel_error <= 1e-8);
}

TEST_CASE("forge rejects clouds past the pair capacity") {
  PointCloud cloud;
  cloud.points.resize(2, 2);
  cloud.points << 0, 0, 1, 0;
  cloud.labels = std::vector<int>{1, 2};
  AttackPlan plan = assign_target_distances(cloud);
  CHECK_THROWS_WITH_AS(forge_semimetric(plan), doctest::Contains("capacity"), RankError);
}

TEST_CASE("separation table summarizes within and between extremes") {
  PointCloud cloud = labeled_cloud({0, 1, 10, 11}, {1, 1, 2, 2});
  const DistanceFn euclid = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm();
  };
  SeparationTable table = separation_report(euclid, cloud, *cloud.labels);
  REQUIRE(table.within.size() == 2);
  CHECK(table.within[0].pairs == 1);
  CHECK(table.within[0].max_distance == 1.0);
  REQUIRE(table.between.size() == 1);
  CHECK(table.between[0].min_distance == 9.0);
  CHECK(table.max_within == 1.0);
  CHECK(table.min_between == 9.0);
  CHECK(table.ratio == doctest::Approx(9.0).epsilon(1e-15));

  // One class only: no between pairs, hence no ratio.
  SeparationTable lone = separation_report(euclid, cloud, {1, 1, 1, 1});
  CHECK(lone.between.empty());
  CHECK_FALSE(lone.min_between.has_value());
  CHECK_FALSE(lone.ratio.has_value());
}

TEST_CASE("kmeans attack with designed centers recovers the labels") {
  PointCloud cloud = demo_cloud(10, 2, 3, 53);
  AttackPlan plan = assign_target_distances(cloud);
  AttackReport report = attack_kmeans(plan, KMeansAttackOptions{});

  CHECK(report.algorithm == "kmeans");
  CHECK(report.success);
  CHECK(report.recovered == report.desired);
  REQUIRE(report.bijection.has_value());
  for (const auto& [from, to] : *report.bijection) CHECK(from == to);
  CHECK(report.realized_max_rel_error <= 1e-8);
  CHECK(report.iterations == defaults::kmeans_iterations);

  // The collapse/repel design leaves a huge separation margin.
  REQUIRE(report.separation.ratio.has_value());
  const double designed_ratio = report.delta_large / report.delta_small;
  CHECK(*report.separation.ratio ==
        doctest::Approx(designed_ratio).epsilon(1e-6));
}

TEST_CASE("kmeans attack with undesigned centers is recorded, not asserted") {
  // Negative control: the perturbed centers never joined the design, so the
  // forged distances around them are unconstrained and recovery may fail.
  PointCloud cloud = demo_cloud(10, 2, 3, 54);
  AttackPlan plan = assign_target_distances(cloud);
  KMeansAttackOptions options;
  options.centers = CentersMode::ZNeighbor;
  options.seed = 54;
  AttackReport report = attack_kmeans(plan, options);
  CHECK(report.desired.size() == 10);
  CHECK(report.recovered.size() == 10);
}

TEST_CASE("dbscan attack recovers the partition up to relabeling") {
  PointCloud cloud = demo_cloud(10, 2, 3, 55);
  AttackPlan plan = assign_target_distances(cloud);
  AttackReport report = attack_dbscan(plan);

  CHECK(report.algorithm == "dbscan");
  CHECK(report.success);
  REQUIRE(report.bijection.has_value());
  CHECK(report.min_pts == 2);
  CHECK(report.dbscan_eps > report.delta_small);
  CHECK(report.dbscan_eps < report.delta_large);
  CHECK(report.realized_max_rel_error <= 1e-8);
}

TEST_CASE("dbscan attack promotes designed singletons from noise to clusters") {
  PointCloud cloud = demo_cloud(6, 2, 2, 56);
  cloud.labels = std::vector<int>{1, 1, 2, 2, 2, 3};  // class 3 is a singleton
  AttackPlan plan = assign_target_distances(cloud);
  AttackReport report = attack_dbscan(plan);

  CHECK(report.success);
  // The singleton has no within-eps neighbor, so raw DBSCAN calls it noise.
  CHECK(report.recovered_raw[5] == kNoiseLabel);
  CHECK(report.recovered[5] > 0);
  REQUIRE(report.bijection.has_value());
}

TEST_CASE("demo generators produce labeled clouds in range") {
  SplitMix64 gen(57);
  PointCloud cloud = random_cloud(12, 3, gen);
  CHECK(cloud.size() == 12);
  CHECK(cloud.dim() == 3);
  std::vector<int> labels = random_labels(12, 4, gen);
  for (int v : labels) {
    CHECK(v >= 1);
    CHECK(v <= 4);
  }
  CHECK_THROWS_AS(random_cloud(0, 3, gen), InputError);
  CHECK_THROWS_AS(random_labels(5, 0, gen), InputError);
}
