#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metricforge/embedding.hpp"

namespace metricforge {

using DistanceFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// The product-sum seed for a point pair:
//   0.9 * (eps / sqrt(h)) * (prod_i x_i) * (sum_j y_j)
// evaluated exactly in this operation order. Asymmetric in (x, y) by design;
// collides when a coordinate of x is zero (inherent to the formula).
double seed_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double eps, int h);

// Deterministic noise f(x, y) in R^(h-ell) with ||f||_2 <= eps/6 and,
// outside quantization collisions, f(x, y) != f(y, x) for x != y.
class NoiseFunction {
 public:
  enum class Scheme {
    Hashed,      // order-sensitive byte hash of the coordinates (default)
    ProductSum,  // seed_value above, then the same stream generator
  };

  // Empty noise (zero dimensions); placeholder until a factory replaces it.
  NoiseFunction() = default;

  // Table-backed noise: stores the padding offsets of a padding-only neighbor
  // assignment keyed by exact coordinate bits; zero for any other pair.
  // InputError when a neighbor perturbs data coordinates or exceeds eps/6.
  static NoiseFunction fixed_table(const NeighborAssignment& assignment,
                                   const PointCloud& cloud);

  // Streamed noise: s * u with u in [0,1]^(h-ell) drawn from a splitmix
  // stream keyed on the pair, s = 0.9 * eps / (6 * sqrt(h)). A nonzero salt
  // selects an alternative stream family; salt 0 is the canonical one.
  static NoiseFunction seeded(double eps, int h, int ell, Scheme scheme = Scheme::Hashed,
                              std::uint64_t salt = 0);

  Eigen::VectorXd operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  double eps() const { return eps_; }
  int noise_dim() const { return h_ - ell_; }
  int lifted_dim() const { return h_; }
  int data_dim() const { return ell_; }
  bool is_seeded() const { return seeded_; }
  Scheme scheme() const { return scheme_; }
  std::uint64_t salt() const { return salt_; }

 private:
  bool seeded_ = false;
  Scheme scheme_ = Scheme::Hashed;
  double eps_ = 0.0;
  double scale_ = 0.0;
  int h_ = 0, ell_ = 0;
  std::uint64_t salt_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> table_;
};

// Padding-only neighbors for the table-backed construction: z_{i,j} =
// lift(y_i) + (0, w_{i,j}) with ||w||_2 <= 0.9 * eps / 6. The difference
// matrix is full rank only when the data differences span R^ell; rank is
// checked downstream. RankError when C(m,2) < ell.
NeighborAssignment sample_padding_neighbors(const PointCloud& cloud, double eps,
                                            SplitMix64& gen);

// d~(x, y) = || (x, f(x,y)) - (y, f(y,x)) ||_Q. On the designed point pairs
// this realizes the designated distances (unscaled form) or sqrt(alpha)
// times them (scaled form).
struct EpsilonSemimetric {
  QuadraticNorm form;   // the active form (scaled or unscaled)
  NoiseFunction noise;
  double eps = 0.0;
  double alpha = 1.0;   // 1 for the unscaled form
  bool scaled = false;

  int data_dim() const { return noise.data_dim(); }
  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  DistanceFn fn() const;
};

double semimetric_eval(const EpsilonSemimetric& sm, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y);

// Axiom audit of an arbitrary distance function over a sample.
struct AxiomOptions {
  double eps = 0.0;                 // additive triangle slack to classify against
  int exhaustive_limit = 25;        // exhaustive triples up to this sample size
  long long random_triples = 10000; // sampled triples above the limit
  std::uint64_t seed = 1;
  double identity_tol = 0.0;
  double symmetry_tol = 0.0;
  // Triangle defects below triangle_rel_tol * max distance count as zero
  // (keeps exact metrics classified as metrics despite last-ulp rounding).
  double triangle_rel_tol = 1e-12;
};

enum class MetricClass {
  Metric,
  EpsilonSemimetric,
  Semimetric,
  Quasimetric,
  Premetric,
  None,
};

const char* metric_class_name(MetricClass c);

struct AxiomReport {
  int sample_size = 0;
  double identity_defect = 0.0;
  long long positivity_violations = 0;
  std::optional<std::array<int, 2>> positivity_witness;
  double asymmetry_defect = 0.0;
  std::optional<std::array<int, 2>> asymmetry_witness;
  double triangle_defect = 0.0;  // max over checked triples, clamped at 0
  std::optional<std::array<int, 3>> triangle_witness;  // d(x,y) vs d(x,z)+d(z,y)
  long long triples_checked = 0;
  bool exhaustive = false;
  double eps = 0.0;
  double max_distance = 0.0;  // over the checked pairs; scales the triangle floor
  MetricClass classification = MetricClass::None;
};

AxiomReport check_axioms(const DistanceFn& distance, const std::vector<Eigen::VectorXd>& sample,
                         const AxiomOptions& options);

}  // namespace metricforge
