#pragma once

#include <Eigen/Core>
#include <vector>

#include "metricforge/errors.hpp"
#include "metricforge/linalg.hpp"

namespace metricforge {

// How many points admit a full pairwise-distance design in `dim` dimensions:
// the largest m with m*(m-1)/2 <= dim.
int check_capacity(int dim);

// Orthogonal projector onto the orthogonal complement of span(cols) in the
// full space. An empty span yields the identity. Throws DimensionError on
// inconsistent column lengths.
Eigen::MatrixXd null_space_matrix(const Eigen::MatrixXd& span_cols,
                                  double rel_tol = defaults::rank_rel_tol);

// A linearly independent family x_1..x_n in R^d with positive target
// lengths delta_1..delta_n. `create` validates shape, positivity, and
// numerical rank (RankError when n > d or the columns are dependent).
struct IndependentSystem {
  Eigen::MatrixXd vectors;  // d x n, column k is x_k
  Eigen::VectorXd targets;  // n, delta_k > 0

  int dim() const { return static_cast<int>(vectors.rows()); }
  int count() const { return static_cast<int>(vectors.cols()); }

  static IndependentSystem create(Eigen::MatrixXd vectors, Eigen::VectorXd targets,
                                  double rank_rel_tol = defaults::rank_rel_tol);
};

// Symmetric PSD matrix A inducing q(x) = x^T A x and ||x|| = sqrt(q(x)).
//
// When a square root L with L^T L = A is available (the interpolating
// construction produces one), q is evaluated as ||L x||^2. The two readings
// agree up to rounding, but the factored one sums squares and therefore
// keeps tiny designated distances accurate even when the eigenvalue spread
// of A is large; x^T A x would cancel catastrophically there.
struct QuadraticNorm {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd factor;  // optional; 0 x 0 when absent

  int dim() const { return static_cast<int>(matrix.rows()); }
  double quad(const Eigen::VectorXd& x) const {
    return factor.size() ? (factor * x).squaredNorm() : x.dot(matrix * x);
  }
  double norm(const Eigen::VectorXd& x) const;
};

// One summand of the interpolating form: A_k = (delta_k^2 / (x_k^T B_k x_k)) * B_k
// where B_k projects onto the part of x_k orthogonal to the other system
// vectors, taken inside the system span. A_k vanishes on every x_j (j != k)
// and evaluates to delta_k^2 on x_k.
Eigen::MatrixXd component_form(const IndependentSystem& system, int k,
                               double rel_tol = defaults::rank_rel_tol);

// Sum of the component forms: the unique such form supported on the system
// span with q(x_k) = delta_k^2 for every k. Directions outside the span are
// null (an honest seminorm when n < d); see complete_to_definite.
QuadraticNorm interpolating_form(const IndependentSystem& system,
                                 double rel_tol = defaults::rank_rel_tol);

// A + c * P with P the projector onto the complement of the system span.
// Leaves q unchanged on the span and makes the form positive definite.
QuadraticNorm complete_to_definite(const QuadraticNorm& form,
                                   const IndependentSystem& system, double c);

// Largest eigenvalue of a symmetric matrix (Jacobi; deterministic across runs).
double largest_eigenvalue(const Eigen::MatrixXd& a);

// Spectral summary used for conditioning warnings. lambda_min_pos is the
// smallest eigenvalue above rel_floor * lambda_max (0 when none).
struct FormDiagnostics {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double lambda_min_pos = 0.0;

  double spread() const {
    return lambda_min_pos > 0.0 ? lambda_max / lambda_min_pos : 0.0;
  }
};

FormDiagnostics diagnose_form(const QuadraticNorm& form, double rel_floor = 1e-14);

}  // namespace metricforge
