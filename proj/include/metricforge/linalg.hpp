#pragma once

#include <Eigen/Core>

namespace metricforge {

namespace defaults {
// Relative singular-value cutoff for numerical rank: sigma counts as zero
// below max(rows, cols) * sigma_max * rank_rel_tol.
inline constexpr double rank_rel_tol = 1e-12;
}  // namespace defaults

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, matching `values`
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Fixed sweep order
// and a deterministic final sort make the output bit-stable for identical
// inputs, which the reporting layer relies on. Off-diagonal mass is driven
// below ~1e-15 * ||A||_F; eigenvalues come out far tighter than the 1e-10
// relative contract the callers assume.
SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, int max_sweeps = 64);

struct Svd {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd left;             // d x n; columns for sigma > 0 are orthonormal
  Eigen::MatrixXd right;            // n x n orthonormal
};

// One-sided (Hestenes) Jacobi SVD. Works on the columns directly, so small
// singular values are not squared away through a Gram matrix and the
// 1e-12 relative rank cutoff is actually resolvable. Requires rows >= cols;
// callers transpose when they only need singular values.
Svd one_sided_jacobi_svd(Eigen::MatrixXd a, int max_sweeps = 60);

// Numerical rank of an arbitrary matrix under the relative cutoff above.
int numerical_rank(const Eigen::MatrixXd& a, double rel_tol = defaults::rank_rel_tol);

// Orthonormal basis of the column span via modified Gram-Schmidt with one
// reorthogonalization pass. Columns whose residual falls below
// drop_tol * ||column|| are treated as dependent and skipped.
Eigen::MatrixXd mgs_basis(const Eigen::MatrixXd& cols, double drop_tol = 1e-12);

// Orthogonal projector onto the column span (SVD-based, rank-aware).
Eigen::MatrixXd span_projector(const Eigen::MatrixXd& cols,
                               double rel_tol = defaults::rank_rel_tol);

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = 1e-12);

bool all_finite(const Eigen::MatrixXd& a);

}  // namespace metricforge
