#include "metricforge/quadform.hpp"

#include <cmath>

#include "metricforge/errors.hpp"

namespace metricforge {

int check_capacity(int dim) {
  if (dim < 1) throw InputError("check_capacity: dim must be >= 1");
  // Largest m with m*(m-1)/2 <= dim; start from the closed form and correct
  // for any floating-point slop at the boundary.
  int m = static_cast<int>((1.0 + std::sqrt(8.0 * static_cast<double>(dim) + 1.0)) / 2.0);
  while (static_cast<long long>(m) * (m - 1) / 2 > dim) --m;
  while (static_cast<long long>(m + 1) * m / 2 <= dim) ++m;
  return m;
}

Eigen::MatrixXd null_space_matrix(const Eigen::MatrixXd& span_cols, double rel_tol) {
  const int d = static_cast<int>(span_cols.rows());
  if (d == 0) throw DimensionError("null_space_matrix: zero-dimensional space");
  return Eigen::MatrixXd::Identity(d, d) - span_projector(span_cols, rel_tol);
}

IndependentSystem IndependentSystem::create(Eigen::MatrixXd vectors, Eigen::VectorXd targets,
                                            double rank_rel_tol) {
  const int d = static_cast<int>(vectors.rows());
  const int n = static_cast<int>(vectors.cols());
  if (n < 1) throw InputError("independent system: needs at least one vector");
  if (targets.size() != n) {
    throw DimensionError("independent system: one target length per vector required");
  }
  for (int k = 0; k < n; ++k) {
    if (!(targets[k] > 0.0)) {
      throw InputError("independent system: target lengths must be positive");
    }
  }
  if (!all_finite(vectors)) throw InputError("independent system: non-finite coordinates");
  if (n > d) {
    throw RankError("independent system: more vectors than dimensions (n > d)");
  }
  if (numerical_rank(vectors, rank_rel_tol) != n) {
    throw RankError("independent system: vectors are not linearly independent");
  }
  IndependentSystem s;
  s.vectors = std::move(vectors);
  s.targets = std::move(targets);
  return s;
}

double QuadraticNorm::norm(const Eigen::VectorXd& x) const {
  // Roundoff can push a PSD quadratic below zero on near-null directions.
  return std::sqrt(std::max(0.0, quad(x)));
}

namespace {

// Component of x_k orthogonal to all other system vectors (the direction the
// component projector selects inside the system span).
Eigen::VectorXd residual_direction(const IndependentSystem& system, int k) {
  const int n = system.count();
  Eigen::MatrixXd others(system.dim(), n - 1);
  int c = 0;
  for (int j = 0; j < n; ++j) {
    if (j != k) others.col(c++) = system.vectors.col(j);
  }
  const Eigen::MatrixXd q = mgs_basis(others);
  Eigen::VectorXd g = system.vectors.col(k);
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < q.cols(); ++i) g -= q.col(i).dot(g) * q.col(i);
  }
  return g;
}

}  // namespace

Eigen::MatrixXd component_form(const IndependentSystem& system, int k, double rel_tol) {
  if (k < 0 || k >= system.count()) throw InputError("component_form: index out of range");
  const Eigen::VectorXd xk = system.vectors.col(k);
  const Eigen::VectorXd g = residual_direction(system, k);
  const double denom = g.squaredNorm();  // equals x_k^T B_k x_k
  // Backstop consistent with the singular-value cutoff: a residual this small
  // means x_k is numerically inside the span of the others.
  const double floor = system.dim() * rel_tol * xk.norm();
  if (denom <= floor * floor) {
    throw RankError("component_form: vector lies in the span of the others");
  }
  const double delta = system.targets[k];
  // (delta^2 / denom) * (g g^T / denom): the projector B_k is g g^T / ||g||^2.
  const double scale = (delta * delta) / (denom * denom);
  return scale * (g * g.transpose());
}

QuadraticNorm interpolating_form(const IndependentSystem& system, double rel_tol) {
  // Dual-basis route: with M = [x_1 .. x_n] = U S V^T, the sum of the
  // component forms equals A = W^T diag(delta^2) W for W = M^+. The factor
  // L = diag(delta) W satisfies L^T L = A and L x_k = delta_k e_k, so
  // evaluating q through L keeps small targets accurate under large
  // eigenvalue spread where x^T A x would cancel away.
  const int d = system.dim();
  const int n = system.count();
  const Svd svd = one_sided_jacobi_svd(system.vectors);
  const double cutoff = std::max(d, n) * svd.singular_values[0] * rel_tol;
  for (int i = 0; i < n; ++i) {
    if (!(svd.singular_values[i] > cutoff)) {
      throw RankError("interpolating_form: vectors are numerically dependent");
    }
  }
  Eigen::MatrixXd l = system.targets.asDiagonal() * svd.right *
                      svd.singular_values.cwiseInverse().asDiagonal() * svd.left.transpose();
  Eigen::MatrixXd a = l.transpose() * l;
  a = ((a + a.transpose()) * 0.5).eval();  // kill asymmetric drift
  if (!all_finite(l) || !all_finite(a)) {
    throw NumericalError("interpolating-form", "non-finite entries in the form matrix");
  }
  QuadraticNorm q;
  q.matrix = std::move(a);
  q.factor = std::move(l);
  return q;
}

QuadraticNorm complete_to_definite(const QuadraticNorm& form, const IndependentSystem& system,
                                   double c) {
  if (form.dim() != system.dim()) {
    throw DimensionError("complete_to_definite: form and system dimensions differ");
  }
  if (!(c > 0.0)) throw InputError("complete_to_definite: c must be positive");
  const Eigen::MatrixXd p = null_space_matrix(system.vectors);
  QuadraticNorm out;
  out.matrix = form.matrix + c * p;
  if (form.factor.size()) {
    // P is itself a projector, so appending sqrt(c) * P to the factor adds
    // exactly c * P to factor^T factor.
    out.factor.resize(form.factor.rows() + p.rows(), form.dim());
    out.factor.topRows(form.factor.rows()) = form.factor;
    out.factor.bottomRows(p.rows()) = std::sqrt(c) * p;
  }
  return out;
}

double largest_eigenvalue(const Eigen::MatrixXd& a) {
  if (!is_symmetric(a, 1e-10)) throw InputError("largest_eigenvalue: matrix is not symmetric");
  if (!all_finite(a)) throw NumericalError("eigenvalues", "non-finite matrix entries");
  const SymmetricEigen eig = jacobi_eigen(a);
  return eig.values[eig.values.size() - 1];
}

FormDiagnostics diagnose_form(const QuadraticNorm& form, double rel_floor) {
  const SymmetricEigen eig = jacobi_eigen(form.matrix);
  FormDiagnostics d;
  const int n = static_cast<int>(eig.values.size());
  d.lambda_max = eig.values[n - 1];
  d.lambda_min = eig.values[0];
  d.lambda_min_pos = 0.0;
  const double floor = rel_floor * std::abs(d.lambda_max);
  for (int i = 0; i < n; ++i) {
    if (eig.values[i] > floor) {
      d.lambda_min_pos = eig.values[i];
      break;
    }
  }
  return d;
}

}  // namespace metricforge
