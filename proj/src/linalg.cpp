#include "metricforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "metricforge/errors.hpp"

namespace metricforge {

namespace {

// Rotation angle for both Jacobi variants, computed the numerically stable
// way (smaller root of t^2 + 2t/zeta - 1 = 0).
double stable_tangent(double zeta) {
  const double s = zeta >= 0.0 ? 1.0 : -1.0;
  return s / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
}

}  // namespace

SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, int max_sweeps) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw DimensionError("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double frob = a.norm();
  const double stop = frob > 0.0 ? 1e-15 * frob : 0.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Skip rotations that cannot change the matrix at working precision.
        if (std::abs(apq) <= 1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)))) {
          continue;
        }
        const double zeta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = stable_tangent(zeta);
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) < a(j, j); });

  SymmetricEigen result;
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    result.values[i] = a(order[i], order[i]);
    result.vectors.col(i) = v.col(order[i]);
  }
  return result;
}

Svd one_sided_jacobi_svd(Eigen::MatrixXd a, int max_sweeps) {
  const int rows = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (rows < n) throw DimensionError("one_sided_jacobi_svd: requires rows >= cols");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  bool rotated = true;
  for (int sweep = 0; sweep < max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = a.col(p).squaredNorm();
        const double aqq = a.col(q).squaredNorm();
        const double apq = a.col(p).dot(a.col(q));
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq)) continue;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = stable_tangent(zeta);
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int i = 0; i < rows; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
        rotated = true;
      }
    }
  }

  Eigen::VectorXd sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = a.col(i).norm();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return sigma[i] > sigma[j]; });

  Svd result;
  result.singular_values.resize(n);
  result.left.resize(rows, n);
  result.right.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const int k = order[i];
    result.singular_values[i] = sigma[k];
    result.right.col(i) = v.col(k);
    if (sigma[k] > 0.0) {
      result.left.col(i) = a.col(k) / sigma[k];
    } else {
      result.left.col(i).setZero();
    }
  }
  return result;
}

int numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  const Eigen::MatrixXd work = a.rows() >= a.cols() ? a : Eigen::MatrixXd(a.transpose());
  const Svd svd = one_sided_jacobi_svd(work);
  const double sigma_max = svd.singular_values[0];
  if (sigma_max == 0.0) return 0;
  const double cutoff =
      static_cast<double>(std::max(a.rows(), a.cols())) * sigma_max * rel_tol;
  int rank = 0;
  for (int i = 0; i < svd.singular_values.size(); ++i) {
    if (svd.singular_values[i] > cutoff) ++rank;
  }
  return rank;
}

Eigen::MatrixXd mgs_basis(const Eigen::MatrixXd& cols, double drop_tol) {
  const int d = static_cast<int>(cols.rows());
  Eigen::MatrixXd q(d, cols.cols());
  int r = 0;
  for (int j = 0; j < cols.cols(); ++j) {
    Eigen::VectorXd w = cols.col(j);
    const double original = w.norm();
    // Two projection passes; the second mops up the cancellation error of
    // the first, which matters once the columns are badly conditioned.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < r; ++i) w -= q.col(i).dot(w) * q.col(i);
    }
    const double residual = w.norm();
    if (original == 0.0 || residual <= drop_tol * original) continue;
    q.col(r++) = w / residual;
  }
  return q.leftCols(r);
}

Eigen::MatrixXd span_projector(const Eigen::MatrixXd& cols, double rel_tol) {
  const int d = static_cast<int>(cols.rows());
  if (cols.cols() == 0) return Eigen::MatrixXd::Zero(d, d);
  const Svd svd = one_sided_jacobi_svd(cols);
  const double sigma_max = svd.singular_values[0];
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
  if (sigma_max == 0.0) return p;
  const double cutoff =
      static_cast<double>(std::max(cols.rows(), cols.cols())) * sigma_max * rel_tol;
  for (int i = 0; i < svd.singular_values.size(); ++i) {
    if (svd.singular_values[i] > cutoff) {
      p.noalias() += svd.left.col(i) * svd.left.col(i).transpose();
    }
  }
  return p;
}

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool all_finite(const Eigen::MatrixXd& a) { return a.allFinite(); }

}  // namespace metricforge
