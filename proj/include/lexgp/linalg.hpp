#pragma once

// Dense helpers shared by the dual and recovery paths. Numerical rank is
// computed here by Gaussian elimination; SVD-based kernels and minimum-norm
// solves delegate to Eigen.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace lexgp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Numerical rank by row reduction with partial pivoting. A pivot counts as
/// zero when its magnitude is at most `tol` times the largest absolute entry
/// of the input. Empty and all-zero matrices have rank 0.
inline Index rank(const MatrixXd& m, double tol = 1e-9) {
  if (m.size() == 0) return 0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  const double threshold = tol * scale;

  MatrixXd a = m;
  Index row = 0;
  for (Index col = 0; col < a.cols() && row < a.rows(); ++col) {
    Index pivot = row;
    double best = std::abs(a(row, col));
    for (Index r = row + 1; r < a.rows(); ++r) {
      if (std::abs(a(r, col)) > best) {
        best = std::abs(a(r, col));
        pivot = r;
      }
    }
    if (best <= threshold) continue;
    a.row(row).swap(a.row(pivot));
    for (Index r = row + 1; r < a.rows(); ++r) {
      const double f = a(r, col) / a(row, col);
      if (f != 0.0) a.row(r) -= f * a.row(row);
    }
    ++row;
  }
  return row;
}

namespace detail {

/// Orthonormal basis of ker(m), given its numerical rank. Columns of the
/// result span the kernel; the result has m.cols() - r columns.
inline MatrixXd kernel_basis(const MatrixXd& m, Index r) {
  const Index n = m.cols();
  if (r >= n) return MatrixXd(n, 0);
  if (m.rows() == 0 || r == 0) return MatrixXd::Identity(n, n).rightCols(n - r);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - r);
}

/// Minimum-norm least-squares solution of m x = b truncated to the leading
/// `r` singular values.
inline VectorXd min_norm_solve(const MatrixXd& m, const VectorXd& b, Index r) {
  const Index n = m.cols();
  VectorXd x = VectorXd::Zero(n);
  if (m.rows() == 0 || r == 0) return x;
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd utb = svd.matrixU().leftCols(r).transpose() * b;
  const VectorXd scaled = utb.cwiseQuotient(svd.singularValues().head(r));
  x = svd.matrixV().leftCols(r) * scaled;
  return x;
}

/// Lawson-Hanson non-negative least squares: min ||m x - b|| subject to x >= 0.
inline VectorXd nnls(const MatrixXd& m, const VectorXd& b, double tol = 1e-12) {
  const Index n = m.cols();
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  auto solve_passive = [&](VectorXd& s) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    MatrixXd sub(m.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Index>(k)) = m.col(idx[k]);
    const VectorXd sol = sub.completeOrthogonalDecomposition().solve(b);
    s.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sol(static_cast<Index>(k));
  };

  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff() * std::max(1.0, b.cwiseAbs().maxCoeff()));
  for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
    VectorXd grad = m.transpose() * (b - m * x);
    Index best = -1;
    double best_val = tol * scale;
    for (Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * static_cast<int>(n) + 10; ++inner) {
      VectorXd s;
      solve_passive(s);
      bool all_positive = true;
      for (Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) all_positive = false;
      if (all_positive) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          const double denom = x(j) - s(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
        }
      }
      x += alpha * (s - x);
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace detail
}  // namespace lexgp
