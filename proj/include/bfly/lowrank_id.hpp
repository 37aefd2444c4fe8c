/*
 Copyright 2026 The bfly Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

// Column-pivoted QR (Businger-Golub) and the interpolative decomposition
// built from it: K ~ K(:, J) Z with Z(:, J) = I.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Householder>

#include "bfly/error.hpp"

namespace bfly {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct PivotedQR {
  DenseMatrix<Scalar> q;        // m x r, orthonormal columns
  DenseMatrix<Scalar> r_left;   // r x r, upper triangular
  DenseMatrix<Scalar> r_right;  // r x (n - r)
  // Column j of M * Pi is column permutation[j] of M.
  std::vector<int> permutation;
  int rank = 0;
  // |R(r,r)| / |R(0,0)| for the first pivot not kept; zero when the
  // factorization ran to completion.
  double residual = 0.0;
};

// Truncates at the first r with |R(r,r)| <= tol |R(0,0)|, or at r = rmax.
template <typename Derived>
PivotedQR<typename Derived::Scalar> pivoted_qr(const Eigen::MatrixBase<Derived>& m, double tol,
                                               int rmax) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  DenseMatrix<Scalar> a = m;
  PivotedQR<Scalar> out;
  out.permutation.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) out.permutation[j] = static_cast<int>(j);

  const Eigen::Index kmax = std::min<Eigen::Index>({rows, cols, static_cast<Eigen::Index>(rmax)});
  DenseVector<Scalar> taus(std::max<Eigen::Index>(kmax, 0));
  DenseVector<Scalar> work(std::max<Eigen::Index>(cols, 1));
  Real lead = 0;
  Eigen::Index k = 0;
  for (;; ++k) {
    if (k >= std::min(rows, cols)) {
      out.residual = 0.0;
      break;
    }
    // Exact trailing norms each step; avoids the downdating pitfalls.
    Eigen::Index pivot = k;
    Real best = -1;
    for (Eigen::Index j = k; j < cols; ++j) {
      const Real norm = a.col(j).tail(rows - k).norm();
      if (norm > best) {
        best = norm;
        pivot = j;
      }
    }
    if (k == 0) lead = best;
    if (lead == Real(0) || best <= Real(tol) * lead) {
      out.residual = lead == Real(0) ? 0.0 : static_cast<double>(best / lead);
      break;
    }
    if (k == kmax) {
      out.residual = static_cast<double>(best / lead);
      break;
    }
    if (pivot != k) {
      a.col(k).swap(a.col(pivot));
      std::swap(out.permutation[k], out.permutation[pivot]);
    }
    Real beta;
    Scalar tau;
    a.col(k).tail(rows - k).makeHouseholderInPlace(tau, beta);
    taus[k] = tau;
    a(k, k) = beta;
    if (k + 1 < cols) {
      a.bottomRightCorner(rows - k, cols - k - 1)
          .applyHouseholderOnTheLeft(a.col(k).tail(rows - k - 1), tau,
                                      work.data());
    }
  }

  const Eigen::Index r = k;
  out.rank = static_cast<int>(r);
  out.r_left = a.topLeftCorner(r, r).template triangularView<Eigen::Upper>();
  out.r_right = a.topRightCorner(r, cols - r);
  out.q = DenseMatrix<Scalar>::Identity(rows, r);
  for (Eigen::Index j = r - 1; j >= 0; --j) {
    out.q.bottomRows(rows - j)
        .applyHouseholderOnTheLeft(a.col(j).tail(rows - j - 1), Eigen::numext::conj(taus[j]),
                                   work.data());
  }
  return out;
}

template <typename Scalar>
struct InterpolativeDecomposition {
  std::vector<int> column_indices;
  DenseMatrix<Scalar> interp_matrix;  // r x n

  int rank() const { return static_cast<int>(column_indices.size()); }
  Eigen::Index cols() const { return interp_matrix.cols(); }
};

// Solves R_L X = R_R by back substitution, zeroing rows whose pivot falls
// below eps |R(0,0)|.
template <typename Scalar>
DenseMatrix<Scalar> clamped_triangular_solve(const DenseMatrix<Scalar>& r_left,
                                             const DenseMatrix<Scalar>& rhs) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const Eigen::Index r = r_left.rows();
  DenseMatrix<Scalar> x = DenseMatrix<Scalar>::Zero(r, rhs.cols());
  if (r == 0) return x;
  const Real floor = std::numeric_limits<Real>::epsilon() * std::abs(r_left(0, 0));
  for (Eigen::Index i = r - 1; i >= 0; --i) {
    if (std::abs(r_left(i, i)) <= floor) continue;
    DenseVector<Scalar> row = rhs.row(i).transpose();
    if (i + 1 < r) {
      row.noalias() -= (r_left.row(i).tail(r - i - 1) * x.bottomRows(r - i - 1)).transpose();
    }
    x.row(i) = row.transpose() / r_left(i, i);
  }
  return x;
}

template <typename Derived>
InterpolativeDecomposition<typename Derived::Scalar> build_id(const Eigen::MatrixBase<Derived>& m,
                                                              double tol, int rmax) {
  using Scalar = typename Derived::Scalar;
  const auto qr = pivoted_qr(m, tol, rmax);
  const Eigen::Index n = m.cols();
  const int r = qr.rank;

  InterpolativeDecomposition<Scalar> id;
  id.column_indices.assign(qr.permutation.begin(), qr.permutation.begin() + r);
  id.interp_matrix = DenseMatrix<Scalar>::Zero(r, n);
  const DenseMatrix<Scalar> t = clamped_triangular_solve<Scalar>(qr.r_left, qr.r_right);
  for (int j = 0; j < r; ++j) id.interp_matrix(j, qr.permutation[j]) = Scalar(1);
  for (Eigen::Index j = r; j < n; ++j) id.interp_matrix.col(qr.permutation[j]) = t.col(j - r);
  return id;
}

// g_hat = Z g: strengths of r point sources at the selected columns.
template <typename Scalar, typename Derived>
DenseVector<Scalar> equivalent_sources(const InterpolativeDecomposition<Scalar>& id,
                                       const Eigen::MatrixBase<Derived>& g) {
  if (g.size() != id.cols()) {
    throw Error(Errc::dimension_mismatch, "source vector length " + std::to_string(g.size()) +
                                              " does not match " + std::to_string(id.cols()) +
                                              " ID columns");
  }
  return id.interp_matrix * g;
}

// K(:, J) for a dense matrix K.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> skeleton_columns(const InterpolativeDecomposition<Scalar>& id,
                                     const Eigen::MatrixBase<Derived>& m) {
  DenseMatrix<Scalar> out(m.rows(), id.rank());
  for (int t = 0; t < id.rank(); ++t) out.col(t) = m.col(id.column_indices[t]);
  return out;
}

}  // namespace bfly
