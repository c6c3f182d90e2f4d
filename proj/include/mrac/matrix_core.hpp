// Copyright 2026 The mrac-scale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file matrix_core.hpp
/// Small dense linear-algebra toolkit shared by the rest of the library.
///
/// Matrices are plain Eigen dynamic matrices. All functions are pure and
/// safe to call concurrently.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "mrac/error.hpp"

namespace mrac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Exact equality including shape; unlike Eigen's operator== it never
/// asserts on mismatched sizes.
template <typename A, typename B>
bool same(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Symmetric within 1e-12 relative to the largest entry (absolute floor of 1).
inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

/// True iff m is symmetric and its Cholesky factorization has strictly
/// positive pivots. Never throws.
inline bool is_spd(const Matrix& m) {
  if (m.rows() == 0 || !is_symmetric(m)) return false;
  const Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) return false;
  const Matrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return false;
  }
  return true;
}

/// All eigenvalue real parts below -margin.
inline bool is_hurwitz(const Matrix& a, double margin = 1e-9) {
  if (a.rows() != a.cols() || a.rows() == 0 || !a.allFinite()) return false;
  const Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) return false;
  return (es.eigenvalues().real().array() < -margin).all();
}

/// Largest eigenvalue of a symmetric matrix.
inline double max_eigenvalue_symmetric(const Matrix& m) {
  if (!is_symmetric(m)) {
    throw Error(ErrorCode::kNotSymmetric, "matrix " + shape_of(m) + " is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Least-squares solution of a * X = b for full-column-rank a.
inline Matrix solve_least_squares(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::kDimMismatch,
                "least squares: a is " + shape_of(a) + ", b is " + shape_of(b));
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < a.cols()) {
    throw Error(ErrorCode::kRankDeficient, "least squares: a " + shape_of(a) + " has rank " +
                                               std::to_string(qr.rank()));
  }
  return qr.solve(b);
}

/// Solves Q + A_r^T P + P A_r = 0 for symmetric positive definite P.
///
/// The equation is vectorized with Kronecker products,
///   (I (x) A_r^T + A_r^T (x) I) vec(P) = -vec(Q),
/// and solved with a fully pivoted LU followed by one refinement step. Meant
/// for the small state dimensions (n <= 20) used in adaptive control design.
inline Matrix solve_lyapunov(const Matrix& a_r, const Matrix& q) {
  const Eigen::Index n = a_r.rows();
  if (a_r.cols() != n || q.rows() != n || q.cols() != n || n == 0) {
    throw Error(ErrorCode::kDimMismatch,
                "lyapunov: A_r is " + shape_of(a_r) + ", Q is " + shape_of(q));
  }
  const Eigen::Index nn = n * n;
  const Matrix at = a_r.transpose();
  Matrix kron = Matrix::Zero(nn, nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    // I (x) A^T: block-diagonal copies of A^T
    kron.block(j * n, j * n, n, n) += at;
    // A^T (x) I: block (j, k) is A^T(j, k) * I
    for (Eigen::Index k = 0; k < n; ++k) {
      kron.block(j * n, k * n, n, n).diagonal().array() += at(j, k);
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), nn);
  const Eigen::FullPivLU<Matrix> lu(kron);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kLyapunovSingular,
                "Kronecker system is singular (A_r has eigenvalues summing to zero)");
  }
  Vector vec_p = lu.solve(rhs);
  vec_p += lu.solve(rhs - kron * vec_p);

  Matrix p = Eigen::Map<const Matrix>(vec_p.data(), n, n);
  p = 0.5 * (p + p.transpose()).eval();
  if (!p.allFinite()) {
    throw Error(ErrorCode::kLyapunovSingular, "solution is not finite");
  }
  if (!is_spd(p)) {
    throw Error(ErrorCode::kLyapunovSingular,
                "solution is not positive definite (A_r is not Hurwitz)");
  }
  return p;
}

/// Rank of [B, AB, ..., A^(n-1)B].
inline Eigen::Index controllability_rank(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  Matrix ctrb(n, n * b.cols());
  Matrix block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * b.cols(), b.cols()) = block;
    block = a * block;
  }
  return Eigen::ColPivHouseholderQR<Matrix>(ctrb).rank();
}

}  // namespace mrac
