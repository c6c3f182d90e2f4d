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

/// \file governor.hpp
/// Command governor building blocks. The governor is a first-order linear
/// filter on the tracking error whose output is mapped back into command
/// space and added to the desired command.

#include "mrac/matrix_core.hpp"

namespace mrac {

/// G = B (B^T B)^-1 B^T, the orthogonal projector onto range(B).
inline Matrix governor_projection(const Matrix& b) {
  if (Eigen::ColPivHouseholderQR<Matrix>(b).rank() < b.cols()) {
    throw Error(ErrorCode::kRankDeficient, "B " + shape_of(b) + " lacks full column rank");
  }
  const Matrix btb = b.transpose() * b;
  return b * btb.ldlt().solve(b.transpose());
}

/// xi' = -lambda xi + lambda e
inline Vector governor_derivative(const Vector& xi, const Vector& e, double lambda_gov) {
  if (xi.size() != e.size()) {
    throw Error(ErrorCode::kDimMismatch, "governor state and tracking error sizes differ");
  }
  return lambda_gov * (e - xi);
}

/// g = lambda xi + (A_r - lambda I) e
inline Vector governor_output(const Vector& xi, const Vector& e, const Matrix& a_r,
                              double lambda_gov) {
  if (xi.size() != e.size() || a_r.rows() != e.size() || a_r.cols() != e.size()) {
    throw Error(ErrorCode::kDimMismatch, "governor output: inconsistent shapes");
  }
  return lambda_gov * xi + a_r * e - lambda_gov * e;
}

/// Reciprocal condition number of K_c below which it is treated as singular.
inline constexpr double kKcConditionTolerance = 1e-10;

inline bool kc_invertible(const Matrix& k_c) {
  if (k_c.rows() != k_c.cols() || k_c.rows() == 0 || !k_c.allFinite()) return false;
  const Eigen::JacobiSVD<Matrix> svd(k_c);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 && s(s.size() - 1) / s(0) >= kKcConditionTolerance;
}

/// Linear map  g -> K_c^-1 (B^T B)^-1 B^T g  as an m x n matrix.
inline Matrix governor_command_map(const Matrix& k_c, const Matrix& b) {
  if (!kc_invertible(k_c)) {
    throw Error(ErrorCode::kKcSingular, "K_c " + shape_of(k_c) + " is singular");
  }
  if (k_c.rows() != b.cols()) {
    throw Error(ErrorCode::kDimMismatch, "K_c " + shape_of(k_c) + " vs B " + shape_of(b));
  }
  if (Eigen::ColPivHouseholderQR<Matrix>(b).rank() < b.cols()) {
    throw Error(ErrorCode::kRankDeficient, "B " + shape_of(b) + " lacks full column rank");
  }
  const Matrix pinv = (b.transpose() * b).ldlt().solve(b.transpose());
  return k_c.partialPivLu().solve(pinv);
}

/// c_g = K_c^-1 (B^T B)^-1 B^T g
inline Vector governor_command(const Vector& g, const Matrix& k_c, const Matrix& b) {
  if (g.size() != b.rows()) {
    throw Error(ErrorCode::kDimMismatch, "governor output size differs from B rows");
  }
  return governor_command_map(k_c, b) * g;
}

}  // namespace mrac
