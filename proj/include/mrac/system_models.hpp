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

/// \file system_models.hpp
/// Plant, uncertainty, reference model and command descriptions, plus the
/// algebra that ties them together (nominal gains, regressor, ideal weights).

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "mrac/matrix_core.hpp"

namespace mrac {

/// Uncertain plant  x' = A x + B Lambda u + B Delta(x).
/// `lambda_true` is truth-side information used only by the simulator.
struct PlantModel {
  Matrix a;
  Matrix b;
  Matrix lambda_true;
  /// Accept any invertible Lambda instead of only diagonal positive ones.
  bool allow_full_lambda = false;

  Eigen::Index n() const { return a.rows(); }
  Eigen::Index m() const { return b.cols(); }

  friend bool operator==(const PlantModel& l, const PlantModel& r) {
    return same(l.a, r.a) && same(l.b, r.b) && same(l.lambda_true, r.lambda_true) &&
           l.allow_full_lambda == r.allow_full_lambda;
  }
};

/// Matched uncertainty  Delta = Lambda [W_x^T  W_c^T  w_kappa] omega.
struct UncertaintyModel {
  Matrix w_x;      // n x m
  Matrix w_c;      // l x m
  Matrix w_kappa;  // m x 1
  double kappa = 1.0;

  /// Stacked (n+l+1) x m weight block [W_x; W_c; w_kappa^T].
  Matrix stacked() const {
    Matrix s(w_x.rows() + w_c.rows() + 1, w_x.cols());
    s << w_x, w_c, w_kappa.transpose();
    return s;
  }

  friend bool operator==(const UncertaintyModel& l, const UncertaintyModel& r) {
    return same(l.w_x, r.w_x) && same(l.w_c, r.w_c) && same(l.w_kappa, r.w_kappa) &&
           l.kappa == r.kappa;
  }
};

struct ReferenceModel {
  Matrix a_r;  // n x n, Hurwitz
  Matrix b_r;  // n x l
  Vector x_r0;

  Eigen::Index l() const { return b_r.cols(); }

  friend bool operator==(const ReferenceModel& l, const ReferenceModel& r) {
    return same(l.a_r, r.a_r) && same(l.b_r, r.b_r) && same(l.x_r0, r.x_r0);
  }
};

struct NominalGains {
  Matrix k_x;  // m x n
  Matrix k_c;  // m x l

  friend bool operator==(const NominalGains& l, const NominalGains& r) {
    return same(l.k_x, r.k_x) && same(l.k_c, r.k_c);
  }
};

struct IdealWeights {
  Matrix w;            // (n+l+1) x m
  Matrix lambda_star;  // I - Lambda^-1
};

// ---------------------------------------------------------------------------
// Command profiles

struct StepCommand {
  double t_on = 0.0;
  Vector level;
  friend bool operator==(const StepCommand& l, const StepCommand& r) {
    return l.t_on == r.t_on && same(l.level, r.level);
  }
};

/// Holds `from` before t0, moves linearly to `to` over [t0, t1], holds after.
struct RampCommand {
  double t0 = 0.0;
  double t1 = 1.0;
  Vector from;
  Vector to;
  friend bool operator==(const RampCommand& l, const RampCommand& r) {
    return l.t0 == r.t0 && l.t1 == r.t1 && same(l.from, r.from) && same(l.to, r.to);
  }
};

/// amplitude * sin(2 pi frequency t + phase); frequency in Hz.
struct SineCommand {
  Vector amplitude;
  double frequency = 0.0;
  double phase = 0.0;
  friend bool operator==(const SineCommand& l, const SineCommand& r) {
    return same(l.amplitude, r.amplitude) && l.frequency == r.frequency && l.phase == r.phase;
  }
};

using CommandPrimitive = std::variant<StepCommand, RampCommand, SineCommand>;

struct CommandProfile {
  std::vector<CommandPrimitive> primitives;
  double duration = 0.0;

  /// Steps break the uniform-continuity assumption of the adaptive laws'
  /// convergence results; they are accepted but reported.
  bool has_steps() const {
    for (const auto& p : primitives) {
      if (std::holds_alternative<StepCommand>(p)) return true;
    }
    return false;
  }

  bool operator==(const CommandProfile&) const = default;
};

inline Eigen::Index primitive_dim(const CommandPrimitive& p) {
  return std::visit(
      [](const auto& c) -> Eigen::Index {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, StepCommand>) {
          return c.level.size();
        } else if constexpr (std::is_same_v<T, RampCommand>) {
          return c.from.size() == c.to.size() ? c.from.size() : -1;
        } else {
          return c.amplitude.size();
        }
      },
      p);
}

inline Vector evaluate_primitive(const CommandPrimitive& p, double t) {
  return std::visit(
      [t](const auto& c) -> Vector {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, StepCommand>) {
          return t >= c.t_on ? Vector(c.level) : Vector(Vector::Zero(c.level.size()));
        } else if constexpr (std::is_same_v<T, RampCommand>) {
          if (t <= c.t0) return c.from;
          if (t >= c.t1) return c.to;
          const double s = (t - c.t0) / (c.t1 - c.t0);
          return c.from + s * (c.to - c.from);
        } else {
          return c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * t + c.phase);
        }
      },
      p);
}

/// Sum of all primitives at time t, for a command of dimension l.
inline Vector evaluate_command(const CommandProfile& profile, Eigen::Index l, double t) {
  // RK4 stages land on k*dt grid points that may overshoot by an ulp
  const double slack = 1e-12 * std::max(1.0, profile.duration);
  if (!(t >= -slack && t <= profile.duration + slack)) {
    throw Error(ErrorCode::kTimeOutOfRange, "t=" + std::to_string(t) + " outside [0, " +
                                                std::to_string(profile.duration) + "]");
  }
  Vector c = Vector::Zero(l);
  for (const auto& p : profile.primitives) {
    if (primitive_dim(p) != l) {
      throw Error(ErrorCode::kDimMismatch,
                  "command primitive has dimension " + std::to_string(primitive_dim(p)) +
                      ", expected " + std::to_string(l));
    }
    c += evaluate_primitive(p, t);
  }
  return c;
}

/// Multiplies every amplitude-like field by alpha; timing is untouched.
inline CommandProfile scale_command(const CommandProfile& profile, double alpha) {
  CommandProfile out = profile;
  for (auto& p : out.primitives) {
    std::visit(
        [alpha](auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, StepCommand>) {
            c.level *= alpha;
          } else if constexpr (std::is_same_v<T, RampCommand>) {
            c.from *= alpha;
            c.to *= alpha;
          } else {
            c.amplitude *= alpha;
          }
        },
        p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algebra

/// omega = [x; c; kappa]
inline Vector build_regressor(const Vector& x, const Vector& c, double kappa) {
  Vector omega(x.size() + c.size() + 1);
  omega << x, c, kappa;
  return omega;
}

/// Delta = Lambda * [W_x^T W_c^T w_kappa] * omega
inline Vector uncertainty_delta(const UncertaintyModel& unc, const PlantModel& plant,
                                const Vector& omega) {
  const Matrix stacked = unc.stacked();
  if (stacked.rows() != omega.size() || stacked.cols() != plant.lambda_true.rows()) {
    throw Error(ErrorCode::kDimMismatch, "uncertainty weights " + shape_of(stacked) +
                                             " vs regressor of length " +
                                             std::to_string(omega.size()));
  }
  return plant.lambda_true * (stacked.transpose() * omega);
}

inline double matching_tolerance(const Matrix& target) { return 1e-9 * (1.0 + target.norm()); }

/// Least-squares K_x, K_c from B K_x = A - A_r and B K_c = B_r; rejects the
/// pair when the matching conditions cannot be met.
inline NominalGains synthesize_nominal_gains(const PlantModel& plant, const ReferenceModel& ref) {
  if (ref.a_r.rows() != plant.n() || ref.a_r.cols() != plant.n() || ref.b_r.rows() != plant.n()) {
    throw Error(ErrorCode::kDimMismatch,
                "reference model " + shape_of(ref.a_r) + "/" + shape_of(ref.b_r) +
                    " does not match plant with n=" + std::to_string(plant.n()));
  }
  NominalGains g;
  g.k_x = solve_least_squares(plant.b, plant.a - ref.a_r);
  g.k_c = solve_least_squares(plant.b, ref.b_r);

  const double rx = ((plant.a - plant.b * g.k_x) - ref.a_r).norm();
  if (rx > matching_tolerance(ref.a_r)) {
    throw Error(ErrorCode::kMatchingConditionViolated,
                "A - B K_x != A_r, residual " + std::to_string(rx));
  }
  const double rc = (plant.b * g.k_c - ref.b_r).norm();
  if (rc > matching_tolerance(ref.b_r)) {
    throw Error(ErrorCode::kMatchingConditionViolated,
                "B K_c != B_r, residual " + std::to_string(rc));
  }
  return g;
}

/// Aggregate ideal weights W with W^T = [W_x^T - L* K_x, W_c^T + L* K_c, w_kappa],
/// where L* = I - Lambda^-1.
inline IdealWeights compute_ideal_weights(const PlantModel& plant, const UncertaintyModel& unc,
                                          const NominalGains& gains) {
  const Eigen::Index m = plant.m();
  const Eigen::FullPivLU<Matrix> lu(plant.lambda_true);
  if (plant.lambda_true.rows() != m || plant.lambda_true.cols() != m || !lu.isInvertible()) {
    throw Error(ErrorCode::kSingularLambda, "Lambda " + shape_of(plant.lambda_true) +
                                                " is not an invertible m x m matrix");
  }
  IdealWeights out;
  out.lambda_star = Matrix::Identity(m, m) - lu.inverse();
  const Eigen::Index n = unc.w_x.rows();
  const Eigen::Index l = unc.w_c.rows();
  out.w.resize(n + l + 1, m);
  out.w.topRows(n) = unc.w_x - (out.lambda_star * gains.k_x).transpose();
  out.w.middleRows(n, l) = unc.w_c + (out.lambda_star * gains.k_c).transpose();
  out.w.bottomRows(1) = unc.w_kappa.transpose();
  return out;
}

}  // namespace mrac
