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

/// \file adaptive_laws.hpp
/// Adaptive weight update laws written as pure derivative functions.
///
/// Every law shares the gradient term  Gamma omega e^T P B  and differs only
/// in the damping it adds:
///   standard      none
///   sigma         - sigma W_hat
///   e-mod         - sigma_e |e|_2 W_hat
///   freq-limited  - sigma (W_hat - W_f),  with  W_f' = Gamma_f (W_hat - W_f)
/// The closed-loop reference model and command governor architectures reuse
/// the standard law.

#include <optional>
#include <string_view>
#include <variant>

#include "mrac/matrix_core.hpp"

namespace mrac {

struct StandardMrac {
  Matrix gamma;
};

struct SigmaMod {
  Matrix gamma;
  double sigma = 0.0;
};

struct EMod {
  Matrix gamma;
  double sigma_e = 0.0;
};

struct FreqLimited {
  Matrix gamma;
  double sigma = 0.0;
  Matrix gamma_f;
  double gamma_f_max = 0.0;
};

using AdaptiveLawConfig = std::variant<StandardMrac, SigmaMod, EMod, FreqLimited>;

inline bool operator==(const StandardMrac& l, const StandardMrac& r) { return same(l.gamma, r.gamma); }
inline bool operator==(const SigmaMod& l, const SigmaMod& r) {
  return same(l.gamma, r.gamma) && l.sigma == r.sigma;
}
inline bool operator==(const EMod& l, const EMod& r) {
  return same(l.gamma, r.gamma) && l.sigma_e == r.sigma_e;
}
inline bool operator==(const FreqLimited& l, const FreqLimited& r) {
  return same(l.gamma, r.gamma) && l.sigma == r.sigma && same(l.gamma_f, r.gamma_f) &&
         l.gamma_f_max == r.gamma_f_max;
}

inline std::string_view law_name(const AdaptiveLawConfig& law) {
  struct Name {
    std::string_view operator()(const StandardMrac&) const { return "standard"; }
    std::string_view operator()(const SigmaMod&) const { return "sigma"; }
    std::string_view operator()(const EMod&) const { return "emod"; }
    std::string_view operator()(const FreqLimited&) const { return "freq_limited"; }
  };
  return std::visit(Name{}, law);
}

inline const Matrix& learning_rate(const AdaptiveLawConfig& law) {
  return std::visit([](const auto& l) -> const Matrix& { return l.gamma; }, law);
}

inline Matrix& learning_rate(AdaptiveLawConfig& law) {
  return std::visit([](auto& l) -> Matrix& { return l.gamma; }, law);
}

inline bool needs_filter_state(const AdaptiveLawConfig& law) {
  return std::holds_alternative<FreqLimited>(law);
}

struct AdaptiveState {
  Matrix w_hat;
  std::optional<Matrix> w_hat_f;  // frequency-limited law only
};

/// u_ad = W_hat^T omega
inline Vector adaptive_input(const Matrix& w_hat, const Vector& omega) {
  if (w_hat.rows() != omega.size()) {
    throw Error(ErrorCode::kDimMismatch, "W_hat is " + shape_of(w_hat) +
                                             ", regressor has length " +
                                             std::to_string(omega.size()));
  }
  return w_hat.transpose() * omega;
}

/// Time derivative of the adaptive state under `law`.
inline AdaptiveState weight_derivative(const AdaptiveLawConfig& law, const AdaptiveState& state,
                                       const Vector& omega, const Vector& e, const Matrix& p,
                                       const Matrix& b) {
  const Matrix& gamma = learning_rate(law);
  if (gamma.rows() != omega.size() || gamma.cols() != omega.size() ||
      state.w_hat.rows() != omega.size() || state.w_hat.cols() != b.cols() ||
      p.rows() != e.size() || p.cols() != e.size() || b.rows() != e.size()) {
    throw Error(ErrorCode::kDimMismatch,
                "weight law: Gamma " + shape_of(gamma) + ", W_hat " + shape_of(state.w_hat) +
                    ", P " + shape_of(p) + ", B " + shape_of(b) + ", |omega|=" +
                    std::to_string(omega.size()) + ", |e|=" + std::to_string(e.size()));
  }

  // Gamma omega (e^T P B); the row vector is formed first so every product is
  // a matrix-vector product.
  const Eigen::RowVectorXd ept_pb = e.transpose() * p * b;
  const Vector gamma_omega = gamma * omega;
  const Matrix gradient = gamma_omega * ept_pb;

  AdaptiveState d;
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, StandardMrac>) {
          d.w_hat = gradient;
        } else if constexpr (std::is_same_v<T, SigmaMod>) {
          d.w_hat = gradient - l.sigma * state.w_hat;
        } else if constexpr (std::is_same_v<T, EMod>) {
          d.w_hat = gradient - (l.sigma_e * e.norm()) * state.w_hat;
        } else {
          if (!state.w_hat_f) {
            throw Error(ErrorCode::kMissingFilterState,
                        "frequency-limited law requires the filtered weight state");
          }
          if (state.w_hat_f->rows() != state.w_hat.rows() ||
              state.w_hat_f->cols() != state.w_hat.cols() ||
              l.gamma_f.rows() != state.w_hat.rows() || l.gamma_f.cols() != state.w_hat.rows()) {
            throw Error(ErrorCode::kDimMismatch, "filtered weights " +
                                                     shape_of(*state.w_hat_f) + ", Gamma_f " +
                                                     shape_of(l.gamma_f));
          }
          const Matrix gap = state.w_hat - *state.w_hat_f;
          d.w_hat = gradient - l.sigma * gap;
          d.w_hat_f = l.gamma_f * gap;
        }
      },
      law);
  return d;
}

}  // namespace mrac
