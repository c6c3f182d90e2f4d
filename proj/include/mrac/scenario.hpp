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

/// \file scenario.hpp
/// Full description of a closed-loop experiment and its validation.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mrac/adaptive_laws.hpp"
#include "mrac/governor.hpp"
#include "mrac/matrix_core.hpp"
#include "mrac/system_models.hpp"

namespace mrac {

/// Reference model x_r' = A_r x_r + B_r c.
struct PlainReference {};

/// Reference model with error feedback x_r' = A_r x_r + B_r c + L e.
struct ClosedLoopReference {
  Matrix l_feedback;
};

/// Standard law plus a governor adding c_g to the desired command.
/// Requires m == l and an invertible K_c.
struct CommandGovernor {
  double lambda_gov = 0.0;
};

using ArchitectureConfig = std::variant<PlainReference, ClosedLoopReference, CommandGovernor>;

inline bool operator==(const PlainReference&, const PlainReference&) { return true; }
inline bool operator==(const ClosedLoopReference& l, const ClosedLoopReference& r) {
  return same(l.l_feedback, r.l_feedback);
}
inline bool operator==(const CommandGovernor& l, const CommandGovernor& r) {
  return l.lambda_gov == r.lambda_gov;
}

inline std::string_view architecture_name(const ArchitectureConfig& arch) {
  struct Name {
    std::string_view operator()(const PlainReference&) const { return "plain"; }
    std::string_view operator()(const ClosedLoopReference&) const { return "clrm"; }
    std::string_view operator()(const CommandGovernor&) const { return "governor"; }
  };
  return std::visit(Name{}, arch);
}

struct SimSettings {
  double dt = 1e-3;
  double duration = 0.0;
  double divergence_bound = 1e9;

  bool operator==(const SimSettings&) const = default;
};

struct InitialConditions {
  Vector x0;
  Matrix w_hat0;
  std::optional<Matrix> w_hat_f0;  // defaults to w_hat0 for the frequency-limited law

  friend bool operator==(const InitialConditions& l, const InitialConditions& r) {
    if (l.w_hat_f0.has_value() != r.w_hat_f0.has_value()) return false;
    return same(l.x0, r.x0) && same(l.w_hat0, r.w_hat0) &&
           (!l.w_hat_f0 || same(*l.w_hat_f0, *r.w_hat_f0));
  }
};

struct ScenarioConfig {
  std::string name;
  PlantModel plant;
  UncertaintyModel uncertainty;
  ReferenceModel reference;
  Matrix q;
  std::optional<NominalGains> gains_override;
  AdaptiveLawConfig law;
  ArchitectureConfig architecture;
  CommandProfile command;
  SimSettings sim;
  InitialConditions initial;

  Eigen::Index n() const { return plant.n(); }
  Eigen::Index m() const { return plant.m(); }
  Eigen::Index l() const { return reference.l(); }
  Eigen::Index regressor_dim() const { return n() + l() + 1; }

  bool operator==(const ScenarioConfig&) const = default;
};

struct Violation {
  std::string module;
  std::string message;
  bool warning = false;
};

inline bool has_errors(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    if (!v.warning) return true;
  }
  return false;
}

inline std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << (v.warning ? "warning" : "error") << " [" << v.module << "] " << v.message << '\n';
  }
  return os.str();
}

namespace detail {

class ViolationSink {
 public:
  void error(std::string_view module, std::string message) {
    out_.push_back({std::string(module), std::move(message), false});
  }
  void warn(std::string_view module, std::string message) {
    out_.push_back({std::string(module), std::move(message), true});
  }
  /// Records an error unless `m` has the expected shape; returns whether it does.
  bool shape(std::string_view module, std::string_view what, const Matrix& m,
             Eigen::Index rows, Eigen::Index cols) {
    if (m.rows() == rows && m.cols() == cols && rows > 0 && cols > 0) {
      if (!m.allFinite()) {
        error("matrix-core", std::string(what) + " has non-finite entries");
        return false;
      }
      return true;
    }
    error(module, std::string(what) + " is " + shape_of(m) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    return false;
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline double max_real_eigenvalue(const Matrix& a) {
  const Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace detail

/// Runs every invariant check and reports all violations at once.
inline std::vector<Violation> validate_scenario(const ScenarioConfig& s) {
  detail::ViolationSink sink;
  const Eigen::Index n = s.plant.a.rows();
  const Eigen::Index m = s.plant.b.cols();
  const Eigen::Index l = s.reference.b_r.cols();

  // --- plant
  const bool a_ok = sink.shape("system-models", "plant.A", s.plant.a, n, n);
  const bool b_ok = sink.shape("system-models", "plant.B", s.plant.b, n, m);
  const bool lam_ok = sink.shape("system-models", "plant.Lambda", s.plant.lambda_true, m, m);
  if (lam_ok) {
    const Matrix& lam = s.plant.lambda_true;
    if (s.plant.allow_full_lambda) {
      if (!Eigen::FullPivLU<Matrix>(lam).isInvertible()) {
        sink.error("system-models", "plant.Lambda is singular");
      }
    } else {
      const bool diagonal = max_abs(Matrix(lam.triangularView<Eigen::StrictlyUpper>())) == 0.0 &&
                            max_abs(Matrix(lam.triangularView<Eigen::StrictlyLower>())) == 0.0;
      if (!diagonal || !(lam.diagonal().array() > 0.0).all()) {
        sink.error("system-models",
                   "plant.Lambda must be diagonal with strictly positive entries "
                   "(set allow_full_lambda to accept any invertible matrix)");
      }
    }
  }
  if (a_ok && b_ok && controllability_rank(s.plant.a, s.plant.b) < n) {
    sink.error("system-models", "(A, B) is not controllable (controllability matrix rank " +
                                    std::to_string(controllability_rank(s.plant.a, s.plant.b)) +
                                    " < " + std::to_string(n) + ")");
  }

  // --- reference model
  const bool ar_ok = sink.shape("system-models", "reference.A_r", s.reference.a_r, n, n);
  const bool br_ok = sink.shape("system-models", "reference.B_r", s.reference.b_r, n, l);
  if (ar_ok && !is_hurwitz(s.reference.a_r)) {
    sink.error("system-models", "reference.A_r fails the Hurwitz check (max eigenvalue real part " +
                                    detail::num(detail::max_real_eigenvalue(s.reference.a_r)) +
                                    ", required < -1e-09)");
  }
  sink.shape("system-models", "reference.x_r0", s.reference.x_r0, n, 1);

  // --- uncertainty
  sink.shape("system-models", "uncertainty.W_x", s.uncertainty.w_x, n, m);
  sink.shape("system-models", "uncertainty.W_c", s.uncertainty.w_c, l, m);
  sink.shape("system-models", "uncertainty.w_kappa", s.uncertainty.w_kappa, m, 1);
  if (!std::isfinite(s.uncertainty.kappa)) {
    sink.error("matrix-core", "uncertainty.kappa is not finite");
  }

  // --- matching conditions
  std::optional<NominalGains> gains;
  if (a_ok && b_ok && ar_ok && br_ok) {
    if (s.gains_override) {
      const NominalGains& g = *s.gains_override;
      const bool kx = sink.shape("system-models", "gains.K_x", g.k_x, m, n);
      const bool kc = sink.shape("system-models", "gains.K_c", g.k_c, m, l);
      if (kx && kc) {
        const double rx = ((s.plant.a - s.plant.b * g.k_x) - s.reference.a_r).norm();
        const double rc = (s.plant.b * g.k_c - s.reference.b_r).norm();
        if (rx > matching_tolerance(s.reference.a_r)) {
          sink.error("system-models", "matching condition A - B K_x = A_r violated, residual " +
                                          detail::num(rx));
        } else if (rc > matching_tolerance(s.reference.b_r)) {
          sink.error("system-models",
                     "matching condition B K_c = B_r violated, residual " + detail::num(rc));
        } else {
          gains = g;
        }
      }
    } else {
      try {
        gains = synthesize_nominal_gains(s.plant, s.reference);
      } catch (const Error& e) {
        sink.error("system-models", e.what());
      }
    }
  }

  // --- command
  if (s.command.duration != s.sim.duration) {
    sink.error("system-models", "command duration differs from sim.duration");
  }
  for (const auto& p : s.command.primitives) {
    if (primitive_dim(p) != l) {
      sink.error("system-models", "command primitive has dimension " +
                                      std::to_string(primitive_dim(p)) + ", expected l=" +
                                      std::to_string(l));
    }
    if (const auto* r = std::get_if<RampCommand>(&p); r && !(r->t1 > r->t0)) {
      sink.error("system-models", "ramp command needs t1 > t0");
    }
    if (const auto* sn = std::get_if<SineCommand>(&p);
        sn && !(std::isfinite(sn->frequency) && std::isfinite(sn->phase))) {
      sink.error("system-models", "sine command frequency/phase must be finite");
    }
  }
  if (s.command.has_steps()) {
    sink.warn("system-models",
              "command contains steps; the adaptive laws assume a uniformly continuous "
              "bounded command");
  }

  // --- Lyapunov design matrix
  if (sink.shape("matrix-core", "gains.Q", s.q, n, n) && !is_spd(s.q)) {
    sink.error("matrix-core", "gains.Q fails is_spd (must be symmetric positive definite)");
  }

  // --- adaptive law
  const Eigen::Index r = n + l + 1;
  if (sink.shape("adaptive-laws", "law.gamma", learning_rate(s.law), r, r) &&
      !is_spd(learning_rate(s.law))) {
    sink.error("adaptive-laws", "law.gamma fails is_spd");
  }
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, SigmaMod>) {
          if (!(law.sigma > 0.0 && std::isfinite(law.sigma))) {
            sink.error("adaptive-laws", "law.sigma must be > 0");
          }
        } else if constexpr (std::is_same_v<T, EMod>) {
          if (!(law.sigma_e > 0.0 && std::isfinite(law.sigma_e))) {
            sink.error("adaptive-laws", "law.sigma_e must be > 0");
          }
        } else if constexpr (std::is_same_v<T, FreqLimited>) {
          if (!(law.sigma > 0.0 && std::isfinite(law.sigma))) {
            sink.error("adaptive-laws", "law.sigma must be > 0");
          }
          if (!(law.gamma_f_max > 0.0 && std::isfinite(law.gamma_f_max))) {
            sink.error("adaptive-laws", "law.gamma_f_max must be > 0");
          }
          if (sink.shape("adaptive-laws", "law.gamma_f", law.gamma_f, r, r)) {
            if (!is_spd(law.gamma_f)) {
              sink.error("adaptive-laws", "law.gamma_f fails is_spd");
            } else if (const double top = max_eigenvalue_symmetric(law.gamma_f);
                       top > law.gamma_f_max) {
              sink.error("adaptive-laws", "largest eigenvalue of law.gamma_f (" +
                                              detail::num(top) + ") exceeds gamma_f_max (" +
                                              detail::num(law.gamma_f_max) + ")");
            }
          }
        }
      },
      s.law);
  sink.shape("adaptive-laws", "initial.W_hat0", s.initial.w_hat0, r, m);
  if (s.initial.w_hat_f0) {
    if (!needs_filter_state(s.law)) {
      sink.error("adaptive-laws", "initial.W_hat_f0 is only valid for the freq_limited law");
    } else {
      sink.shape("adaptive-laws", "initial.W_hat_f0", *s.initial.w_hat_f0, r, m);
    }
  }

  // --- architecture
  std::visit(
      [&](const auto& arch) {
        using T = std::decay_t<decltype(arch)>;
        if constexpr (std::is_same_v<T, ClosedLoopReference>) {
          if (sink.shape("closed-loop-sim", "reference.L", arch.l_feedback, n, n) &&
              !is_spd(arch.l_feedback)) {
            sink.error("closed-loop-sim", "reference.L fails is_spd");
          }
        } else if constexpr (std::is_same_v<T, CommandGovernor>) {
          if (!(arch.lambda_gov > 0.0 && std::isfinite(arch.lambda_gov))) {
            sink.error("closed-loop-sim", "architecture.lambda must be > 0");
          }
          if (l != m) {
            sink.error("closed-loop-sim", "command governor requires l == m (l=" +
                                              std::to_string(l) + ", m=" + std::to_string(m) +
                                              ")");
          } else if (gains && !kc_invertible(gains->k_c)) {
            sink.error("closed-loop-sim", "command governor requires an invertible K_c");
          }
          if (!std::holds_alternative<StandardMrac>(s.law)) {
            sink.error("closed-loop-sim", "command governor architecture uses the standard law");
          }
        }
      },
      s.architecture);
  if (std::holds_alternative<ClosedLoopReference>(s.architecture) &&
      !std::holds_alternative<StandardMrac>(s.law)) {
    sink.error("closed-loop-sim", "closed-loop reference architecture uses the standard law");
  }

  // --- simulation
  sink.shape("closed-loop-sim", "initial.x0", s.initial.x0, n, 1);
  if (!(s.sim.dt > 0.0 && std::isfinite(s.sim.dt))) {
    sink.error("closed-loop-sim", "sim.dt must be > 0");
  }
  if (!(s.sim.duration > 0.0 && std::isfinite(s.sim.duration))) {
    sink.error("closed-loop-sim", "sim.duration must be > 0");
  }
  if (s.sim.dt > 0.0 && s.sim.duration > 0.0) {
    const double steps = s.sim.duration / s.sim.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
      sink.error("closed-loop-sim", "sim.duration must be an integer multiple of sim.dt");
    }
  }
  if (!(s.sim.divergence_bound > 0.0)) {
    sink.error("closed-loop-sim", "sim.divergence_bound must be > 0");
  }
  return sink.take();
}

/// A validated scenario together with every quantity derived from it.
struct CompiledScenario {
  ScenarioConfig config;
  Matrix p;                   // Lyapunov solution for (A_r, Q)
  NominalGains gains;
  IdealWeights ideal;         // truth side, used only by checks
  Matrix governor_map;        // K_c^-1 (B^T B)^-1 B^T, governor only
  long long steps = 0;
};

inline CompiledScenario compile(const ScenarioConfig& config) {
  const auto violations = validate_scenario(config);
  if (has_errors(violations)) {
    throw Error(ErrorCode::kInvalidScenario, "\n" + format_violations(violations));
  }
  CompiledScenario c;
  c.config = config;
  c.p = solve_lyapunov(config.reference.a_r, config.q);
  c.gains = config.gains_override ? *config.gains_override
                                  : synthesize_nominal_gains(config.plant, config.reference);
  c.ideal = compute_ideal_weights(config.plant, config.uncertainty, c.gains);
  if (std::holds_alternative<CommandGovernor>(config.architecture)) {
    c.governor_map = governor_command_map(c.gains.k_c, config.plant.b);
  }
  c.steps = std::llround(config.sim.duration / config.sim.dt);
  return c;
}

}  // namespace mrac
