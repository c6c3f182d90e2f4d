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

/// \file closed_loop_sim.hpp
/// Closed-loop derivative field for every architecture and a fixed-step RK4
/// integrator that records full trajectories.
///
/// The plant is simulated in its primal form
///   x' = A x + B Lambda u + B Delta(x),   u = -K_x x + K_c c - W_hat^T omega,
/// so the compact error-form  x' = A_r x + B_r c - B Lambda (W_hat - W)^T omega
/// stays an independently checkable identity (see closed_loop_form_rate).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrac/adaptive_laws.hpp"
#include "mrac/governor.hpp"
#include "mrac/scenario.hpp"
#include "mrac/system_models.hpp"

namespace mrac {

struct ClosedLoopState {
  Vector x;
  Vector x_r;
  Matrix w_hat;
  std::optional<Matrix> w_hat_f;      // frequency-limited law
  std::optional<Vector> xi;           // command governor
  std::optional<Vector> x_r_desired;  // command governor: reference driven by c_D alone
};

/// Algebraic signals computed from a state at a given time.
struct Signals {
  Vector c_desired;
  Vector c_governor;  // empty unless the command governor is active
  Vector c_total;
  Vector omega;
  Vector e;
  Vector u_ad;
  Vector u;
};

inline ClosedLoopState initial_state(const CompiledScenario& scn) {
  const ScenarioConfig& cfg = scn.config;
  ClosedLoopState s;
  s.x = cfg.initial.x0;
  s.x_r = cfg.reference.x_r0;
  s.w_hat = cfg.initial.w_hat0;
  if (needs_filter_state(cfg.law)) {
    s.w_hat_f = cfg.initial.w_hat_f0 ? *cfg.initial.w_hat_f0 : cfg.initial.w_hat0;
  }
  if (std::holds_alternative<CommandGovernor>(cfg.architecture)) {
    s.xi = Vector::Zero(cfg.n());
    s.x_r_desired = cfg.reference.x_r0;
  }
  return s;
}

inline Signals evaluate_signals(const CompiledScenario& scn, const ClosedLoopState& s, double t) {
  const ScenarioConfig& cfg = scn.config;
  Signals sig;
  sig.c_desired = evaluate_command(cfg.command, cfg.l(), t);
  sig.e = s.x - s.x_r;
  if (const auto* gov = std::get_if<CommandGovernor>(&cfg.architecture)) {
    if (!s.xi) throw Error(ErrorCode::kDimMismatch, "governor state missing");
    const Vector g = governor_output(*s.xi, sig.e, cfg.reference.a_r, gov->lambda_gov);
    sig.c_governor = scn.governor_map * g;
    sig.c_total = sig.c_desired + sig.c_governor;
  } else {
    sig.c_total = sig.c_desired;
  }
  sig.omega = build_regressor(s.x, sig.c_total, cfg.uncertainty.kappa);
  sig.u_ad = adaptive_input(s.w_hat, sig.omega);
  sig.u = -scn.gains.k_x * s.x + scn.gains.k_c * sig.c_total - sig.u_ad;
  return sig;
}

/// d/dt of the full closed-loop state.
inline ClosedLoopState closed_loop_derivative(const CompiledScenario& scn,
                                              const ClosedLoopState& s, double t) {
  const ScenarioConfig& cfg = scn.config;
  const Signals sig = evaluate_signals(scn, s, t);

  ClosedLoopState d;
  const Vector delta = uncertainty_delta(cfg.uncertainty, cfg.plant, sig.omega);
  d.x = cfg.plant.a * s.x + cfg.plant.b * (cfg.plant.lambda_true * sig.u + delta);

  d.x_r = cfg.reference.a_r * s.x_r + cfg.reference.b_r * sig.c_total;
  if (const auto* clrm = std::get_if<ClosedLoopReference>(&cfg.architecture)) {
    d.x_r += clrm->l_feedback * sig.e;
  }

  AdaptiveState adaptive{s.w_hat, s.w_hat_f};
  AdaptiveState dw = weight_derivative(cfg.law, adaptive, sig.omega, sig.e, scn.p, cfg.plant.b);
  d.w_hat = std::move(dw.w_hat);
  d.w_hat_f = std::move(dw.w_hat_f);

  if (const auto* gov = std::get_if<CommandGovernor>(&cfg.architecture)) {
    d.xi = governor_derivative(*s.xi, sig.e, gov->lambda_gov);
    d.x_r_desired = cfg.reference.a_r * *s.x_r_desired + cfg.reference.b_r * sig.c_desired;
  }
  return d;
}

/// Plant rate from the compact form  A_r x + B_r c - B Lambda (W_hat - W)^T omega,
/// using the truth-side ideal weights.
inline Vector closed_loop_form_rate(const CompiledScenario& scn, const ClosedLoopState& s,
                                    double t) {
  const ScenarioConfig& cfg = scn.config;
  const Signals sig = evaluate_signals(scn, s, t);
  const Matrix w_tilde = s.w_hat - scn.ideal.w;
  return cfg.reference.a_r * s.x + cfg.reference.b_r * sig.c_total -
         cfg.plant.b * (cfg.plant.lambda_true * (w_tilde.transpose() * sig.omega));
}

/// Error rate from  e' = A_r e - B Lambda (W_hat - W)^T omega  (plain and
/// governor architectures; the governor leaves the error dynamics unchanged).
inline Vector error_form_rate(const CompiledScenario& scn, const ClosedLoopState& s, double t) {
  const ScenarioConfig& cfg = scn.config;
  const Signals sig = evaluate_signals(scn, s, t);
  const Matrix w_tilde = s.w_hat - scn.ideal.w;
  return cfg.reference.a_r * sig.e -
         cfg.plant.b * (cfg.plant.lambda_true * (w_tilde.transpose() * sig.omega));
}

namespace detail {

/// s + h * d, field by field.
inline ClosedLoopState axpy(const ClosedLoopState& s, double h, const ClosedLoopState& d) {
  ClosedLoopState out;
  out.x = s.x + h * d.x;
  out.x_r = s.x_r + h * d.x_r;
  out.w_hat = s.w_hat + h * d.w_hat;
  if (s.w_hat_f) out.w_hat_f = *s.w_hat_f + h * *d.w_hat_f;
  if (s.xi) out.xi = *s.xi + h * *d.xi;
  if (s.x_r_desired) out.x_r_desired = *s.x_r_desired + h * *d.x_r_desired;
  return out;
}

template <typename M>
inline M rk4_combine(const M& y, double dt, const M& k1, const M& k2, const M& k3, const M& k4) {
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline ClosedLoopState rk4_step(const CompiledScenario& scn, const ClosedLoopState& s, double t,
                                double dt) {
  const double half = 0.5 * dt;
  const ClosedLoopState k1 = closed_loop_derivative(scn, s, t);
  const ClosedLoopState k2 = closed_loop_derivative(scn, axpy(s, half, k1), t + half);
  const ClosedLoopState k3 = closed_loop_derivative(scn, axpy(s, half, k2), t + half);
  const ClosedLoopState k4 = closed_loop_derivative(scn, axpy(s, dt, k3), t + dt);

  ClosedLoopState out;
  out.x = rk4_combine<Vector>(s.x, dt, k1.x, k2.x, k3.x, k4.x);
  out.x_r = rk4_combine<Vector>(s.x_r, dt, k1.x_r, k2.x_r, k3.x_r, k4.x_r);
  out.w_hat = rk4_combine<Matrix>(s.w_hat, dt, k1.w_hat, k2.w_hat, k3.w_hat, k4.w_hat);
  if (s.w_hat_f) {
    out.w_hat_f =
        rk4_combine<Matrix>(*s.w_hat_f, dt, *k1.w_hat_f, *k2.w_hat_f, *k3.w_hat_f, *k4.w_hat_f);
  }
  if (s.xi) out.xi = rk4_combine<Vector>(*s.xi, dt, *k1.xi, *k2.xi, *k3.xi, *k4.xi);
  if (s.x_r_desired) {
    out.x_r_desired = rk4_combine<Vector>(*s.x_r_desired, dt, *k1.x_r_desired, *k2.x_r_desired,
                                          *k3.x_r_desired, *k4.x_r_desired);
  }
  return out;
}

inline double state_magnitude(const ClosedLoopState& s) {
  double v = std::max({max_abs(s.x), max_abs(s.x_r), max_abs(s.w_hat)});
  if (s.w_hat_f) v = std::max(v, max_abs(*s.w_hat_f));
  if (s.xi) v = std::max(v, max_abs(*s.xi));
  if (s.x_r_desired) v = std::max(v, max_abs(*s.x_r_desired));
  return v;
}

}  // namespace detail

struct Trajectory {
  std::vector<double> times;
  std::vector<ClosedLoopState> states;
  std::vector<Vector> u;
  std::vector<Vector> u_ad;
  std::vector<Vector> e;
  std::vector<Vector> c_total;
  std::vector<Vector> c_governor;  // empty vectors unless the governor is active
  std::vector<Vector> omega;

  std::size_t size() const { return times.size(); }
  bool has_governor() const { return !states.empty() && states.front().xi.has_value(); }
};

/// Integrates the scenario with classical RK4 on the grid t_k = k dt and
/// records every grid point, including t = 0.
///
/// Throws Error(kDiverged) once any state entry leaves the divergence bound.
inline Trajectory integrate(const CompiledScenario& scn) {
  const double dt = scn.config.sim.dt;
  const double bound = scn.config.sim.divergence_bound;
  const auto count = static_cast<std::size_t>(scn.steps) + 1;

  Trajectory traj;
  traj.times.reserve(count);
  traj.states.reserve(count);
  for (auto* v : {&traj.u, &traj.u_ad, &traj.e, &traj.c_total, &traj.c_governor, &traj.omega}) {
    v->reserve(count);
  }

  ClosedLoopState s = initial_state(scn);
  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double mag = detail::state_magnitude(s);
    if (!(mag <= bound)) {
      throw Error(ErrorCode::kDiverged, "state magnitude " + detail::num(mag) +
                                            " exceeded bound " + detail::num(bound) + " at t=" +
                                            detail::num(t));
    }
    Signals sig = evaluate_signals(scn, s, t);
    traj.times.push_back(t);
    traj.u.push_back(std::move(sig.u));
    traj.u_ad.push_back(std::move(sig.u_ad));
    traj.e.push_back(std::move(sig.e));
    traj.c_total.push_back(std::move(sig.c_total));
    traj.c_governor.push_back(std::move(sig.c_governor));
    traj.omega.push_back(std::move(sig.omega));
    if (k == scn.steps) {
      traj.states.push_back(std::move(s));
      break;
    }
    ClosedLoopState next = detail::rk4_step(scn, s, t, dt);
    traj.states.push_back(std::move(s));
    s = std::move(next);
  }
  return traj;
}

}  // namespace mrac
