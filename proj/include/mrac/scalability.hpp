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

/// \file scalability.hpp
/// Command/learning-rate scaling transformation and the nominal-vs-scaled
/// comparison harness.
///
/// Scaling rule for a factor alpha != 0:
///   command c -> alpha c,  x0 -> alpha x0,  x_r0 -> alpha x_r0,  kappa -> alpha kappa,
///   Gamma -> Gamma / alpha^2,  sigma_e -> sigma_e / alpha (e-mod, alpha > 0 only).
/// Every other gain (Q, sigma, Gamma_f, L, lambda) and the initial weights are
/// left as they are. Under this rule the closed loop in the variables
/// (x / alpha, x_r / alpha, W_hat) is identical to the nominal one, so the
/// scaled run reproduces alpha times the nominal states with the same weights.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mrac/closed_loop_sim.hpp"
#include "mrac/scenario.hpp"

namespace mrac {

inline constexpr double kDefaultScalabilityTolerance = 1e-9;

struct ScalingOptions {
  /// Exponent p in Gamma -> Gamma / |alpha|^p. Anything other than 2 breaks
  /// the invariance; it exists so tests can demonstrate that the harness
  /// detects a wrong rule.
  double gamma_power = 2.0;
};

inline void check_alpha(const ScenarioConfig& nominal, double alpha) {
  if (!std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidScenario, "alpha must be finite");
  }
  if (alpha == 0.0) {
    throw Error(ErrorCode::kAlphaZero, "scaling factor alpha must be nonzero");
  }
  if (std::holds_alternative<EMod>(nominal.law) && alpha < 0.0) {
    throw Error(ErrorCode::kEmodNegativeAlpha,
                "e-modification is only scale invariant for alpha > 0: sigma_e/alpha * |e| "
                "flips sign when alpha < 0");
  }
}

inline ScenarioConfig scale_scenario(const ScenarioConfig& nominal, double alpha,
                                     const ScalingOptions& options = {}) {
  check_alpha(nominal, alpha);
  if (alpha == 1.0 && options.gamma_power == 2.0) return nominal;

  ScenarioConfig s = nominal;
  const double gamma_div = options.gamma_power == 2.0
                               ? alpha * alpha
                               : std::pow(std::abs(alpha), options.gamma_power);
  std::visit(
      [&](auto& law) {
        using T = std::decay_t<decltype(law)>;
        law.gamma = law.gamma / gamma_div;
        if constexpr (std::is_same_v<T, EMod>) {
          law.sigma_e = law.sigma_e / alpha;
        }
      },
      s.law);
  s.command = scale_command(nominal.command, alpha);
  s.initial.x0 = alpha * nominal.initial.x0;
  s.reference.x_r0 = alpha * nominal.reference.x_r0;
  s.uncertainty.kappa = alpha * nominal.uncertainty.kappa;
  return s;
}

/// Relative deviations of a scaled run from alpha times a nominal run.
struct Deviation {
  double state = 0.0;   // x
  double weight = 0.0;  // W_hat (and W_f)
  double input = 0.0;   // u
};

namespace detail {

/// sup_k max|scaled_k - alpha nominal_k| / (1 + sup_k max|alpha nominal_k|)
template <typename Get>
double scaled_deviation(std::size_t count, double alpha, Get get) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [nom, sc] = get(k);
    const Matrix expected = alpha * nom;
    num = std::max(num, max_abs(sc - expected));
    den = std::max(den, max_abs(expected));
  }
  return num / (1.0 + den);
}

}  // namespace detail

inline Deviation compare_trajectories(const Trajectory& nominal, const Trajectory& scaled,
                                      double alpha) {
  if (nominal.size() != scaled.size() || nominal.times != scaled.times) {
    throw Error(ErrorCode::kGridMismatch, "trajectories do not share a time grid");
  }
  const std::size_t count = nominal.size();
  Deviation d;
  d.state = detail::scaled_deviation(count, alpha, [&](std::size_t k) {
    return std::pair<const Matrix, const Matrix>(nominal.states[k].x, scaled.states[k].x);
  });
  d.input = detail::scaled_deviation(count, alpha, [&](std::size_t k) {
    return std::pair<const Matrix, const Matrix>(nominal.u[k], scaled.u[k]);
  });

  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto& a = nominal.states[k];
    const auto& b = scaled.states[k];
    num = std::max(num, max_abs(b.w_hat - a.w_hat));
    den = std::max(den, max_abs(a.w_hat));
    if (a.w_hat_f && b.w_hat_f) {
      num = std::max(num, max_abs(*b.w_hat_f - *a.w_hat_f));
      den = std::max(den, max_abs(*a.w_hat_f));
    }
  }
  d.weight = num / (1.0 + den);
  return d;
}

/// x_r (and x_{r,D} for governor runs) against alpha times nominal.
inline double reference_deviation(const Trajectory& nominal, const Trajectory& scaled,
                                  double alpha) {
  double dev = detail::scaled_deviation(nominal.size(), alpha, [&](std::size_t k) {
    return std::pair<const Matrix, const Matrix>(nominal.states[k].x_r, scaled.states[k].x_r);
  });
  if (nominal.has_governor() && scaled.has_governor()) {
    dev = std::max(dev, detail::scaled_deviation(nominal.size(), alpha, [&](std::size_t k) {
      return std::pair<const Matrix, const Matrix>(*nominal.states[k].x_r_desired,
                                                   *scaled.states[k].x_r_desired);
    }));
  }
  return dev;
}

/// Total command (desired plus governor) against alpha times nominal; for
/// governor runs the governor command alone is checked as well.
inline double command_deviation(const Trajectory& nominal, const Trajectory& scaled,
                                double alpha) {
  double dev = detail::scaled_deviation(nominal.size(), alpha, [&](std::size_t k) {
    return std::pair<const Matrix, const Matrix>(nominal.c_total[k], scaled.c_total[k]);
  });
  if (nominal.has_governor() && scaled.has_governor()) {
    dev = std::max(dev, detail::scaled_deviation(nominal.size(), alpha, [&](std::size_t k) {
      return std::pair<const Matrix, const Matrix>(nominal.c_governor[k], scaled.c_governor[k]);
    }));
  }
  return dev;
}

struct ScalabilityEntry {
  double alpha = 1.0;
  double state_deviation = 0.0;
  double weight_deviation = 0.0;
  double input_deviation = 0.0;
  double reference_deviation = 0.0;
  double command_deviation = 0.0;
  bool pass = false;
  std::string failure;  // set when the scaled run could not be completed
};

struct ScalabilityReport {
  std::string scenario;
  std::string law;
  std::string architecture;
  double tolerance = kDefaultScalabilityTolerance;
  std::vector<ScalabilityEntry> entries;

  bool pass() const {
    return !entries.empty() &&
           std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
  }
};

struct ScalabilityOptions {
  unsigned workers = 1;
  ScalingOptions scaling{};
};

/// Integrates the nominal scenario once and each scaled scenario once, then
/// compares them on the shared grid. Scaled runs are independent and may be
/// spread over `workers` threads; entries keep the order of `alphas`.
inline ScalabilityReport run_scalability_check(const ScenarioConfig& nominal,
                                               std::span<const double> alphas, double tolerance,
                                               const ScalabilityOptions& options = {}) {
  if (alphas.empty()) {
    throw Error(ErrorCode::kInvalidScenario, "at least one alpha is required");
  }
  for (const double a : alphas) check_alpha(nominal, a);

  const CompiledScenario base = compile(nominal);
  const Trajectory reference = integrate(base);

  ScalabilityReport report;
  report.scenario = nominal.name;
  report.law = std::string(law_name(nominal.law));
  report.architecture = std::string(architecture_name(nominal.architecture));
  report.tolerance = tolerance;
  report.entries.resize(alphas.size());

  auto run_one = [&](std::size_t i) {
    ScalabilityEntry& entry = report.entries[i];
    entry.alpha = alphas[i];
    try {
      const CompiledScenario scn = compile(scale_scenario(nominal, alphas[i], options.scaling));
      const Trajectory traj = integrate(scn);
      const Deviation d = compare_trajectories(reference, traj, alphas[i]);
      entry.state_deviation = d.state;
      entry.weight_deviation = d.weight;
      entry.input_deviation = d.input;
      entry.reference_deviation = reference_deviation(reference, traj, alphas[i]);
      entry.command_deviation = command_deviation(reference, traj, alphas[i]);
      entry.pass = d.state <= tolerance && d.weight <= tolerance && d.input <= tolerance;
    } catch (const Error& e) {
      entry.failure = e.what();
      entry.pass = false;
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(alphas.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < alphas.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < alphas.size(); i = next++) run_one(i);
      });
    }
  }
  return report;
}

}  // namespace mrac
