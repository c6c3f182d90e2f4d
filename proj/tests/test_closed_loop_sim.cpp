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

#include <gtest/gtest.h>

#include <cmath>

#include "mrac/closed_loop_sim.hpp"
#include "mrac/governor.hpp"
#include "test_support.hpp"

namespace mrac {
namespace {

using testing::benchmark_scenario;
using testing::loop_product;
using testing::loop_transpose;
using testing::mat;
using testing::rel_diff;
using testing::Rng;
using testing::vec;
using testing::with_duration;

TEST(GovernorProjection, Examples) {
  EXPECT_TRUE(same(governor_projection(mat({{1}, {0}})), mat({{1, 0}, {0, 0}})));
  EXPECT_LE(max_abs(governor_projection(Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)), 1e-15);
}

TEST(GovernorProjection, ProjectionIdentities) {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = rng.integer(1, 6);
    const Matrix b = rng.matrix(n, rng.integer(1, static_cast<int>(n)));
    const Matrix g = governor_projection(b);
    EXPECT_LE(max_abs(g * g - g), 1e-10);
    EXPECT_LE(max_abs(g * b - b), 1e-10);
    EXPECT_LE(max_abs(g - g.transpose()), 1e-10);
  }
}

TEST(GovernorProjection, RankDeficient) {
  try {
    governor_projection(mat({{1, 2}, {2, 4}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficient);
  }
}

TEST(GovernorDerivative, Examples) {
  const Vector e = vec({0.3, -1.2});
  EXPECT_LE(max_abs(governor_derivative(e, e, 7.0)), 0.0);
  EXPECT_TRUE(same(governor_derivative(vec({0, 0}), vec({1, 0}), 10.0), vec({10, 0})));
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = rng.vector(3);
    const Vector err = rng.vector(3);
    const double lambda = rng.uniform(0.1, 100);
    Vector expected(3);
    for (int i = 0; i < 3; ++i) expected(i) = -lambda * xi(i) + lambda * err(i);
    EXPECT_LE(rel_diff(governor_derivative(xi, err, lambda), expected), 1e-14);
  }
}

TEST(GovernorOutput, Examples) {
  const Matrix a_r = mat({{-1, 0.5}, {-2, -3}});
  const Vector xi = vec({0.4, -0.7});
  EXPECT_TRUE(same(governor_output(xi, Vector::Zero(2), a_r, 5.0), Vector(5.0 * xi)));
  const Vector e = vec({1.5, 2.0});
  EXPECT_LE(max_abs(governor_output(Vector::Zero(2), e, a_r, 0.0) - a_r * e), 1e-15);
  // xi = e: lambda e + A_r e - lambda e = A_r e
  EXPECT_LE(max_abs(governor_output(e, e, a_r, 50.0) - a_r * e), 1e-13);
}

TEST(GovernorCommand, Examples) {
  EXPECT_LE(max_abs(governor_command(Vector::Zero(2), mat({{2}}), mat({{0}, {1}}))), 0.0);
  const Vector g = vec({0.25, -3});
  EXPECT_LE(max_abs(governor_command(g, Matrix::Identity(2, 2), Matrix::Identity(2, 2)) - g),
            1e-15);
}

TEST(GovernorCommand, MatchesTwoStageSolve) {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = rng.integer(1, 6);
    const Eigen::Index m = rng.integer(1, static_cast<int>(n));
    const Matrix b = rng.matrix(n, m);
    const Matrix k_c = rng.matrix(m, m) + 2.0 * Matrix::Identity(m, m);
    const Vector g = rng.vector(n);
    const Matrix y = solve_least_squares(b, g);
    const Matrix expected = solve_least_squares(k_c, y);
    EXPECT_LE(rel_diff(governor_command(g, k_c, b), expected), 1e-10);
  }
}

TEST(GovernorCommand, SingularKc) {
  try {
    governor_command(vec({1, 1}), mat({{1, 1}, {1, 1}}), Matrix::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKcSingular);
  }
}

ScenarioConfig zero_uncertainty() {
  ScenarioConfig s = benchmark_scenario();
  s.plant.lambda_true = mat({{1}});
  s.uncertainty = UncertaintyModel{Matrix::Zero(2, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), 1.0};
  s.reference.x_r0 = vec({0.2, -0.1});
  s.initial.x0 = s.reference.x_r0;
  return s;
}

ClosedLoopState random_state(Rng& rng, const CompiledScenario& scn) {
  ClosedLoopState s = initial_state(scn);
  s.x = rng.vector(s.x.size(), 2.0);
  s.x_r = rng.vector(s.x_r.size(), 2.0);
  s.w_hat = rng.matrix(s.w_hat.rows(), s.w_hat.cols(), 2.0);
  if (s.w_hat_f) s.w_hat_f = rng.matrix(s.w_hat.rows(), s.w_hat.cols(), 2.0);
  if (s.xi) s.xi = rng.vector(s.x.size());
  if (s.x_r_desired) s.x_r_desired = rng.vector(s.x.size());
  return s;
}

std::vector<ScenarioConfig> every_architecture() {
  std::vector<ScenarioConfig> out;
  const ScenarioConfig base = benchmark_scenario();
  const Matrix gamma = learning_rate(base.law);
  out.push_back(base);
  ScenarioConfig s = base;
  s.law = SigmaMod{gamma, 0.1};
  out.push_back(s);
  s.law = EMod{gamma, 0.5};
  out.push_back(s);
  s.law = FreqLimited{gamma, 2.0, 5.0 * Matrix::Identity(4, 4), 10.0};
  out.push_back(s);
  s = base;
  s.architecture = ClosedLoopReference{3.0 * Matrix::Identity(2, 2)};
  out.push_back(s);
  s = base;
  s.architecture = CommandGovernor{50.0};
  out.push_back(s);
  return out;
}

TEST(ClosedLoopDerivative, MatchedSystemFollowsReference) {
  const CompiledScenario scn = compile(zero_uncertainty());
  ClosedLoopState s = initial_state(scn);
  s.x = vec({0.7, -0.4});
  s.x_r = s.x;
  const ClosedLoopState d = closed_loop_derivative(scn, s, 1.3);
  EXPECT_LE(max_abs(d.x - d.x_r), 1e-14);
  EXPECT_LE(max_abs(d.w_hat), 0.0);
}

TEST(ClosedLoopDerivative, DualFormAtRandomStates) {
  Rng rng(53);
  for (const auto& cfg : every_architecture()) {
    const CompiledScenario scn = compile(cfg);
    for (int sample = 0; sample < 100; ++sample) {
      const ClosedLoopState s = random_state(rng, scn);
      const double t = rng.uniform(0.0, cfg.sim.duration);
      const Vector primal = closed_loop_derivative(scn, s, t).x;
      EXPECT_LE(rel_diff(primal, closed_loop_form_rate(scn, s, t)), 1e-10)
          << law_name(cfg.law) << "/" << architecture_name(cfg.architecture);
    }
  }
}

TEST(ClosedLoopDerivative, GovernorKeepsErrorDynamics) {
  Rng rng(59);
  ScenarioConfig cfg = benchmark_scenario();
  cfg.architecture = CommandGovernor{50.0};
  const CompiledScenario scn = compile(cfg);
  for (int sample = 0; sample < 100; ++sample) {
    const ClosedLoopState s = random_state(rng, scn);
    const double t = rng.uniform(0.0, cfg.sim.duration);
    const ClosedLoopState d = closed_loop_derivative(scn, s, t);
    EXPECT_LE(rel_diff(d.x - d.x_r, error_form_rate(scn, s, t)), 1e-10);
  }
}

TEST(ClosedLoopDerivative, GovernorCommandEntersReferenceThroughProjection) {
  // B_r c_g = B K_c K_c^-1 (B^T B)^-1 B^T g = G g
  Rng rng(61);
  ScenarioConfig cfg = benchmark_scenario();
  cfg.architecture = CommandGovernor{20.0};
  const CompiledScenario scn = compile(cfg);
  const Matrix g_proj = governor_projection(cfg.plant.b);
  for (int sample = 0; sample < 20; ++sample) {
    const ClosedLoopState s = random_state(rng, scn);
    const Signals sig = evaluate_signals(scn, s, 1.0);
    const Vector g = governor_output(*s.xi, sig.e, cfg.reference.a_r, 20.0);
    EXPECT_LE(rel_diff(cfg.reference.b_r * sig.c_governor, g_proj * g), 1e-12);
  }
}

TEST(Integrate, ZeroUncertaintyEquilibrium) {
  const CompiledScenario scn = compile(zero_uncertainty());
  const Trajectory traj = integrate(scn);
  ASSERT_EQ(traj.size(), 30001u);
  double sup_e = 0.0, sup_uad = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    sup_e = std::max(sup_e, traj.e[k].norm());
    sup_uad = std::max(sup_uad, traj.u_ad[k].norm());
  }
  EXPECT_LE(sup_e, 1e-12);
  EXPECT_LE(sup_uad, 1e-12);
}

TEST(Integrate, ScalarExponential) {
  ScenarioConfig s;
  s.plant = PlantModel{mat({{-1}}), mat({{1}}), mat({{1}})};
  s.uncertainty = UncertaintyModel{mat({{0}}), mat({{0}}), mat({{0}}), 1.0};
  s.reference = ReferenceModel{mat({{-1}}), mat({{1}}), vec({1})};
  s.q = mat({{1}});
  s.law = StandardMrac{Matrix::Identity(3, 3)};
  s.architecture = PlainReference{};
  s.sim = SimSettings{1e-3, 1.0, 1e9};
  s.command = CommandProfile{{}, 1.0};
  s.initial = InitialConditions{vec({1}), Matrix::Zero(3, 1), std::nullopt};
  const Trajectory traj = integrate(compile(s));
  ASSERT_EQ(traj.size(), 1001u);
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
  EXPECT_NEAR(traj.states.back().x_r(0), std::exp(-1.0), 1e-9);
}

TEST(Integrate, BenchmarkTrackingIsBounded) {
  const Trajectory traj = integrate(compile(benchmark_scenario()));
  double peak = 0.0;
  for (const auto& e : traj.e) peak = std::max(peak, e.norm());
  EXPECT_TRUE(std::isfinite(peak));
  EXPECT_LT(traj.e.back().norm(), peak);
}

TEST(Integrate, DualFormAlongTrajectories) {
  for (const auto& cfg : every_architecture()) {
    const CompiledScenario scn = compile(with_duration(cfg, 5.0));
    const Trajectory traj = integrate(scn);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const ClosedLoopState d = closed_loop_derivative(scn, traj.states[k], traj.times[k]);
      worst = std::max(worst,
                       rel_diff(d.x, closed_loop_form_rate(scn, traj.states[k], traj.times[k])));
    }
    EXPECT_LE(worst, 1e-9) << law_name(cfg.law) << "/" << architecture_name(cfg.architecture);
  }
}

TEST(Integrate, DivergenceIsReported) {
  ScenarioConfig s = benchmark_scenario();
  s.law = StandardMrac{1e7 * Matrix::Identity(4, 4)};
  try {
    integrate(compile(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
  }
}

TEST(Integrate, Deterministic) {
  ScenarioConfig s = benchmark_scenario();
  s.architecture = CommandGovernor{50.0};
  const CompiledScenario scn = compile(with_duration(s, 3.0));
  const Trajectory a = integrate(scn);
  const Trajectory b = integrate(scn);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_TRUE(same(a.states[k].x, b.states[k].x));
    ASSERT_TRUE(same(a.states[k].w_hat, b.states[k].w_hat));
    ASSERT_TRUE(same(*a.states[k].xi, *b.states[k].xi));
    ASSERT_TRUE(same(a.u[k], b.u[k]));
  }
}

TEST(Integrate, GovernorTracksDesiredReferenceBetterWithLargeGain) {
  auto sup_gap = [](double lambda) {
    ScenarioConfig s = benchmark_scenario();
    s.architecture = CommandGovernor{lambda};
    const Trajectory traj = integrate(compile(s));
    double sup = 0.0;
    for (const auto& st : traj.states) sup = std::max(sup, (st.x - *st.x_r_desired).norm());
    return sup;
  };
  EXPECT_LT(sup_gap(100.0), sup_gap(1.0));
}

}  // namespace
}  // namespace mrac
