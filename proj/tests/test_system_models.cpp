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
#include <numbers>

#include "mrac/system_models.hpp"
#include "test_support.hpp"

namespace mrac {
namespace {

using testing::loop_product;
using testing::loop_transpose;
using testing::mat;
using testing::rel_diff;
using testing::Rng;
using testing::vec;

PlantModel plant_of(Matrix a, Matrix b, Matrix lambda) {
  return PlantModel{std::move(a), std::move(b), std::move(lambda)};
}

TEST(SynthesizeNominalGains, DoubleIntegrator) {
  const PlantModel plant = plant_of(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}), mat({{1}}));
  const ReferenceModel ref{mat({{0, 1}, {-4, -2}}), mat({{0}, {4}}), vec({0, 0})};
  const NominalGains g = synthesize_nominal_gains(plant, ref);
  EXPECT_NEAR(g.k_x(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(g.k_x(0, 1), 2.0, 1e-12);
  EXPECT_NEAR(g.k_c(0, 0), 4.0, 1e-12);
}

TEST(SynthesizeNominalGains, IdentityCase) {
  const PlantModel plant = plant_of(mat({{-1, 1}, {0, -2}}), mat({{0}, {1}}), mat({{1}}));
  const ReferenceModel ref{plant.a, mat({{0}, {0}}), vec({0, 0})};
  const NominalGains g = synthesize_nominal_gains(plant, ref);
  EXPECT_LE(max_abs(g.k_x), 1e-14);
  EXPECT_LE(max_abs(g.k_c), 1e-14);
}

TEST(SynthesizeNominalGains, ConstructThenRecover) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = rng.integer(2, 6);
    const Eigen::Index m = rng.integer(1, static_cast<int>(n));
    const Eigen::Index l = rng.integer(1, 3);
    const PlantModel plant = plant_of(rng.matrix(n, n), rng.matrix(n, m), Matrix::Identity(m, m));
    const Matrix k_x = rng.matrix(m, n);
    const Matrix k_c = rng.matrix(m, l);
    const ReferenceModel ref{plant.a - loop_product(plant.b, k_x), loop_product(plant.b, k_c),
                             Vector::Zero(n)};
    const NominalGains g = synthesize_nominal_gains(plant, ref);
    EXPECT_LE(max_abs(g.k_x - k_x), 1e-9) << "trial " << trial;
    EXPECT_LE(max_abs(g.k_c - k_c), 1e-9) << "trial " << trial;
  }
}

TEST(SynthesizeNominalGains, UnmatchedReferenceRejected) {
  const PlantModel plant = plant_of(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}), mat({{1}}));
  // First row differs from A: not reachable through B = [0; 1].
  const ReferenceModel ref{mat({{-1, 1}, {-4, -2}}), mat({{0}, {4}}), vec({0, 0})};
  try {
    synthesize_nominal_gains(plant, ref);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMatchingConditionViolated);
  }
  const ReferenceModel ref_c{mat({{0, 1}, {-4, -2}}), mat({{1}, {4}}), vec({0, 0})};
  EXPECT_THROW(synthesize_nominal_gains(plant, ref_c), Error);
}

TEST(BuildRegressor, Examples) {
  EXPECT_TRUE(same(build_regressor(vec({1, 2}), vec({3}), 1.0), vec({1, 2, 3, 1})));
  EXPECT_TRUE(same(build_regressor(vec({0, 0}), vec({0}), 0.0), Vector::Zero(4)));
  EXPECT_TRUE(same(build_regressor(vec({1}), vec({2}), 5.0), vec({1, 2, 5})));
}

TEST(BuildRegressor, JointlyLinear) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.vector(rng.integer(1, 5));
    const Vector c = rng.vector(rng.integer(1, 3));
    const double kappa = rng.uniform();
    const double alpha = rng.uniform(-10, 10);
    EXPECT_LE(max_abs(build_regressor(alpha * x, alpha * c, alpha * kappa) -
                      alpha * build_regressor(x, c, kappa)),
              0.0);
  }
}

TEST(ComputeIdealWeights, UnitLambdaLeavesBlocks) {
  const PlantModel plant = plant_of(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}), mat({{1}}));
  const UncertaintyModel unc{mat({{0.5}, {-0.25}}), mat({{0.75}}), mat({{0.125}}), 1.0};
  const NominalGains gains{mat({{4, 2}}), mat({{4}})};
  const IdealWeights w = compute_ideal_weights(plant, unc, gains);
  EXPECT_LE(max_abs(w.lambda_star), 0.0);
  EXPECT_TRUE(same(w.w, mat({{0.5}, {-0.25}, {0.75}, {0.125}})));
}

TEST(ComputeIdealWeights, ScalarLambdaTwo) {
  const PlantModel plant = plant_of(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}), mat({{2}}));
  const UncertaintyModel unc{mat({{0}, {0}}), mat({{0}}), mat({{0}}), 1.0};
  const NominalGains gains{mat({{1, 1}}), mat({{1}})};
  const IdealWeights w = compute_ideal_weights(plant, unc, gains);
  EXPECT_DOUBLE_EQ(w.lambda_star(0, 0), 0.5);
  EXPECT_TRUE(same(w.w, mat({{-0.5}, {-0.5}, {0.5}, {0}})));
}

TEST(ComputeIdealWeights, SingularLambda) {
  PlantModel plant = plant_of(Matrix::Identity(2, 2), Matrix::Identity(2, 2), mat({{1, 1}, {1, 1}}));
  plant.allow_full_lambda = true;
  const UncertaintyModel unc{Matrix::Zero(2, 2), Matrix::Zero(1, 2), Matrix::Zero(2, 1), 1.0};
  try {
    compute_ideal_weights(plant, unc, NominalGains{Matrix::Zero(2, 2), Matrix::Zero(2, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularLambda);
  }
}

// Substituting the uncertainty, control law and ideal weights into the primal
// plant reproduces A_r x + B_r c + B Lambda W^T omega - B Lambda u_ad.
TEST(ComputeIdealWeights, ReconstructionIdentityAtRandomPoints) {
  Rng rng(17);
  for (int scenario = 0; scenario < 10; ++scenario) {
    const Eigen::Index n = rng.integer(2, 5);
    const Eigen::Index m = rng.integer(1, static_cast<int>(n));
    const Eigen::Index l = rng.integer(1, 3);
    PlantModel plant = plant_of(rng.matrix(n, n), rng.matrix(n, m), rng.spd(m));
    plant.allow_full_lambda = true;
    const NominalGains gains{rng.matrix(m, n), rng.matrix(m, l)};
    const ReferenceModel ref{plant.a - plant.b * gains.k_x, plant.b * gains.k_c, Vector::Zero(n)};
    const UncertaintyModel unc{rng.matrix(n, m), rng.matrix(l, m), rng.matrix(m, 1),
                               rng.uniform(0.5, 2)};
    const IdealWeights ideal = compute_ideal_weights(plant, unc, gains);
    for (int sample = 0; sample < 100; ++sample) {
      const Vector x = rng.vector(n, 3.0);
      const Vector c = rng.vector(l, 3.0);
      const Vector u_ad = rng.vector(m, 3.0);
      const Vector omega = build_regressor(x, c, unc.kappa);
      const Vector u = -gains.k_x * x + gains.k_c * c - u_ad;
      const Matrix primal = loop_product(plant.a, x) +
                            loop_product(plant.b, loop_product(plant.lambda_true, u)) +
                            loop_product(plant.b, uncertainty_delta(unc, plant, omega));
      const Matrix bl = loop_product(plant.b, plant.lambda_true);
      const Matrix compact = loop_product(ref.a_r, x) + loop_product(ref.b_r, c) +
                             loop_product(bl, loop_product(loop_transpose(ideal.w), omega)) -
                             loop_product(bl, u_ad);
      EXPECT_LE(rel_diff(primal, compact), 1e-10);
    }
  }
}

TEST(EvaluateCommand, Step) {
  CommandProfile p{{StepCommand{1.0, vec({2})}}, 5.0};
  EXPECT_DOUBLE_EQ(evaluate_command(p, 1, 0.5)(0), 0.0);
  EXPECT_DOUBLE_EQ(evaluate_command(p, 1, 2.0)(0), 2.0);
  EXPECT_TRUE(p.has_steps());
}

TEST(EvaluateCommand, SineAtQuarterPeriod) {
  CommandProfile p{{SineCommand{vec({1}), 1.0 / (2.0 * std::numbers::pi), 0.0}}, 10.0};
  EXPECT_NEAR(evaluate_command(p, 1, std::numbers::pi / 2.0)(0), 1.0, 1e-15);
  EXPECT_FALSE(p.has_steps());
}

TEST(EvaluateCommand, RampAndSum) {
  CommandProfile p{{RampCommand{1.0, 3.0, vec({0, 1}), vec({2, -1})},
                    StepCommand{0.0, vec({1, 1})}},
                   4.0};
  EXPECT_TRUE(same(evaluate_command(p, 2, 0.0), vec({1, 2})));
  EXPECT_TRUE(same(evaluate_command(p, 2, 2.0), vec({2, 1})));
  EXPECT_TRUE(same(evaluate_command(p, 2, 4.0), vec({3, 0})));
}

TEST(EvaluateCommand, Errors) {
  CommandProfile p{{StepCommand{1.0, vec({2})}}, 5.0};
  try {
    evaluate_command(p, 1, 5.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeOutOfRange);
  }
  EXPECT_THROW(evaluate_command(p, 1, -0.1), Error);
  EXPECT_THROW(evaluate_command(p, 2, 1.0), Error);
}

TEST(ScaleCommand, LinearInAlpha) {
  CommandProfile p{{RampCommand{0.0, 2.0, vec({0.5}), vec({1})},
                    SineCommand{vec({0.5}), 0.25, 0.3}, StepCommand{1.0, vec({-1})}},
                   10.0};
  const CommandProfile scaled = scale_command(p, -3.0);
  for (double t : {0.0, 0.7, 1.5, 4.2, 10.0}) {
    EXPECT_LE(max_abs(evaluate_command(scaled, 1, t) + 3.0 * evaluate_command(p, 1, t)), 1e-14);
  }
}

TEST(UncertaintyDelta, Examples) {
  const PlantModel plant = plant_of(Matrix::Zero(2, 2), mat({{0}, {1}}), mat({{2}}));
  const UncertaintyModel zero{Matrix::Zero(2, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), 1.0};
  EXPECT_DOUBLE_EQ(uncertainty_delta(zero, plant, vec({1, 2, 3, 1}))(0), 0.0);

  const UncertaintyModel unc{mat({{1}, {0}}), Matrix::Zero(1, 1), Matrix::Zero(1, 1), 1.0};
  EXPECT_DOUBLE_EQ(uncertainty_delta(unc, plant, vec({3, 0, 7, 1}))(0), 6.0);
  EXPECT_THROW(uncertainty_delta(unc, plant, vec({3, 0, 7})), Error);
}

TEST(UncertaintyDelta, MatchesLoopNest) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = rng.integer(1, 5);
    const Eigen::Index m = rng.integer(1, 3);
    const Eigen::Index l = rng.integer(1, 3);
    const PlantModel plant = plant_of(rng.matrix(n, n), rng.matrix(n, m), rng.spd(m));
    const UncertaintyModel unc{rng.matrix(n, m), rng.matrix(l, m), rng.matrix(m, 1), 1.0};
    const Vector omega = rng.vector(n + l + 1);
    // Lambda * [W_x^T W_c^T w_kappa] * omega with the row block built by hand
    Matrix row_block(m, n + l + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) row_block(i, j) = unc.w_x(j, i);
      for (Eigen::Index j = 0; j < l; ++j) row_block(i, n + j) = unc.w_c(j, i);
      row_block(i, n + l) = unc.w_kappa(i, 0);
    }
    const Matrix expected = loop_product(plant.lambda_true, loop_product(row_block, omega));
    EXPECT_LE(rel_diff(uncertainty_delta(unc, plant, omega), expected), 1e-13);
  }
}

}  // namespace
}  // namespace mrac
