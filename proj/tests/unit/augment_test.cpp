// Copyright 2026 The Coreaug Authors.
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


#include "coreaug/augment.hpp"

#include <gtest/gtest.h>

#include "coreaug/errors.hpp"
#include "coreaug/model.hpp"
#include "test_util.hpp"

namespace coreaug {
namespace {

using testing::unit_cube_data;

class TransformBudget : public ::testing::TestWithParam<TransformKind> {};

TEST_P(TransformBudget, EveryCopyStaysWithinEpsilonAndCube) {
  const Dataset data = unit_cube_data(50, 12, 2, 3);
  TransformSpec spec;
  spec.kind = GetParam();
  spec.epsilon0 = 0.2;
  spec.r = 3;
  const AugmentedSet aug = perturb(spec, data.features(), 0, data.labels());
  ASSERT_EQ(aug.features.rows(), 150u);
  for (std::size_t a = 0; a < aug.features.rows(); ++a) {
    const std::size_t o = aug.origin[a];
    double sq = 0.0;
    for (std::size_t j = 0; j < 12; ++j) {
      const double v = aug.features(a, j);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sq += (v - data.x(o)[j]) * (v - data.x(o)[j]);
    }
    EXPECT_LE(std::sqrt(sq), spec.epsilon0 * (1 + 1e-12));
    EXPECT_EQ(aug.labels[a], data.label(o));
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, TransformBudget,
                         ::testing::Values(TransformKind::kUniformBall,
                                           TransformKind::kGaussianClipped,
                                           TransformKind::kPixelJitter));

TEST(Perturb, PixelJitterTouchesAQuarterOfCoordinates) {
  Matrix x(1, 16, 0.5);
  TransformSpec spec;
  spec.kind = TransformKind::kPixelJitter;
  spec.epsilon0 = 0.1;
  const Matrix y = perturb_copy(spec, x, 0, 0);
  std::size_t changed = 0;
  for (std::size_t j = 0; j < 16; ++j) changed += y(0, j) != 0.5;
  EXPECT_LE(changed, 4u);
  EXPECT_GE(changed, 1u);
}

TEST(Perturb, ZeroBudgetIsIdentity) {
  const Dataset data = unit_cube_data(5, 4, 1, 1);
  TransformSpec spec;
  spec.epsilon0 = 0.0;
  EXPECT_EQ(perturb_copy(spec, data.features(), 3, 0), data.features());
}

TEST(Perturb, DeterministicAndRoundDependent) {
  const Dataset data = unit_cube_data(5, 4, 1, 2);
  TransformSpec spec;
  spec.seed = 11;
  EXPECT_EQ(perturb_copy(spec, data.features(), 1, 0), perturb_copy(spec, data.features(), 1, 0));
  EXPECT_FALSE(perturb_copy(spec, data.features(), 1, 0) == perturb_copy(spec, data.features(), 2, 0));
  // Copy c of perturb() equals perturb_copy for that copy.
  spec.r = 2;
  const AugmentedSet aug = perturb(spec, data.features(), 1);
  const Matrix second = perturb_copy(spec, data.features(), 1, 1);
  for (std::size_t a = 0; a < aug.features.rows(); ++a)
    if (a % 2 == 1)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(aug.features(a, j), second(aug.origin[a], j));
}

TEST(TransformSpec, Validation) {
  TransformSpec spec;
  spec.epsilon0 = -1.0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.epsilon0 = 0.1;
  spec.r = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  EXPECT_THROW(parse_transform_kind("rotate"), ConfigError);
}

TEST(PerturbationMatrix, NormsMatchDirectComputation) {
  const Dataset data = unit_cube_data(6, 3, 2, 4);
  const Mlp net = Mlp::random({3, 4, 2}, Activation::kTanh, 4);
  TransformSpec spec;
  spec.epsilon0 = 0.1;
  const Matrix xa = perturb_copy(spec, data.features(), 0, 0);
  const PerturbationMatrix pm = perturbation_matrix(net, data.features(), xa, 2.0, 0.1);
  const Matrix e = jacobian(net, xa) - jacobian(net, data.features());
  EXPECT_LT(testing::max_abs_diff(pm.e, e), 1e-15);
  EXPECT_NEAR(pm.norm_f, frobenius_norm(e), 1e-14);
  EXPECT_NEAR(pm.norm2, svd(e).sigma[0], 1e-8);
  ASSERT_TRUE(pm.bound.has_value());
  EXPECT_NEAR(*pm.bound, std::sqrt(6.0) * 2.0 * 0.1, 1e-15);
}

}  // namespace
}  // namespace coreaug
