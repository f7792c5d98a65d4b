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


#include "coreaug/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "coreaug/errors.hpp"
#include "coreaug/model.hpp"
#include "test_util.hpp"

namespace coreaug {
namespace {

using testing::gaussian;

Matrix line_distances(const Vector& pts) {
  return pairwise_distances(Matrix(pts.size(), 1, Vector(pts)));
}

GradientProxySet labelled(const Matrix& p, std::size_t classes) {
  std::vector<int> y(p.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % classes);
  return make_proxy_set(p, y, classes);
}

TEST(Distances, SymmetricWithZeroDiagonal) {
  const Matrix d = pairwise_distances(gaussian(7, 3, 1));
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(d(i, j), d(j, i));
  }
  EXPECT_DOUBLE_EQ(line_distances({0.0, 3.0})(0, 1), 3.0);
}

TEST(GFrobenius, HandComputedValues) {
  const Matrix d = line_distances({0.0, 1.0, 10.0});
  const std::vector<std::size_t> s{1};
  EXPECT_DOUBLE_EQ(g_frobenius(d, s, 20.0), std::sqrt(1.0 + 0.0 + 81.0));
  EXPECT_DOUBLE_EQ(g_frobenius(d, {}, 20.0), std::sqrt(3.0) * 20.0);
  EXPECT_DOUBLE_EQ(default_c1(d), 20.0);
  EXPECT_DOUBLE_EQ(facility_location_value(d, s), (10 - 1) + (10 - 0) + (10 - 9));
}

TEST(Greedy, FirstPickIsBestSingletonThenOtherCluster) {
  const Matrix d = line_distances({0.0, 0.1, 0.2, 0.3, 5.0, 5.1});
  GreedyParams p;
  p.k = 2;
  const GreedyResult r = greedy_select(d, p);
  ASSERT_EQ(r.selected.size(), 2u);
  std::size_t best = 0;
  double best_val = 1e300;
  for (std::size_t j = 0; j < 6; ++j) {
    const double v = g_frobenius(d, std::vector<std::size_t>{j}, default_c1(d));
    if (v < best_val) best_val = v, best = j;
  }
  EXPECT_EQ(r.selected[0], best);
  EXPECT_LT(r.selected[0], 4u);
  EXPECT_TRUE(r.selected[1] == 4 || r.selected[1] == 5);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_GT(r.trace[0], r.trace[1]);
}

TEST(Greedy, TiesBreakToSmallestIndex) {
  const Matrix d(3, 3, 0.0);  // all points identical
  GreedyParams p;
  p.k = 2;
  EXPECT_EQ(greedy_select(d, p).selected, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(lazy_greedy_select(d, p).selected, (std::vector<std::size_t>{0, 1}));
}

TEST(Greedy, XiThresholdStopsAtFirstFeasibleSize) {
  const Matrix d = pairwise_distances(gaussian(30, 2, 2));
  GreedyParams p;
  p.stop = StopRule::kXiThreshold;
  p.xi = 0.5 * g_frobenius(d, std::vector<std::size_t>{0}, default_c1(d));
  const GreedyResult r = greedy_select(d, p);
  EXPECT_LE(r.trace.back(), p.xi);
  if (r.trace.size() > 1) EXPECT_GT(r.trace[r.trace.size() - 2], p.xi);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(Greedy, XiZeroSelectsEveryDistinctPoint) {
  const Matrix d = pairwise_distances(gaussian(9, 2, 3));
  GreedyParams p;
  p.stop = StopRule::kXiThreshold;
  p.xi = 0.0;
  EXPECT_EQ(greedy_select(d, p).selected.size(), 9u);
}

TEST(Greedy, ValidatesInputs) {
  GreedyParams p;
  EXPECT_THROW(greedy_select(Matrix(), p), Error);
  EXPECT_THROW(greedy_select(Matrix(2, 3), p), Error);
  p.k = 5;
  EXPECT_THROW(greedy_select(Matrix(3, 3), p), Error);
  p.k = 1;
  p.stop = StopRule::kXiThreshold;
  p.xi = -1.0;
  EXPECT_THROW(greedy_select(Matrix(3, 3), p), Error);
}

class EngineEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(EngineEquivalence, LazyMatchesNaiveExactly) {
  const int seed = GetParam();
  Rng rng(Stream::kMonteCarlo, {static_cast<std::uint64_t>(seed)});
  const std::size_t n = 3 + rng.index(80);
  const Matrix d = pairwise_distances(gaussian(n, 1 + rng.index(5), seed));
  for (Objective obj : {Objective::kFrobenius, Objective::kFacilityLocation}) {
    GreedyParams p;
    p.objective = obj;
    p.k = 1 + rng.index(n);
    const GreedyResult a = greedy_select(d, p);
    const GreedyResult b = lazy_greedy_select(d, p);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_LE(b.evaluations, a.evaluations);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EngineEquivalence, ::testing::Range(0, 12));

TEST(Stochastic, SeededAndFullSampleEqualsNaive) {
  const Matrix d = pairwise_distances(gaussian(40, 3, 4));
  GreedyParams p;
  p.k = 6;
  p.sample = 5;
  p.seed = 3;
  EXPECT_EQ(stochastic_greedy_select(d, p).selected, stochastic_greedy_select(d, p).selected);
  p.sample = 40;
  EXPECT_EQ(stochastic_greedy_select(d, p).selected, greedy_select(d, p).selected);
  p.sample = 0;
  EXPECT_THROW(stochastic_greedy_select(d, p), ConfigError);
}

TEST(Weights, CountNearestPointsAndSumToClassSize) {
  const Matrix d = line_distances({0.0, 0.1, 0.2, 5.0, 5.1});
  const std::vector<std::size_t> s{1, 3};
  EXPECT_EQ(compute_weights(d, s), (std::vector<std::size_t>{3, 2}));
  // A selected point with a duplicate elsewhere still keeps itself.
  const Matrix dup = line_distances({1.0, 1.0, 1.0});
  EXPECT_EQ(compute_weights(dup, std::vector<std::size_t>{2, 0}), (std::vector<std::size_t>{1, 2}));
  const Vector rho = divide_weights(std::vector<std::size_t>{3, 2}, 2);
  EXPECT_EQ(rho, (Vector{1.5, 1.0}));
}

TEST(SelectionConfig, BudgetRule) {
  SelectionConfig c;
  c.fraction = 0.1;
  EXPECT_EQ(c.budget(200), 20u);
  EXPECT_EQ(c.budget(5), 1u);
  EXPECT_EQ(c.budget(11), 2u);
  c.k_per_class = 50;
  EXPECT_EQ(c.budget(7), 7u);
  c.fraction = 0.0;
  c.k_per_class.reset();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SelectAllClasses, FractionOneSelectsEverythingWithUnitWeights) {
  const GradientProxySet px = labelled(gaussian(30, 4, 5), 3);
  SelectionConfig c;
  c.fraction = 1.0;
  const WeightedCoreset core = select_all_classes(px, c);
  std::vector<std::size_t> idx = core.indices;
  std::sort(idx.begin(), idx.end());
  std::vector<std::size_t> all(30);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(idx, all);
  for (std::size_t g : core.gamma) EXPECT_EQ(g, 1u);
  EXPECT_NEAR(core.g_frobenius, 0.0, 1e-12);
}

TEST(SelectAllClasses, PerClassStructureAndWeights) {
  const GradientProxySet px = labelled(gaussian(60, 4, 6), 3);
  SelectionConfig c;
  c.fraction = 0.2;
  const WeightedCoreset core = select_all_classes(px, c, 2);
  ASSERT_EQ(core.classes.size(), 3u);
  std::size_t total = 0;
  for (const auto& cc : core.classes) {
    EXPECT_EQ(cc.indices.size(), 4u);
    for (std::size_t i : cc.indices) EXPECT_EQ(px.labels[i], static_cast<int>(cc.cls));
    total += std::accumulate(cc.gamma.begin(), cc.gamma.end(), std::size_t{0});
    for (std::size_t j = 0; j < cc.gamma.size(); ++j) EXPECT_DOUBLE_EQ(cc.rho[j], cc.gamma[j] / 2.0);
  }
  EXPECT_EQ(total, 60u);
  const auto j = to_json(core);
  EXPECT_EQ(j["classes"].size(), 3u);
  EXPECT_FALSE(j.contains("warnings"));
}

TEST(SelectAllClasses, EmptyClassIsSkippedWithWarning) {
  std::vector<int> y(10, 0);
  for (std::size_t i = 5; i < 10; ++i) y[i] = 2;
  const GradientProxySet px = make_proxy_set(gaussian(10, 2, 7), y, 3);
  const WeightedCoreset core = select_all_classes(px, SelectionConfig{});
  ASSERT_EQ(core.warnings.size(), 1u);
  EXPECT_NE(core.warnings[0].find("class 1"), std::string::npos);
}

TEST(SelectAllClasses, EnginesAgreeThroughConfig) {
  const GradientProxySet px = labelled(gaussian(90, 3, 8), 3);
  SelectionConfig naive;
  naive.engine = Engine::kNaive;
  SelectionConfig lazy;
  EXPECT_EQ(select_all_classes(px, naive).indices, select_all_classes(px, lazy).indices);
}

TEST(Baselines, MaxLossPicksHighestLossPerClass) {
  const Vector losses{0.1, 0.9, 0.5, 0.7, 0.3, 0.8};
  const std::vector<int> y{0, 1, 0, 1, 0, 1};
  const WeightedSubset s = max_loss_subset(losses, 1, y, 2);
  std::vector<std::size_t> idx = s.indices;
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<std::size_t>{1, 2}));
  for (double w : s.weights) EXPECT_DOUBLE_EQ(w, 3.0);
}

TEST(Baselines, RandomSubsetRespectsClassesAndSeed) {
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 4);
  const WeightedSubset a = random_subset(40, 2, y, 4, 9);
  const WeightedSubset b = random_subset(40, 2, y, 4, 9);
  EXPECT_EQ(a.indices, b.indices);
  ASSERT_EQ(a.indices.size(), 8u);
  std::vector<int> per(4, 0);
  for (std::size_t i : a.indices) ++per[y[i]];
  for (int c : per) EXPECT_EQ(c, 2);
  EXPECT_DOUBLE_EQ(a.weights[0], 5.0);
}

TEST(Alignment, HandComputedCounterexampleAndBound) {
  // Points 0, 1, 10: S={1} errs by 8, S={1,0} errs by 9; the bound still holds.
  const GradientProxySet px = make_proxy_set(Matrix(3, 1, {0.0, 1.0, 10.0}), {0, 0, 0}, 1);
  const AlignmentAudit one = alignment_error(px, {{1}, {3.0}});
  EXPECT_DOUBLE_EQ(one.error, 8.0);
  const AlignmentAudit two = alignment_error(px, {{1, 0}, {2.0, 1.0}});
  EXPECT_DOUBLE_EQ(two.error, 9.0);
  EXPECT_DOUBLE_EQ(two.class_assignment_sum[0], 9.0);
  EXPECT_LE(two.error, two.bound);
  EXPECT_LE(two.class_assignment_sum[0], one.class_assignment_sum[0] + 1e-12);
}

TEST(Alignment, FullSetHasZeroError) {
  const GradientProxySet px = labelled(gaussian(12, 3, 9), 2);
  SelectionConfig c;
  c.fraction = 1.0;
  const AlignmentAudit a = alignment_error(px, select_all_classes(px, c).gamma_subset());
  EXPECT_NEAR(a.error, 0.0, 1e-12);
}

TEST(NtkBound, HoldsOnRandomNetwork) {
  const Dataset data = testing::unit_cube_data(24, 3, 2, 10);
  const Mlp net = Mlp::random({3, 5, 2}, Activation::kTanh, 10);
  const GradientProxySet px = gradient_proxy(net, data, ProxyMode::kLastLayer);
  SelectionConfig c;
  c.fraction = 0.25;
  const WeightedCoreset core = select_all_classes(px, c);
  const NtkBoundVerdict v =
      coreset_ntk_bound_check(jacobian(net, data.features()), residuals(net, data), core.gamma_subset());
  EXPECT_TRUE(v.pass);
  EXPECT_GE(v.margin, -1e-12);
  EXPECT_GT(v.residual_norm, 0.0);
}

}  // namespace
}  // namespace coreaug
