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


#include "coreaug/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "coreaug/errors.hpp"
#include "test_util.hpp"

namespace coreaug {
namespace {

using testing::unit_cube_data;

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 4;
  c.hidden = {6};
  c.selection.fraction = 0.2;
  c.batch_size = 8;
  c.seed = 5;
  return c;
}

TEST(WeightedStep, MatchesJacobianForm) {
  const Dataset data = unit_cube_data(7, 3, 2, 1);
  Mlp net = Mlp::random({3, 4, 2}, Activation::kTanh, 1);
  const Vector w{0.3, 1.7, 0.0, 2.5, 1.0, 0.2, 4.0};
  const Matrix j = jacobian(net, data.features());
  const Matrix r = residuals(net, data);
  Vector wr(14);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t c = 0; c < 2; ++c) wr[i * 2 + c] = w[i] * r(i, c);
  const Vector expected_step = matvec_t(j, wr);
  const Vector before(net.params().begin(), net.params().end());
  weighted_gradient_step(net, data.features(), data.labels(), w, 0.1);
  for (std::size_t p = 0; p < net.num_params(); ++p)
    EXPECT_NEAR(net.params()[p], before[p] - 0.1 * expected_step[p], 1e-8);
}

TEST(WeightedStep, ZeroWeightsLeaveNetworkUnchanged) {
  const Dataset data = unit_cube_data(4, 3, 2, 2);
  Mlp net = Mlp::random({3, 4, 2}, Activation::kTanh, 2);
  const Mlp before = net;
  weighted_gradient_step(net, data.features(), data.labels(), Vector(4, 0.0), 1.0);
  EXPECT_EQ(net, before);
  EXPECT_THROW(weighted_gradient_step(net, data.features(), data.labels(), Vector(4, -1.0), 1.0),
               ConfigError);
  EXPECT_THROW(weighted_gradient_step(net, data.features(), data.labels(), Vector(3, 1.0), 1.0),
               ConfigError);
}

TEST(LrSchedule, StepDecay) {
  LrSchedule s{0.1, 5, 0.5};
  EXPECT_DOUBLE_EQ(s.at(0), 0.1);
  EXPECT_DOUBLE_EQ(s.at(4), 0.1);
  EXPECT_DOUBLE_EQ(s.at(5), 0.05);
  EXPECT_DOUBLE_EQ(s.at(12), 0.025);
}

TEST(LabelNoise, FlipsExactFractionToOtherClasses) {
  const Dataset data = unit_cube_data(100, 2, 4, 3);
  const NoisyLabels noisy = inject_label_noise(data, 0.3, 7);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(noisy.mask[i], noisy.data.label(i) != data.label(i));
    flipped += noisy.mask[i];
  }
  EXPECT_EQ(flipped, 30u);
  EXPECT_DOUBLE_EQ(noisy_selection_audit(std::vector<std::size_t>{0, 1, 2, 3}, noisy.mask),
                   (noisy.mask[0] + noisy.mask[1] + noisy.mask[2] + noisy.mask[3]) / 4.0);
}

TEST(Evaluate, AccuracyUsesArgmaxWithLowClassTies) {
  const Dataset data(Matrix(2, 1, {0.2, 0.8}), {0, 1}, 2);
  const Mlp zero({1, 2});
  EXPECT_DOUBLE_EQ(evaluate(zero, data).accuracy, 0.5);
  EXPECT_DOUBLE_EQ(evaluate(zero, data).loss, 0.5);
}

TEST(EpochBatches, PartitionThePoolDeterministically) {
  const auto b = epoch_batches(23, 5, 3, 1);
  std::vector<std::size_t> all;
  for (const auto& x : b) {
    EXPECT_LE(x.size(), 5u);
    all.insert(all.end(), x.begin(), x.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(23);
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(all, want);
  EXPECT_EQ(b, epoch_batches(23, 5, 3, 1));
  EXPECT_NE(b, epoch_batches(23, 5, 3, 2));
  EXPECT_EQ(epoch_batches(23, 0, 3, 1).size(), 1u);
}

TEST(EpochPool, RegimeComposition) {
  const Dataset data = unit_cube_data(20, 3, 2, 4);
  const WeightedSubset subset{{2, 5}, {4.0, 6.0}};
  TrainConfig c = small_config();
  c.transform.r = 2;

  c.regime = Regime::kCoresetOnly;
  TrainingPool p = build_epoch_pool(data, c, subset, {}, 0);
  EXPECT_EQ(p.labels.size(), 2u + 4u);
  EXPECT_DOUBLE_EQ(std::accumulate(p.weights.begin(), p.weights.end(), 0.0), 20.0);

  c.regime = Regime::kFullPlusCoresetAug;
  std::vector<std::size_t> all(20);
  std::iota(all.begin(), all.end(), 0);
  p = build_epoch_pool(data, c, subset, all, 0);
  EXPECT_EQ(p.labels.size(), 20u + 4u);
  EXPECT_DOUBLE_EQ(p.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(p.weights[20], 2.0);

  c.augment = false;
  c.regime = Regime::kCoresetOnly;
  p = build_epoch_pool(data, c, subset, {}, 0);
  EXPECT_EQ(p.labels.size(), 2u);
}

TEST(Train, DeterministicRecordAndCsv) {
  const Dataset data = unit_cube_data(60, 3, 3, 5);
  const Dataset test = unit_cube_data(30, 3, 3, 6);
  const TrainConfig c = small_config();
  const TrainRecord a = train(c, data, test);
  const TrainRecord b = train(c, data, test);
  EXPECT_EQ(a.net, b.net);
  ASSERT_EQ(a.rows.size(), 4u);
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(a.rows[e].train_loss, b.rows[e].train_loss);
    EXPECT_TRUE(a.rows[e].refreshed);
  }
  EXPECT_EQ(a.selections.size(), 4u);
  for (std::size_t e = 1; e < 4; ++e) EXPECT_GE(a.rows[e].points_touched, a.rows[e - 1].points_touched);
  const std::string csv = train_record_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,train_loss,test_loss,test_acc,grad_norm,refreshed,selection_ms,points_touched");
}

TEST(Train, RefreshPeriodControlsSelections) {
  const Dataset data = unit_cube_data(60, 3, 3, 7);
  TrainConfig c = small_config();
  c.refresh_r = 2;
  const TrainRecord r = train(c, data, data);
  EXPECT_EQ(r.selections.size(), 2u);
  EXPECT_TRUE(r.rows[0].refreshed);
  EXPECT_FALSE(r.rows[1].refreshed);
}

TEST(Train, LossDecreasesOnSeparableData) {
  Matrix x(60, 2);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = y[i] ? 0.9 : 0.1;
    x(i, 1) = 0.3 + 0.4 * static_cast<double>(i) / 60.0;
  }
  const Dataset data(x, y, 2);
  TrainConfig c = small_config();
  c.epochs = 30;
  c.regime = Regime::kFullPlusCoresetAug;
  const TrainRecord r = train(c, data, data);
  EXPECT_LT(r.rows.back().test_loss, r.rows.front().test_loss);
  EXPECT_DOUBLE_EQ(r.rows.back().test_accuracy, 1.0);
}

TEST(TrainConfig, Validation) {
  TrainConfig c = small_config();
  c.baseline = Baseline::kMaxLoss;
  c.selection.stop = StopRule::kXiThreshold;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.refresh_r = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.label_noise_frac = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_regime("everything"), ConfigError);
}

}  // namespace
}  // namespace coreaug
