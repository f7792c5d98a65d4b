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


#ifndef COREAUG_TRAINER_HPP_
#define COREAUG_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coreaug/augment.hpp"
#include "coreaug/coreset.hpp"
#include "coreaug/dataset.hpp"
#include "coreaug/model.hpp"

namespace coreaug {

enum class Regime { kCoresetOnly, kFullPlusCoresetAug, kRandomPlusCoresetAug };
enum class Baseline { kOurs, kRandom, kMaxLoss };

std::string to_string(Regime r);
Regime parse_regime(const std::string& s);
std::string to_string(Baseline b);
Baseline parse_baseline(const std::string& s);

// eta(e) = initial * factor^floor(e / decay_epochs); constant when
// decay_epochs is 0.
struct LrSchedule {
  double initial = 0.1;
  std::size_t decay_epochs = 0;
  double factor = 1.0;

  double at(std::size_t epoch) const;
  void validate() const;
};

struct TrainConfig {
  Regime regime = Regime::kCoresetOnly;
  SelectionConfig selection;
  TransformSpec transform;
  std::size_t refresh_r = 1;
  std::size_t epochs = 20;
  LrSchedule lr;
  std::size_t batch_size = 32;  // 0 means full batch
  std::uint64_t seed = 0;
  double label_noise_frac = 0.0;
  Baseline baseline = Baseline::kOurs;
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::kTanh;
  bool augment = true;           // false drops the augmented rows
  double random_fraction = 0.5;  // base share for kRandomPlusCoresetAug
  ProxyMode proxy_mode = ProxyMode::kLastLayer;

  void validate() const;
};

struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // weighted pool loss / total weight
  double test_loss = 0.0;   // mean per-example loss
  double test_accuracy = 0.0;
  double grad_norm = 0.0;   // norm of the weighted pool gradient
  bool refreshed = false;
  double selection_ms = 0.0;
  std::size_t points_touched = 0;
};

struct TrainRecord {
  std::vector<EpochRow> rows;
  Mlp net;
  std::vector<bool> noisy_mask;
  std::vector<WeightedSubset> selections;  // one per refresh
  double selection_ms = 0.0;
  double augmentation_ms = 0.0;
  double training_ms = 0.0;
};

// Header epoch,train_loss,test_loss,test_acc,grad_norm,refreshed,selection_ms,points_touched.
std::string train_record_csv(const TrainRecord& record);

struct NoisyLabels {
  Dataset data;
  std::vector<bool> mask;
};

// floor(frac * n) distinct examples get a uniformly drawn different label.
NoisyLabels inject_label_noise(const Dataset& data, double frac, std::uint64_t seed);

// W <- W - eta * sum_i w_i * grad_i over the rows of x.
void weighted_gradient_step(Mlp& net, const Matrix& x, std::span<const int> labels,
                            std::span<const double> weights, double eta);
// sum_i w_i * grad_i.
Vector weighted_gradient(const Mlp& net, const Matrix& x, std::span<const int> labels,
                         std::span<const double> weights);

struct Evaluation {
  double loss = 0.0;      // mean (1/2)||f - y||^2
  double accuracy = 0.0;  // argmax, ties to the smallest class
};

Evaluation evaluate(const Mlp& net, const Dataset& data);

// |S intersect noisy| / |S|.
double noisy_selection_audit(std::span<const std::size_t> subset, const std::vector<bool>& mask);

// Training rows for one refresh window. Base rows come first in index order,
// then augmented rows grouped by source.
struct TrainingPool {
  Matrix features;
  std::vector<int> labels;
  Vector weights;
  std::vector<std::size_t> origin;  // dataset index behind each row
};

// subset weights are the per-element gamma; augmented rows get gamma / r.
// base lists the weight-1 rows of the full and random regimes.
TrainingPool build_epoch_pool(const Dataset& data, const TrainConfig& config,
                              const WeightedSubset& subset, std::span<const std::size_t> base,
                              std::uint64_t round);

// Shuffled row order split into batches; one batch when batch_size is 0.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t pool_size, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

// Subset chosen at a refresh for the configured baseline.
WeightedSubset refresh_subset(const Mlp& net, const Dataset& data, const TrainConfig& config,
                              std::size_t epoch);

Mlp initial_network(const TrainConfig& config, std::size_t input_dim, std::size_t num_classes);

TrainRecord train(const TrainConfig& config, const Dataset& data, const Dataset& test_data);
// Training from a supplied initial network.
TrainRecord train(const TrainConfig& config, const Dataset& data, const Dataset& test_data,
                  Mlp net);

}  // namespace coreaug

#endif  // COREAUG_TRAINER_HPP_
