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
#include <chrono>
#include <cmath>
#include <sstream>

#include "coreaug/errors.hpp"
#include "coreaug/rng.hpp"

namespace coreaug {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kCoresetOnly:
      return "coreset_only";
    case Regime::kFullPlusCoresetAug:
      return "full_plus_coreset_aug";
    case Regime::kRandomPlusCoresetAug:
      return "random_plus_coreset_aug";
  }
  return "unknown";
}

Regime parse_regime(const std::string& s) {
  if (s == "coreset_only") return Regime::kCoresetOnly;
  if (s == "full_plus_coreset_aug") return Regime::kFullPlusCoresetAug;
  if (s == "random_plus_coreset_aug") return Regime::kRandomPlusCoresetAug;
  throw ConfigError("unknown regime '" + s + "'");
}

std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::kOurs:
      return "ours";
    case Baseline::kRandom:
      return "random";
    case Baseline::kMaxLoss:
      return "max_loss";
  }
  return "unknown";
}

Baseline parse_baseline(const std::string& s) {
  if (s == "ours") return Baseline::kOurs;
  if (s == "random") return Baseline::kRandom;
  if (s == "max_loss") return Baseline::kMaxLoss;
  throw ConfigError("unknown baseline '" + s + "'");
}

double LrSchedule::at(std::size_t epoch) const {
  if (decay_epochs == 0) return initial;
  return initial * std::pow(factor, static_cast<double>(epoch / decay_epochs));
}

void LrSchedule::validate() const {
  if (!(initial >= 0.0) || !std::isfinite(initial)) throw ConfigError("learning rate must be >= 0");
  if (!(factor > 0.0 && factor <= 1.0)) throw ConfigError("lr decay factor must be in (0, 1]");
}

void TrainConfig::validate() const {
  if (refresh_r < 1) throw ConfigError("refresh_r must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(label_noise_frac >= 0.0 && label_noise_frac < 1.0))
    throw ConfigError("label_noise_frac must be in [0, 1)");
  if (!(random_fraction > 0.0 && random_fraction <= 1.0))
    throw ConfigError("random_fraction must be in (0, 1]");
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("hidden layer sizes must be >= 1");
  lr.validate();
  selection.validate();
  transform.validate();
  if (baseline != Baseline::kOurs && selection.stop != StopRule::kFixedSize)
    throw ConfigError("random and max_loss baselines need a fixed_size budget");
}

std::string train_record_csv(const TrainRecord& record) {
  std::ostringstream os;
  os << "epoch,train_loss,test_loss,test_acc,grad_norm,refreshed,selection_ms,points_touched\n";
  for (const auto& r : record.rows) {
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.test_loss) << ','
       << format_double(r.test_accuracy) << ',' << format_double(r.grad_norm) << ','
       << (r.refreshed ? 1 : 0) << ',' << format_double(r.selection_ms) << ','
       << r.points_touched << '\n';
  }
  return os.str();
}

NoisyLabels inject_label_noise(const Dataset& data, double frac, std::uint64_t seed) {
  if (!(frac >= 0.0 && frac < 1.0)) throw ConfigError("label noise fraction must be in [0, 1)");
  const std::size_t n = data.size();
  const auto count = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  std::vector<bool> mask(n, false);
  if (count == 0) return {data, mask};
  const std::size_t num_classes = data.num_classes();
  if (num_classes < 2) throw ConfigError("label noise needs at least two classes");
  Rng rng(Stream::kLabelNoise, {seed});
  std::vector<int> labels = data.labels();
  for (std::size_t i : rng.sample(n, count)) {
    const auto shift = 1 + rng.index(num_classes - 1);
    labels[i] = static_cast<int>((static_cast<std::size_t>(labels[i]) + shift) % num_classes);
    mask[i] = true;
  }
  return {data.with_labels(std::move(labels)), mask};
}

Vector weighted_gradient(const Mlp& net, const Matrix& x, std::span<const int> labels,
                         std::span<const double> weights) {
  if (x.rows() != labels.size() || x.rows() != weights.size())
    throw ConfigError("batch rows, labels and weights must agree");
  if (x.cols() != net.input_dim()) throw ConfigError("batch width does not match the network");
  Vector grad(net.num_params(), 0.0);
  const std::size_t num_out = net.output_dim();
  Vector seed(num_out);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (!(weights[i] >= 0.0)) throw ConfigError("weights must be >= 0");
    if (weights[i] == 0.0) continue;
    const ForwardTrace tr = forward_trace(net, x.row(i));
    const Vector& f = tr.activations.back();
    for (std::size_t c = 0; c < num_out; ++c)
      seed[c] = f[c] - (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0);
    backward(net, tr, seed, weights[i], grad);
  }
  return grad;
}

void weighted_gradient_step(Mlp& net, const Matrix& x, std::span<const int> labels,
                            std::span<const double> weights, double eta) {
  const Vector g = weighted_gradient(net, x, labels, weights);
  axpy_inplace(-eta, g, net.params());
}

Evaluation evaluate(const Mlp& net, const Dataset& data) {
  Evaluation ev;
  if (data.size() == 0) return ev;
  const Matrix f = forward(net, data.features());
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = f.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    if (static_cast<int>(best) == data.label(i)) ++correct;
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double r = row[c] - (static_cast<int>(c) == data.label(i) ? 1.0 : 0.0);
      s += r * r;
    }
    total += 0.5 * s;
  }
  ev.loss = total / static_cast<double>(data.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

double noisy_selection_audit(std::span<const std::size_t> subset, const std::vector<bool>& mask) {
  if (subset.empty()) return 0.0;
  std::size_t noisy = 0;
  for (std::size_t i : subset) {
    if (i >= mask.size()) {
      if (mask.empty()) continue;
      throw ConfigError("subset index outside the noise mask");
    }
    if (mask[i]) ++noisy;
  }
  return static_cast<double>(noisy) / static_cast<double>(subset.size());
}

TrainingPool build_epoch_pool(const Dataset& data, const TrainConfig& config,
                              const WeightedSubset& subset, std::span<const std::size_t> base,
                              std::uint64_t round) {
  if (subset.indices.size() != subset.weights.size())
    throw ConfigError("subset indices and weights differ in length");
  const std::size_t r = config.transform.r;
  // Sort the subset by index so pool order does not depend on pick order.
  std::vector<std::size_t> order(subset.indices.size());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return subset.indices[a] < subset.indices[b]; });
  std::vector<std::size_t> sel;
  Vector sel_w;
  for (std::size_t q : order) {
    sel.push_back(subset.indices[q]);
    sel_w.push_back(subset.weights[q]);
  }

  std::vector<std::size_t> base_rows;
  Vector base_w;
  if (config.regime == Regime::kCoresetOnly) {
    base_rows = sel;
    base_w = sel_w;
  } else {
    base_rows.assign(base.begin(), base.end());
    std::sort(base_rows.begin(), base_rows.end());
    base_w.assign(base_rows.size(), 1.0);
  }

  TrainingPool pool;
  const std::size_t d = data.dim();
  const std::size_t aug_rows = config.augment ? sel.size() * r : 0;
  pool.features = Matrix(base_rows.size() + aug_rows, d);
  std::size_t row = 0;
  for (std::size_t q = 0; q < base_rows.size(); ++q, ++row) {
    auto src = data.x(base_rows[q]);
    std::copy(src.begin(), src.end(), pool.features.row(row).begin());
    pool.labels.push_back(data.label(base_rows[q]));
    pool.weights.push_back(base_w[q]);
    pool.origin.push_back(base_rows[q]);
  }
  if (aug_rows > 0) {
    const Matrix xs = data.features().select_rows(sel);
    const AugmentedSet aug = perturb(config.transform, xs, round);
    for (std::size_t a = 0; a < aug.origin.size(); ++a, ++row) {
      auto src = aug.features.row(a);
      std::copy(src.begin(), src.end(), pool.features.row(row).begin());
      const std::size_t o = aug.origin[a];
      pool.labels.push_back(data.label(sel[o]));
      pool.weights.push_back(sel_w[o] / static_cast<double>(r));
      pool.origin.push_back(sel[o]);
    }
  }
  return pool;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t pool_size, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) order[i] = i;
  std::vector<std::vector<std::size_t>> batches;
  if (batch_size == 0 || batch_size >= pool_size) {
    if (pool_size > 0) batches.push_back(std::move(order));
    return batches;
  }
  Rng rng(Stream::kBatches, {seed, epoch});
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t s = 0; s < pool_size; s += batch_size) {
    const std::size_t e = std::min(pool_size, s + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                         order.begin() + static_cast<std::ptrdiff_t>(e));
  }
  return batches;
}

WeightedSubset refresh_subset(const Mlp& net, const Dataset& data, const TrainConfig& config,
                              std::size_t epoch) {
  const std::uint64_t key = stream_key({config.seed, config.selection.seed, epoch});
  switch (config.baseline) {
    case Baseline::kOurs: {
      SelectionConfig sc = config.selection;
      sc.seed = key;
      const GradientProxySet proxies = gradient_proxy(net, data, config.proxy_mode);
      return select_all_classes(proxies, sc, config.transform.r).gamma_subset();
    }
    case Baseline::kRandom: {
      const auto k = class_budgets(config.selection, data.labels(), data.num_classes());
      return random_subset(k, data.labels(), data.num_classes(), key);
    }
    case Baseline::kMaxLoss: {
      const auto k = class_budgets(config.selection, data.labels(), data.num_classes());
      const Vector losses = per_example_loss(net, data);
      return max_loss_subset(losses, k, data.labels(), data.num_classes());
    }
  }
  throw ConfigError("unknown baseline");
}

Mlp initial_network(const TrainConfig& config, std::size_t input_dim, std::size_t num_classes) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(num_classes);
  return Mlp::random(sizes, config.activation, config.seed);
}

TrainRecord train(const TrainConfig& config, const Dataset& data, const Dataset& test_data) {
  return train(config, data, test_data,
               initial_network(config, data.dim(), data.num_classes()));
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

TrainRecord train(const TrainConfig& config, const Dataset& data, const Dataset& test_data,
                  Mlp net) {
  config.validate();
  if (net.input_dim() != data.dim() || net.output_dim() != data.num_classes())
    throw ConfigError("network shape does not match the dataset");
  if (test_data.size() > 0 && test_data.dim() != data.dim())
    throw ConfigError("test data width differs from training data");

  TrainRecord rec;
  Dataset train_data = data;
  if (config.label_noise_frac > 0.0) {
    NoisyLabels noisy = inject_label_noise(data, config.label_noise_frac, config.seed);
    train_data = std::move(noisy.data);
    rec.noisy_mask = std::move(noisy.mask);
  } else {
    rec.noisy_mask.assign(data.size(), false);
  }

  std::vector<std::size_t> base;
  if (config.regime == Regime::kFullPlusCoresetAug) {
    base.resize(train_data.size());
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = i;
  } else if (config.regime == Regime::kRandomPlusCoresetAug) {
    SelectionConfig share;
    share.fraction = config.random_fraction;
    const auto k = class_budgets(share, train_data.labels(), train_data.num_classes());
    base = random_subset(k, train_data.labels(), train_data.num_classes(),
                         stream_key({config.seed, 0x62617365ULL}))
               .indices;
  }

  std::vector<bool> touched(train_data.size(), false);
  std::size_t touched_count = 0;
  TrainingPool pool;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRow row;
    row.epoch = epoch;
    if (epoch % config.refresh_r == 0) {
      auto t0 = Clock::now();
      WeightedSubset subset;
      try {
        subset = refresh_subset(net, train_data, config, epoch);
      } catch (const Error& e) {
        const std::string msg = "epoch " + std::to_string(epoch) + ": " + e.what();
        if (e.kind() == ErrorKind::kConfig) throw ConfigError(msg);
        if (e.kind() == ErrorKind::kData) throw DataError(msg);
        throw NumericalError(msg, 0.0);
      }
      row.selection_ms = ms_since(t0);
      rec.selection_ms += row.selection_ms;
      t0 = Clock::now();
      pool = build_epoch_pool(train_data, config, subset, base, epoch);
      rec.augmentation_ms += ms_since(t0);
      rec.selections.push_back(std::move(subset));
      row.refreshed = true;
    }
    for (std::size_t o : pool.origin) {
      if (!touched[o]) {
        touched[o] = true;
        ++touched_count;
      }
    }
    row.points_touched = touched_count;

    const auto t0 = Clock::now();
    const double eta = config.lr.at(epoch);
    for (const auto& batch : epoch_batches(pool.labels.size(), config.batch_size, config.seed, epoch)) {
      const Matrix xb = pool.features.select_rows(batch);
      std::vector<int> yb;
      Vector wb;
      for (std::size_t i : batch) {
        yb.push_back(pool.labels[i]);
        wb.push_back(pool.weights[i]);
      }
      double wb_sum = 0.0;
      for (double w : wb) wb_sum += w;
      // Weighted mean over the batch keeps the step size independent of gamma.
      if (wb_sum > 0.0) weighted_gradient_step(net, xb, yb, wb, eta / wb_sum);
    }
    for (double p : net.params())
      if (!std::isfinite(p))
        throw NumericalError("training diverged at epoch " + std::to_string(epoch), 0.0);
    rec.training_ms += ms_since(t0);

    double wsum = 0.0;
    double wloss = 0.0;
    const Matrix f = forward(net, pool.features);
    for (std::size_t i = 0; i < pool.labels.size(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < f.cols(); ++c) {
        const double r = f(i, c) - (static_cast<int>(c) == pool.labels[i] ? 1.0 : 0.0);
        s += r * r;
      }
      wloss += pool.weights[i] * 0.5 * s;
      wsum += pool.weights[i];
    }
    row.train_loss = wsum > 0.0 ? wloss / wsum : 0.0;
    row.grad_norm = norm2(weighted_gradient(net, pool.features, pool.labels, pool.weights));
    const Evaluation ev = evaluate(net, test_data);
    row.test_loss = ev.loss;
    row.test_accuracy = ev.accuracy;
    rec.rows.push_back(row);
  }
  rec.net = std::move(net);
  return rec;
}

}  // namespace coreaug
