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


#include "coreaug/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "coreaug/errors.hpp"
#include "coreaug/model.hpp"
#include "coreaug/rng.hpp"
#include "coreaug/spectrum.hpp"
#include "coreaug/trainer.hpp"

namespace coreaug {

Dataset random_instance(std::size_t n, std::size_t d, std::size_t num_classes,
                        std::uint64_t seed) {
  if (n == 0 || d == 0 || num_classes == 0) throw ConfigError("instance sizes must be >= 1");
  Rng rng(Stream::kData, {seed, 0x6c696eULL});
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.uniform();
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<int>(i < num_classes ? i : rng.index(num_classes));
  return Dataset(std::move(x), std::move(labels), num_classes);
}

Matrix linear_gradient(const Matrix& w, const Matrix& x, std::span<const int> labels,
                       std::span<const double> weights) {
  if (x.cols() != w.rows()) throw ConfigError("feature width does not match W");
  if (labels.size() != x.rows() || weights.size() != x.rows())
    throw ConfigError("labels and weights must match the rows of x");
  const Matrix f = matmul(x, w);  // n x C
  Matrix g(w.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t c = 0; c < w.cols(); ++c) {
      const double r = weights[i] * (f(i, c) - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0));
      if (r == 0.0) continue;
      for (std::size_t a = 0; a < w.rows(); ++a) g(a, c) += r * xi[a];
    }
  }
  return g;
}

namespace {

Matrix apply_transform(const Matrix& x, const Matrix& f) { return matmul_nt(x, f); }

Vector ones(std::size_t n) { return Vector(n, 1.0); }

// Weighted coreset gradient restricted to the subset rows.
Matrix subset_gradient(const Matrix& w, const Matrix& x, std::span<const int> labels,
                       const WeightedSubset& s) {
  const Matrix xs = x.select_rows(s.indices);
  std::vector<int> ys;
  for (std::size_t i : s.indices) ys.push_back(labels[i]);
  return linear_gradient(w, xs, ys, s.weights);
}

struct Kernel {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double beta = 0.0;
};

// Spectrum of D^{1/2} X X^T D^{1/2} for weighted rows.
Kernel weighted_kernel(const Matrix& x, std::span<const double> w) {
  Matrix s = x;
  Kernel k;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double rw = std::sqrt(w[i]);
    double sq = 0.0;
    for (double& v : s.row(i)) {
      sq += v * v;
      v *= rw;
    }
    k.beta = std::max(k.beta, w[i] * sq);
  }
  const Vector sig = svd(matmul_nt(s, s)).sigma;
  k.lambda_max = sig.front();
  k.lambda_min = sig.back();
  return k;
}

void finish_envelope(EnvelopeCheck& c) {
  c.envelope.clear();
  c.pass = true;
  const double rate = 1.0 - c.alpha * c.eta / 2.0;
  for (std::size_t t = 0; t < c.grad_norm.size(); ++t) {
    const double env = std::pow(rate, static_cast<double>(t) / 2.0) * c.offset / std::sqrt(c.alpha);
    c.envelope.push_back(env);
    if (c.grad_norm[t] > env) c.pass = false;
  }
}

void require_pl(const Kernel& k, std::size_t pool) {
  if (!(k.lambda_min > 1e-12 * k.lambda_max))
    throw ConfigError("weighted pool kernel of " + std::to_string(pool) +
                      " rows is singular; the PL constant would be zero");
}

}  // namespace

LinearTransformVerdict linear_transform_bound_check(const Matrix& w, const Matrix& x,
                                                    std::span<const int> labels,
                                                    std::size_t num_classes, const Matrix& f,
                                                    const WeightedSubset& coreset) {
  if (w.cols() != num_classes) throw ConfigError("W must have one column per class");
  if (f.rows() != x.cols() || f.cols() != x.cols()) throw ConfigError("F must be d x d");
  if (coreset.indices.size() != coreset.weights.size())
    throw ConfigError("coreset indices and weights differ in length");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const Matrix fx = apply_transform(x, f);
  LinearTransformVerdict v;
  v.f_norm = spectral_norm(f);

  const Matrix g_full = linear_gradient(w, x, labels, ones(n));
  const Matrix g_core = subset_gradient(w, x, labels, coreset);
  const Matrix g_full_aug = linear_gradient(w, fx, labels, ones(n));
  const Matrix g_core_aug = subset_gradient(w, fx, labels, coreset);
  v.xi = frobenius_norm(g_full - g_core);
  v.lemma_lhs = frobenius_norm(g_full_aug - g_core_aug);
  v.corollary_lhs = frobenius_norm((g_full + g_full_aug) - (g_core + g_core_aug));

  const Matrix out_clean = matmul(x, w);
  const Matrix out_aug = matmul(fx, w);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) {
      const double z = out_aug(i, c) - out_clean(i, c);
      s += z * z;
    }
    v.omega = std::max(v.omega, std::sqrt(s));
  }
  const double spread = std::sqrt(static_cast<double>(d)) * static_cast<double>(n) * v.omega;
  v.lemma_bound = v.f_norm * (v.xi + spread);
  v.corollary_bound = (v.f_norm + 1.0) * v.xi + v.f_norm * spread;
  const auto holds = [](double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12) + 1e-12; };
  v.lemma_pass = holds(v.lemma_lhs, v.lemma_bound);
  v.corollary_pass = holds(v.corollary_lhs, v.corollary_bound);
  return v;
}

nlohmann::json to_json(const EnvelopeCheck& c) {
  return {{"alpha", c.alpha},         {"lambda", c.lambda},
          {"beta", c.beta},           {"eta", c.eta},
          {"G0", c.g0},               {"xi", c.xi},
          {"slack", c.slack},         {"offset", c.offset},
          {"sigma_max", c.sigma_max}, {"lipschitz", c.lipschitz},
          {"epsilon_precondition", c.epsilon_precondition},
          {"pool_size", c.pool_size}, {"grad_norm", c.grad_norm},
          {"envelope", c.envelope},   {"pass", c.pass}};
}

EnvelopeCheck theorem1_envelope_check(const Dataset& data, const SelectionConfig& selection,
                                      const TransformSpec& spec, std::size_t steps,
                                      std::uint64_t seed) {
  spec.validate();
  const std::size_t n = data.size();
  const std::size_t num_classes = data.num_classes();
  Mlp net = Mlp::random({data.dim(), num_classes}, Activation::kTanh, seed);

  Matrix grads(n, net.num_params());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector g = per_example_gradient(net, data.x(i), data.target(i));
    std::copy(g.begin(), g.end(), grads.row(i).begin());
  }
  const GradientProxySet exact = make_proxy_set(grads, data.labels(), num_classes);
  const WeightedCoreset core = select_all_classes(exact, selection, spec.r);
  const WeightedSubset gamma = core.gamma_subset();

  EnvelopeCheck c;
  Vector diff(net.num_params(), 0.0);
  for (std::size_t i = 0; i < n; ++i) axpy_inplace(1.0, grads.row(i), diff);
  for (std::size_t q = 0; q < gamma.indices.size(); ++q)
    axpy_inplace(-gamma.weights[q], grads.row(gamma.indices[q]), diff);
  c.xi = norm2(diff);

  TrainConfig cfg;
  cfg.regime = Regime::kFullPlusCoresetAug;
  cfg.transform = spec;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const TrainingPool pool = build_epoch_pool(data, cfg, gamma, all, 0);
  c.pool_size = pool.labels.size();

  Matrix with_bias(pool.features.rows(), pool.features.cols() + 1, 1.0);
  for (std::size_t i = 0; i < pool.features.rows(); ++i)
    std::copy(pool.features.row(i).begin(), pool.features.row(i).end(), with_bias.row(i).begin());
  const Kernel k = weighted_kernel(with_bias, pool.weights);
  require_pl(k, c.pool_size);
  c.alpha = 2.0 * k.lambda_min;
  c.lambda = k.lambda_max;
  c.beta = k.beta;
  c.eta = c.alpha / (c.lambda * c.beta);

  c.g0 = norm2(weighted_gradient(net, data.features(), data.labels(), ones(n)));
  const LipschitzEstimate lip = estimate_lipschitz(net, data, 200, seed);
  c.lipschitz = std::max(lip.jacobian_lipschitz, lip.output_lipschitz);
  const Matrix xs = data.features().select_rows(gamma.indices);
  c.sigma_max = spectral_norm(jacobian(net, xs));
  c.slack = c.sigma_max > 0.0 ? std::sqrt(c.lipschitz) / c.sigma_max : 0.0;
  c.offset = 2.0 * c.g0 + c.xi + c.slack;
  c.epsilon_precondition =
      c.sigma_max > 0.0 && c.lipschitz > 0.0 &&
      spec.epsilon0 <= 1.0 / (c.sigma_max * std::sqrt(c.lipschitz * static_cast<double>(n)));

  for (std::size_t t = 0; t <= steps; ++t) {
    const Vector g = weighted_gradient(net, pool.features, pool.labels, pool.weights);
    c.grad_norm.push_back(norm2(g));
    if (t < steps) axpy_inplace(-c.eta, g, net.params());
  }
  finish_envelope(c);
  return c;
}

EnvelopeCheck theorem3_envelope_check(const Dataset& data, const Matrix& f,
                                      const SelectionConfig& selection, std::size_t steps,
                                      std::uint64_t seed) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const std::size_t num_classes = data.num_classes();
  if (f.rows() != d || f.cols() != d) throw ConfigError("F must be d x d");
  Matrix w(d, num_classes);
  Rng rng(Stream::kInit, {seed, 0x6c696eULL});
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : w.data()) v = rng.uniform(-scale, scale);

  const Matrix& x = data.features();
  Matrix grads(n, d * num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix xi = x.row_block(i, i + 1);
    const int yi = data.label(i);
    const Matrix g = linear_gradient(w, xi, std::span<const int>(&yi, 1), ones(1));
    std::copy(g.data().begin(), g.data().end(), grads.row(i).begin());
  }
  const WeightedCoreset core =
      select_all_classes(make_proxy_set(grads, data.labels(), num_classes), selection, 1);
  const WeightedSubset gamma = core.gamma_subset();
  const LinearTransformVerdict lt =
      linear_transform_bound_check(w, x, data.labels(), num_classes, f, gamma);

  const Matrix fx = apply_transform(x, f);
  const Matrix xs = x.select_rows(gamma.indices);
  const Matrix pool = vstack(xs, fx.select_rows(gamma.indices));
  std::vector<int> labels;
  for (std::size_t i : gamma.indices) labels.push_back(data.label(i));
  labels.insert(labels.end(), labels.begin(), labels.end());
  Vector weights = gamma.weights;
  weights.insert(weights.end(), gamma.weights.begin(), gamma.weights.end());

  EnvelopeCheck c;
  c.pool_size = pool.rows();
  const Kernel k = weighted_kernel(pool, weights);
  require_pl(k, c.pool_size);
  c.alpha = 2.0 * k.lambda_min;
  c.lambda = k.lambda_max;
  c.beta = k.beta;
  c.eta = c.alpha / (c.lambda * c.beta);
  c.xi = lt.xi;
  c.g0 = frobenius_norm(linear_gradient(w, x, data.labels(), ones(n)) +
                        linear_gradient(w, fx, data.labels(), ones(n)));
  c.slack = lt.f_norm * std::sqrt(static_cast<double>(d)) * static_cast<double>(n) * lt.omega;
  c.offset = c.g0 + (lt.f_norm + 1.0) * c.xi + c.slack;
  c.epsilon_precondition = true;
  for (std::size_t t = 0; t <= steps; ++t) {
    const Matrix g = linear_gradient(w, pool, labels, weights);
    c.grad_norm.push_back(frobenius_norm(g));
    if (t < steps) w -= c.eta * g;
  }
  finish_envelope(c);
  return c;
}

nlohmann::json to_json(const AuditSummary& s) {
  return {{"instances", s.instances},
          {"passed", s.passed},
          {"skipped", s.skipped},
          {"worst_margin", s.worst_margin},
          {"all_pass", s.all_pass()}};
}

namespace {

void tally(AuditSummary& s, bool pass, double margin) {
  if (s.instances == s.skipped || margin < s.worst_margin) s.worst_margin = margin;
  ++s.instances;
  if (pass) ++s.passed;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

}  // namespace

AuditSummary lemma4_audit(std::size_t instances, std::uint64_t seed) {
  AuditSummary sum;
  for (std::size_t s = 0; s < instances; ++s) {
    Rng rng(Stream::kMonteCarlo, {seed, 0x4c34ULL, s});
    const std::size_t num_classes = pick(rng, 2, 3);
    const std::size_t n = pick(rng, 10, 60);
    const std::size_t d = pick(rng, 2, 6);
    std::size_t h = pick(rng, 3, 8);
    while (h > 1 && d * h + h + h * num_classes + num_classes > 200) --h;
    const Dataset data = random_instance(n, d, num_classes, stream_key({seed, s}));
    const Mlp net = Mlp::random({d, h, num_classes}, Activation::kTanh, stream_key({seed, s, 1}));
    SelectionConfig sel;
    sel.fraction = 0.1 + 0.4 * rng.uniform();
    sel.seed = s;
    const WeightedCoreset core =
        select_all_classes(gradient_proxy(net, data, ProxyMode::kLastLayer), sel, 1);
    const NtkBoundVerdict v = coreset_ntk_bound_check(
        jacobian(net, data.features()), residuals(net, data), core.gamma_subset());
    tally(sum, v.pass, v.margin);
  }
  return sum;
}

AuditSummary linear_transform_audit(std::size_t instances, std::uint64_t seed) {
  AuditSummary sum;
  for (std::size_t s = 0; s < instances; ++s) {
    Rng rng(Stream::kMonteCarlo, {seed, 0x4c35ULL, s});
    const std::size_t num_classes = pick(rng, 2, 4);
    const std::size_t n = pick(rng, 10, 60);
    const std::size_t d = pick(rng, 2, 10);
    const Dataset data = random_instance(n, d, num_classes, stream_key({seed, s}));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix w(d, num_classes);
    for (double& v : w.data()) v = rng.uniform(-scale, scale);
    const double spread = 0.3 * rng.uniform();
    Matrix f = Matrix::identity(d);
    f += (spread * scale) * gaussian(rng, d, d);
    Matrix grads(n, d * num_classes);
    for (std::size_t i = 0; i < n; ++i) {
      const int yi = data.label(i);
      const Vector one(1, 1.0);
      const Matrix g = linear_gradient(w, data.features().row_block(i, i + 1),
                                       std::span<const int>(&yi, 1), one);
      std::copy(g.data().begin(), g.data().end(), grads.row(i).begin());
    }
    SelectionConfig sel;
    sel.fraction = 0.1 + 0.4 * rng.uniform();
    const WeightedCoreset core =
        select_all_classes(make_proxy_set(grads, data.labels(), num_classes), sel, 1);
    const LinearTransformVerdict v = linear_transform_bound_check(
        w, data.features(), data.labels(), num_classes, f, core.gamma_subset());
    const double margin = std::min(v.lemma_bound - v.lemma_lhs, v.corollary_bound - v.corollary_lhs);
    tally(sum, v.lemma_pass && v.corollary_pass, margin);
  }
  return sum;
}

AuditSummary weyl_audit(std::size_t trials, std::uint64_t seed) {
  AuditSummary sum;
  for (std::size_t s = 0; s < trials; ++s) {
    Rng rng(Stream::kMonteCarlo, {seed, 0x5765ULL, s});
    const std::size_t rows = pick(rng, 1, 40);
    const std::size_t cols = pick(rng, 1, 60);
    const Matrix j = gaussian(rng, rows, cols);
    const double scale = std::pow(10.0, -6.0 * rng.uniform());
    const Matrix e = scale * gaussian(rng, rows, cols);
    const WeylVerdict v = weyl_check(svd(j).sigma, svd(j + e).sigma, spectral_norm(e));
    tally(sum, v.pass, -v.max_violation);
  }
  return sum;
}

AuditSummary eigvec_audit(std::size_t trials, std::uint64_t seed) {
  AuditSummary sum;
  for (std::size_t s = 0; s < trials; ++s) {
    Rng rng(Stream::kMonteCarlo, {seed, 0x4576ULL, s});
    const std::size_t n = pick(rng, 2, 8);
    const std::size_t m = pick(rng, n, 12);
    const Matrix u = svd(gaussian(rng, n, n)).u;
    const Matrix v = svd(gaussian(rng, m, n)).u;
    const double gap = 0.5 + rng.uniform();
    Vector sigma(n);
    for (std::size_t i = 0; i < n; ++i) sigma[i] = gap * static_cast<double>(n - i);
    const Matrix j = matmul_nt(matmul(u, Matrix::diagonal(sigma)), v);
    Matrix e = gaussian(rng, n, m);
    const double target = 0.75 * gap * rng.uniform();
    e *= target / spectral_norm(e);
    const EigvecReport rep = eigvec_bound_check(j, e);
    if (!rep.precondition_met) {
      ++sum.instances;
      ++sum.skipped;
      continue;
    }
    double margin = 0.0;
    bool first = true;
    for (const auto& en : rep.entries) {
      margin = first ? en.bound - en.distance : std::min(margin, en.bound - en.distance);
      first = false;
    }
    tally(sum, rep.pass, margin);
  }
  return sum;
}

}  // namespace coreaug
