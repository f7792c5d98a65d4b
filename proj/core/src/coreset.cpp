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
#include <limits>

#include "coreaug/errors.hpp"
#include "coreaug/parallel.hpp"
#include "coreaug/rng.hpp"

namespace coreaug {

std::string to_string(Engine e) {
  switch (e) {
    case Engine::kNaive:
      return "naive";
    case Engine::kLazy:
      return "lazy";
    case Engine::kStochastic:
      return "stochastic";
  }
  return "unknown";
}

Engine parse_engine(const std::string& s) {
  if (s == "naive") return Engine::kNaive;
  if (s == "lazy") return Engine::kLazy;
  if (s == "stochastic") return Engine::kStochastic;
  throw ConfigError("unknown engine '" + s + "'");
}

std::string to_string(StopRule s) {
  return s == StopRule::kXiThreshold ? "xi_threshold" : "fixed_size";
}

StopRule parse_stop_rule(const std::string& s) {
  if (s == "xi_threshold") return StopRule::kXiThreshold;
  if (s == "fixed_size") return StopRule::kFixedSize;
  throw ConfigError("unknown stop rule '" + s + "'");
}

std::string to_string(Objective o) {
  return o == Objective::kFrobenius ? "frobenius" : "facility_location";
}

Objective parse_objective(const std::string& s) {
  if (s == "frobenius") return Objective::kFrobenius;
  if (s == "facility_location") return Objective::kFacilityLocation;
  throw ConfigError("unknown objective '" + s + "'");
}

void SelectionConfig::validate() const {
  if (stop == StopRule::kXiThreshold) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw ConfigError("xi must be finite and >= 0");
  } else if (k_per_class) {
    if (*k_per_class < 1) throw ConfigError("k per class must be >= 1");
  } else if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("fraction must be in (0, 1]");
  }
  if (c1 && (!(*c1 >= 0.0) || !std::isfinite(*c1))) throw ConfigError("c1 must be finite and >= 0");
}

std::size_t SelectionConfig::budget(std::size_t class_size) const {
  if (k_per_class) return std::min(*k_per_class, class_size);
  const double raw = std::ceil(fraction * static_cast<double>(class_size) - 1e-9);
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
  return std::min(k, class_size);
}

GreedyParams resolve_params(const SelectionConfig& config, std::size_t class_size,
                            std::size_t class_id) {
  config.validate();
  GreedyParams p;
  p.stop = config.stop;
  p.xi = config.xi;
  p.objective = config.objective;
  p.seed = stream_key({config.seed, class_id});
  p.c1 = config.c1;
  p.k = config.stop == StopRule::kFixedSize ? config.budget(class_size) : class_size;
  if (config.stochastic_sample > 0) {
    p.sample = config.stochastic_sample;
  } else if (config.stop == StopRule::kFixedSize) {
    const double ratio = static_cast<double>(class_size) / static_cast<double>(p.k);
    p.sample = static_cast<std::size_t>(std::ceil(ratio * std::log(100.0)));
  } else {
    p.sample = (class_size + 7) / 8;
  }
  p.sample = std::max<std::size_t>(p.sample, 1);
  return p;
}

std::vector<std::vector<std::size_t>> class_members(const GradientProxySet& proxies) {
  std::vector<std::vector<std::size_t>> members(proxies.num_classes);
  for (std::size_t i = 0; i < proxies.labels.size(); ++i) {
    const int y = proxies.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= proxies.num_classes)
      throw DataError("proxy label out of range at index " + std::to_string(i));
    members[static_cast<std::size_t>(y)].push_back(i);
  }
  return members;
}

Matrix distance_matrix(const GradientProxySet& proxies, std::size_t cls) {
  const auto members = class_members(proxies);
  if (cls >= members.size()) throw ConfigError("class out of range");
  return pairwise_distances(proxies.proxies.select_rows(members[cls]));
}

WeightedSubset WeightedCoreset::gamma_subset() const {
  WeightedSubset s;
  s.indices = indices;
  for (std::size_t g : gamma) s.weights.push_back(static_cast<double>(g));
  return s;
}

WeightedSubset WeightedCoreset::rho_subset() const { return {indices, rho}; }

WeightedCoreset select_all_classes(const GradientProxySet& proxies,
                                   const SelectionConfig& config, std::size_t r) {
  config.validate();
  if (r < 1) throw ConfigError("r must be >= 1");
  if (proxies.labels.size() != proxies.proxies.rows())
    throw DataError("proxy labels do not match proxy rows");
  const auto members = class_members(proxies);
  const std::size_t num_classes = members.size();
  std::vector<ClassCoreset> per(num_classes);
  parallel_for(num_classes, [&](std::size_t c) {
    const auto& idx = members[c];
    if (idx.empty()) return;
    const Matrix d = pairwise_distances(proxies.proxies.select_rows(idx));
    const GreedyParams params = resolve_params(config, idx.size(), c);
    GreedyResult res = run_engine(d, params, config.engine);
    ClassCoreset& cc = per[c];
    cc.cls = c;
    cc.gamma = compute_weights(d, res.selected);
    cc.rho = divide_weights(cc.gamma, r);
    const double c1 = params.c1 ? *params.c1 : default_c1(d);
    cc.g_frobenius = g_frobenius(d, res.selected, c1);
    for (std::size_t s : res.selected) cc.indices.push_back(idx[s]);
    cc.trace = std::move(res.trace);
    cc.evaluations = res.evaluations;
  });
  WeightedCoreset out;
  out.engine = config.engine;
  out.seed = config.seed;
  out.r = r;
  double sq = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (members[c].empty()) {
      out.warnings.push_back("class " + std::to_string(c) + " is empty; skipped");
      continue;
    }
    ClassCoreset& cc = per[c];
    out.indices.insert(out.indices.end(), cc.indices.begin(), cc.indices.end());
    out.gamma.insert(out.gamma.end(), cc.gamma.begin(), cc.gamma.end());
    out.rho.insert(out.rho.end(), cc.rho.begin(), cc.rho.end());
    sq += cc.g_frobenius * cc.g_frobenius;
    out.classes.push_back(std::move(cc));
  }
  out.g_frobenius = std::sqrt(sq);
  return out;
}

nlohmann::json to_json(const WeightedCoreset& coreset) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& cc : coreset.classes) {
    classes.push_back({{"class", cc.cls},
                       {"indices", cc.indices},
                       {"gamma", cc.gamma},
                       {"rho", cc.rho},
                       {"g_frobenius", cc.g_frobenius},
                       {"trace", cc.trace}});
  }
  nlohmann::json j = {{"classes", classes}, {"engine", to_string(coreset.engine)}, {"seed", coreset.seed}};
  if (!coreset.warnings.empty()) j["warnings"] = coreset.warnings;
  return j;
}

namespace {

std::vector<std::vector<std::size_t>> members_of(std::span<const int> labels,
                                                 std::size_t num_classes) {
  std::vector<std::vector<std::size_t>> m(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
      throw DataError("label out of range at index " + std::to_string(i));
    m[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return m;
}

void check_budgets(std::span<const std::size_t> k, const std::vector<std::vector<std::size_t>>& m) {
  if (k.size() != m.size()) throw ConfigError("one budget per class required");
  for (std::size_t c = 0; c < m.size(); ++c)
    if (k[c] > m[c].size())
      throw ConfigError("k = " + std::to_string(k[c]) + " exceeds class " + std::to_string(c) +
                        " size " + std::to_string(m[c].size()));
}

void push_class(WeightedSubset& out, std::span<const std::size_t> picked, std::size_t n_c) {
  if (picked.empty()) return;
  const double w = static_cast<double>(n_c) / static_cast<double>(picked.size());
  for (std::size_t i : picked) {
    out.indices.push_back(i);
    out.weights.push_back(w);
  }
}

}  // namespace

std::vector<std::size_t> class_budgets(const SelectionConfig& config, std::span<const int> labels,
                                       std::size_t num_classes) {
  const auto m = members_of(labels, num_classes);
  std::vector<std::size_t> k(num_classes, 0);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (!m[c].empty()) k[c] = std::min(config.budget(m[c].size()), m[c].size());
  return k;
}

WeightedSubset max_loss_subset(std::span<const double> losses,
                               std::span<const std::size_t> k_per_class,
                               std::span<const int> labels, std::size_t num_classes) {
  if (losses.size() != labels.size()) throw ConfigError("losses and labels differ in length");
  const auto m = members_of(labels, num_classes);
  check_budgets(k_per_class, m);
  WeightedSubset out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> order = m[c];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
    order.resize(k_per_class[c]);
    push_class(out, order, m[c].size());
  }
  return out;
}

WeightedSubset max_loss_subset(std::span<const double> losses, std::size_t k,
                               std::span<const int> labels, std::size_t num_classes) {
  std::vector<std::size_t> ks(num_classes, k);
  return max_loss_subset(losses, ks, labels, num_classes);
}

WeightedSubset random_subset(std::span<const std::size_t> k_per_class,
                             std::span<const int> labels, std::size_t num_classes,
                             std::uint64_t seed) {
  const auto m = members_of(labels, num_classes);
  check_budgets(k_per_class, m);
  WeightedSubset out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    Rng rng(Stream::kRandomFraction, {seed, c});
    std::vector<std::size_t> picked;
    for (std::size_t p : rng.sample(m[c].size(), k_per_class[c])) picked.push_back(m[c][p]);
    std::sort(picked.begin(), picked.end());
    push_class(out, picked, m[c].size());
  }
  return out;
}

WeightedSubset random_subset(std::size_t n, std::size_t k, std::span<const int> labels,
                             std::size_t num_classes, std::uint64_t seed) {
  if (n != labels.size()) throw ConfigError("n does not match label count");
  std::vector<std::size_t> ks(num_classes, k);
  return random_subset(ks, labels, num_classes, seed);
}

AlignmentAudit alignment_error(const GradientProxySet& proxies, const WeightedSubset& coreset) {
  if (coreset.indices.size() != coreset.weights.size())
    throw ConfigError("coreset indices and weights differ in length");
  const auto members = class_members(proxies);
  const std::size_t p = proxies.proxies.cols();
  const std::size_t num_classes = members.size();
  std::vector<std::vector<std::size_t>> sel(num_classes);
  std::vector<Vector> approx(num_classes, Vector(p, 0.0));
  for (std::size_t q = 0; q < coreset.indices.size(); ++q) {
    const std::size_t i = coreset.indices[q];
    if (i >= proxies.proxies.rows()) throw ConfigError("coreset index out of range");
    const auto c = static_cast<std::size_t>(proxies.labels[i]);
    sel[c].push_back(i);
    axpy_inplace(coreset.weights[q], proxies.proxies.row(i), approx[c]);
  }
  AlignmentAudit a;
  a.class_error.assign(num_classes, 0.0);
  a.class_assignment_sum.assign(num_classes, 0.0);
  a.class_g_frobenius.assign(num_classes, 0.0);
  a.class_bound.assign(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    Vector full(p, 0.0);
    for (std::size_t i : members[c]) axpy_inplace(1.0, proxies.proxies.row(i), full);
    for (std::size_t j = 0; j < p; ++j) full[j] -= approx[c][j];
    a.class_error[c] = norm2(full);
    if (members[c].empty()) continue;
    double l1 = 0.0;
    double sq = 0.0;
    for (std::size_t i : members[c]) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : sel[c]) {
        double s = 0.0;
        auto gi = proxies.proxies.row(i);
        auto gj = proxies.proxies.row(j);
        for (std::size_t t = 0; t < p; ++t) s += (gi[t] - gj[t]) * (gi[t] - gj[t]);
        best = std::min(best, std::sqrt(s));
      }
      if (sel[c].empty()) {
        double s = 0.0;
        for (double v : proxies.proxies.row(i)) s += v * v;
        best = std::sqrt(s);
      }
      l1 += best;
      sq += best * best;
    }
    a.class_assignment_sum[c] = l1;
    a.class_g_frobenius[c] = std::sqrt(sq);
    a.class_bound[c] = std::sqrt(static_cast<double>(members[c].size())) * a.class_g_frobenius[c];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    a.error += a.class_error[c];
    a.bound += a.class_bound[c];
  }
  return a;
}

NtkBoundVerdict coreset_ntk_bound_check(const Matrix& jac, const Matrix& res,
                                        const WeightedSubset& coreset, std::optional<double> xi) {
  const std::size_t n = res.rows();
  const std::size_t num_out = res.cols();
  if (jac.rows() != n * num_out) throw ConfigError("Jacobian rows must equal n * C");
  if (coreset.indices.size() != coreset.weights.size())
    throw ConfigError("coreset indices and weights differ in length");
  const std::size_t m = jac.cols();
  Vector full(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < num_out; ++c) axpy_inplace(res(i, c), jac.row(i * num_out + c), full);
  Vector approx(m, 0.0);
  double lhs_sq = 0.0;
  double r_sq = 0.0;
  for (std::size_t q = 0; q < coreset.indices.size(); ++q) {
    const std::size_t i = coreset.indices[q];
    if (i >= n) throw ConfigError("coreset index out of range");
    const double w = coreset.weights[q];
    for (std::size_t c = 0; c < num_out; ++c) {
      auto row = jac.row(i * num_out + c);
      axpy_inplace(w * res(i, c), row, approx);
      const double rn = norm2(row);
      lhs_sq += w * w * rn * rn;
      r_sq += res(i, c) * res(i, c);
    }
  }
  NtkBoundVerdict v;
  Vector diff(m);
  for (std::size_t t = 0; t < m; ++t) diff[t] = full[t] - approx[t];
  v.xi = xi ? *xi : norm2(diff);
  v.full_alignment = norm2(full);
  v.residual_norm = std::sqrt(r_sq);
  v.lhs = std::sqrt(lhs_sq);
  const double num = std::abs(v.full_alignment - v.xi);
  if (num == 0.0)
    v.rhs = 0.0;
  else
    v.rhs = v.residual_norm > 0.0 ? num / v.residual_norm : std::numeric_limits<double>::infinity();
  v.margin = v.lhs - v.rhs;
  v.pass = v.lhs >= v.rhs * (1.0 - 1e-12) - 1e-12;
  return v;
}

}  // namespace coreaug
