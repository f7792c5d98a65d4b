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


#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "coreaug/coreset.hpp"
#include "coreaug/errors.hpp"
#include "coreaug/rng.hpp"

namespace coreaug {

Matrix pairwise_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pi = points.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto pj = points.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c) {
        const double diff = pi[c] - pj[c];
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return d;
}

double default_c1(const Matrix& d) {
  double mx = 0.0;
  for (double v : d.data()) mx = std::max(mx, v);
  return mx > 0.0 ? 2.0 * mx : 1.0;
}

double g_frobenius(const Matrix& d, std::span<const std::size_t> s, double c1) {
  const std::size_t n = d.rows();
  if (s.empty()) return std::sqrt(static_cast<double>(n)) * c1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : s) best = std::min(best, d(i, j));
    total += best * best;
  }
  return std::sqrt(total);
}

double facility_location_value(const Matrix& d, std::span<const std::size_t> s) {
  if (s.empty()) return 0.0;
  double cap = 0.0;
  for (double v : d.data()) cap = std::max(cap, v);
  double total = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : s) best = std::min(best, d(i, j));
    total += cap - best;
  }
  return total;
}

namespace {

// Current per-point distance to the selection. Gains are sums of
// per-point nonnegative decreases, so they can only shrink as the selection
// grows, also in floating point; that makes stale gains valid upper bounds.
class CoverState {
 public:
  CoverState(const Matrix& d, const GreedyParams& p) : d_(d), squared_(p.objective == Objective::kFrobenius) {
    const std::size_t n = d.rows();
    if (n == 0) throw ConfigError("greedy selection on an empty class");
    if (d.cols() != n) throw ConfigError("distance matrix must be square");
    if (p.stop == StopRule::kFixedSize) {
      if (p.k < 1) throw ConfigError("k must be >= 1");
      if (p.k > n)
        throw ConfigError("k = " + std::to_string(p.k) + " exceeds class size " + std::to_string(n));
    } else if (!(p.xi >= 0.0)) {
      throw ConfigError("xi must be >= 0");
    }
    double init = 0.0;
    if (squared_) {
      init = p.c1 ? *p.c1 : default_c1(d);
      if (!(init >= 0.0) || !std::isfinite(init)) throw ConfigError("c1 must be finite and >= 0");
    } else {
      for (double v : d.data()) init = std::max(init, v);
    }
    cur_.assign(n, init);
    chosen_.assign(n, false);
  }

  std::size_t size() const { return cur_.size(); }
  bool chosen(std::size_t s) const { return chosen_[s]; }

  double gain(std::size_t s) const {
    double g = 0.0;
    for (std::size_t i = 0; i < cur_.size(); ++i) {
      const double c = cur_[i];
      const double v = d_(i, s);
      if (v < c) g += squared_ ? c * c - v * v : c - v;
    }
    return g;
  }

  void add(std::size_t s) {
    chosen_[s] = true;
    for (std::size_t i = 0; i < cur_.size(); ++i) cur_[i] = std::min(cur_[i], d_(i, s));
  }

  double frobenius() const {
    double t = 0.0;
    for (double c : cur_) t += c * c;
    return std::sqrt(t);
  }

  double residual() const {
    if (squared_) return frobenius();
    double t = 0.0;
    for (double c : cur_) t += c;
    return t;
  }

 private:
  const Matrix& d_;
  bool squared_;
  Vector cur_;
  std::vector<bool> chosen_;
};

bool done(const CoverState& st, const GreedyParams& p, std::size_t picked) {
  if (picked == st.size()) return true;
  if (p.stop == StopRule::kFixedSize) return picked >= p.k;
  return picked >= 1 && st.residual() <= p.xi;
}

void record(CoverState& st, GreedyResult& out, std::size_t s) {
  st.add(s);
  out.selected.push_back(s);
  out.trace.push_back(st.frobenius());
}

}  // namespace

GreedyResult greedy_select(const Matrix& d, const GreedyParams& params) {
  CoverState st(d, params);
  GreedyResult out;
  while (!done(st, params, out.selected.size())) {
    std::size_t best = st.size();
    double best_gain = -1.0;
    for (std::size_t s = 0; s < st.size(); ++s) {
      if (st.chosen(s)) continue;
      const double g = st.gain(s);
      ++out.evaluations;
      if (g > best_gain) {
        best_gain = g;
        best = s;
      }
    }
    record(st, out, best);
  }
  return out;
}

GreedyResult lazy_greedy_select(const Matrix& d, const GreedyParams& params) {
  CoverState st(d, params);
  GreedyResult out;
  struct Entry {
    double gain;
    std::size_t index;
    std::size_t stamp;
  };
  // Max-heap on gain, then smallest index.
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t s = 0; s < st.size(); ++s) {
    heap.push({st.gain(s), s, 0});
    ++out.evaluations;
  }
  while (!done(st, params, out.selected.size())) {
    for (;;) {
      Entry top = heap.top();
      heap.pop();
      if (top.stamp == out.selected.size()) {
        record(st, out, top.index);
        break;
      }
      top.gain = st.gain(top.index);
      top.stamp = out.selected.size();
      ++out.evaluations;
      heap.push(top);
    }
  }
  return out;
}

GreedyResult stochastic_greedy_select(const Matrix& d, const GreedyParams& params) {
  if (params.sample < 1) throw ConfigError("stochastic sample size must be >= 1");
  CoverState st(d, params);
  GreedyResult out;
  Rng rng(Stream::kSelection, {params.seed, 0x5701ULL});
  std::vector<std::size_t> remaining(st.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  while (!done(st, params, out.selected.size())) {
    std::vector<std::size_t> cand;
    if (params.sample >= remaining.size()) {
      cand = remaining;
    } else {
      for (std::size_t p : rng.sample(remaining.size(), params.sample)) cand.push_back(remaining[p]);
    }
    std::size_t best = st.size();
    double best_gain = -1.0;
    for (std::size_t s : cand) {
      const double g = st.gain(s);
      ++out.evaluations;
      if (g > best_gain || (g == best_gain && s < best)) {
        best_gain = g;
        best = s;
      }
    }
    record(st, out, best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }
  return out;
}

GreedyResult run_engine(const Matrix& d, const GreedyParams& params, Engine engine) {
  switch (engine) {
    case Engine::kNaive:
      return greedy_select(d, params);
    case Engine::kLazy:
      return lazy_greedy_select(d, params);
    case Engine::kStochastic:
      return stochastic_greedy_select(d, params);
  }
  throw ConfigError("unknown engine");
}

std::vector<std::size_t> compute_weights(const Matrix& d, std::span<const std::size_t> s) {
  if (s.empty()) throw ConfigError("weights need a nonempty selection");
  std::vector<std::size_t> gamma(s.size(), 0);
  std::vector<bool> is_sel(d.rows(), false);
  std::vector<std::size_t> slot(d.rows(), 0);
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (s[p] >= d.rows()) throw ConfigError("selected index out of range");
    if (is_sel[s[p]]) throw ConfigError("duplicate selected index");
    is_sel[s[p]] = true;
    slot[s[p]] = p;
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (is_sel[i]) {
      ++gamma[slot[i]];
      continue;
    }
    std::size_t best = 0;
    for (std::size_t p = 1; p < s.size(); ++p) {
      const double a = d(i, s[p]);
      const double b = d(i, s[best]);
      if (a < b || (a == b && s[p] < s[best])) best = p;
    }
    ++gamma[best];
  }
  return gamma;
}

Vector divide_weights(std::span<const std::size_t> gamma, std::size_t r) {
  if (r < 1) throw ConfigError("r must be >= 1");
  Vector rho(gamma.size());
  for (std::size_t j = 0; j < gamma.size(); ++j)
    rho[j] = static_cast<double>(gamma[j]) / static_cast<double>(r);
  return rho;
}

}  // namespace coreaug
