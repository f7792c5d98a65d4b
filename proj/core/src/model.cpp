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


#include "coreaug/model.hpp"

#include <algorithm>
#include <cmath>

#include "coreaug/errors.hpp"
#include "coreaug/parallel.hpp"
#include "coreaug/rng.hpp"

namespace coreaug {

std::string to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "relu";
}

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(ProxyMode m) {
  return m == ProxyMode::kResidual ? "residual" : "last_layer";
}

ProxyMode parse_proxy_mode(const std::string& s) {
  if (s == "residual") return ProxyMode::kResidual;
  if (s == "last_layer") return ProxyMode::kLastLayer;
  throw ConfigError("unknown proxy mode '" + s + "'");
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ConfigError("an MLP needs at least two layer sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw ConfigError("zero-width layer");
    offsets_.push_back(total);
    total += (sizes_[l] + 1) * sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> layer_sizes, Activation activation,
                std::uint64_t seed) {
  Mlp net(std::move(layer_sizes), activation);
  Rng rng(Stream::kInit, {seed});
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    const std::size_t begin = net.offsets_[l];
    const std::size_t end = begin + (net.sizes_[l] + 1) * net.sizes_[l + 1];
    for (std::size_t p = begin; p < end; ++p) net.params_[p] = rng.uniform(-bound, bound);
  }
  return net;
}

ForwardTrace forward_trace(const Mlp& net, std::span<const double> x) {
  if (x.size() != net.input_dim())
    throw DataError("input has " + std::to_string(x.size()) +
                    " features, network expects " + std::to_string(net.input_dim()));
  const auto& sizes = net.layer_sizes();
  ForwardTrace t;
  t.activations.reserve(sizes.size());
  t.preactivations.reserve(net.num_layers());
  t.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const auto params = net.params();
    const double* w = params.data() + net.weight_offset(l);
    const double* b = params.data() + net.bias_offset(l);
    const Vector& h = t.activations.back();
    Vector z(b, b + out);
    for (std::size_t i = 0; i < in; ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      const double* wrow = w + i * out;
      for (std::size_t o = 0; o < out; ++o) z[o] += hi * wrow[o];
    }
    Vector a = z;
    if (l + 1 < net.num_layers()) {
      if (net.activation() == Activation::kTanh) {
        for (double& v : a) v = std::tanh(v);
      } else {
        for (double& v : a) v = std::max(0.0, v);
      }
    }
    t.preactivations.push_back(std::move(z));
    t.activations.push_back(std::move(a));
  }
  return t;
}

Vector forward_one(const Mlp& net, std::span<const double> x) {
  return std::move(forward_trace(net, x).activations.back());
}

Matrix forward(const Mlp& net, const Matrix& x) {
  if (x.cols() != net.input_dim())
    throw DataError("input has " + std::to_string(x.cols()) +
                    " columns, network expects " + std::to_string(net.input_dim()));
  Matrix out(x.rows(), net.output_dim());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector f = forward_one(net, x.row(i));
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

Matrix residuals(const Mlp& net, const Dataset& data) {
  if (data.num_classes() != net.output_dim())
    throw DataError("network output width does not match class count");
  Matrix r = forward(net, data.features());
  for (std::size_t i = 0; i < data.size(); ++i)
    r(i, static_cast<std::size_t>(data.label(i))) -= 1.0;
  return r;
}

Vector per_example_loss(const Mlp& net, const Dataset& data) {
  const Matrix r = residuals(net, data);
  Vector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = 0.5 * dot(r.row(i), r.row(i));
  return out;
}

double loss(const Mlp& net, const Dataset& data) {
  double total = 0.0;
  for (double v : per_example_loss(net, data)) total += v;
  return total;
}

void backward(const Mlp& net, const ForwardTrace& trace,
              std::span<const double> output_seed, double scale,
              std::span<double> grad) {
  const auto& sizes = net.layer_sizes();
  const auto params = net.params();
  Vector delta(output_seed.begin(), output_seed.end());
  for (double& d : delta) d *= scale;
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const Vector& h = trace.activations[l];
    double* gw = grad.data() + net.weight_offset(l);
    double* gb = grad.data() + net.bias_offset(l);
    for (std::size_t i = 0; i < in; ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      double* grow = gw + i * out;
      for (std::size_t o = 0; o < out; ++o) grow[o] += hi * delta[o];
    }
    for (std::size_t o = 0; o < out; ++o) gb[o] += delta[o];
    if (l == 0) break;
    const double* w = params.data() + net.weight_offset(l);
    Vector prev(in, 0.0);
    for (std::size_t i = 0; i < in; ++i) {
      const double* wrow = w + i * out;
      double s = 0.0;
      for (std::size_t o = 0; o < out; ++o) s += wrow[o] * delta[o];
      double slope;
      if (net.activation() == Activation::kTanh) {
        slope = 1.0 - h[i] * h[i];
      } else {
        slope = trace.preactivations[l - 1][i] > 0.0 ? 1.0 : 0.0;
      }
      prev[i] = s * slope;
    }
    delta = std::move(prev);
  }
}

Vector per_example_gradient(const Mlp& net, std::span<const double> x,
                            std::span<const double> y) {
  if (y.size() != net.output_dim()) throw DataError("target width mismatch");
  const ForwardTrace t = forward_trace(net, x);
  Vector r = t.activations.back();
  for (std::size_t c = 0; c < r.size(); ++c) r[c] -= y[c];
  Vector grad(net.num_params(), 0.0);
  backward(net, t, r, 1.0, grad);
  return grad;
}

Matrix jacobian(const Mlp& net, const Matrix& x, std::size_t max_entries) {
  const std::size_t outputs = net.output_dim();
  const std::size_t m = net.num_params();
  const double entries = static_cast<double>(x.rows()) * outputs * m;
  if (entries > static_cast<double>(max_entries))
    throw ConfigError("jacobian would hold " + std::to_string(entries) +
                      " entries, above the cap of " + std::to_string(max_entries));
  if (x.cols() != net.input_dim()) throw DataError("jacobian input width mismatch");
  Matrix j(x.rows() * outputs, m);
  parallel_for(x.rows(), [&](std::size_t i) {
    const ForwardTrace t = forward_trace(net, x.row(i));
    Vector seed(outputs, 0.0);
    for (std::size_t c = 0; c < outputs; ++c) {
      seed[c] = 1.0;
      backward(net, t, seed, 1.0, j.row(i * outputs + c));
      seed[c] = 0.0;
    }
  });
  return j;
}

GradientProxySet make_proxy_set(Matrix proxies, std::vector<int> labels,
                                std::size_t num_classes) {
  if (proxies.rows() != labels.size()) throw DataError("proxy/label count mismatch");
  GradientProxySet set;
  set.proxies = std::move(proxies);
  set.labels = std::move(labels);
  set.num_classes = num_classes;
  return set;
}

GradientProxySet gradient_proxy(const Mlp& net, const Dataset& data,
                                ProxyMode mode) {
  const std::size_t outputs = net.output_dim();
  const std::size_t hidden = net.layer_sizes()[net.num_layers() - 1];
  const std::size_t p = mode == ProxyMode::kResidual ? outputs : outputs + hidden * outputs;
  Matrix proxies(data.size(), p);
  parallel_for(data.size(), [&](std::size_t i) {
    const ForwardTrace t = forward_trace(net, data.x(i));
    Vector r = t.activations.back();
    r[static_cast<std::size_t>(data.label(i))] -= 1.0;
    auto row = proxies.row(i);
    std::copy(r.begin(), r.end(), row.begin());
    if (mode == ProxyMode::kLastLayer) {
      const Vector& h = t.activations[net.num_layers() - 1];
      for (std::size_t a = 0; a < hidden; ++a)
        for (std::size_t o = 0; o < outputs; ++o)
          row[outputs + a * outputs + o] = h[a] * r[o];
    }
  });
  GradientProxySet set = make_proxy_set(std::move(proxies), data.labels(), data.num_classes());
  set.mode = mode;
  return set;
}

namespace {

Matrix example_jacobian(const Mlp& net, std::span<const double> x) {
  const ForwardTrace t = forward_trace(net, x);
  Matrix j(net.output_dim(), net.num_params());
  Vector seed(net.output_dim(), 0.0);
  for (std::size_t c = 0; c < net.output_dim(); ++c) {
    seed[c] = 1.0;
    backward(net, t, seed, 1.0, j.row(c));
    seed[c] = 0.0;
  }
  return j;
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const Mlp& net, const Dataset& data,
                                     std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("estimate_lipschitz needs trials >= 1");
  const std::size_t n = data.size();
  bool degenerate = true;
  for (std::size_t i = 1; i < n && degenerate; ++i) {
    const auto a = data.x(0), b = data.x(i);
    degenerate = std::equal(a.begin(), a.end(), b.begin());
  }
  if (degenerate) throw DataError("cannot estimate Lipschitz constants: all points identical");

  LipschitzEstimate est;
  Rng rng(Stream::kLipschitz, {seed});
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t i = rng.index(n);
    const std::size_t j = rng.index(n);
    const Vector dx = axpy(-1.0, data.x(j), data.x(i));
    const double gap = norm2(dx);
    if (gap == 0.0) continue;
    const Matrix ji = example_jacobian(net, data.x(i));
    const Matrix jj = example_jacobian(net, data.x(j));
    est.jacobian_lipschitz = std::max(est.jacobian_lipschitz, frobenius_norm(ji - jj) / gap);
    const Vector df = axpy(-1.0, forward_one(net, data.x(j)), forward_one(net, data.x(i)));
    est.output_lipschitz = std::max(est.output_lipschitz, norm2(df) / gap);
    ++est.pairs_used;
  }
  return est;
}

}  // namespace coreaug
