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

#ifndef COREAUG_MODEL_HPP_
#define COREAUG_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coreaug/dataset.hpp"
#include "coreaug/linalg.hpp"

namespace coreaug {

enum class Activation { kTanh, kRelu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

// Fully-connected network with a linear output layer. Parameters live in one
// flat vector, layer by layer: the in x out weight matrix (row-major) followed
// by the out-sized bias, so layer l computes z = W^T h + b.
class Mlp {
 public:
  Mlp() = default;
  // All parameters zero.
  explicit Mlp(std::vector<std::size_t> layer_sizes,
               Activation activation = Activation::kTanh);
  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Mlp random(std::vector<std::size_t> layer_sizes, Activation activation,
                    std::uint64_t seed);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  Activation activation() const noexcept { return activation_; }
  std::size_t num_layers() const noexcept { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t num_params() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  // Offset of layer l's weight block; its bias follows at weight_offset(l) +
  // in*out.
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }
  double& weight(std::size_t layer, std::size_t in, std::size_t out) {
    return params_[offsets_[layer] + in * sizes_[layer + 1] + out];
  }
  double weight(std::size_t layer, std::size_t in, std::size_t out) const {
    return params_[offsets_[layer] + in * sizes_[layer + 1] + out];
  }
  double& bias(std::size_t layer, std::size_t out) {
    return params_[bias_offset(layer) + out];
  }
  double bias(std::size_t layer, std::size_t out) const {
    return params_[bias_offset(layer) + out];
  }

  bool operator==(const Mlp& other) const = default;

 private:
  std::vector<std::size_t> sizes_;
  Activation activation_ = Activation::kTanh;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// Per-example forward state kept for backpropagation.
struct ForwardTrace {
  std::vector<Vector> activations;  // activations[0] = x, back() = output
  std::vector<Vector> preactivations;  // one per layer
};

ForwardTrace forward_trace(const Mlp& net, std::span<const double> x);
Vector forward_one(const Mlp& net, std::span<const double> x);
// n x C predictions.
Matrix forward(const Mlp& net, const Matrix& x);

// f(W, x_i) - y_i with one-hot y, n x C.
Matrix residuals(const Mlp& net, const Dataset& data);
// (1/2) sum_i ||f(W, x_i) - y_i||^2.
double loss(const Mlp& net, const Dataset& data);
// Per-example (1/2)||f - y||^2.
Vector per_example_loss(const Mlp& net, const Dataset& data);

// Accumulates scale * d(seed . f)/dW into grad (length num_params).
void backward(const Mlp& net, const ForwardTrace& trace,
              std::span<const double> output_seed, double scale,
              std::span<double> grad);

// Exact gradient of (1/2)||f(W, x) - y||^2.
Vector per_example_gradient(const Mlp& net, std::span<const double> x,
                            std::span<const double> y);

inline constexpr std::size_t kDefaultJacobianCap = std::size_t{1} << 28;

// (n*C) x m Jacobian; row i*C + c holds df_c(W, x_i)/dW. Throws ConfigError
// when n*C*m exceeds max_entries.
Matrix jacobian(const Mlp& net, const Matrix& x,
                std::size_t max_entries = kDefaultJacobianCap);

enum class ProxyMode { kResidual, kLastLayer };

std::string to_string(ProxyMode m);
ProxyMode parse_proxy_mode(const std::string& s);

struct GradientProxySet {
  Matrix proxies;  // n x p
  std::vector<int> labels;
  std::size_t num_classes = 0;
  ProxyMode mode = ProxyMode::kLastLayer;
};

// residual mode: proxy_i = f(W, x_i) - y_i.
// last_layer mode: proxy_i = [f - y, vec((f - y) h^T)] where h is the
// penultimate activation; the second block is laid out like the last layer's
// weight parameters, so it equals that slice of per_example_gradient.
GradientProxySet gradient_proxy(const Mlp& net, const Dataset& data,
                                ProxyMode mode);

// Wraps arbitrary per-example vectors (e.g. exact gradients) as proxies.
GradientProxySet make_proxy_set(Matrix proxies, std::vector<int> labels,
                                std::size_t num_classes);

struct LipschitzEstimate {
  double jacobian_lipschitz = 0.0;  // L: max ||J(x_i) - J(x_j)||_F / ||x_i - x_j||
  double output_lipschitz = 0.0;    // L': max ||f(x_i) - f(x_j)|| / ||x_i - x_j||
  std::size_t pairs_used = 0;
};

// Empirical lower bounds from trials seeded random pairs; pairs of
// coincident points are skipped. The pair stream is a prefix-stable function
// of the seed, so estimates never decrease as trials grow. Throws DataError
// when every point is identical.
LipschitzEstimate estimate_lipschitz(const Mlp& net, const Dataset& data,
                                     std::size_t trials, std::uint64_t seed);

}  // namespace coreaug

#endif  // COREAUG_MODEL_HPP_
