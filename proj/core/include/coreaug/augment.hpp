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


#ifndef COREAUG_AUGMENT_HPP_
#define COREAUG_AUGMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coreaug/linalg.hpp"
#include "coreaug/model.hpp"

namespace coreaug {

enum class TransformKind { kUniformBall, kGaussianClipped, kPixelJitter };

std::string to_string(TransformKind k);
TransformKind parse_transform_kind(const std::string& s);

// Bounded additive transform: every augmentation stays within epsilon0 of its
// source in l2.
struct TransformSpec {
  TransformKind kind = TransformKind::kUniformBall;
  double epsilon0 = 16.0 / 255.0;
  std::size_t r = 1;  // augmentations per example
  std::uint64_t seed = 0;

  void validate() const;
};

struct AugmentedSet {
  Matrix features;                 // (r*k) x d
  std::vector<int> labels;         // labels[a] = source label of origin[a]
  std::vector<std::size_t> origin; // row a derives from source origin[a]
};

// r perturbed copies of every row of x, grouped by source: row a = i*r + copy.
// Each perturbation is drawn from its own (seed, round, row, copy) stream,
// shrunk onto the epsilon0 ball when it overshoots, then clamped to [0,1].
// source_labels, when non-empty, is copied through origin.
AugmentedSet perturb(const TransformSpec& spec, const Matrix& x, std::uint64_t round,
                     std::span<const int> source_labels = {});

// Same draws as perturb(), keeping only the given copy of every row.
Matrix perturb_copy(const TransformSpec& spec, const Matrix& x,
                    std::uint64_t round, std::size_t copy);

struct PerturbationMatrix {
  Matrix e;  // J(W, X_aug) - J(W, X)
  double norm2 = 0.0;
  double norm_f = 0.0;
  // sqrt(n) * L * epsilon0 when both were supplied.
  std::optional<double> bound;
};

PerturbationMatrix perturbation_matrix(const Mlp& net, const Matrix& x,
                                       const Matrix& x_aug_round,
                                       std::optional<double> lipschitz = std::nullopt,
                                       std::optional<double> epsilon0 = std::nullopt);

}  // namespace coreaug

#endif  // COREAUG_AUGMENT_HPP_
