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


#ifndef COREAUG_BOUNDS_HPP_
#define COREAUG_BOUNDS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coreaug/augment.hpp"
#include "coreaug/coreset.hpp"
#include "coreaug/dataset.hpp"
#include "coreaug/linalg.hpp"

namespace coreaug {

// Uniform features in [0,1]^d with uniformly drawn labels; every class gets
// at least one example when n >= C.
Dataset random_instance(std::size_t n, std::size_t d, std::size_t num_classes,
                        std::uint64_t seed);

// Gradient of sum_i w_i (1/2)||W^T x_i - y_i||^2 for a bias-free linear model
// W (d x C), returned as a d x C matrix.
Matrix linear_gradient(const Matrix& w, const Matrix& x, std::span<const int> labels,
                       std::span<const double> weights);

struct LinearTransformVerdict {
  double xi = 0.0;     // clean coreset gradient error
  double omega = 0.0;  // max_i ||W^T F x_i - W^T x_i||
  double f_norm = 0.0; // ||F||_2
  double lemma_lhs = 0.0;
  double lemma_bound = 0.0;      // ||F|| (xi + sqrt(d) n omega)
  double corollary_lhs = 0.0;
  double corollary_bound = 0.0;  // (||F|| + 1) xi + sqrt(d) ||F|| n omega
  bool lemma_pass = false;
  bool corollary_pass = false;
};

// Exact gradient differences for a common linear augmentation x -> F x,
// with coreset weights taken from the subset.
LinearTransformVerdict linear_transform_bound_check(const Matrix& w, const Matrix& x,
                                                    std::span<const int> labels,
                                                    std::size_t num_classes, const Matrix& f,
                                                    const WeightedSubset& coreset);

// Gradient-norm trajectory of full-batch descent against a PL-rate envelope
// (1/sqrt(alpha)) (1 - alpha eta / 2)^(t/2) * offset.
struct EnvelopeCheck {
  Vector grad_norm;
  Vector envelope;
  double alpha = 0.0;   // 2 lambda_min of the weighted pool kernel
  double lambda = 0.0;  // lambda_max of the weighted pool kernel
  double beta = 0.0;    // max_i rho_i ||x_i||^2
  double eta = 0.0;     // alpha / (lambda beta)
  double g0 = 0.0;
  double xi = 0.0;
  double slack = 0.0;   // named offset component beyond 2 G0 + xi
  double offset = 0.0;
  double sigma_max = 0.0;
  double lipschitz = 0.0;
  bool epsilon_precondition = false;  // eps0 <= 1 / (sigma_max sqrt(L n))
  std::size_t pool_size = 0;
  bool pass = false;
};

nlohmann::json to_json(const EnvelopeCheck& check);

// Linear model with bias trained on the full data plus the augmented
// coreset. alpha, lambda, beta come from the weighted pool kernel; G0 is the
// initial full-data gradient norm; xi the coreset gradient error at
// initialization; slack sqrt(L) / sigma_max with L the larger of the
// estimated Jacobian and output Lipschitz constants.
EnvelopeCheck theorem1_envelope_check(const Dataset& data, const SelectionConfig& selection,
                                      const TransformSpec& spec, std::size_t steps,
                                      std::uint64_t seed);

// Bias-free linear model trained on the weighted coreset and its linear
// augmentation F x. G0' is the initial gradient over the full data and its
// augmentation; the offset is G0' + (||F|| + 1) xi + sqrt(d) ||F|| n omega.
EnvelopeCheck theorem3_envelope_check(const Dataset& data, const Matrix& f,
                                      const SelectionConfig& selection, std::size_t steps,
                                      std::uint64_t seed);

struct AuditSummary {
  std::size_t instances = 0;
  std::size_t passed = 0;
  std::size_t skipped = 0;  // precondition unmet, no claim made
  double worst_margin = 0.0;  // min over instances of bound - measured

  bool all_pass() const { return passed + skipped == instances; }
};

nlohmann::json to_json(const AuditSummary& s);

// Random small tanh nets (n <= 60, m <= 200) with greedy coresets on
// last-layer proxies; coreset NTK trace inequality with measured xi.
AuditSummary lemma4_audit(std::size_t instances, std::uint64_t seed);
// Random (W, X, F, coreset) with F near the identity; both the single-set and
// the combined inequality must hold for an instance to pass.
AuditSummary linear_transform_audit(std::size_t instances, std::uint64_t seed);
// Random J up to 40 x 60 with random E of varied scale.
AuditSummary weyl_audit(std::size_t trials, std::uint64_t seed);
// Random well-gapped J with E scaled across the gap precondition.
AuditSummary eigvec_audit(std::size_t trials, std::uint64_t seed);

}  // namespace coreaug

#endif  // COREAUG_BOUNDS_HPP_
