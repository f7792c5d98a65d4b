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


#ifndef COREAUG_CORESET_HPP_
#define COREAUG_CORESET_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coreaug/linalg.hpp"
#include "coreaug/model.hpp"

namespace coreaug {

enum class Engine { kNaive, kLazy, kStochastic };
enum class StopRule { kXiThreshold, kFixedSize };

// kFrobenius minimizes ||G_S||_F = sqrt(sum_i min_{j in S} d_ij^2); its greedy
// order is that of the squared-distance facility-location function.
// kFacilityLocation maximizes F(S) = sum_i (C - min_{j in S} d_ij) with
// C = max_ij d_ij.
enum class Objective { kFrobenius, kFacilityLocation };

std::string to_string(Engine e);
Engine parse_engine(const std::string& s);
std::string to_string(StopRule s);
StopRule parse_stop_rule(const std::string& s);
std::string to_string(Objective o);
Objective parse_objective(const std::string& s);

struct SelectionConfig {
  StopRule stop = StopRule::kFixedSize;
  double xi = 0.0;                          // used by kXiThreshold
  std::optional<std::size_t> k_per_class;   // kFixedSize; overrides fraction
  double fraction = 0.1;                    // kFixedSize
  Engine engine = Engine::kLazy;
  std::size_t stochastic_sample = 0;        // 0 selects the default rule
  std::uint64_t seed = 0;
  std::optional<double> c1;                 // empty-set sentinel; default 2*max d
  Objective objective = Objective::kFrobenius;

  void validate() const;
  // Per-class budget under kFixedSize: k_per_class, else
  // max(1, ceil(fraction * class_size)), capped at class_size.
  std::size_t budget(std::size_t class_size) const;
};

// Fully resolved parameters for one class.
struct GreedyParams {
  StopRule stop = StopRule::kFixedSize;
  double xi = 0.0;
  std::size_t k = 1;
  Objective objective = Objective::kFrobenius;
  std::size_t sample = 0;  // stochastic candidates per step
  std::uint64_t seed = 0;
  std::optional<double> c1;
};

GreedyParams resolve_params(const SelectionConfig& config, std::size_t class_size,
                            std::size_t class_id);

struct GreedyResult {
  std::vector<std::size_t> selected;  // local indices in pick order
  Vector trace;                       // ||G_S||_F after each pick
  std::size_t evaluations = 0;        // marginal-gain evaluations
};

// Euclidean distances between rows.
Matrix pairwise_distances(const Matrix& points);
// Distances between proxies of class c, in class_index order.
Matrix distance_matrix(const GradientProxySet& proxies, std::size_t cls);
std::vector<std::vector<std::size_t>> class_members(const GradientProxySet& proxies);

double default_c1(const Matrix& d);
// sqrt(sum_i min_{j in S} d_ij^2); sqrt(n) * c1 for the empty set.
double g_frobenius(const Matrix& d, std::span<const std::size_t> s, double c1);
// sum_i (C - min_{j in S} d_ij), C = max_ij d_ij; 0 for the empty set.
double facility_location_value(const Matrix& d, std::span<const std::size_t> s);

// Adds the element of largest marginal decrease until the stop rule holds;
// ties go to the smallest index. At least one element is always selected.
// Throws ConfigError when k exceeds the class or xi is negative.
GreedyResult greedy_select(const Matrix& d, const GreedyParams& params);
// Same output as greedy_select, using stale gains as upper bounds.
GreedyResult lazy_greedy_select(const Matrix& d, const GreedyParams& params);
// Each step scores a uniform sample of params.sample remaining candidates.
GreedyResult stochastic_greedy_select(const Matrix& d, const GreedyParams& params);
GreedyResult run_engine(const Matrix& d, const GreedyParams& params, Engine engine);

// Nearest-selected-element counts. A selected element is assigned to itself;
// other ties go to the smallest index. Sums to the class size.
std::vector<std::size_t> compute_weights(const Matrix& d, std::span<const std::size_t> s);
Vector divide_weights(std::span<const std::size_t> gamma, std::size_t r);

// Indices with per-element weights; the common currency of coresets and
// baseline subsets.
struct WeightedSubset {
  std::vector<std::size_t> indices;
  Vector weights;
};

struct ClassCoreset {
  std::size_t cls = 0;
  std::vector<std::size_t> indices;  // dataset indices, pick order
  std::vector<std::size_t> gamma;
  Vector rho;
  double g_frobenius = 0.0;
  Vector trace;
  std::size_t evaluations = 0;
};

struct WeightedCoreset {
  std::vector<ClassCoreset> classes;
  std::vector<std::size_t> indices;  // concatenated in class order
  std::vector<std::size_t> gamma;
  Vector rho;
  double g_frobenius = 0.0;          // sqrt of summed per-class squares
  std::vector<std::string> warnings;
  Engine engine = Engine::kLazy;
  std::uint64_t seed = 0;
  std::size_t r = 1;

  WeightedSubset gamma_subset() const;
  WeightedSubset rho_subset() const;
};

// Runs the configured engine independently per class and merges; empty
// classes are skipped with a warning.
WeightedCoreset select_all_classes(const GradientProxySet& proxies,
                                   const SelectionConfig& config, std::size_t r = 1);

nlohmann::json to_json(const WeightedCoreset& coreset);

// Top-k per-example loss within each class (ties to the smallest index),
// weights n_c / k.
WeightedSubset max_loss_subset(std::span<const double> losses,
                               std::span<const std::size_t> k_per_class,
                               std::span<const int> labels, std::size_t num_classes);
WeightedSubset max_loss_subset(std::span<const double> losses, std::size_t k,
                               std::span<const int> labels, std::size_t num_classes);

// Uniform without replacement within each class, weights n_c / k.
WeightedSubset random_subset(std::span<const std::size_t> k_per_class,
                             std::span<const int> labels, std::size_t num_classes,
                             std::uint64_t seed);
WeightedSubset random_subset(std::size_t n, std::size_t k, std::span<const int> labels,
                             std::size_t num_classes, std::uint64_t seed);

// Per-class budgets for a selection config.
std::vector<std::size_t> class_budgets(const SelectionConfig& config,
                                       std::span<const int> labels,
                                       std::size_t num_classes);

struct AlignmentAudit {
  // Per class: || sum_i g_i - sum_j gamma_j g_j ||.
  Vector class_error;
  // Per class: sum_i ||g_i - g_pi(i)||, the triangle-inequality bound.
  Vector class_assignment_sum;
  // Per class: ||G_S||_F.
  Vector class_g_frobenius;
  // Per class: sqrt(n_c) * ||G_S||_F >= assignment sum >= error.
  Vector class_bound;
  double error = 0.0;  // sum of class errors
  double bound = 0.0;  // sum of class bounds
};

// Weights are taken from the subset and must be nearest-assignment counts for
// the bound to apply.
AlignmentAudit alignment_error(const GradientProxySet& proxies, const WeightedSubset& coreset);

struct NtkBoundVerdict {
  double lhs = 0.0;          // sqrt(sum of coreset NTK eigenvalues) = ||diag(w) J_S||_F
  double rhs = 0.0;          // | ||J^T r|| - xi | / ||r_S||
  double xi = 0.0;           // alignment error used
  double full_alignment = 0.0;  // ||J^T r||
  double residual_norm = 0.0;   // ||r_S||
  double margin = 0.0;       // lhs - rhs
  bool pass = false;
};

// Weighted-coreset NTK trace inequality on an exact Jacobian. jac is
// (n*C) x m with rows ordered as in jacobian(); res is n x C. xi defaults to
// the measured alignment error of the exact gradients.
NtkBoundVerdict coreset_ntk_bound_check(const Matrix& jac, const Matrix& res,
                                        const WeightedSubset& coreset,
                                        std::optional<double> xi = std::nullopt);

}  // namespace coreaug

#endif  // COREAUG_CORESET_HPP_
