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


#ifndef COREAUG_SPECTRUM_HPP_
#define COREAUG_SPECTRUM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coreaug/augment.hpp"
#include "coreaug/dataset.hpp"
#include "coreaug/linalg.hpp"
#include "coreaug/model.hpp"

namespace coreaug {

inline constexpr std::size_t kSpectrumBins = 30;

struct WeylVerdict {
  bool pass = true;
  double max_shift = 0.0;      // max_i |sigma~_i - sigma_i|
  double max_violation = 0.0;  // max_i (shift_i - ||E||_2), <= 0 when passing
  double e_norm2 = 0.0;
};

// |sigma~_i - sigma_i| <= ||E||_2 + tol for every rank-paired index.
WeylVerdict weyl_check(const Vector& sigma_clean, const Vector& sigma_aug, double e_norm2,
                       double tol = 1e-8);

struct SpectrumBin {
  std::size_t index = 0;  // 0 holds the smallest singular values
  std::size_t first = 0;  // rank positions [first, last) in descending order
  std::size_t last = 0;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double mean_delta_sigma = 0.0;
  double mean_relative_delta_sigma = 0.0;  // over indices with sigma > 0
  double mean_angle_rad = 0.0;
};

// Equal-count partition of `count` ascending-ordered values into `bins`
// groups; the remainder goes to the lowest bins. Returns [begin, end) pairs
// in ascending order.
std::vector<std::pair<std::size_t, std::size_t>> bin_partition(std::size_t count,
                                                               std::size_t bins);

struct SpectrumReport {
  Vector sigma_clean;
  Vector sigma_aug;
  double e_norm2 = 0.0;
  double e_norm_f = 0.0;
  double gamma0 = 0.0;  // eigengap of the clean spectrum over its numerical rank
  std::size_t rank = 0;
  std::vector<SpectrumBin> bins;
  WeylVerdict weyl;
};

SpectrumReport spectrum_report(const Matrix& j_clean, const Matrix& j_aug);

nlohmann::json to_json(const SpectrumReport& report);
// bin,sigma_lo,sigma_hi,mean_delta_sigma,mean_angle_rad
std::string bins_csv(const SpectrumReport& report);

// Mean relative shift and mean angle over the lowest and highest `share` of
// the bins (at least one bin each).
struct BinContrast {
  double bottom_relative_shift = 0.0;
  double top_relative_shift = 0.0;
  double bottom_angle = 0.0;
  double top_angle = 0.0;
};
BinContrast bin_contrast(const SpectrumReport& report, double share = 0.1);

struct DecompositionEntry {
  double sigma = 0.0;
  double sigma_aug = 0.0;
  double mu = 0.0;
  double zeta = 0.0;
  bool pass = false;
};

struct PerturbationDecomposition {
  std::vector<DecompositionEntry> entries;
  double pe_norm2 = 0.0;         // ||P E^T||_2
  double perp_e_norm2 = 0.0;     // ||P_perp E^T||_2
  double perp_e_sigma_min = 0.0; // sigma_min(P_perp E^T)
  std::size_t rank = 0;
  double projector_error = 0.0;  // ||P + P_perp - I||_F
  bool pass = false;
};

// sigma~_i^2 = (sigma_i + mu_i)^2 + zeta_i^2 on the transposed Jacobian,
// with P the projector onto the column space of J^T.
PerturbationDecomposition perturbation_decomposition(const Matrix& j, const Matrix& e,
                                                     double tol = 1e-8);

struct Lemma1Entry {
  double sigma = 0.0;
  double p_hat = 0.0;
  double predicted = 0.0;
  double empirical = 0.0;
  double standard_error = 0.0;
  bool within = false;  // |empirical - predicted| <= 3 SE (+ rounding slack)
};

struct Lemma1Report {
  std::vector<Lemma1Entry> entries;
  double mean_e_norm = 0.0;
  std::size_t draws = 0;
  std::size_t within_count = 0;
  std::string mode;
};

nlohmann::json to_json(const Lemma1Report& report);

// Closed form sigma^2 + sigma (1 - 2p) e + e^2 / 3.
double lemma1_expected_eigenvalue(double sigma, double p, double e_norm);

// Draws sigma~_i = sigma_i + delta_i from the lemma's own piecewise-uniform
// density: delta uniform on [-e, 0) with probability p_i, on [0, e] otherwise.
// p defaults to p_i = sigma_i / (2 sigma_max).
Lemma1Report lemma1_model_consistent(const Vector& sigma, double e_norm, std::size_t draws,
                                     std::uint64_t seed, std::optional<Vector> p = std::nullopt);

// Real augmentation rounds: one perturbed copy of X per draw.
Lemma1Report lemma1_monte_carlo(const Mlp& net, const Dataset& data, const TransformSpec& spec,
                                std::size_t draws);

struct EigvecEntry {
  std::size_t index = 0;
  double distance = 0.0;  // ||u_i - u~_i|| after sign alignment
  double bound = 0.0;     // 2 sqrt(2) ||E|| / gamma0
  double dot = 0.0;       // u_i . u~_i after alignment
  bool pass = false;
};

struct EigvecReport {
  bool precondition_met = false;
  std::string reason;
  double gamma0 = 0.0;
  double e_norm2 = 0.0;
  std::size_t rank = 0;
  std::vector<EigvecEntry> entries;
  bool pass = false;  // vacuous only when the precondition is unmet
};

EigvecReport eigvec_bound_check(const Matrix& j, const Matrix& e);

struct ResidualDynamics {
  Vector predicted_norm;
  Vector actual_norm;
  Vector relative_deviation;  // ||pred - actual|| / ||actual||
  double max_relative_deviation = 0.0;
  double eta = 0.0;
  double lambda_max = 0.0;
};

// NTK eigenbasis prediction r^t = sum (1 - eta lambda_i)^t u_i u_i^T r^0
// against full-batch gradient descent. eta defaults to 1 / lambda_max.
ResidualDynamics residual_dynamics_check(const Mlp& net, const Dataset& data,
                                         std::optional<double> eta, std::size_t steps);

struct Theorem2Verdict {
  bool skipped = false;
  std::string reason;
  Vector mean_actual;  // mean over seeds of ||y - f(X_aug, W^t)||
  Vector bound;
  double mean_e_norm = 0.0;
  double gamma0 = 0.0;
  double eta = 0.0;
  bool pass = false;
};

// GD on a fixed augmentation per seed, compared with the bound built from the
// clean NTK spectrum, measured decrease probabilities and mean ||E||.
Theorem2Verdict theorem2_envelope_check(const Mlp& net, const Dataset& data,
                                        const TransformSpec& spec, std::optional<double> eta,
                                        std::size_t steps, std::size_t seeds);

// Envelope on the augmented residual norm; y_proj_sq holds (u_i^T r0)^2.
Vector theorem2_bound(const Vector& lambda, const Vector& sigma, const Vector& p, double e_norm,
                      double gamma0, const Vector& y_proj_sq, std::size_t n, double eta,
                      std::size_t steps);

// sqrt(2 / (sigma_min + sqrt(n) L eps0)^2); the log(1/delta) term is not
// included.
double generalization_bound_value(double sigma_min, std::size_t n, double lipschitz,
                                  double epsilon0);

// Spectrum experiment: subsample up to three classes, train briefly,
// then compare clean and augmented Jacobian spectra.
struct SpectrumProtocol {
  std::size_t per_class = 60;
  std::vector<std::size_t> hidden = {16};
  Activation activation = Activation::kTanh;
  std::size_t epochs = 15;
  double lr = 0.05;
  std::size_t batch_size = 16;
  std::vector<double> epsilons = {8.0 / 255.0, 16.0 / 255.0};
  TransformKind kind = TransformKind::kUniformBall;
  std::uint64_t seed = 0;
  bool train = true;
};

struct SpectrumExperiment {
  Mlp net;
  Dataset subset;
  std::vector<SpectrumReport> reports;  // one per epsilon
};

SpectrumExperiment spectrum_experiment(const Dataset& data, const SpectrumProtocol& protocol);

}  // namespace coreaug

#endif  // COREAUG_SPECTRUM_HPP_
