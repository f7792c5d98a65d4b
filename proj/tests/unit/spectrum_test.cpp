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


#include "coreaug/spectrum.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "coreaug/bounds.hpp"
#include "coreaug/errors.hpp"
#include "test_util.hpp"

namespace coreaug {
namespace {

using testing::gaussian;
using testing::unit_cube_data;

TEST(Weyl, DetectsViolationsBeyondTolerance) {
  EXPECT_TRUE(weyl_check({3.0, 1.0}, {3.5, 0.6}, 0.5).pass);
  const WeylVerdict bad = weyl_check({3.0, 1.0}, {3.7, 1.0}, 0.5);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.max_violation, 0.2, 1e-12);
}

TEST(Weyl, HoldsForRandomPerturbations) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix j = gaussian(12, 20, s);
    Matrix e = gaussian(12, 20, 100 + s);
    e *= 0.01 * static_cast<double>(s + 1);
    const SpectrumReport r = spectrum_report(j, j + e);
    EXPECT_TRUE(r.weyl.pass) << "trial " << s;
    EXPECT_NEAR(r.e_norm_f, frobenius_norm(e), 1e-12);
  }
}

TEST(BinPartition, ContiguousWithRemainderInLowBins) {
  const auto bins = bin_partition(65, 30);
  ASSERT_EQ(bins.size(), 30u);
  std::size_t at = 0;
  for (const auto& [first, last] : bins) {
    EXPECT_EQ(first, at);
    at = last;
  }
  EXPECT_EQ(at, 65u);
  EXPECT_EQ(bins[0].second - bins[0].first, 3u);
  EXPECT_EQ(bins[29].second - bins[29].first, 2u);
}

TEST(SpectrumReport, BinZeroHoldsSmallestSingularValues) {
  const Matrix j = gaussian(40, 50, 9);
  const SpectrumReport r = spectrum_report(j, j);
  ASSERT_EQ(r.bins.size(), 30u);
  EXPECT_EQ(r.bins[0].last, 40u);
  EXPECT_EQ(r.bins[29].first, 0u);
  EXPECT_DOUBLE_EQ(r.bins[0].sigma_lo, r.sigma_clean.back());
  for (std::size_t b = 1; b < 30; ++b) EXPECT_GE(r.bins[b].sigma_lo, r.bins[b - 1].sigma_hi);
  EXPECT_EQ(spectrum_report(gaussian(5, 8, 1), gaussian(5, 8, 1)).bins.size(), 5u);
}

TEST(SpectrumReport, ZeroPerturbationHasZeroShiftsAndAngles) {
  const Matrix j = gaussian(10, 15, 3);
  const SpectrumReport r = spectrum_report(j, j);
  EXPECT_EQ(r.e_norm2, 0.0);
  for (const auto& b : r.bins) {
    EXPECT_EQ(b.mean_delta_sigma, 0.0);
    EXPECT_NEAR(b.mean_angle_rad, 0.0, 1e-6);
  }
  EXPECT_EQ(r.rank, 10u);
  const auto json = to_json(r);
  EXPECT_TRUE(json.contains("bins"));
  const std::string csv = bins_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin,sigma_lo,sigma_hi,mean_delta_sigma,mean_angle_rad");
}

TEST(Decomposition, SquaredSplitBracketsHoldOnRandomPairs) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix j = gaussian(6, 14, s);
    Matrix e = gaussian(6, 14, 50 + s);
    e *= 0.1;
    const PerturbationDecomposition d = perturbation_decomposition(j, e);
    EXPECT_TRUE(d.pass) << "trial " << s;
    EXPECT_LT(d.projector_error, 1e-10);
    for (const auto& entry : d.entries) EXPECT_LE(std::abs(entry.mu), d.pe_norm2 + 1e-9);
  }
}

TEST(ExpectedEigenvalue, ClosedFormSpecialCases) {
  EXPECT_DOUBLE_EQ(lemma1_expected_eigenvalue(2.0, 0.5, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(lemma1_expected_eigenvalue(2.0, 0.0, 3.0), 4.0 + 6.0 + 3.0);
  EXPECT_DOUBLE_EQ(lemma1_expected_eigenvalue(2.0, 1.0, 3.0), 4.0 - 6.0 + 3.0);
}

TEST(ExpectedEigenvalue, ModelConsistentMonteCarloAgrees) {
  const Vector sigma = svd(gaussian(10, 20, 4)).sigma;
  const Lemma1Report r = lemma1_model_consistent(sigma, 0.5, 2000, 4);
  EXPECT_EQ(r.within_count, r.entries.size());
  // Default p_i shrinks with sigma.
  EXPECT_GE(r.entries.front().p_hat, r.entries.back().p_hat);
}

TEST(Eigvec, PreconditionUnmetIsReportedNotAsserted) {
  const Matrix j = Matrix::diagonal(Vector{3.0, 2.0, 1.0});
  Matrix big(3, 3, 0.0);
  big(0, 1) = 1.0;
  const EigvecReport r = eigvec_bound_check(j, big);
  EXPECT_FALSE(r.precondition_met);
  EXPECT_TRUE(r.entries.empty());
  EXPECT_NE(r.reason.find("precondition unmet"), std::string::npos);

  Matrix small(3, 3, 0.0);
  small(0, 1) = 0.05;
  const EigvecReport ok = eigvec_bound_check(j, small);
  EXPECT_TRUE(ok.precondition_met);
  EXPECT_TRUE(ok.pass);
  ASSERT_EQ(ok.entries.size(), 3u);
  EXPECT_NEAR(ok.entries[0].bound, 2.0 * std::sqrt(2.0) * ok.e_norm2 / ok.gamma0, 1e-12);
}

TEST(ResidualDynamics, ZeroStepKeepsInitialResidual) {
  const Dataset data = unit_cube_data(10, 3, 2, 5);
  const Mlp net = Mlp::random({3, 4, 2}, Activation::kTanh, 5);
  const ResidualDynamics r = residual_dynamics_check(net, data, 0.0, 5);
  ASSERT_EQ(r.actual_norm.size(), 6u);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_NEAR(r.predicted_norm[t], r.actual_norm[0], 1e-10 * r.actual_norm[0]);
    EXPECT_DOUBLE_EQ(r.actual_norm[t], r.actual_norm[0]);
  }
}

TEST(ResidualDynamics, LinearModelIsExact) {
  const Dataset data = unit_cube_data(15, 4, 3, 6);
  const Mlp net = Mlp::random({4, 3}, Activation::kTanh, 6);
  const ResidualDynamics r = residual_dynamics_check(net, data, std::nullopt, 30);
  EXPECT_LT(r.max_relative_deviation, 1e-8);
  EXPECT_LT(r.actual_norm.back(), r.actual_norm.front());
}

TEST(PerturbedResidualEnvelope, EnvelopeHoldsOnSmallNetwork) {
  const Dataset data = unit_cube_data(12, 3, 2, 7);
  const Mlp net = Mlp::random({3, 8, 2}, Activation::kTanh, 7);
  TransformSpec spec;
  spec.epsilon0 = 0.05;
  const Theorem2Verdict v = theorem2_envelope_check(net, data, spec, std::nullopt, 20, 10);
  if (v.skipped) GTEST_SKIP() << v.reason;
  EXPECT_TRUE(v.pass);
  ASSERT_EQ(v.mean_actual.size(), v.bound.size());
}

TEST(PerturbedResidualEnvelope, BoundAtZeroPerturbationIsProjectedTargetNorm) {
  const Vector lambda{4.0, 1.0};
  const Vector b = theorem2_bound(lambda, {2.0, 1.0}, {0.5, 0.5}, 0.0, 1.0, {9.0, 16.0}, 2, 0.1, 2);
  EXPECT_DOUBLE_EQ(b[0], 5.0);
  EXPECT_NEAR(b[1], std::sqrt(9.0 * std::pow(0.6, 2) + 16.0 * std::pow(0.9, 2)), 1e-12);
}

TEST(PerturbedResidualEnvelope, InitialBoundGrowsWithPerturbation) {
  const Vector lambda{4.0, 1.0};
  double prev = 0.0;
  for (double e : {0.0, 0.1, 0.2, 0.4}) {
    const double b0 = theorem2_bound(lambda, {2.0, 1.0}, {0.5, 0.5}, e, 1.0, {9.0, 16.0}, 2, 0.1, 0)[0];
    EXPECT_GE(b0, prev);
    prev = b0;
  }
}

TEST(GeneralizationBound, ClosedForm) {
  EXPECT_DOUBLE_EQ(generalization_bound_value(1.0, 4, 1.0, 0.5), std::sqrt(2.0) / 2.0);
  EXPECT_THROW(generalization_bound_value(0.0, 4, 1.0, 0.5), ConfigError);
}

TEST(SpectrumExperiment, LargerBudgetGivesLargerPerturbation) {
  const Dataset data = unit_cube_data(90, 4, 3, 8);
  SpectrumProtocol p;
  p.per_class = 10;
  p.epochs = 3;
  const SpectrumExperiment ex = spectrum_experiment(data, p);
  ASSERT_EQ(ex.reports.size(), 2u);
  EXPECT_EQ(ex.subset.size(), 30u);
  EXPECT_LT(ex.reports[0].e_norm_f, ex.reports[1].e_norm_f);
  for (const auto& r : ex.reports) EXPECT_TRUE(r.weyl.pass);
}

TEST(Audits, InequalityAuditsPass) {
  EXPECT_TRUE(lemma4_audit(20, 1).all_pass());
  EXPECT_TRUE(linear_transform_audit(20, 1).all_pass());
  EXPECT_TRUE(weyl_audit(50, 1).all_pass());
  const AuditSummary e = eigvec_audit(30, 1);
  EXPECT_TRUE(e.all_pass());
  EXPECT_EQ(e.instances, 30u);
}

TEST(Bounds, LinearGradientMatchesNetworkGradient) {
  const Dataset data = random_instance(8, 3, 2, 2);
  Mlp net({3, 2});
  Matrix w(3, 2);
  Rng rng(Stream::kMonteCarlo, {2});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 2; ++c) net.weight(0, i, c) = w(i, c) = rng.normal();
  const Vector ones(8, 1.0);
  const Matrix g = linear_gradient(w, data.features(), data.labels(), ones);
  Vector full(net.num_params(), 0.0);
  for (std::size_t i = 0; i < 8; ++i) axpy_inplace(1.0, per_example_gradient(net, data.x(i), data.target(i)), full);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(g(i, c), full[i * 2 + c], 1e-12);
}

TEST(Bounds, EnvelopeChecksHold) {
  const Dataset lin = random_instance(30, 40, 2, 3);
  SelectionConfig sel;
  TransformSpec spec;
  const EnvelopeCheck t1 = theorem1_envelope_check(lin, sel, spec, 50, 3);
  EXPECT_TRUE(t1.pass);
  EXPECT_GT(t1.alpha, 0.0);
  EXPECT_NEAR(t1.eta, t1.alpha / (t1.lambda * t1.beta), 1e-15);
  Matrix f = Matrix::identity(40);
  for (std::size_t i = 0; i + 1 < 40; ++i) f(i, i + 1) = 0.05;
  const EnvelopeCheck t3 = theorem3_envelope_check(lin, f, sel, 50, 3);
  EXPECT_TRUE(t3.pass);
}

}  // namespace
}  // namespace coreaug
