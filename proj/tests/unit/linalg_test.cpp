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


#include "coreaug/linalg.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "coreaug/errors.hpp"
#include "test_util.hpp"

namespace coreaug {
namespace {

using testing::gaussian;
using testing::max_abs_diff;

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= s.sigma[j];
  return matmul_nt(us, s.v);
}

TEST(Matmul, MatchesHandComputedProduct) {
  const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  EXPECT_EQ(matmul(a, b), Matrix(2, 2, {58, 64, 139, 154}));
  EXPECT_EQ(matmul_tn(a.transpose(), b), matmul(a, b));
  EXPECT_EQ(matmul_nt(a, b.transpose()), matmul(a, b));
}

TEST(Matmul, RejectsShapeMismatch) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), Error);
}

TEST(Matrix, RejectsNonFiniteData) {
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0, NAN}), DataError);
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0}), DataError);
}

TEST(Axpy, InPlaceAndCopyAgree) {
  const Vector x{1, 2, 3};
  Vector y{4, 5, 6};
  const Vector z = axpy(2.0, x, y);
  axpy_inplace(2.0, x, y);
  EXPECT_EQ(y, z);
  EXPECT_EQ(y, (Vector{6, 9, 12}));
}

TEST(Svd, DiagonalMatrixGivesSortedAbsoluteValues) {
  const Matrix a = Matrix::diagonal(Vector{1.0, -5.0, 3.0});
  const SvdResult s = svd(a);
  ASSERT_EQ(s.sigma.size(), 3u);
  EXPECT_NEAR(s.sigma[0], 5.0, 1e-14);
  EXPECT_NEAR(s.sigma[1], 3.0, 1e-14);
  EXPECT_NEAR(s.sigma[2], 1.0, 1e-14);
}

class SvdShapes : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(SvdShapes, ReconstructsWithOrthonormalFactors) {
  const auto [r, c] = GetParam();
  const Matrix a = gaussian(r, c, 31 * r + c);
  const SvdResult s = svd(a);
  EXPECT_LT(max_abs_diff(reconstruct(s), a), 1e-11);
  const std::size_t k = std::min(r, c);
  EXPECT_LT(max_abs_diff(matmul_tn(s.u, s.u), Matrix::identity(k)), 1e-12);
  EXPECT_LT(max_abs_diff(matmul_tn(s.v, s.v), Matrix::identity(k)), 1e-12);
  for (std::size_t i = 1; i < k; ++i) EXPECT_GE(s.sigma[i - 1], s.sigma[i]);
}

INSTANTIATE_TEST_SUITE_P(Shapes, SvdShapes,
                         ::testing::Values(std::pair{1, 1}, std::pair{5, 3}, std::pair{3, 5},
                                           std::pair{40, 12}, std::pair{12, 40}));

TEST(Svd, SingularValuesSquaredAreGramEigenvalues) {
  // Trace of A^T A equals the sum of squared singular values; the gram's
  // top eigenvalue matches power iteration on A.
  const Matrix a = gaussian(15, 9, 4);
  const SvdResult s = svd(a);
  double sq = 0.0;
  for (double v : s.sigma) sq += v * v;
  EXPECT_NEAR(sq, std::pow(frobenius_norm(a), 2), 1e-10);
  EXPECT_NEAR(spectral_norm(a), s.sigma[0], 1e-8);
}

TEST(Svd, RankDeficientInputConverges) {
  const Matrix b = gaussian(60, 3, 5);
  const Matrix c = gaussian(3, 25, 6);
  const Matrix a = matmul(b, c);  // rank 3
  SvdResult s;
  ASSERT_NO_THROW(s = svd(a));
  EXPECT_EQ(numerical_rank(s.sigma), 3u);
  EXPECT_LT(max_abs_diff(reconstruct(s), a), 1e-10);
}

TEST(Svd, IdenticalColumnsConverge) {
  Matrix a(8, 6, 0.25);
  SvdResult s;
  ASSERT_NO_THROW(s = svd(a));
  EXPECT_NEAR(s.sigma[0], 0.25 * std::sqrt(48.0), 1e-12);
  EXPECT_EQ(numerical_rank(s.sigma), 1u);
}

TEST(Svd, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(svd(Matrix()), DataError);
  Matrix a(2, 2, 1.0);
  a(0, 0) = INFINITY;
  EXPECT_THROW(svd(a), NumericalError);
}

TEST(SpectralNorm, ZeroMatrixIsZero) { EXPECT_EQ(spectral_norm(Matrix(3, 4)), 0.0); }

TEST(PrincipalAngles, IdenticalAndOrthogonalSubspaces) {
  const Matrix e = Matrix::identity(4);
  const Matrix u1 = e.col_block(0, 2);
  const Matrix u2 = e.col_block(2, 4);
  for (double a : principal_angles(u1, u1)) EXPECT_NEAR(a, 0.0, 1e-7);
  for (double a : principal_angles(u1, u2)) EXPECT_NEAR(a, std::numbers::pi / 2, 1e-12);
}

TEST(PrincipalAngles, RotatedLineHasRotationAngle) {
  const double t = 0.3;
  const Matrix u1(2, 1, {1.0, 0.0});
  const Matrix u2(2, 1, {std::cos(t), std::sin(t)});
  EXPECT_NEAR(principal_angles(u1, u2)[0], t, 1e-12);
}

TEST(Eigengap, MinimumConsecutiveSpacing) {
  const Vector sigma{10.0, 7.0, 6.5, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(eigengap(sigma, 4), 0.5);
  EXPECT_EQ(numerical_rank(sigma), 4u);
}

TEST(Vstack, StacksRows) {
  const Matrix a(1, 2, {1, 2});
  const Matrix b(2, 2, {3, 4, 5, 6});
  EXPECT_EQ(vstack(a, b), Matrix(3, 2, {1, 2, 3, 4, 5, 6}));
}

}  // namespace
}  // namespace coreaug
