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

#ifndef COREAUG_LINALG_HPP_
#define COREAUG_LINALG_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace coreaug {

using Vector = std::vector<double>;

// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Takes ownership of row-major data; throws DataError on a size mismatch or
  // a non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  // Column matrix holding v.
  static Matrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector col(std::size_t j) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  // Rows [begin, end).
  Matrix row_block(std::size_t begin, std::size_t end) const;
  // Columns [begin, end).
  Matrix col_block(std::size_t begin, std::size_t end) const;
  Matrix select_rows(std::span<const std::size_t> indices) const;
  Matrix select_cols(std::span<const std::size_t> indices) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
// a^T x.
Vector matvec_t(const Matrix& a, std::span<const double> x);
// Vertical concatenation; column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
// Returns y + alpha * x.
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);
// y += alpha * x.
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);

struct SvdResult {
  Matrix u;      // rows x k, orthonormal columns
  Vector sigma;  // k values, nonincreasing, nonnegative
  Matrix v;      // cols x k, orthonormal columns
};

struct SvdOptions {
  int max_sweeps = 100;
  double tolerance = 1e-12;
};

// Thin SVD, k = min(rows, cols), by one-sided (Hestenes) Jacobi rotations.
// Each U column's largest-magnitude entry is nonnegative. Throws
// NumericalError carrying the remaining off-diagonal ratio when the sweep cap
// is reached.
SvdResult svd(const Matrix& a, const SvdOptions& options = {});

// Largest singular value by power iteration on A^T A from the normalized
// all-ones vector.
double spectral_norm(const Matrix& a);

double frobenius_norm(const Matrix& a);

// Principal angles (radians) between the column spans of two matrices with
// orthonormal columns and equal row counts. Sorted nondecreasing, length
// min(cols).
Vector principal_angles(const Matrix& u1, const Matrix& u2);

// Number of singular values above rel_tol * sigma[0].
std::size_t numerical_rank(std::span<const double> sigma, double rel_tol = 1e-10);

// Eigengap min_i (sigma_i - sigma_{i+1}) over the first rank values, with
// sigma_{rank+1} taken as zero.
double eigengap(std::span<const double> sigma, std::size_t rank);

}  // namespace coreaug

#endif  // COREAUG_LINALG_HPP_
