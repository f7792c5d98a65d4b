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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "coreaug/errors.hpp"

namespace coreaug {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DataError("matrix data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw DataError("matrix entry is not finite");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector Matrix::col(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::row_block(std::size_t begin, std::size_t end) const {
  Matrix out(end - begin, cols_);
  std::copy(data_.begin() + begin * cols_, data_.begin() + end * cols_,
            out.data_.begin());
  return out;
}

Matrix Matrix::col_block(std::size_t begin, std::size_t end) const {
  Matrix out(rows_, end - begin);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = (*this)(i, j);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t c = 0; c < indices.size(); ++c)
      out(i, c) = (*this)(i, indices[c]);
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DataError("matrix addition shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DataError("matrix subtraction shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DataError("matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DataError("matmul_tn shape mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DataError("matmul_nt shape mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DataError("matvec shape mismatch");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

Vector matvec_t(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DataError("matvec_t shape mismatch");
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto arow = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += xi * arow[j];
  }
  return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.empty()) return bottom;
  if (bottom.empty()) return top;
  if (top.cols() != bottom.cols()) throw DataError("vstack column mismatch");
  std::vector<double> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(data));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  Vector out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace {
std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", r);
  return buf;
}


// Orthonormalizes column j of the column-major block q (n rows) against the
// columns flagged in keep, starting from its current content or, if that
// collapses, from successive unit vectors.
void complete_column(std::vector<double>& q, std::size_t n, std::size_t j,
                     const std::vector<bool>& keep) {
  double* target = q.data() + j * n;
  const std::size_t k = keep.size();
  auto project_out = [&](double* x) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < k; ++c) {
        if (!keep[c] || c == j) continue;
        const double* qc = q.data() + c * n;
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += qc[i] * x[i];
        for (std::size_t i = 0; i < n; ++i) x[i] -= d * qc[i];
      }
    }
  };
  std::vector<double> trial(target, target + n);
  double nrm = norm2(trial);
  if (nrm > 0.0) {
    for (double& x : trial) x /= nrm;
    project_out(trial.data());
    nrm = norm2(trial);
  }
  for (std::size_t e = 0; nrm < 0.5 && e < n; ++e) {
    std::fill(trial.begin(), trial.end(), 0.0);
    trial[e] = 1.0;
    project_out(trial.data());
    nrm = norm2(trial);
  }
  for (std::size_t i = 0; i < n; ++i) target[i] = trial[i] / nrm;
}

}  // namespace

SvdResult svd(const Matrix& a, const SvdOptions& options) {
  if (a.empty()) throw DataError("svd of an empty matrix");
  const bool flipped = a.rows() < a.cols();
  const std::size_t n = flipped ? a.cols() : a.rows();
  const std::size_t k = flipped ? a.rows() : a.cols();

  // Column-major working copy: column j occupies g[j*n, (j+1)*n).
  std::vector<double> g(n * k);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (flipped)
        g[i * n + j] = a(i, j);
      else
        g[j * n + i] = a(i, j);
    }
  std::vector<double> v(k * k, 0.0);
  for (std::size_t j = 0; j < k; ++j) v[j * k + j] = 1.0;

  // Columns at roundoff level relative to the whole matrix carry no direction.
  double frob_sq = 0.0;
  for (double x : g) frob_sq += x * x;
  if (!std::isfinite(frob_sq)) throw NumericalError("svd input is not finite", frob_sq);
  const double negligible = frob_sq * 1e-30;

  bool converged = false;
  double worst = 0.0;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool rotated = false;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        double* ap = g.data() + p * n;
        double* aq = g.data() + q * n;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gamma += ap[i] * aq[i];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        const double ratio = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, ratio);
        if (ratio <= options.tolerance) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        double* vp = v.data() + p * k;
        double* vq = v.data() + q * k;
        for (std::size_t i = 0; i < k; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("svd did not converge after " +
                             std::to_string(options.max_sweeps) +
                             " sweeps; off-diagonal ratio " +
                             format_ratio(worst),
                         worst);
  }

  Vector norms(k);
  for (std::size_t j = 0; j < k; ++j)
    norms[j] = norm2(std::span<const double>(g.data() + j * n, n));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  // Sorted left factor (column-major) and right factor.
  std::vector<double> uq(n * k);
  std::vector<double> vq(k * k);
  Vector sigma(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t j = order[c];
    sigma[c] = norms[j];
    std::copy(v.begin() + j * k, v.begin() + (j + 1) * k, vq.begin() + c * k);
    std::copy(g.begin() + j * n, g.begin() + (j + 1) * n, uq.begin() + c * n);
  }
  const double small = sigma[0] * 1e-13;
  std::vector<bool> stable(k);
  for (std::size_t c = 0; c < k; ++c) {
    stable[c] = sigma[c] > 0.0 && sigma[c] > small;
    if (stable[c])
      for (std::size_t i = 0; i < n; ++i) uq[c * n + i] /= sigma[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (stable[c]) continue;
    complete_column(uq, n, c, stable);
    stable[c] = true;
  }

  Matrix left(n, k), right(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) left(i, c) = uq[c * n + i];
    for (std::size_t i = 0; i < k; ++i) right(i, c) = vq[c * k + i];
  }
  SvdResult out;
  out.sigma = std::move(sigma);
  if (flipped) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < out.u.rows(); ++i) {
      if (std::abs(out.u(i, c)) > best) {
        best = std::abs(out.u(i, c));
        arg = i;
      }
    }
    if (out.u(arg, c) < 0.0) {
      for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, c) = -out.u(i, c);
      for (std::size_t i = 0; i < out.v.rows(); ++i) out.v(i, c) = -out.v(i, c);
    }
  }
  return out;
}

double spectral_norm(const Matrix& a) {
  if (a.empty()) throw DataError("spectral_norm of an empty matrix");
  const std::size_t n = a.cols();
  auto run = [&](Vector x) {
    double lambda = 0.0;
    for (int it = 0; it < 1000; ++it) {
      const Vector ax = matvec(a, x);
      const double next = dot(ax, ax);
      Vector z = matvec_t(a, ax);
      const double nz = norm2(z);
      const bool settled = std::abs(next - lambda) <= 1e-15 * next;
      lambda = next;
      if (nz == 0.0 || settled) break;
      for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / nz;
    }
    return lambda;
  };
  double lambda = run(Vector(n, 1.0 / std::sqrt(static_cast<double>(n))));
  if (lambda == 0.0 && frobenius_norm(a) > 0.0) {
    // The all-ones start is orthogonal to the row space; any fixed start
    // with generic entries recovers.
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.0 + 2.0 * static_cast<double>(i));
    const double nx = norm2(x);
    for (double& e : x) e /= nx;
    lambda = run(std::move(x));
  }
  return std::sqrt(lambda);
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

Vector principal_angles(const Matrix& u1, const Matrix& u2) {
  if (u1.rows() != u2.rows())
    throw DataError("principal_angles: row counts differ");
  if (u1.empty() || u2.empty()) return {};
  const Vector s = svd(matmul_tn(u1, u2)).sigma;
  Vector angles(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    angles[i] = std::acos(std::clamp(s[i], 0.0, 1.0));
  std::sort(angles.begin(), angles.end());
  return angles;
}

std::size_t numerical_rank(std::span<const double> sigma, double rel_tol) {
  if (sigma.empty() || sigma[0] == 0.0) return 0;
  std::size_t r = 0;
  for (double s : sigma)
    if (s > rel_tol * sigma[0]) ++r;
  return r;
}

double eigengap(std::span<const double> sigma, std::size_t rank) {
  if (rank == 0) return 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rank; ++i) {
    const double next = i + 1 < rank ? sigma[i + 1] : 0.0;
    gap = std::min(gap, sigma[i] - next);
  }
  return gap;
}

}  // namespace coreaug
