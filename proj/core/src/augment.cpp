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


#include "coreaug/augment.hpp"

#include <algorithm>
#include <cmath>

#include "coreaug/errors.hpp"
#include "coreaug/rng.hpp"

namespace coreaug {

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::kUniformBall:
      return "uniform_ball";
    case TransformKind::kGaussianClipped:
      return "gaussian_clipped";
    case TransformKind::kPixelJitter:
      return "pixel_jitter";
  }
  return "unknown";
}

TransformKind parse_transform_kind(const std::string& s) {
  if (s == "uniform_ball") return TransformKind::kUniformBall;
  if (s == "gaussian_clipped") return TransformKind::kGaussianClipped;
  if (s == "pixel_jitter") return TransformKind::kPixelJitter;
  throw ConfigError("unknown transform kind '" + s + "'");
}

void TransformSpec::validate() const {
  if (!(epsilon0 >= 0.0) || !std::isfinite(epsilon0))
    throw ConfigError("epsilon0 must be a finite value >= 0");
  if (r < 1) throw ConfigError("r must be >= 1");
}

namespace {

void draw_offset(const TransformSpec& spec, Rng& rng, std::span<double> delta) {
  const std::size_t d = delta.size();
  const double eps = spec.epsilon0;
  std::fill(delta.begin(), delta.end(), 0.0);
  switch (spec.kind) {
    case TransformKind::kUniformBall: {
      for (double& v : delta) v = rng.normal();
      const double nrm = norm2(delta);
      const double radius = eps * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      if (nrm > 0.0)
        for (double& v : delta) v *= radius / nrm;
      break;
    }
    case TransformKind::kGaussianClipped: {
      const double scale = eps / std::sqrt(static_cast<double>(d));
      for (double& v : delta) v = scale * rng.normal();
      break;
    }
    case TransformKind::kPixelJitter: {
      const std::size_t count = std::max<std::size_t>(1, d / 4);
      for (std::size_t j : rng.sample(d, count)) delta[j] = rng.uniform(-eps, eps);
      break;
    }
  }
  const double nrm = norm2(delta);
  if (nrm > eps) {
    const double shrink = eps / nrm;
    for (double& v : delta) v *= shrink;
    // Rounding in the rescale can leave the norm a few ulps above eps.
    while (norm2(delta) > eps)
      for (double& v : delta) v *= 1.0 - 1e-15;
  }
}

void perturb_row(const TransformSpec& spec, std::span<const double> src,
                 std::uint64_t round, std::size_t row, std::size_t copy,
                 std::span<double> out) {
  Rng rng(Stream::kAugment, {spec.seed, round, row, copy});
  draw_offset(spec, rng, out);
  for (std::size_t j = 0; j < src.size(); ++j)
    out[j] = std::clamp(src[j] + out[j], 0.0, 1.0);
}

}  // namespace

AugmentedSet perturb(const TransformSpec& spec, const Matrix& x, std::uint64_t round,
                     std::span<const int> source_labels) {
  spec.validate();
  if (!source_labels.empty() && source_labels.size() != x.rows())
    throw DataError("perturb: label count does not match rows");
  AugmentedSet out;
  out.features = Matrix(x.rows() * spec.r, x.cols());
  out.origin.resize(x.rows() * spec.r);
  if (!source_labels.empty()) out.labels.resize(x.rows() * spec.r);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t c = 0; c < spec.r; ++c) {
      const std::size_t a = i * spec.r + c;
      perturb_row(spec, x.row(i), round, i, c, out.features.row(a));
      out.origin[a] = i;
      if (!source_labels.empty()) out.labels[a] = source_labels[i];
    }
  }
  return out;
}

Matrix perturb_copy(const TransformSpec& spec, const Matrix& x,
                    std::uint64_t round, std::size_t copy) {
  spec.validate();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    perturb_row(spec, x.row(i), round, i, copy, out.row(i));
  return out;
}

PerturbationMatrix perturbation_matrix(const Mlp& net, const Matrix& x,
                                       const Matrix& x_aug_round,
                                       std::optional<double> lipschitz,
                                       std::optional<double> epsilon0) {
  if (x.rows() != x_aug_round.rows() || x.cols() != x_aug_round.cols())
    throw DataError("perturbation_matrix: augmented round must match the source shape");
  PerturbationMatrix out;
  out.e = jacobian(net, x_aug_round) - jacobian(net, x);
  out.norm2 = spectral_norm(out.e);
  out.norm_f = frobenius_norm(out.e);
  if (lipschitz && epsilon0)
    out.bound = std::sqrt(static_cast<double>(x.rows())) * *lipschitz * *epsilon0;
  return out;
}

}  // namespace coreaug
