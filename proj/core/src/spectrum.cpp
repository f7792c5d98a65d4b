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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coreaug/errors.hpp"
#include "coreaug/parallel.hpp"
#include "coreaug/rng.hpp"
#include "coreaug/trainer.hpp"

namespace coreaug {

WeylVerdict weyl_check(const Vector& sigma_clean, const Vector& sigma_aug, double e_norm2,
                       double tol) {
  if (sigma_clean.size() != sigma_aug.size())
    throw ConfigError("spectra must have equal length for rank pairing");
  WeylVerdict v;
  v.e_norm2 = e_norm2;
  v.max_violation = -e_norm2;
  for (std::size_t i = 0; i < sigma_clean.size(); ++i) {
    const double shift = std::abs(sigma_aug[i] - sigma_clean[i]);
    v.max_shift = std::max(v.max_shift, shift);
    v.max_violation = std::max(v.max_violation, shift - e_norm2);
  }
  v.pass = v.max_violation <= tol;
  return v;
}

std::vector<std::pair<std::size_t, std::size_t>> bin_partition(std::size_t count,
                                                               std::size_t bins) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (bins == 0) return out;
  const std::size_t base = count / bins;
  const std::size_t extra = count % bins;
  std::size_t at = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    out.emplace_back(at, at + len);
    at += len;
  }
  return out;
}

SpectrumReport spectrum_report(const Matrix& j_clean, const Matrix& j_aug) {
  if (j_clean.rows() != j_aug.rows() || j_clean.cols() != j_aug.cols())
    throw ConfigError("clean and augmented Jacobians differ in shape");
  const SvdResult a = svd(j_clean);
  const SvdResult b = svd(j_aug);
  const Matrix e = j_aug - j_clean;
  SpectrumReport rep;
  rep.sigma_clean = a.sigma;
  rep.sigma_aug = b.sigma;
  rep.e_norm2 = spectral_norm(e);
  rep.e_norm_f = frobenius_norm(e);
  rep.rank = numerical_rank(a.sigma);
  rep.gamma0 = eigengap(a.sigma, rep.rank);
  rep.weyl = weyl_check(a.sigma, b.sigma, rep.e_norm2);

  const std::size_t k = a.sigma.size();
  const std::size_t nbins = std::min(kSpectrumBins, k);
  const auto parts = bin_partition(k, nbins);
  rep.bins.resize(nbins);
  parallel_for(nbins, [&](std::size_t bi) {
    SpectrumBin& bin = rep.bins[bi];
    bin.index = bi;
    bin.first = k - parts[bi].second;
    bin.last = k - parts[bi].first;
    bin.sigma_lo = a.sigma[bin.last - 1];
    bin.sigma_hi = a.sigma[bin.first];
    double shift = 0.0;
    double rel = 0.0;
    std::size_t rel_count = 0;
    std::vector<std::size_t> cols;
    for (std::size_t i = bin.first; i < bin.last; ++i) {
      const double ds = b.sigma[i] - a.sigma[i];
      shift += ds;
      if (a.sigma[i] > 0.0) {
        rel += ds / a.sigma[i];
        ++rel_count;
      }
      cols.push_back(i);
    }
    const double len = static_cast<double>(cols.size());
    bin.mean_delta_sigma = shift / len;
    bin.mean_relative_delta_sigma = rel_count ? rel / static_cast<double>(rel_count) : 0.0;
    const Vector angles = principal_angles(a.u.select_cols(cols), b.u.select_cols(cols));
    double s = 0.0;
    for (double t : angles) s += t;
    bin.mean_angle_rad = angles.empty() ? 0.0 : s / static_cast<double>(angles.size());
  });
  return rep;
}

nlohmann::json to_json(const SpectrumReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"index", b.index},
                    {"sigma_range", {b.sigma_lo, b.sigma_hi}},
                    {"mean_delta_sigma", b.mean_delta_sigma},
                    {"mean_relative_delta_sigma", b.mean_relative_delta_sigma},
                    {"mean_subspace_angle_rad", b.mean_angle_rad}});
  }
  return {{"sigma_clean", report.sigma_clean},
          {"sigma_aug", report.sigma_aug},
          {"E_norm2", report.e_norm2},
          {"E_normF", report.e_norm_f},
          {"gamma0", report.gamma0},
          {"rank", report.rank},
          {"bins", bins},
          {"weyl", {{"pass", report.weyl.pass},
                    {"max_shift", report.weyl.max_shift},
                    {"max_violation", report.weyl.max_violation}}}};
}

std::string bins_csv(const SpectrumReport& report) {
  std::ostringstream os;
  os << "bin,sigma_lo,sigma_hi,mean_delta_sigma,mean_angle_rad\n";
  for (const auto& b : report.bins)
    os << b.index << ',' << format_double(b.sigma_lo) << ',' << format_double(b.sigma_hi) << ','
       << format_double(b.mean_delta_sigma) << ',' << format_double(b.mean_angle_rad) << '\n';
  return os.str();
}

BinContrast bin_contrast(const SpectrumReport& report, double share) {
  BinContrast c;
  const std::size_t nb = report.bins.size();
  if (nb == 0) return c;
  const std::size_t w = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(share * static_cast<double>(nb) + 1e-9)));
  for (std::size_t i = 0; i < w; ++i) {
    const auto& lo = report.bins[i];
    const auto& hi = report.bins[nb - 1 - i];
    c.bottom_relative_shift += lo.mean_relative_delta_sigma;
    c.top_relative_shift += hi.mean_relative_delta_sigma;
    c.bottom_angle += lo.mean_angle_rad;
    c.top_angle += hi.mean_angle_rad;
  }
  const double dw = static_cast<double>(w);
  c.bottom_relative_shift /= dw;
  c.top_relative_shift /= dw;
  c.bottom_angle /= dw;
  c.top_angle /= dw;
  return c;
}

PerturbationDecomposition perturbation_decomposition(const Matrix& j, const Matrix& e, double tol) {
  if (j.rows() != e.rows() || j.cols() != e.cols())
    throw ConfigError("J and E differ in shape");
  const Matrix jt = j.transpose();
  const Matrix et = e.transpose();
  const SvdResult base = svd(jt);
  PerturbationDecomposition out;
  out.rank = numerical_rank(base.sigma);
  std::vector<std::size_t> cols(out.rank);
  for (std::size_t i = 0; i < out.rank; ++i) cols[i] = i;
  const Matrix ur = base.u.select_cols(cols);  // basis of col(J^T)
  const Matrix pe = matmul(ur, matmul_tn(ur, et));
  const Matrix perp = et - pe;
  const Matrix ppe = matmul(ur, matmul_tn(ur, pe));
  out.projector_error = frobenius_norm(ppe - pe) + frobenius_norm(pe + perp - et);
  out.pe_norm2 = spectral_norm(pe);
  const SvdResult perp_svd = svd(perp);
  out.perp_e_norm2 = perp_svd.sigma.empty() ? 0.0 : perp_svd.sigma.front();
  out.perp_e_sigma_min =
      perp.rows() >= perp.cols() && !perp_svd.sigma.empty() ? perp_svd.sigma.back() : 0.0;

  const Vector sig_m = svd(jt + pe).sigma;
  const Vector sig_t = svd(jt + et).sigma;
  double scale = 1.0;
  for (double s : sig_t) scale = std::max(scale, s * s);
  const double lo = out.perp_e_sigma_min * out.perp_e_sigma_min;
  const double hi = out.perp_e_norm2 * out.perp_e_norm2;
  out.pass = true;
  for (std::size_t i = 0; i < base.sigma.size(); ++i) {
    DecompositionEntry en;
    en.sigma = base.sigma[i];
    en.sigma_aug = sig_t[i];
    en.mu = sig_m[i] - base.sigma[i];
    const double z2 = sig_t[i] * sig_t[i] - sig_m[i] * sig_m[i];
    en.zeta = std::sqrt(std::max(0.0, z2));
    const double slack = tol * scale;
    en.pass = std::abs(en.mu) <= out.pe_norm2 + tol * std::max(1.0, base.sigma.front()) &&
              z2 >= lo - slack && z2 <= hi + slack;
    out.pass = out.pass && en.pass;
    out.entries.push_back(en);
  }
  return out;
}

double lemma1_expected_eigenvalue(double sigma, double p, double e_norm) {
  return sigma * sigma + sigma * (1.0 - 2.0 * p) * e_norm + e_norm * e_norm / 3.0;
}

nlohmann::json to_json(const Lemma1Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : report.entries)
    rows.push_back({{"sigma", e.sigma},
                    {"p_hat", e.p_hat},
                    {"predicted_E_lambda", e.predicted},
                    {"empirical_E_lambda", e.empirical},
                    {"standard_error", e.standard_error},
                    {"within_3se", e.within}});
  return {{"mode", report.mode},
          {"draws", report.draws},
          {"mean_E_norm", report.mean_e_norm},
          {"within_count", report.within_count},
          {"entries", rows}};
}

namespace {

// Shared summary of per-draw perturbed spectra.
Lemma1Report summarize_lemma1(const Vector& sigma, const std::vector<Vector>& draws_sigma,
                              double mean_e, std::string mode) {
  Lemma1Report rep;
  rep.mode = std::move(mode);
  rep.draws = draws_sigma.size();
  rep.mean_e_norm = mean_e;
  const double nd = static_cast<double>(draws_sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    Lemma1Entry en;
    en.sigma = sigma[i];
    std::size_t down = 0;
    double sum = 0.0;
    for (const auto& s : draws_sigma) {
      if (s[i] < sigma[i]) ++down;
      sum += s[i] * s[i];
    }
    en.p_hat = static_cast<double>(down) / nd;
    en.empirical = sum / nd;
    double var = 0.0;
    for (const auto& s : draws_sigma) {
      const double dv = s[i] * s[i] - en.empirical;
      var += dv * dv;
    }
    var = draws_sigma.size() > 1 ? var / (nd - 1.0) : 0.0;
    en.standard_error = std::sqrt(var / nd);
    en.predicted = lemma1_expected_eigenvalue(sigma[i], en.p_hat, mean_e);
    const double slack = 1e-12 * std::max({1.0, sigma[i] * sigma[i], mean_e * mean_e});
    en.within = std::abs(en.empirical - en.predicted) <= 3.0 * en.standard_error + slack;
    if (en.within) ++rep.within_count;
    rep.entries.push_back(en);
  }
  return rep;
}

}  // namespace

Lemma1Report lemma1_model_consistent(const Vector& sigma, double e_norm, std::size_t draws,
                                     std::uint64_t seed, std::optional<Vector> p) {
  if (draws < 1) throw ConfigError("draws must be >= 1");
  if (!(e_norm >= 0.0)) throw ConfigError("perturbation norm must be >= 0");
  Vector prob;
  if (p) {
    if (p->size() != sigma.size()) throw ConfigError("one probability per singular value");
    prob = *p;
  } else {
    double smax = 0.0;
    for (double s : sigma) smax = std::max(smax, s);
    for (double s : sigma) prob.push_back(smax > 0.0 ? 0.5 * s / smax : 0.5);
  }
  std::vector<Vector> out(draws, Vector(sigma.size()));
  for (std::size_t t = 0; t < draws; ++t) {
    Rng rng(Stream::kMonteCarlo, {seed, t});
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const bool down = rng.uniform() < prob[i];
      const double u = rng.uniform();
      const double delta = down ? -e_norm + e_norm * u : e_norm * u;
      out[t][i] = sigma[i] + delta;
    }
  }
  return summarize_lemma1(sigma, out, e_norm, "model_consistent");
}

Lemma1Report lemma1_monte_carlo(const Mlp& net, const Dataset& data, const TransformSpec& spec,
                                std::size_t draws) {
  if (draws < 1) throw ConfigError("draws must be >= 1");
  spec.validate();
  const Matrix j = jacobian(net, data.features());
  const Vector sigma = svd(j).sigma;
  std::vector<Vector> out(draws);
  Vector norms(draws, 0.0);
  parallel_for(draws, [&](std::size_t t) {
    const Matrix xa = perturb_copy(spec, data.features(), t, 0);
    const Matrix ja = jacobian(net, xa);
    out[t] = svd(ja).sigma;
    norms[t] = spectral_norm(ja - j);
  });
  double mean_e = 0.0;
  for (double v : norms) mean_e += v;
  mean_e /= static_cast<double>(draws);
  return summarize_lemma1(sigma, out, mean_e, "augmentation");
}

EigvecReport eigvec_bound_check(const Matrix& j, const Matrix& e) {
  if (j.rows() != e.rows() || j.cols() != e.cols())
    throw ConfigError("J and E differ in shape");
  EigvecReport rep;
  const SvdResult a = svd(j);
  rep.rank = numerical_rank(a.sigma);
  rep.gamma0 = eigengap(a.sigma, rep.rank);
  rep.e_norm2 = spectral_norm(e);
  if (rep.gamma0 < 2.0 * rep.e_norm2) {
    rep.reason = "precondition unmet: gamma0 < 2 ||E||_2";
    return rep;
  }
  rep.precondition_met = true;
  const SvdResult b = svd(j + e);
  const double bound = rep.e_norm2 == 0.0 ? 0.0 : 2.0 * std::sqrt(2.0) * rep.e_norm2 / rep.gamma0;
  rep.pass = true;
  for (std::size_t i = 0; i < rep.rank; ++i) {
    EigvecEntry en;
    en.index = i;
    const Vector u = a.u.col(i);
    Vector v = b.u.col(i);
    double d = dot(u, v);
    if (d < 0.0) {
      for (double& x : v) x = -x;
      d = -d;
    }
    en.dot = d;
    double s = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r) s += (u[r] - v[r]) * (u[r] - v[r]);
    en.distance = std::sqrt(s);
    en.bound = bound;
    en.pass = en.distance <= bound + 1e-12;
    rep.pass = rep.pass && en.pass;
    rep.entries.push_back(en);
  }
  return rep;
}

namespace {

Vector flat_residual(const Mlp& net, const Matrix& x, std::span<const int> labels) {
  const Matrix f = forward(net, x);
  Vector r(f.size());
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t c = 0; c < f.cols(); ++c)
      r[i * f.cols() + c] = f(i, c) - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0);
  return r;
}

void gd_step(Mlp& net, const Matrix& x, std::span<const int> labels, double eta) {
  const Vector ones(x.rows(), 1.0);
  weighted_gradient_step(net, x, labels, ones, eta);
}

}  // namespace

ResidualDynamics residual_dynamics_check(const Mlp& net, const Dataset& data,
                                         std::optional<double> eta, std::size_t steps) {
  const Matrix& x = data.features();
  const Matrix j = jacobian(net, x);
  const SvdResult eig = svd(matmul_nt(j, j));
  ResidualDynamics out;
  out.lambda_max = eig.sigma.empty() ? 0.0 : eig.sigma.front();
  out.eta = eta ? *eta : (out.lambda_max > 0.0 ? 1.0 / out.lambda_max : 0.0);
  if (!(out.eta >= 0.0)) throw ConfigError("eta must be >= 0");
  const Vector r0 = flat_residual(net, x, data.labels());
  const Vector coef = matvec_t(eig.u, r0);
  Mlp w = net;
  for (std::size_t t = 0; t <= steps; ++t) {
    Vector scaled(coef.size());
    for (std::size_t i = 0; i < coef.size(); ++i)
      scaled[i] = std::pow(1.0 - out.eta * eig.sigma[i], static_cast<double>(t)) * coef[i];
    const Vector pred = matvec(eig.u, scaled);
    const Vector act = flat_residual(w, x, data.labels());
    Vector diff(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) diff[i] = pred[i] - act[i];
    const double an = norm2(act);
    const double dn = norm2(diff);
    out.predicted_norm.push_back(norm2(pred));
    out.actual_norm.push_back(an);
    const double rel = an > 0.0 ? dn / an : (dn == 0.0 ? 0.0 : dn);
    out.relative_deviation.push_back(rel);
    out.max_relative_deviation = std::max(out.max_relative_deviation, rel);
    if (t < steps) gd_step(w, x, data.labels(), out.eta);
  }
  return out;
}

Vector theorem2_bound(const Vector& lambda, const Vector& sigma, const Vector& p, double e_norm,
                      double gamma0, const Vector& y_proj_sq, std::size_t n, double eta,
                      std::size_t steps) {
  Vector out;
  const double extra = e_norm == 0.0 ? 0.0 : 2.0 * static_cast<double>(n) * std::sqrt(2.0) * e_norm / gamma0;
  for (std::size_t t = 0; t <= steps; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const double sg = i < sigma.size() ? sigma[i] : 0.0;
      const double pi = i < p.size() ? p[i] : 0.0;
      const double expect = lemma1_expected_eigenvalue(sg, pi, e_norm);
      const double base = 1.0 - eta * expect;
      s += std::pow(base, 2.0 * static_cast<double>(t)) * (y_proj_sq[i] + extra);
    }
    out.push_back(std::sqrt(s));
  }
  return out;
}

Theorem2Verdict theorem2_envelope_check(const Mlp& net, const Dataset& data,
                                        const TransformSpec& spec, std::optional<double> eta,
                                        std::size_t steps, std::size_t seeds) {
  spec.validate();
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  Theorem2Verdict out;
  const Matrix& x = data.features();
  const Matrix j = jacobian(net, x);
  const SvdResult eig = svd(matmul_nt(j, j));
  const Vector sigma_thin = svd(j).sigma;
  const std::size_t rank = numerical_rank(sigma_thin);
  out.gamma0 = eigengap(sigma_thin, rank);
  const double smax = sigma_thin.empty() ? 0.0 : sigma_thin.front();
  if (rank == 0 || !(out.gamma0 > 1e-12 * smax)) {
    out.skipped = true;
    out.reason = "eigengap degenerate";
    return out;
  }
  const double lmax = eig.sigma.front();
  out.eta = eta ? *eta : 1.0 / lmax;

  std::vector<Vector> seed_sigma(seeds);
  Vector seed_e(seeds, 0.0);
  std::vector<Vector> seed_curve(seeds);
  parallel_for(seeds, [&](std::size_t s) {
    const Matrix xa = perturb_copy(spec, x, s, 0);
    const Matrix ja = jacobian(net, xa);
    seed_sigma[s] = svd(ja).sigma;
    seed_e[s] = spectral_norm(ja - j);
    Mlp w = net;
    Vector curve;
    for (std::size_t t = 0; t <= steps; ++t) {
      curve.push_back(norm2(flat_residual(w, xa, data.labels())));
      if (t < steps) gd_step(w, xa, data.labels(), out.eta);
    }
    seed_curve[s] = std::move(curve);
  });
  for (double v : seed_e) out.mean_e_norm += v;
  out.mean_e_norm /= static_cast<double>(seeds);
  Vector p(sigma_thin.size(), 0.0);
  for (std::size_t i = 0; i < sigma_thin.size(); ++i) {
    std::size_t down = 0;
    for (const auto& s : seed_sigma)
      if (s[i] < sigma_thin[i]) ++down;
    p[i] = static_cast<double>(down) / static_cast<double>(seeds);
  }
  out.mean_actual.assign(steps + 1, 0.0);
  for (const auto& c : seed_curve)
    for (std::size_t t = 0; t <= steps; ++t) out.mean_actual[t] += c[t] / static_cast<double>(seeds);

  const Vector r0 = flat_residual(net, x, data.labels());
  const Vector coef = matvec_t(eig.u, r0);
  Vector proj_sq(coef.size());
  for (std::size_t i = 0; i < coef.size(); ++i) proj_sq[i] = coef[i] * coef[i];
  Vector sig_full(eig.sigma.size());
  for (std::size_t i = 0; i < eig.sigma.size(); ++i) sig_full[i] = std::sqrt(std::max(0.0, eig.sigma[i]));
  out.bound = theorem2_bound(eig.sigma, sig_full, p, out.mean_e_norm, out.gamma0, proj_sq,
                             j.rows(), out.eta, steps);
  out.pass = true;
  for (std::size_t t = 0; t <= steps; ++t)
    if (out.mean_actual[t] > out.bound[t] * (1.0 + 1e-10) + 1e-12) out.pass = false;
  return out;
}

double generalization_bound_value(double sigma_min, std::size_t n, double lipschitz,
                                  double epsilon0) {
  if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be > 0");
  if (!(lipschitz >= 0.0) || !(epsilon0 >= 0.0))
    throw ConfigError("Lipschitz constant and epsilon0 must be >= 0");
  const double denom = sigma_min + std::sqrt(static_cast<double>(n)) * lipschitz * epsilon0;
  return std::sqrt(2.0 / (denom * denom));
}

SpectrumExperiment spectrum_experiment(const Dataset& data, const SpectrumProtocol& protocol) {
  if (protocol.per_class < 1) throw ConfigError("per_class must be >= 1");
  const std::size_t classes = std::min<std::size_t>(3, data.num_classes());
  std::vector<std::size_t> picked;
  std::vector<int> labels;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& members = data.class_index()[c];
    if (members.empty()) continue;
    const std::size_t take = std::min(protocol.per_class, members.size());
    Rng rng(Stream::kData, {protocol.seed, c});
    std::vector<std::size_t> local = rng.sample(members.size(), take);
    std::sort(local.begin(), local.end());
    for (std::size_t q : local) {
      picked.push_back(members[q]);
      labels.push_back(static_cast<int>(c));
    }
  }
  if (picked.empty()) throw DataError("no examples in the first three classes");
  SpectrumExperiment out;
  out.subset = Dataset(data.features().select_rows(picked), labels, classes);

  std::vector<std::size_t> sizes{data.dim()};
  sizes.insert(sizes.end(), protocol.hidden.begin(), protocol.hidden.end());
  sizes.push_back(classes);
  out.net = Mlp::random(sizes, protocol.activation, protocol.seed);
  if (protocol.train) {
    const Matrix& x = out.subset.features();
    for (std::size_t e = 0; e < protocol.epochs; ++e) {
      for (const auto& batch : epoch_batches(x.rows(), protocol.batch_size, protocol.seed, e)) {
        const Matrix xb = x.select_rows(batch);
        std::vector<int> yb;
        for (std::size_t i : batch) yb.push_back(out.subset.label(i));
        gd_step(out.net, xb, yb, protocol.lr / static_cast<double>(batch.size()));
      }
    }
  }
  for (double p : out.net.params())
    if (!std::isfinite(p)) throw NumericalError("spectrum protocol training diverged", 0.0);
  const Matrix j = jacobian(out.net, out.subset.features());
  for (double eps : protocol.epsilons) {
    TransformSpec spec;
    spec.kind = protocol.kind;
    spec.epsilon0 = eps;
    spec.r = 1;
    spec.seed = protocol.seed;
    const Matrix xa = perturb_copy(spec, out.subset.features(), 0, 0);
    out.reports.push_back(spectrum_report(j, jacobian(out.net, xa)));
  }
  return out;
}

}  // namespace coreaug
