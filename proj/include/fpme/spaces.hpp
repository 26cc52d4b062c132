// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/grid.hpp"
#include "fpme/numeric.hpp"
#include "fpme/operator.hpp"
#include "fpme/rng.hpp"

namespace fpme {

/// Coefficients u_hat_k of a grid function against an eigenbasis.
struct SpectralCoeffs {
  Eigen::VectorXd coeffs;

  /// |sum u_hat^2 - ||f||_L2^2| relative defect; ~0 when the basis is
  /// complete on the grid (Parseval).
  double parseval_defect(const GridFunction& f) const {
    const double l2 = f.l2_norm();
    if (l2 == 0.0) return 0.0;
    return std::abs(coeffs.squaredNorm() - l2 * l2) / (l2 * l2);
  }
};

inline SpectralCoeffs spectral_coeffs(const EigenBasis& b, const GridFunction& f) {
  return SpectralCoeffs{b.coefficients(f)};
}

namespace detail {
inline double weighted_coeff_norm(const EigenBasis& b, const GridFunction& f, double power) {
  const Eigen::VectorXd c = b.coefficients(f);
  std::vector<double> terms(static_cast<std::size_t>(c.size()));
  for (Eigen::Index k = 0; k < c.size(); ++k)
    terms[static_cast<std::size_t>(k)] = std::pow(b.mu[k], power) * c[k] * c[k];
  return std::sqrt(pairwise_sum(terms));
}
}  // namespace detail

/// ||f||_H = (sum mu_k f_hat_k^2)^{1/2}.
inline double h_norm(const EigenBasis& b, const GridFunction& f) {
  return detail::weighted_coeff_norm(b, f, 1.0);
}

/// ||F||_{H*} = (sum mu_k^{-1} F_hat_k^2)^{1/2}.
inline double hstar_norm(const EigenBasis& b, const GridFunction& f) {
  return detail::weighted_coeff_norm(b, f, -1.0);
}

/// Squared Gagliardo seminorm of the zero extension of f,
///   [E0 f]^2 = int int |E0f(x)-E0f(y)|^2 / |x-y|^{1+2s} dx dy,
/// on the interval. Quadrature: trapezoid double sum away from the diagonal,
/// the band |x-y| < h via the local-Lipschitz closed form, and exact
/// analytic tails for the zero exterior.
inline double gagliardo_seminorm_sq(const GridFunction& f, double s,
                                    std::string* warning = nullptr) {
  if (f.domain().geometry != Geometry::Interval)
    throw ConfigError("gagliardo_seminorm: Interval geometry only");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("gagliardo_seminorm: s must lie in (0,1)");
  if (s >= 0.95 && warning)
    *warning = "gagliardo_seminorm: quadrature degrades for s >= 0.95";
  const int n = f.domain().n_interior;
  const double h = f.domain().h();
  // nodes 0..n+1 with zero boundary values
  std::vector<double> v(static_cast<std::size_t>(n) + 2, 0.0);
  for (int i = 1; i <= n; ++i) v[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i - 1)];
  auto tau = [&](int j) { return (j == 0 || j == n + 1) ? 0.5 * h : h; };
  const double band = std::pow(h, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  std::vector<double> outer(static_cast<std::size_t>(n) + 2, 0.0);
  for (int i = 0; i <= n + 1; ++i) {
    const double xi = i * h;
    double acc = 0.0;
    // far trapezoid, right region [x_i + h, 1]
    if (i + 1 < n + 1) {
      for (int j = i + 1; j <= n + 1; ++j) {
        double w = (j == i + 1 || j == n + 1) ? 0.5 * h : h;
        const double d = (j - i) * h;
        acc += w * (v[i] - v[j]) * (v[i] - v[j]) * std::pow(d, -1.0 - 2.0 * s);
      }
    }
    // far trapezoid, left region [0, x_i - h]
    if (i - 1 > 0) {
      for (int j = 0; j <= i - 1; ++j) {
        double w = (j == i - 1 || j == 0) ? 0.5 * h : h;
        const double d = (i - j) * h;
        acc += w * (v[i] - v[j]) * (v[i] - v[j]) * std::pow(d, -1.0 - 2.0 * s);
      }
    }
    // diagonal band via one-sided slopes (the exterior side slope is zero)
    double slopes = 0.0;
    if (i >= 1) slopes += (v[i] - v[i - 1]) * (v[i] - v[i - 1]) / (h * h);
    if (i <= n) slopes += (v[i + 1] - v[i]) * (v[i + 1] - v[i]) / (h * h);
    acc += slopes * band;
    // exact exterior tail (x inside, y outside; doubled by symmetry)
    if (i >= 1 && i <= n && v[i] != 0.0) {
      const double kap =
          (std::pow(xi, -2.0 * s) + std::pow(1.0 - xi, -2.0 * s)) / (2.0 * s);
      acc += 2.0 * v[i] * v[i] * kap;
    }
    outer[static_cast<std::size_t>(i)] = tau(i) * acc;
  }
  return pairwise_sum(outer);
}

inline double gagliardo_seminorm(const GridFunction& f, double s,
                                 std::string* warning = nullptr) {
  return std::sqrt(gagliardo_seminorm_sq(f, s, warning));
}

/// Parameters of the discrete J-method interpolation norm; q is fixed to 2.
/// Construction verifies the mode-ratio bound t_{k+1}/t_k <= Lambda0.
struct InterpolationSpec {
  double theta = 0.5;
  double q = 2.0;
  double lambda0 = 0.0;

  InterpolationSpec(double theta_, double lambda0_) : theta(theta_), lambda0(lambda0_) {
    if (!(theta >= 0.0 && theta <= 1.0))
      throw ConfigError("InterpolationSpec: theta must lie in [0,1]");
    if (!(lambda0 > 1.0) || !std::isfinite(lambda0))
      throw ConfigError("InterpolationSpec: Lambda0 must be finite and > 1");
  }

  void validate_ratios(const std::vector<double>& t) const {
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      if (!(t[k] > 0.0) || t[k + 1] / t[k] > lambda0 * (1.0 + 1e-12))
        throw ConfigError("InterpolationSpec: mode ratio exceeds Lambda0 at k=" +
                          std::to_string(k));
    }
  }

  /// Equivalence-constant diagnostic Lambda1 = Lambda0^theta (log Lambda0)^{(q-1)/q}.
  double lambda1() const {
    return std::pow(lambda0, theta) * std::pow(std::log(lambda0), (q - 1.0) / q);
  }
};

/// Mode-wise discrete J-method norm. Each mode u_k = u_hat_k phi_k carries
/// the parameter t_k = ||u_k||_{X0} / ||u_k||_{X1}, for which
/// J(t_k, u_k) = t_k |u_hat_k| and the norm collapses to
/// (sum t_k^{2(1-theta)} u_hat_k^2)^{1/2}.
inline double discrete_j_norm(const std::vector<double>& t_ratios,
                              const SpectralCoeffs& u, const InterpolationSpec& spec) {
  if (u.coeffs.size() == 0) return 0.0;
  if (static_cast<std::size_t>(u.coeffs.size()) > t_ratios.size())
    throw UsageError("discrete_j_norm: more coefficients than mode parameters");
  spec.validate_ratios(t_ratios);
  std::vector<double> terms(static_cast<std::size_t>(u.coeffs.size()));
  for (Eigen::Index k = 0; k < u.coeffs.size(); ++k) {
    const double tk = t_ratios[static_cast<std::size_t>(k)];
    const double uk = std::pow(tk, 1.0 - spec.theta) * std::abs(u.coeffs[k]);
    terms[static_cast<std::size_t>(k)] = uk * uk;
  }
  return std::sqrt(pairwise_sum(terms));
}

/// Mode parameters for the spectral operator with X0 the base-Laplacian
/// energy space and X1 = L^2: t_k = sqrt(base eigenvalue).
inline std::vector<double> sfl_mode_ratios(const EigenBasis& b) {
  if (b.op.kind != OperatorKind::SFL || b.base_mu.size() != b.mu.size())
    throw UsageError("sfl_mode_ratios: SFL basis with base eigenvalues required");
  std::vector<double> t(static_cast<std::size_t>(b.base_mu.size()));
  for (Eigen::Index k = 0; k < b.base_mu.size(); ++k)
    t[static_cast<std::size_t>(k)] = std::sqrt(b.base_mu[k]);
  return t;
}

/// Estimated best constants of ||f||_{L^q} <= C ||f||_H and its dual
/// ||g||_{H*} <= C ||g||_{L^{q'}}; equal in exact arithmetic.
struct SobolevReport {
  double q = 0.0;
  double primal_constant = 0.0;
  double dual_constant = 0.0;
  GridFunction maximizer;
  int trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double lq_norm(const Eigen::VectorXd& v, double w, double q) {
  std::vector<double> tmp(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    tmp[static_cast<std::size_t>(i)] = std::pow(std::abs(v[i]), q);
  return std::pow(w * pairwise_sum(tmp), 1.0 / q);
}

/// KKT fixed-point ascent for sup ||f||_q subject to ||f||_H = 1.
inline double sobolev_primal_trial(const EigenBasis& b, double q, Rng rng,
                                   Eigen::VectorXd* best_coeffs) {
  const Eigen::Index K = b.mu.size();
  const double w = b.domain().quad_weight();
  Eigen::VectorXd c(K);
  for (Eigen::Index k = 0; k < K; ++k) c[k] = rng.normal() / std::sqrt(b.mu[k]);
  auto h_normalize = [&](Eigen::VectorXd& v) {
    const double nh = std::sqrt((b.mu.array() * v.array().square()).sum());
    if (nh > 0.0) v /= nh;
  };
  h_normalize(c);
  double value = 0.0, prev = -1.0;
  for (int it = 0; it < 600; ++it) {
    Eigen::VectorXd f = b.phi * c;
    value = lq_norm(f, w, q);
    if (std::abs(value - prev) <= 1e-13 * value) break;
    prev = value;
    Eigen::VectorXd grad(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
      grad[i] = std::pow(std::abs(f[i]), q - 1.0) * (f[i] >= 0.0 ? 1.0 : -1.0);
    Eigen::VectorXd cn = (w * (b.phi.transpose() * grad)).cwiseQuotient(b.mu);
    h_normalize(cn);
    c = cn;
  }
  if (best_coeffs) *best_coeffs = c;
  return value;
}

/// KKT fixed-point ascent for sup ||g||_{H*} subject to ||g||_{q'} = 1.
inline double sobolev_dual_trial(const EigenBasis& b, double q, Rng rng) {
  const double qp = q / (q - 1.0);
  const double w = b.domain().quad_weight();
  const Eigen::Index N = b.phi.rows();
  Eigen::VectorXd g(N);
  for (Eigen::Index i = 0; i < N; ++i) g[i] = rng.normal();
  auto qp_normalize = [&](Eigen::VectorXd& v) {
    const double nq = lq_norm(v, w, qp);
    if (nq > 0.0) v /= nq;
  };
  qp_normalize(g);
  double value = 0.0, prev = -1.0;
  for (int it = 0; it < 600; ++it) {
    Eigen::VectorXd ghat = w * (b.phi.transpose() * g);
    value = std::sqrt((ghat.array().square() / b.mu.array()).sum());
    if (std::abs(value - prev) <= 1e-13 * value) break;
    prev = value;
    Eigen::VectorXd ainv = b.phi * (ghat.cwiseQuotient(b.mu));
    for (Eigen::Index i = 0; i < N; ++i)
      g[i] = std::pow(std::abs(ainv[i]), q - 1.0) * (ainv[i] >= 0.0 ? 1.0 : -1.0);
    qp_normalize(g);
  }
  return value;
}

}  // namespace detail

/// Multi-start estimation of the Sobolev constants. Trials run in parallel
/// with per-trial seeded streams and are merged in index order, so the
/// report does not depend on the thread count.
inline SobolevReport sobolev_constants(const EigenBasis& b, double q, int trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw ConfigError("sobolev_constants: trials must be >= 1");
  const int d = b.domain().dim();
  const double s = b.op.s;
  if (!(q >= 1.0)) throw ConfigError("sobolev_constants: q must be >= 1");
  if (d > 2.0 * s) {
    const double qmax = 2.0 * d / (d - 2.0 * s);
    if (q > qmax + 1e-12)
      throw ConfigError("sobolev_constants: q exceeds 2d/(d-2s) = " + format_g17(qmax) +
                        " (admissible only when d <= 2s)");
  }
  std::vector<double> primal(static_cast<std::size_t>(trials));
  std::vector<double> dual(static_cast<std::size_t>(trials));
  std::vector<Eigen::VectorXd> coeffs(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    primal[t] = detail::sobolev_primal_trial(b, q, Rng(seed, 2 * t), &coeffs[t]);
    dual[t] = detail::sobolev_dual_trial(b, q, Rng(seed, 2 * t + 1));
  });
  SobolevReport rep;
  rep.q = q;
  rep.trials = trials;
  rep.seed = seed;
  std::size_t best = 0;
  for (std::size_t t = 1; t < primal.size(); ++t)
    if (primal[t] > primal[best]) best = t;
  rep.primal_constant = primal[best];
  rep.dual_constant = *std::max_element(dual.begin(), dual.end());
  rep.maximizer = b.reconstruct(coeffs[best]);
  return rep;
}

/// Hardy-type ratio ||f / phi^s||_{L^2} / ||f||_H with the smooth
/// boundary-distance weight phi(x) = sin(pi x).
inline double hardy_ratio(const EigenBasis& b, const GridFunction& f, double s,
                          std::string* warning = nullptr) {
  if (b.domain().geometry != Geometry::Interval)
    throw ConfigError("hardy_ratio: Interval geometry only");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("hardy_ratio: s must lie in (0,1)");
  if (s >= 0.5 && warning)
    *warning = "hardy_ratio: s >= 1/2 requires the H_0 setting; ratio is informational";
  const double hn = h_norm(b, f);
  if (hn == 0.0) return 0.0;
  const DomainSpec& dom = f.domain();
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double phi = std::sin(std::numbers::pi * dom.x_of(i));
    const double r = f[i] / std::pow(phi, s);
    terms[i] = r * r;
  }
  return std::sqrt(dom.quad_weight() * pairwise_sum(terms)) / hn;
}

/// Brute-force Hoelder seminorm max |f(x)-f(y)| / |x-y|^alpha over interior
/// node pairs.
inline double holder_seminorm(const GridFunction& f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("holder_seminorm: alpha must lie in (0,1]");
  if (f.domain().geometry != Geometry::Interval)
    throw ConfigError("holder_seminorm: Interval geometry only");
  const int n = f.domain().n_interior;
  const double h = f.domain().h();
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double q =
          std::abs(f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]) /
          std::pow((j - i) * h, alpha);
      best = std::max(best, q);
    }
  return best;
}

/// Scale-invariant Gagliardo-Nirenberg ratio in one dimension:
/// ||f||_inf^{1+alpha} / (|f|_{C^alpha} ||f||_1^alpha).
inline double gn_ratio(const GridFunction& f, double alpha) {
  const double semi = holder_seminorm(f, alpha);
  if (semi == 0.0)
    throw NumericalError("gn_ratio: undefined for constant (or zero) functions");
  const double sup = f.sup_norm();
  const double l1 = f.l1_norm();
  return std::pow(sup, 1.0 + alpha) / (semi * std::pow(l1, alpha));
}

}  // namespace fpme
