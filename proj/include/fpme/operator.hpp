// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/grid.hpp"

namespace fpme {

enum class OperatorKind { SFL, RFL };

/// Which fractional Laplacian, its order, domain, and (for the RFL) the
/// kernel normalization. gamma is the boundary exponent of the first
/// eigenfunction: 1 for the spectral operator, s for the restricted one.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::SFL;
  double s = 0.5;
  DomainSpec domain;
  double c_norm = 0.0;  // RFL only

  OperatorSpec() = default;
  // s = 1 is admitted here so the base Dirichlet Laplacian can be exercised
  // directly; experiment configs restrict to the fractional range (0,1).
  OperatorSpec(OperatorKind k, double s_, DomainSpec d, double c = 0.0)
      : kind(k), s(s_), domain(d), c_norm(c) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("OperatorSpec: s must lie in (0,1]");
    if (kind == OperatorKind::RFL && domain.geometry != Geometry::Interval)
      throw ConfigError("OperatorSpec: RFL is only available on Interval geometry");
    if (kind == OperatorKind::RFL && !(c_norm > 0.0))
      throw ConfigError("OperatorSpec: RFL requires c_norm > 0");
  }

  double gamma() const { return kind == OperatorKind::SFL ? 1.0 : s; }
};

/// Ascending eigenvalues with quadrature-orthonormal discrete eigenfunctions.
/// phi is stored column-wise; <phi_j, phi_k> under the h^d quadrature inner
/// product equals delta_jk within gram_tolerance. phi column 0 is the
/// discrete first eigenfunction, stored with positive sign.
struct EigenBasis {
  OperatorSpec op;
  Eigen::VectorXd mu;        // K ascending positive eigenvalues
  Eigen::MatrixXd phi;       // node_count x K
  Eigen::VectorXd base_mu;   // SFL only: eigenvalues of the base Dirichlet Laplacian
  double gram_tolerance = 1e-10;

  int modes() const { return static_cast<int>(mu.size()); }
  bool complete() const {
    return static_cast<std::size_t>(modes()) == op.domain.node_count();
  }
  const DomainSpec& domain() const { return op.domain; }

  /// Quadrature coefficients f_hat_k = h^d sum_i phi_k(x_i) f(x_i).
  Eigen::VectorXd coefficients(const GridFunction& f) const {
    if (!(f.domain() == op.domain)) throw UsageError("EigenBasis: domain mismatch");
    return op.domain.quad_weight() * (phi.transpose() * f.values());
  }

  GridFunction reconstruct(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() > mu.size()) throw UsageError("EigenBasis: too many coefficients");
    return GridFunction(op.domain, phi.leftCols(coeffs.size()) * coeffs);
  }

  /// Sum_k mu_k^power f_hat_k phi_k.
  GridFunction apply_power(const GridFunction& f, double power) const {
    Eigen::VectorXd c = coefficients(f);
    Eigen::VectorXd scaled =
        (mu.array().pow(power) * c.array()).matrix();
    return GridFunction(op.domain, phi * scaled);
  }

  /// Dense nodal matrix of the operator: h^d * phi * diag(mu) * phi^T.
  /// Exact reproduction of apply() for any nodal vector when complete.
  Eigen::MatrixXd dense_matrix() const {
    Eigen::MatrixXd a =
        op.domain.quad_weight() * (phi * mu.asDiagonal() * phi.transpose());
    return 0.5 * (a + a.transpose());
  }
};

inline GridFunction apply(const EigenBasis& b, const GridFunction& f) {
  return b.apply_power(f, 1.0);
}
inline GridFunction apply_inverse(const EigenBasis& b, const GridFunction& f) {
  return b.apply_power(f, -1.0);
}
inline GridFunction apply_halfpower(const EigenBasis& b, const GridFunction& f, int sign) {
  return b.apply_power(f, sign >= 0 ? 0.5 : -0.5);
}

namespace detail {
/// Eigenvalues of the discrete 1D Dirichlet Laplacian (second differences):
/// (4/h^2) sin^2(k pi h / 2), k = 1..n.
inline double dirichlet_eigenvalue_1d(int k, int n) {
  const double h = 1.0 / (n + 1);
  const double sk = std::sin(0.5 * std::numbers::pi * k * h);
  return 4.0 / (h * h) * sk * sk;
}
}  // namespace detail

/// Discrete spectral fractional Laplacian: the eigen-decomposition of the
/// matrix Dirichlet Laplacian with eigenvalues raised to the power s. On the
/// interval the eigenpairs are closed-form, (4/h^2) sin^2(k pi h/2) with
/// eigenvectors sqrt(2) sin(k pi x_i); these are exactly h-orthonormal. On
/// the rectangle the basis is the tensor product, sorted ascending.
inline EigenBasis build_sfl_basis(DomainSpec domain, double s, int K) {
  const std::size_t n_nodes = domain.node_count();
  if (K < 1 || static_cast<std::size_t>(K) > n_nodes)
    throw ConfigError("build_sfl_basis: K exceeds interior node capacity (" +
                      std::to_string(n_nodes) + ")");
  EigenBasis b;
  b.op = OperatorSpec(OperatorKind::SFL, s, domain);
  b.gram_tolerance = 1e-10;
  const int n = domain.n_interior;
  if (domain.geometry == Geometry::Interval) {
    b.mu.resize(K);
    b.base_mu.resize(K);
    b.phi.resize(n, K);
    const double h = domain.h();
    for (int k = 1; k <= K; ++k) {
      const double lam = detail::dirichlet_eigenvalue_1d(k, n);
      b.base_mu[k - 1] = lam;
      b.mu[k - 1] = std::pow(lam, s);
      for (int i = 1; i <= n; ++i)
        b.phi(i - 1, k - 1) = std::numbers::sqrt2 * std::sin(k * std::numbers::pi * i * h);
    }
  } else {
    struct Mode {
      double base;
      int j, k;
    };
    std::vector<Mode> modes;
    modes.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        modes.push_back({detail::dirichlet_eigenvalue_1d(j, n) +
                             detail::dirichlet_eigenvalue_1d(k, n),
                         j, k});
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& c) {
      if (a.base != c.base) return a.base < c.base;
      if (a.j != c.j) return a.j < c.j;
      return a.k < c.k;
    });
    b.mu.resize(K);
    b.base_mu.resize(K);
    b.phi.resize(static_cast<Eigen::Index>(n_nodes), K);
    const double h = domain.h();
    for (int c = 0; c < K; ++c) {
      const Mode& md = modes[static_cast<std::size_t>(c)];
      b.base_mu[c] = md.base;
      b.mu[c] = std::pow(md.base, s);
      for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix)
          b.phi((iy - 1) * n + (ix - 1), c) = 2.0 * std::sin(md.j * std::numbers::pi * ix * h) *
                                              std::sin(md.k * std::numbers::pi * iy * h);
    }
  }
  return b;
}

/// Symmetric nodal kernel of the inverse: K(x_i, x_j) = sum_k mu_k^{-1}
/// phi_k(x_i) phi_k(x_j), so that h^d sum_j K(x_i, x_j) f(x_j) reproduces
/// apply_inverse(f)(x_i).
struct GreenKernel {
  OperatorSpec op;
  Eigen::MatrixXd entries;
};

inline GreenKernel green_kernel(const EigenBasis& b) {
  if (!b.complete())
    throw UsageError("green_kernel: requires the complete basis on the grid");
  GreenKernel g;
  g.op = b.op;
  Eigen::MatrixXd k =
      b.phi * b.mu.cwiseInverse().asDiagonal() * b.phi.transpose();
  g.entries = 0.5 * (k + k.transpose());
  return g;
}

}  // namespace fpme
