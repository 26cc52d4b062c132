// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>

#include "fpme/errors.hpp"
#include "fpme/numeric.hpp"
#include "fpme/operator.hpp"

namespace fpme {

/// Standard normalization making the whole-space operator the Fourier
/// multiplier |xi|^{2s} in one dimension:
/// c_{1,s} = 2^{2s} s Gamma(s + 1/2) / (sqrt(pi) Gamma(1 - s)).
inline double rfl_normalization(double s) {
  return std::pow(4.0, s) * s * std::tgamma(s + 0.5) /
         (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
}

namespace detail {

/// int_lo^hi r^p dr, with the log form at p = -1 (arises when s = 1/2).
inline double power_primitive(double lo, double hi, double p) {
  if (std::abs(p + 1.0) < 1e-13) return std::log(hi / lo);
  return (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / (p + 1.0);
}

/// Kernel moments over a panel [a,b] not containing the singular point xi:
///   M0 = int_a^b |xi-y|^{-1-2s} dy
///   M1 = int_a^b (y-yc) |xi-y|^{-1-2s} dy
///   M2 = int_a^b (y-yc)^2 |xi-y|^{-1-2s} dy
struct KernelMoments {
  double m0, m1, m2;
};

inline KernelMoments kernel_moments(double xi, double a, double b, double yc, double s) {
  const double p0 = -1.0 - 2.0 * s;
  const double p1 = -2.0 * s;
  const double p2 = 1.0 - 2.0 * s;
  KernelMoments m{};
  if (a >= xi) {  // panel to the right: y = xi + r
    const double lo = a - xi, hi = b - xi, d = yc - xi;
    const double P0 = power_primitive(lo, hi, p0);
    const double P1 = power_primitive(lo, hi, p1);
    const double P2 = power_primitive(lo, hi, p2);
    m.m0 = P0;
    m.m1 = P1 - d * P0;
    m.m2 = P2 - 2.0 * d * P1 + d * d * P0;
  } else {  // panel to the left: y = xi - r
    const double lo = xi - b, hi = xi - a, e = xi - yc;
    const double P0 = power_primitive(lo, hi, p0);
    const double P1 = power_primitive(lo, hi, p1);
    const double P2 = power_primitive(lo, hi, p2);
    m.m0 = P0;
    m.m1 = e * P0 - P1;
    m.m2 = e * e * P0 - 2.0 * e * P1 + P2;
  }
  return m;
}

}  // namespace detail

/// Dense symmetric matrix of the restricted fractional Laplacian on the
/// interval for grid functions extended by zero outside (0,1):
///   (A u)(x_i) ~ c P.V. int_R (u(x_i)-u(y)) |x_i-y|^{-1-2s} dy.
/// Quadrature: per-node panels with exact kernel moments and second-order
/// value/slope/curvature corrections (midpoint-corrected trapezoid); the
/// singular cell |y-x_i| < h/2 uses the closed form left by the quadratic
/// cancellation of u(x_i)-u(y); the exterior contributes its exact tail
/// integral. Rows are assembled independently, then the matrix is
/// symmetrized as (A + A^T)/2.
inline Eigen::MatrixXd build_rfl_matrix(DomainSpec domain, double s, double c_norm) {
  if (domain.geometry != Geometry::Interval)
    throw ConfigError("build_rfl_matrix: Rectangle geometry is unsupported (RFL is 1D)");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("build_rfl_matrix: s must lie in (0,1)");
  if (!(c_norm > 0.0)) throw ConfigError("build_rfl_matrix: c_norm must be positive");
  const int n = domain.n_interior;
  const double h = domain.h();
  const double c = c_norm;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int i = static_cast<int>(row) + 1;  // 1-based node index
    const double xi = i * h;
    auto add = [&](int node, double w) {
      // nodes 0 and n+1 carry the zero boundary value and are dropped
      if (node >= 1 && node <= n) a(i - 1, node - 1) += w;
    };
    // exact exterior tail from the zero extension
    add(i, c * (std::pow(xi, -2.0 * s) + std::pow(1.0 - xi, -2.0 * s)) / (2.0 * s));
    // boundary half panels [0, h/2] and [1-h/2, 1]; u rises linearly from the
    // zero boundary value toward the first interior node
    {
      const auto ml = detail::kernel_moments(xi, 0.0, 0.5 * h, 0.0, s);
      const auto mr = detail::kernel_moments(xi, 1.0 - 0.5 * h, 1.0, 1.0, s);
      add(i, c * (ml.m0 + mr.m0));
      add(1, -c * ml.m1 / h);
      add(n, c * mr.m1 / h);
    }
    // singular cell: the P.V. odd part cancels; the quadratic remainder
    // integrates to (h/2)^{2-2s}/(2-2s) against the discrete curvature
    const double corr = c * std::pow(0.5 * h, 2.0 - 2.0 * s) / ((2.0 - 2.0 * s) * h * h);
    add(i, 2.0 * corr);
    add(i - 1, -corr);
    add(i + 1, -corr);
    // interior panels around the remaining nodes
    for (int j = 1; j <= n; ++j) {
      if (j == i) continue;
      const double yc = j * h;
      const auto m = detail::kernel_moments(xi, yc - 0.5 * h, yc + 0.5 * h, yc, s);
      add(i, c * m.m0);
      add(j, -c * m.m0);
      // slope correction, u'(yc) ~ (u_{j+1}-u_{j-1})/(2h)
      add(j + 1, -c * m.m1 / (2.0 * h));
      add(j - 1, c * m.m1 / (2.0 * h));
      // curvature correction, u''(yc) ~ (u_{j+1}-2u_j+u_{j-1})/h^2
      add(j + 1, -c * m.m2 / (2.0 * h * h));
      add(j, c * m.m2 / (h * h));
      add(j - 1, -c * m.m2 / (2.0 * h * h));
    }
  });
  return 0.5 * (a + a.transpose());
}

/// K smallest eigenpairs of the assembled RFL matrix, quadrature-
/// orthonormalized, with the first eigenfunction sign-normalized positive.
inline EigenBasis build_rfl_basis(const Eigen::MatrixXd& matrix, DomainSpec domain,
                                  double s, double c_norm, int K) {
  const int n = domain.n_interior;
  if (matrix.rows() != n || matrix.cols() != n)
    throw UsageError("build_rfl_basis: matrix size does not match domain");
  if (K < 1 || K > n)
    throw ConfigError("build_rfl_basis: K exceeds interior node capacity (" +
                      std::to_string(n) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success)
    throw NumericalError("build_rfl_basis: dense symmetric eigensolver did not converge (n=" +
                         std::to_string(n) + ")");
  EigenBasis b;
  b.op = OperatorSpec(OperatorKind::RFL, s, domain, c_norm);
  b.gram_tolerance = 1e-10;
  b.mu = solver.eigenvalues().head(K);
  // l2-orthonormal -> h-quadrature-orthonormal
  b.phi = solver.eigenvectors().leftCols(K) / std::sqrt(domain.h());
  for (int k = 0; k < K; ++k) {
    Eigen::Index imax = 0;
    b.phi.col(k).cwiseAbs().maxCoeff(&imax);
    if (b.phi(imax, k) < 0.0) b.phi.col(k) *= -1.0;
  }
  if (b.mu[0] <= 0.0)
    throw NumericalError("build_rfl_basis: nonpositive leading eigenvalue");
  return b;
}

}  // namespace fpme
