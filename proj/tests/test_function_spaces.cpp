// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fpme/grid.hpp"
#include "fpme/operator.hpp"
#include "fpme/rfl.hpp"
#include "fpme/rng.hpp"
#include "fpme/spaces.hpp"

using namespace fpme;

namespace {

GridFunction random_field(DomainSpec dom, Rng& rng) {
  Eigen::VectorXd v(dom.node_count());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return GridFunction(dom, std::move(v));
}

// Independent oracle for the squared Gagliardo seminorm of the zero
// extension: plain dense midpoint double sum on its own grid, skipping the
// two adjacent diagonals, plus the exact exterior tails. Kept free of the
// production scheme's band and trapezoid corrections.
double brute_force_seminorm_sq(const GridFunction& f, double s) {
  const int n = f.domain().n_interior;
  const double h = f.domain().h();
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double xi = i * h;
    const double fi = f[static_cast<std::size_t>(i - 1)];
    for (int j = 1; j <= n; ++j) {
      if (std::abs(i - j) < 2) continue;
      const double d = fi - f[static_cast<std::size_t>(j - 1)];
      total += h * h * d * d * std::pow(std::abs(i - j) * h, -1.0 - 2.0 * s);
    }
    total += 2.0 * h * fi * fi *
             (std::pow(xi, -2.0 * s) + std::pow(1.0 - xi, -2.0 * s)) / (2.0 * s);
  }
  return total;
}

}  // namespace

TEST_CASE("coefficient norms on eigenmodes", "[norms]") {
  const DomainSpec dom(Geometry::Interval, 60);
  const EigenBasis b = build_sfl_basis(dom, 0.5, 60);
  for (int k : {0, 5, 30}) {
    GridFunction phik(dom, b.phi.col(k));
    REQUIRE_THAT(h_norm(b, phik), Catch::Matchers::WithinRel(std::sqrt(b.mu[k]), 1e-12));
    REQUIRE_THAT(hstar_norm(b, phik),
                 Catch::Matchers::WithinRel(1.0 / std::sqrt(b.mu[k]), 1e-12));
  }
  GridFunction combo(dom, 2.0 * b.phi.col(0) - 3.0 * b.phi.col(1));
  REQUIRE_THAT(h_norm(b, combo) * h_norm(b, combo),
               Catch::Matchers::WithinRel(4.0 * b.mu[0] + 9.0 * b.mu[1], 1e-12));
  Rng rng(1);
  const GridFunction f = random_field(dom, rng);
  const double via_inverse = quad_inner(f, apply_inverse(b, f));
  REQUIRE_THAT(hstar_norm(b, f) * hstar_norm(b, f),
               Catch::Matchers::WithinRel(via_inverse, 1e-10));
  REQUIRE(spectral_coeffs(b, f).parseval_defect(f) < 1e-10);
}

TEST_CASE("dual norm variational identity", "[norms][invariant]") {
  const DomainSpec dom(Geometry::Interval, 40);
  const EigenBasis b = build_sfl_basis(dom, 0.6, 40);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const GridFunction F = random_field(dom, rng);
    const double ns = hstar_norm(b, F);
    // the explicit unit-H maximizer: sum mu^{-1} F_hat phi, normalized
    Eigen::VectorXd c = b.coefficients(F);
    Eigen::VectorXd gc = c.cwiseQuotient(b.mu) / ns;
    const GridFunction g = b.reconstruct(gc);
    REQUIRE_THAT(h_norm(b, g), Catch::Matchers::WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(quad_inner(F, g), Catch::Matchers::WithinRel(ns, 1e-8));
    // random unit-H competitors never beat it
    GridFunction comp = random_field(dom, rng);
    comp *= 1.0 / h_norm(b, comp);
    REQUIRE(quad_inner(F, comp) <= ns * (1.0 + 1e-8));
  }
}

TEST_CASE("duality Cauchy-Schwarz patterns", "[norms][invariant]") {
  const DomainSpec dom(Geometry::Interval, 50);
  const EigenBasis b = build_sfl_basis(dom, 0.4, 50);
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const GridFunction f = random_field(dom, rng);
    const GridFunction g = random_field(dom, rng);
    REQUIRE(quad_inner(f, g) <= hstar_norm(b, f) * h_norm(b, g) + 1e-10);
    const GridFunction af = apply(b, f);
    REQUIRE(quad_inner(af, g) <= hstar_norm(b, af) * h_norm(b, g) + 1e-10);
  }
}

TEST_CASE("weighted L1 dominated by the dual norm", "[norms][invariant]") {
  const DomainSpec dom(Geometry::Interval, 80);
  const EigenBasis b = build_sfl_basis(dom, 0.5, 80);
  GridFunction phi1(dom, b.phi.col(0));
  const double c_chain =
      std::sqrt(b.mu[0] * b.mu[0] * quad_inner(phi1, apply_inverse(b, phi1)));
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction u = random_field(dom, rng).map([](double x) { return std::abs(x); });
    const double l1w = quad_inner(u, phi1);
    REQUIRE(l1w <= c_chain * hstar_norm(b, u) * (1.0 + 1e-12));
  }
  // tight at the first eigenfunction
  REQUIRE_THAT(quad_inner(phi1, phi1),
               Catch::Matchers::WithinRel(c_chain * hstar_norm(b, phi1), 1e-12));
}

TEST_CASE("gagliardo seminorm basics", "[gagliardo]") {
  const DomainSpec dom(Geometry::Interval, 100);
  REQUIRE(gagliardo_seminorm(GridFunction::zero(dom), 0.4) == 0.0);
  const GridFunction f = GridFunction::sample(dom, [](double x) {
    return x < 0.3 ? x : (x < 0.5 ? 0.3 - 0.5 * (x - 0.3) : 0.2 * std::sin(3.0 * x));
  });
  GridFunction fr = f;
  for (std::size_t i = 0; i < f.size(); ++i) fr[i] = f[f.size() - 1 - i];
  REQUIRE_THAT(gagliardo_seminorm_sq(fr, 0.35),
               Catch::Matchers::WithinRel(gagliardo_seminorm_sq(f, 0.35), 1e-12));
  std::string warning;
  gagliardo_seminorm(f, 0.96, &warning);
  REQUIRE(!warning.empty());
}

TEST_CASE("gagliardo seminorm against the dense oracle", "[gagliardo][oracle]") {
  const double s = 0.3;
  const DomainSpec dom(Geometry::Interval, 200);
  auto hat = [](double x) { return std::max(0.0, 1.0 - std::abs(x - 0.5) / 0.25); };
  const GridFunction f = GridFunction::sample(dom, hat);
  const double mine = gagliardo_seminorm_sq(f, s);
  const DomainSpec fine(Geometry::Interval, 4 * 201 - 1);
  const double oracle = brute_force_seminorm_sq(GridFunction::sample(fine, hat), s);
  REQUIRE(std::abs(mine - oracle) / oracle < 0.01);
}

TEST_CASE("discrete J-method reproduces the H norm", "[jmethod]") {
  const DomainSpec dom(Geometry::Interval, 100);
  const double s = 0.5;
  const EigenBasis b = build_sfl_basis(dom, s, 100);
  const std::vector<double> t = sfl_mode_ratios(b);
  double lam0 = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) lam0 = std::max(lam0, t[k + 1] / t[k]);
  const InterpolationSpec spec(1.0 - s, lam0 * (1.0 + 1e-12));
  REQUIRE(spec.lambda1() > 0.0);
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const GridFunction f = random_field(dom, rng);
    const double jn = discrete_j_norm(t, spectral_coeffs(b, f), spec);
    REQUIRE_THAT(jn, Catch::Matchers::WithinRel(h_norm(b, f), 1e-12));
  }
  // endpoint cases: theta = 0 gives the X0 norm, theta = 1 the L2 norm
  const GridFunction f = random_field(dom, rng);
  const auto coeffs = spectral_coeffs(b, f);
  const InterpolationSpec s0(0.0, lam0 * 2.0), s1(1.0, lam0 * 2.0);
  double x0 = 0.0, l2 = 0.0;
  for (Eigen::Index k = 0; k < coeffs.coeffs.size(); ++k) {
    x0 += b.base_mu[k] * coeffs.coeffs[k] * coeffs.coeffs[k];
    l2 += coeffs.coeffs[k] * coeffs.coeffs[k];
  }
  REQUIRE_THAT(discrete_j_norm(t, coeffs, s0),
               Catch::Matchers::WithinRel(std::sqrt(x0), 1e-12));
  REQUIRE_THAT(discrete_j_norm(t, coeffs, s1),
               Catch::Matchers::WithinRel(std::sqrt(l2), 1e-12));
  // single mode returns mu_base^{(1-theta)/2}
  Eigen::VectorXd ck = Eigen::VectorXd::Zero(5);
  ck[4] = 1.0;
  const InterpolationSpec s14(0.25, lam0 * 2.0);
  REQUIRE_THAT(discrete_j_norm(t, SpectralCoeffs{ck}, s14),
               Catch::Matchers::WithinRel(std::pow(b.base_mu[4], 0.75 / 2.0), 1e-13));
  // empty coefficient sequence
  REQUIRE(discrete_j_norm(t, SpectralCoeffs{Eigen::VectorXd()}, spec) == 0.0);
  // ratio-bound violations are rejected
  REQUIRE_THROWS_AS(discrete_j_norm(t, coeffs, InterpolationSpec(0.5, 1.0 + 1e-6)),
                    ConfigError);
}

TEST_CASE("J-method on the restricted operator at theta = 1/2", "[jmethod]") {
  const DomainSpec dom(Geometry::Interval, 60);
  const double s = 0.4;
  const double c = rfl_normalization(s);
  const EigenBasis b = build_rfl_basis(build_rfl_matrix(dom, s, c), dom, s, c, 60);
  std::vector<double> t(static_cast<std::size_t>(b.mu.size()));
  for (Eigen::Index k = 0; k < b.mu.size(); ++k) t[static_cast<std::size_t>(k)] = b.mu[k];
  double lam0 = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) lam0 = std::max(lam0, t[k + 1] / t[k]);
  const InterpolationSpec spec(0.5, lam0 * (1.0 + 1e-12));
  Rng rng(5);
  const GridFunction f = random_field(dom, rng);
  REQUIRE_THAT(discrete_j_norm(t, spectral_coeffs(b, f), spec),
               Catch::Matchers::WithinRel(h_norm(b, f), 1e-12));
}

TEST_CASE("sobolev constants at q = 2 are the Rayleigh quotient", "[sobolev]") {
  const DomainSpec dom(Geometry::Interval, 50);
  const EigenBasis b = build_sfl_basis(dom, 0.5, 50);
  const SobolevReport rep = sobolev_constants(b, 2.0, 4, 77);
  const double expected = 1.0 / std::sqrt(b.mu[0]);
  REQUIRE_THAT(rep.primal_constant, Catch::Matchers::WithinRel(expected, 1e-10));
  REQUIRE_THAT(rep.dual_constant, Catch::Matchers::WithinRel(expected, 1e-10));
  GridFunction phi1(dom, b.phi.col(0));
  const double overlap = std::abs(quad_inner(rep.maximizer, phi1)) /
                         (rep.maximizer.l2_norm() * phi1.l2_norm());
  REQUIRE(overlap > 1.0 - 1e-8);
}

TEST_CASE("sobolev primal and dual estimates agree off q = 2", "[sobolev]") {
  const DomainSpec dom(Geometry::Rectangle, 10);
  const EigenBasis b = build_sfl_basis(dom, 0.5, 100);
  const SobolevReport rep = sobolev_constants(b, 3.0, 30, 123);
  REQUIRE(std::abs(rep.primal_constant - rep.dual_constant) / rep.primal_constant < 0.05);
}

TEST_CASE("sobolev admissibility is enforced", "[sobolev]") {
  const DomainSpec dom(Geometry::Interval, 20);
  const EigenBasis b = build_sfl_basis(dom, 0.3, 20);  // d = 1 > 2s: q max is 5
  REQUIRE_THROWS_AS(sobolev_constants(b, 6.0, 2, 1), ConfigError);
  REQUIRE_NOTHROW(sobolev_constants(b, 4.9, 2, 1));
}

TEST_CASE("hardy ratio behaviour", "[hardy]") {
  const double s = 0.3;
  double ratios[2];
  int idx = 0;
  for (int n : {100, 200}) {
    const DomainSpec dom(Geometry::Interval, n);
    const EigenBasis b = build_sfl_basis(dom, s, n);
    GridFunction phi1(dom, b.phi.col(0));
    ratios[idx++] = hardy_ratio(b, phi1, s);
  }
  REQUIRE(ratios[0] > 0.0);
  REQUIRE(std::abs(ratios[0] - ratios[1]) / ratios[1] < 0.05);
  const DomainSpec dom(Geometry::Interval, 50);
  const EigenBasis b = build_sfl_basis(dom, s, 50);
  REQUIRE(hardy_ratio(b, GridFunction::zero(dom), s) == 0.0);
  GridFunction f(dom, b.phi.col(2));
  REQUIRE(hardy_ratio(b, 2.0 * f, s) == hardy_ratio(b, f, s));
  std::string warning;
  hardy_ratio(b, f, 0.6, &warning);
  REQUIRE(!warning.empty());
}

TEST_CASE("holder seminorm and GN ratio", "[holder]") {
  const DomainSpec dom(Geometry::Interval, 100);
  // linear profile: every interior pair realizes slope one
  const GridFunction lin = GridFunction::sample(dom, [](double x) { return x; });
  REQUIRE_THAT(holder_seminorm(lin, 1.0), Catch::Matchers::WithinRel(1.0, 1e-13));
  const GridFunction cst = GridFunction::constant(dom, 2.0);
  REQUIRE(holder_seminorm(cst, 0.5) == 0.0);
  REQUIRE_THROWS_AS(gn_ratio(cst, 0.5), NumericalError);
  // bump against the same algorithm at doubled resolution
  auto bump = [](double x) {
    const double u = std::sin(std::numbers::pi * x);
    return u * u;
  };
  const GridFunction f1 = GridFunction::sample(dom, bump);
  const GridFunction f2 = GridFunction::sample(DomainSpec(Geometry::Interval, 201), bump);
  const double s1 = holder_seminorm(f1, 0.5);
  const double s2 = holder_seminorm(f2, 0.5);
  REQUIRE(std::abs(s1 - s2) / s2 < 0.01);
  // the GN ratio shares its scaling exponent on both sides: compare the
  // unit bump with its half-width resampling
  auto half = [&](double x) { return x < 0.5 ? bump(2.0 * x) : 0.0; };
  const DomainSpec fine(Geometry::Interval, 401);
  const double g1 = gn_ratio(GridFunction::sample(fine, bump), 0.5);
  const double g2 = gn_ratio(GridFunction::sample(fine, half), 0.5);
  REQUIRE(std::abs(g1 - g2) / g1 < 0.02);
}
