// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/evolution.hpp"
#include "fpme/grid.hpp"
#include "fpme/numeric.hpp"
#include "fpme/operator.hpp"

namespace fpme {

enum class GiantRoute { FixedPoint, EvolutionLimit };

/// Stationary profile S of A(S^m) = S/(m-1); positive on interior nodes.
struct GiantProfile {
  GridFunction S;
  double residual_sup = 0.0;  // ||A(S^m) - S/(m-1)||_inf / ||S/(m-1)||_inf
  GiantRoute route = GiantRoute::FixedPoint;
  double m = 0.0;
};

namespace detail {

inline double stationary_residual(const EigenBasis& b, const GridFunction& S, double m) {
  const GridFunction lhs = apply(b, S.map([m](double x) { return std::pow(std::abs(x), m); }));
  const GridFunction rhs = (1.0 / (m - 1.0)) * S;
  return (lhs - rhs).sup_norm() / rhs.sup_norm();
}

}  // namespace detail

/// Construct S by iterating z <- A^{-1}(z^{1/m}/(m-1)) on z = S^m from two
/// ordered starts; both iterations converge monotonically to the unique
/// positive fixed point, and the two limits must agree.
inline GiantProfile giant_fixed_point(const EigenBasis& b, double m,
                                      double agree_tol = 1e-8, int max_iter = 20000) {
  if (!(m > 1.0)) throw ConfigError("giant_fixed_point: requires m > 1");
  const auto T = [&](const GridFunction& z) {
    return apply_inverse(
        b, z.map([&](double x) { return std::pow(std::max(x, 0.0), 1.0 / m) / (m - 1.0); }));
  };
  const GridFunction ainv_one = apply_inverse(b, GridFunction::constant(b.domain(), 1.0));
  // small start: eps * Phi_1^m, shrunk until it is a subsolution
  GridFunction phi1(b.domain(), b.phi.col(0));
  double eps = 1e-2 * ainv_one.sup_norm();
  GridFunction z_lo = phi1.map([&](double x) { return std::pow(eps * std::max(x, 0.0), m); });
  for (int k = 0; k < 60; ++k) {
    if ((T(z_lo) - z_lo).values().minCoeff() >= 0.0) break;
    z_lo *= 1e-2;
  }
  // large start: kappa * A^{-1} 1, grown until it is a supersolution
  double kappa = std::pow(ainv_one.sup_norm() / (m - 1.0), 1.0 / (m - 1.0));
  GridFunction z_hi = kappa * ainv_one;
  for (int k = 0; k < 60; ++k) {
    if ((T(z_hi) - z_hi).values().maxCoeff() <= 0.0) break;
    z_hi *= 2.0;
  }
  auto iterate = [&](GridFunction z) {
    for (int it = 0; it < max_iter; ++it) {
      GridFunction z_new = T(z);
      const double change = (z_new - z).sup_norm();
      z = std::move(z_new);
      if (change <= 1e-14 * z.sup_norm()) break;
    }
    return z;
  };
  const GridFunction zl = iterate(z_lo);
  const GridFunction zh = iterate(z_hi);
  GridFunction S_lo = zl.map([&](double x) { return std::pow(std::max(x, 0.0), 1.0 / m); });
  GridFunction S_hi = zh.map([&](double x) { return std::pow(std::max(x, 0.0), 1.0 / m); });
  const double disagree = (S_hi - S_lo).sup_norm() / S_hi.sup_norm();
  if (disagree > agree_tol)
    throw NumericalError("giant_fixed_point: ordered starts disagree by " +
                         format_g17(disagree) + " (uniqueness failure)");
  GiantProfile g;
  g.m = m;
  g.route = GiantRoute::FixedPoint;
  g.S = 0.5 * (S_lo + S_hi);
  if (g.S.values().minCoeff() <= 0.0)
    throw NumericalError("giant_fixed_point: profile not strictly positive");
  g.residual_sup = detail::stationary_residual(b, g.S, m);
  if (g.residual_sup > 1e-8)
    throw NumericalError("giant_fixed_point: stationary residual " +
                         format_g17(g.residual_sup));
  return g;
}

/// Construct S as the long-time limit of the rescaled flow from a large
/// constant, stopping once ||v(t+1) - v(t)||_inf < stop_tol; a second run
/// from small positive data must reach the same limit from below.
struct GiantEvolutionDiagnostics {
  double two_sided_gap = 0.0;  // sup-relative difference of the two limits
  double min_vt_below = 0.0;   // monotonicity of the from-below trace
  double stop_increment = 0.0;
};

inline GiantProfile giant_evolution_limit(const Operator& op, double m,
                                          GiantEvolutionDiagnostics* diag = nullptr,
                                          double dt = 0.02, double t_end = 60.0,
                                          double stop_tol = 1e-9) {
  if (!(m > 1.0)) throw ConfigError("giant_evolution_limit: requires m > 1");
  const NonlinearitySpec nl(m);
  const GridFunction ainv_one = apply_inverse(op.basis, GridFunction::constant(op.spec.domain, 1.0));
  const double scale = std::pow(ainv_one.sup_norm() / (m - 1.0), 1.0 / (m - 1.0));

  auto run = [&](const GridFunction& v0, double* stop_increment, double* min_vt) {
    GridFunction v = v0;
    GridFunction v_lag = v0;  // snapshot one time unit ago
    double t = 0.0;
    const int lag_steps = std::max(1, static_cast<int>(std::lround(1.0 / dt)));
    std::vector<GridFunction> window;
    window.push_back(v0);
    double min_dv = std::numeric_limits<double>::infinity();
    while (t < t_end - 1e-12) {
      const double alpha = 1.0 - dt / (m - 1.0);
      ResolventResult r = resolvent_solve(op.matrix, nl, dt / alpha, (1.0 / alpha) * v);
      min_dv = std::min(min_dv, (r.u.values() - v.values()).minCoeff() / dt);
      v = std::move(r.u);
      t += dt;
      window.push_back(v);
      if (static_cast<int>(window.size()) > lag_steps + 1) {
        window.erase(window.begin());
        v_lag = window.front();
        const double inc = (v - v_lag).sup_norm();
        if (inc < stop_tol) {
          if (stop_increment) *stop_increment = inc;
          if (min_vt) *min_vt = min_dv;
          return v;
        }
      }
    }
    const double inc = (v - v_lag).sup_norm();
    if (inc >= stop_tol)
      throw NumericalError("giant_evolution_limit: no stabilization by t_end, increment " +
                           format_g17(inc));
    if (stop_increment) *stop_increment = inc;
    if (min_vt) *min_vt = min_dv;
    return v;
  };

  double inc_above = 0.0, inc_below = 0.0, min_vt_below = 0.0;
  const GridFunction from_above =
      run(GridFunction::constant(op.spec.domain, 10.0 * scale), &inc_above, nullptr);
  GridFunction phi1(op.spec.domain, op.basis.phi.col(0));
  GridFunction v0_below =
      (0.01 * scale / phi1.sup_norm()) * phi1;
  const GridFunction from_below = run(v0_below, &inc_below, &min_vt_below);

  const double gap = (from_above - from_below).sup_norm() / from_above.sup_norm();
  if (gap > 1e-6)
    throw NumericalError("giant_evolution_limit: two-sided limits disagree by " +
                         format_g17(gap));
  if (diag) {
    diag->two_sided_gap = gap;
    diag->min_vt_below = min_vt_below;
    diag->stop_increment = std::max(inc_above, inc_below);
  }
  GiantProfile g;
  g.m = m;
  g.route = GiantRoute::EvolutionLimit;
  g.S = from_above;
  if (g.S.values().minCoeff() <= 0.0)
    throw NumericalError("giant_evolution_limit: profile not strictly positive");
  g.residual_sup = detail::stationary_residual(op.basis, g.S, m);
  if (g.residual_sup > 1e-6)
    throw NumericalError("giant_evolution_limit: stationary residual " +
                         format_g17(g.residual_sup));
  return g;
}

/// Unique positive solution of A v = v^p, 0 < p < 1, by the monotone fixed
/// point v <- A^{-1}(v^p) from two ordered starts.
inline GridFunction sublinear_solve(const EigenBasis& b, double p,
                                    double start_agree_tol = 1e-8) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("sublinear_solve: p must lie in (0,1)");
  const auto T = [&](const GridFunction& v) {
    return apply_inverse(b, v.map([&](double x) { return std::pow(std::max(x, 0.0), p); }));
  };
  const GridFunction ainv_one = apply_inverse(b, GridFunction::constant(b.domain(), 1.0));
  GridFunction v_lo = 1e-10 * ainv_one;
  GridFunction v_hi = std::pow(ainv_one.sup_norm(), 1.0 / (1.0 - p) - 1.0) * 2.0 * ainv_one;
  for (int k = 0; k < 60; ++k) {
    if ((T(v_hi) - v_hi).values().maxCoeff() <= 0.0) break;
    v_hi *= 2.0;
  }
  auto iterate = [&](GridFunction v) {
    for (int it = 0; it < 20000; ++it) {
      GridFunction v_new = T(v);
      const double change = (v_new - v).sup_norm();
      v = std::move(v_new);
      if (change <= 1e-12 * v.sup_norm()) break;
    }
    return v;
  };
  const GridFunction a = iterate(v_lo);
  const GridFunction c = iterate(v_hi);
  const double gap = (c - a).sup_norm() / c.sup_norm();
  if (gap > start_agree_tol)
    throw NumericalError("sublinear_solve: ordered starts disagree by " + format_g17(gap) +
                         " (uniqueness failure)");
  return 0.5 * (a + c);
}

/// Empirical Global Harnack Principle summary of an original-time trace:
/// r(t,x) = u(t,x) t^{1/(m-1)} / Phi_1(x)^{1/m}, the waiting time at which
/// min_x r first exceeds half its eventual plateau, and the band extremes
/// from that time on.
struct GHPReport {
  double t_star_empirical = 0.0;
  double H0_emp = 0.0;
  double H1_emp = 0.0;
  double plateau = 0.0;
  std::vector<std::pair<double, double>> band_ratio_history;  // (t, max r / min r)
};

inline GHPReport ghp_check(const EvolutionTrace& trace, const EigenBasis& basis,
                           const NonlinearitySpec& nl) {
  if (!(nl.m > 1.0)) throw ConfigError("ghp_check: requires m > 1");
  if (trace.rescaled) throw UsageError("ghp_check: expects an original-time trace");
  if (trace.snapshots.empty() || trace.snapshots.front().sup_norm() == 0.0)
    throw ConfigError("ghp_check: degenerate (identically zero) input");
  const double em = 1.0 / (nl.m - 1.0);
  GridFunction phi1(basis.domain(), basis.phi.col(0));
  std::vector<double> taus, rmin, rmax;
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    const double tau = trace.times[n];
    if (tau <= 0.0) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    const double tfac = std::pow(tau, em);
    for (std::size_t i = 0; i < phi1.size(); ++i) {
      const double r = trace.snapshots[n][i] * tfac / std::pow(phi1[i], 1.0 / nl.m);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    taus.push_back(tau);
    rmin.push_back(lo);
    rmax.push_back(hi);
  }
  if (taus.size() < 4) throw ConfigError("ghp_check: trace too short");
  // plateau: median of min_x r over the final decade of time
  std::vector<double> tail;
  for (std::size_t n = 0; n < taus.size(); ++n)
    if (taus[n] >= taus.back() / 10.0) tail.push_back(rmin[n]);
  std::sort(tail.begin(), tail.end());
  GHPReport rep;
  rep.plateau = tail[tail.size() / 2];
  std::size_t istar = taus.size() - 1;
  for (std::size_t n = 0; n < taus.size(); ++n)
    if (rmin[n] > 0.5 * rep.plateau) {
      istar = n;
      break;
    }
  rep.t_star_empirical = taus[istar];
  rep.H0_emp = std::numeric_limits<double>::infinity();
  for (std::size_t n = istar; n < taus.size(); ++n) {
    rep.H0_emp = std::min(rep.H0_emp, rmin[n]);
    rep.H1_emp = std::max(rep.H1_emp, rmax[n]);
    rep.band_ratio_history.emplace_back(taus[n], rmax[n] / rmin[n]);
  }
  if (!(rep.H0_emp > 0.0))
    throw NumericalError("ghp_check: nonpositive lower band (no Harnack floor)");
  return rep;
}

/// Empirical waiting-time displacement t0 = ((h1/H0)^{m-1} - 1) t*, with
/// h1 the profile constant max_x S / Phi_1^{1/m}.
inline double empirical_t0(const GHPReport& rep, const GiantProfile& giant,
                           const EigenBasis& basis, double m) {
  GridFunction phi1(basis.domain(), basis.phi.col(0));
  double h1 = 0.0;
  for (std::size_t i = 0; i < phi1.size(); ++i)
    h1 = std::max(h1, giant.S[i] / std::pow(phi1[i], 1.0 / m));
  return (std::pow(h1 / rep.H0_emp, m - 1.0) - 1.0) * rep.t_star_empirical;
}

/// Least-squares exponent of log(quantity) vs t over a window.
struct RateFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

inline RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& values,
                        double t_lo, double t_hi) {
  if (times.size() != values.size()) throw UsageError("fit_rate: length mismatch");
  if (!times.empty() && (t_lo < times.front() - 1e-12 || t_hi > times.back() + 1e-12))
    throw ConfigError("fit_rate: window outside trace");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo - 1e-12 || times[i] > t_hi + 1e-12) continue;
    if (!(values[i] > 0.0)) continue;
    xs.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  const LineFit lf = fit_line(xs, ys);
  RateFit rf;
  rf.t_lo = t_lo;
  rf.t_hi = t_hi;
  rf.exponent = lf.slope;
  rf.intercept = lf.intercept;
  rf.r_squared = lf.r_squared;
  rf.samples = lf.count;
  return rf;
}

/// Entropy/decay series of a rescaled trace against the giant profile:
/// w = v/S - 1, E[w] = (1/2) int |w - wbar|^2 S^{1+m}, the weighted mean
/// wbar, the weighted L2 difference int |v-S|^2 S^{m-1}, and int |v-S|.
struct EntropyReport {
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<double> weighted_mean;
  std::vector<double> weighted_l2;
  std::vector<double> l1_diff;
  std::vector<double> w_sup;
  RateFit entropy_fit;
  RateFit weighted_l2_fit;
  RateFit l1_fit;
  RateFit w_sup_fit;
};

inline EntropyReport entropy_report(const EvolutionTrace& trace, const GiantProfile& giant,
                                    const NonlinearitySpec& nl, double fit_lo, double fit_hi) {
  if (!trace.rescaled) throw UsageError("entropy_report: expects a rescaled trace");
  if (!(nl.m > 1.0)) throw ConfigError("entropy_report: requires m > 1");
  const GridFunction& S = giant.S;
  if (S.values().minCoeff() <= 0.0)
    throw NumericalError("entropy_report: giant profile has zeros");
  const std::size_t N = S.size();
  std::vector<double> weight(N), wl2w(N);
  for (std::size_t i = 0; i < N; ++i) {
    weight[i] = std::pow(S[i], 1.0 + nl.m);
    wl2w[i] = std::pow(S[i], nl.m - 1.0);
  }
  const double qw = S.domain().quad_weight();
  const double mass = qw * pairwise_sum(weight);
  EntropyReport rep;
  std::vector<double> tmp(N);
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    const GridFunction& v = trace.snapshots[n];
    double wsup = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double w = v[i] / S[i] - 1.0;
      tmp[i] = w * weight[i];
      wsup = std::max(wsup, std::abs(w));
    }
    const double wbar = qw * pairwise_sum(tmp) / mass;
    for (std::size_t i = 0; i < N; ++i) {
      const double w = v[i] / S[i] - 1.0;
      tmp[i] = (w - wbar) * (w - wbar) * weight[i];
    }
    const double entropy = 0.5 * qw * pairwise_sum(tmp);
    for (std::size_t i = 0; i < N; ++i) {
      const double d = v[i] - S[i];
      tmp[i] = d * d * wl2w[i];
    }
    const double l2w = qw * pairwise_sum(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = std::abs(v[i] - S[i]);
    const double l1 = qw * pairwise_sum(tmp);
    rep.times.push_back(trace.times[n]);
    rep.entropy.push_back(entropy);
    rep.weighted_mean.push_back(wbar);
    rep.weighted_l2.push_back(l2w);
    rep.l1_diff.push_back(l1);
    rep.w_sup.push_back(wsup);
  }
  rep.entropy_fit = fit_rate(rep.times, rep.entropy, fit_lo, fit_hi);
  rep.weighted_l2_fit = fit_rate(rep.times, rep.weighted_l2, fit_lo, fit_hi);
  rep.l1_fit = fit_rate(rep.times, rep.l1_diff, fit_lo, fit_hi);
  std::vector<double> wabs(rep.w_sup);
  rep.w_sup_fit = fit_rate(rep.times, wabs, fit_lo, fit_hi);
  return rep;
}

/// Relative-error rate of a rescaled trace: fits log ||v/S - 1||_inf over
/// the window and checks the original-time bound
/// ||u/U - 1||_inf <= (2/(m-1)) t0/(t0 + tau) on all samples with tau >= t0.
struct RelativeErrorReport {
  RateFit fit;
  bool bound_ok = true;
  double bound_max_ratio = 0.0;  // max over samples of error / bound
  double t0 = 0.0;
};

inline RelativeErrorReport relative_error_rate(const EvolutionTrace& trace,
                                               const GiantProfile& giant,
                                               const NonlinearitySpec& nl, double fit_lo,
                                               double fit_hi, double t0) {
  if (!trace.rescaled) throw UsageError("relative_error_rate: expects a rescaled trace");
  if (!(t0 > 0.0)) throw ConfigError("relative_error_rate: t0 must be positive");
  if (fit_lo < std::log1p(t0))
    throw ConfigError("relative_error_rate: window precedes t0 (log(1+t0) = " +
                      format_g17(std::log1p(t0)) + ")");
  const double em = 1.0 / (nl.m - 1.0);
  const GridFunction& S = giant.S;
  RelativeErrorReport rep;
  rep.t0 = t0;
  std::vector<double> wsup(trace.times.size());
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    double ws = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i)
      ws = std::max(ws, std::abs(trace.snapshots[n][i] / S[i] - 1.0));
    wsup[n] = ws;
  }
  rep.fit = fit_rate(trace.times, wsup, fit_lo, fit_hi);
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    const double tau = std::expm1(trace.times[n]);
    if (tau < t0) continue;
    const double shift = std::pow(tau / (1.0 + tau), em);
    double err = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i)
      err = std::max(err, std::abs(trace.snapshots[n][i] / S[i] * shift - 1.0));
    const double bound = (2.0 / (nl.m - 1.0)) * t0 / (t0 + tau);
    rep.bound_max_ratio = std::max(rep.bound_max_ratio, err / bound);
    if (err > bound) rep.bound_ok = false;
  }
  return rep;
}

/// Closed-form witness: evolving the time-displaced profile u0 = S/t1^{1/(m-1)}
/// must show the relative error 1 - (tau/(tau+t1))^{1/(m-1)} at time tau.
struct DisplacedWitness {
  double measured = 0.0;
  double expected = 0.0;
};

inline DisplacedWitness displaced_giant_witness(const Operator& op, const GiantProfile& giant,
                                                const NonlinearitySpec& nl, double t1,
                                                double tau_eval, double dt = 0.01) {
  const double em = 1.0 / (nl.m - 1.0);
  EvolutionParams params;
  params.dt = dt;
  params.t_end = std::log1p(tau_eval);
  params.rescaled = true;
  const GridFunction v0 = std::pow(t1, -em) * giant.S;
  const EvolutionTrace trace = evolve(op, nl, v0, params);
  const GridFunction& v = trace.snapshots.back();
  const double tau = std::expm1(trace.times.back());
  const double shift = std::pow(tau / (1.0 + tau), em);
  double err = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    err = std::max(err, std::abs(v[i] / giant.S[i] * shift - 1.0));
  DisplacedWitness w;
  w.measured = err;
  w.expected = 1.0 - std::pow(tau / (tau + t1), em);
  return w;
}

}  // namespace fpme
