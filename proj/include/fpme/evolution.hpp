// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/grid.hpp"
#include "fpme/numeric.hpp"
#include "fpme/operator.hpp"
#include "fpme/rfl.hpp"

namespace fpme {

/// Odd power-law nonlinearity phi(u) = |u|^{m-1} u with inverse eta and
/// primitive j(u) = |u|^{m+1}/(m+1).
struct NonlinearitySpec {
  double m = 2.0;

  explicit NonlinearitySpec(double m_) : m(m_) {
    if (!(m > 0.0)) throw ConfigError("NonlinearitySpec: m must be positive");
  }

  double phi(double u) const { return std::pow(std::abs(u), m - 1.0) * u; }
  double dphi(double u) const { return m * std::pow(std::abs(u), m - 1.0); }
  double eta(double w) const { return std::pow(std::abs(w), 1.0 / m - 1.0) * w; }
  double j(double u) const { return std::pow(std::abs(u), m + 1.0) / (m + 1.0); }

  GridFunction phi(const GridFunction& u) const {
    return u.map([this](double x) { return phi(x); });
  }
};

enum class TimeGridKind { Uniform, Geometric };

struct EvolutionParams {
  double dt = 0.01;       // uniform step (rescaled or original time)
  double t_end = 1.0;
  bool rescaled = false;  // integrate v_t + A(v^m) = v/(m-1) instead
  double newton_tol = 1e-11;
  int newton_max_iter = 50;
  TimeGridKind grid = TimeGridKind::Uniform;
  double tau0 = 1e-4;     // geometric grid: first time point
  double growth = 0.03;   // geometric grid: tau_{n+1} = tau_n (1 + growth)

  void validate(double m) const {
    if (!(dt > 0.0)) throw ConfigError("EvolutionParams: dt must be positive");
    if (!(t_end > 0.0)) throw ConfigError("EvolutionParams: t_end must be positive");
    if (rescaled) {
      if (!(m > 1.0)) throw ConfigError("EvolutionParams: rescaled flow requires m > 1");
      if (dt > 0.5 * (m - 1.0) + 1e-15)
        throw ConfigError("EvolutionParams: rescaled flow requires dt <= (m-1)/2");
      if (grid != TimeGridKind::Uniform)
        throw ConfigError("EvolutionParams: rescaled flow uses the uniform grid");
    }
    if (grid == TimeGridKind::Geometric) {
      if (!(tau0 > 0.0 && growth > 0.0))
        throw ConfigError("EvolutionParams: geometric grid requires tau0, growth > 0");
    }
  }
};

/// Time points, snapshots, and per-step diagnostics of one evolution.
struct EvolutionTrace {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<double> hstar_norms;
  std::vector<double> sup_norms;
  std::vector<double> l1_phi1_norms;
  std::vector<double> lyapunov;  // Psi(u) = int j(u)
  std::vector<int> newton_iters;
  bool rescaled = false;
  double m = 0.0;

  std::size_t steps() const { return times.size(); }
};

/// Discrete operator bundle: spec, eigenbasis, and the dense nodal matrix
/// (identical action; the matrix feeds the implicit solver).
struct Operator {
  OperatorSpec spec;
  EigenBasis basis;
  Eigen::MatrixXd matrix;
};

inline Operator make_sfl_operator(DomainSpec domain, double s) {
  Operator op;
  op.basis = build_sfl_basis(domain, s, static_cast<int>(domain.node_count()));
  op.spec = op.basis.op;
  op.matrix = op.basis.dense_matrix();
  return op;
}

inline Operator make_rfl_operator(DomainSpec domain, double s, double c_norm = 0.0) {
  if (c_norm <= 0.0) c_norm = rfl_normalization(s);
  Operator op;
  op.matrix = build_rfl_matrix(domain, s, c_norm);
  op.basis = build_rfl_basis(op.matrix, domain, s, c_norm, domain.n_interior);
  op.spec = op.basis.op;
  return op;
}

struct ResolventResult {
  GridFunction u;
  int iterations = 0;
  double residual = 0.0;
  bool used_fallback = false;
};

namespace detail {

inline double residual_norm(const Eigen::MatrixXd& a, const NonlinearitySpec& nl, double dt,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& f,
                            Eigen::VectorXd* out = nullptr) {
  Eigen::VectorXd pu(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) pu[i] = nl.phi(u[i]);
  Eigen::VectorXd g = u + dt * (a * pu) - f;
  if (out) *out = g;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Solve the implicit step u + dt A phi(u) = f to newton_tol in max norm.
/// Damped Newton in the u variable (Jacobian I + dt A diag(phi'(u)) stays
/// nonsingular for degenerate m > 1); if Newton stalls, fall back to
/// monotone nodewise Picard sweeps (scalar solves with safeguarded
/// bisection), which the M-matrix structure keeps well-defined.
inline ResolventResult resolvent_solve(const Eigen::MatrixXd& a, const NonlinearitySpec& nl,
                                       double dt, const GridFunction& f,
                                       double tol = 1e-11, int max_iter = 50) {
  if (!(dt > 0.0)) throw ConfigError("resolvent_solve: dt must be positive");
  if (!f.values().allFinite()) throw NumericalError("resolvent_solve: data not finite");
  const Eigen::Index n = f.values().size();
  ResolventResult res{GridFunction(f.domain(), f.values()), 0, 0.0, false};
  Eigen::VectorXd u = f.values();
  Eigen::VectorXd g;
  double r = detail::residual_norm(a, nl, dt, u, f.values(), &g);
  int it = 0;
  for (; it < max_iter && r > tol; ++it) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) jac.col(col) += dt * nl.dphi(u[col]) * a.col(col);
    Eigen::VectorXd du = jac.partialPivLu().solve(-g);
    double step = 1.0;
    double r_new = r;
    Eigen::VectorXd u_new = u;
    for (int bs = 0; bs < 40; ++bs) {
      u_new = u + step * du;
      r_new = detail::residual_norm(a, nl, dt, u_new, f.values(), nullptr);
      if (r_new < r) break;
      step *= 0.5;
    }
    if (!(r_new < r)) break;  // stalled
    u = u_new;
    r = detail::residual_norm(a, nl, dt, u, f.values(), &g);
  }
  res.iterations = it;
  if (r > tol) {
    // Picard fallback: nodewise monotone sweeps
    res.used_fallback = true;
    const double bound = f.values().cwiseAbs().maxCoeff() + 1.0;
    for (int sweep = 0; sweep < 200 && r > tol; ++sweep) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double rhs = f.values()[i];
        for (Eigen::Index jcol = 0; jcol < n; ++jcol)
          if (jcol != i) rhs -= dt * a(i, jcol) * nl.phi(u[jcol]);
        double lo = -bound, hi = bound;
        for (int b = 0; b < 100; ++b) {
          const double mid = 0.5 * (lo + hi);
          const double val = mid + dt * a(i, i) * nl.phi(mid) - rhs;
          (val > 0.0 ? hi : lo) = mid;
        }
        u[i] = 0.5 * (lo + hi);
      }
      r = detail::residual_norm(a, nl, dt, u, f.values(), &g);
    }
    if (r > tol)
      throw NumericalError("resolvent_solve: no convergence after fallback, residual " +
                           format_g17(r));
  }
  res.u = GridFunction(f.domain(), u);
  res.residual = r;
  return res;
}

inline double hstar_from(const EigenBasis& b, const GridFunction& f) {
  const Eigen::VectorXd c = b.coefficients(f);
  std::vector<double> terms(static_cast<std::size_t>(c.size()));
  for (Eigen::Index k = 0; k < c.size(); ++k)
    terms[static_cast<std::size_t>(k)] = c[k] * c[k] / b.mu[k];
  return std::sqrt(pairwise_sum(terms));
}

/// Backward-Euler chain for the original flow u_t + A phi(u) = 0 or the
/// rescaled flow v_t + A(v^m) = v/(m-1) (source kept implicit:
/// (1 - dt/(m-1)) v + dt A phi(v) = v_prev).
inline EvolutionTrace evolve(const Operator& op, const NonlinearitySpec& nl,
                             const GridFunction& u0, const EvolutionParams& params) {
  params.validate(nl.m);
  if (!u0.values().allFinite()) throw ConfigError("evolve: initial data not finite");
  if (!(u0.domain() == op.spec.domain)) throw UsageError("evolve: domain mismatch");

  EvolutionTrace trace;
  trace.rescaled = params.rescaled;
  trace.m = nl.m;
  const GridFunction phi1(op.spec.domain, op.basis.phi.col(0));

  auto record = [&](double t, const GridFunction& u, int iters) {
    trace.times.push_back(t);
    trace.snapshots.push_back(u);
    trace.sup_norms.push_back(u.sup_norm());
    trace.hstar_norms.push_back(hstar_from(op.basis, u));
    trace.l1_phi1_norms.push_back(quad_inner(u.map([](double x) { return std::abs(x); }), phi1));
    std::vector<double> jvals(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) jvals[i] = nl.j(u[i]);
    trace.lyapunov.push_back(u.domain().quad_weight() * pairwise_sum(jvals));
    trace.newton_iters.push_back(iters);
  };

  GridFunction u = u0;
  record(0.0, u, 0);
  double t = 0.0;
  std::size_t step_index = 0;
  while (t < params.t_end - 1e-12) {
    double dt_step;
    if (params.grid == TimeGridKind::Geometric) {
      dt_step = (step_index == 0) ? params.tau0 : t * params.growth;
    } else {
      dt_step = params.dt;
    }
    dt_step = std::min(dt_step, params.t_end - t);
    try {
      if (params.rescaled) {
        const double alpha = 1.0 - dt_step / (nl.m - 1.0);
        // alpha u + dt A phi(u) = u_prev  <=>  u + (dt/alpha) A phi(u) = u_prev/alpha
        ResolventResult r = resolvent_solve(op.matrix, nl, dt_step / alpha,
                                            (1.0 / alpha) * u, params.newton_tol,
                                            params.newton_max_iter);
        u = std::move(r.u);
        t += dt_step;
        record(t, u, r.iterations);
      } else {
        ResolventResult r =
            resolvent_solve(op.matrix, nl, dt_step, u, params.newton_tol, params.newton_max_iter);
        u = std::move(r.u);
        t += dt_step;
        record(t, u, r.iterations);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("evolve: step " + std::to_string(step_index) + " at t=" +
                           format_g17(t) + ": " + e.what());
    }
    ++step_index;
  }
  return trace;
}

/// Per-step H* distance of two evolutions sharing a time grid; flags any
/// step where the distance increases by more than the slack.
struct ContractionReport {
  std::vector<double> distances;
  double max_increase = 0.0;
  bool contractive = true;
};

inline ContractionReport contraction_monitor(const EvolutionTrace& a, const EvolutionTrace& b,
                                             const EigenBasis& basis, double slack = 1e-9) {
  if (a.times.size() != b.times.size())
    throw UsageError("contraction_monitor: time grids differ");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12)
      throw UsageError("contraction_monitor: time grids differ");
  ContractionReport rep;
  rep.distances.reserve(a.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i)
    rep.distances.push_back(hstar_from(basis, a.snapshots[i] - b.snapshots[i]));
  for (std::size_t i = 1; i < rep.distances.size(); ++i) {
    const double inc = rep.distances[i] - rep.distances[i - 1];
    rep.max_increase = std::max(rep.max_increase, inc);
    if (inc > slack) rep.contractive = false;
  }
  return rep;
}

/// Nodewise order preservation: u0 <= v0 must imply u_n <= v_n + slack.
struct ComparisonReport {
  bool ordered = true;
  long first_violation_step = -1;
  double worst_violation = 0.0;
};

inline ComparisonReport comparison_monitor(const EvolutionTrace& a, const EvolutionTrace& b,
                                           double slack = 1e-10) {
  if (a.times.size() != b.times.size())
    throw UsageError("comparison_monitor: time grids differ");
  ComparisonReport rep;
  for (std::size_t n = 0; n < a.times.size(); ++n) {
    const double worst = (a.snapshots[n].values() - b.snapshots[n].values()).maxCoeff();
    rep.worst_violation = std::max(rep.worst_violation, worst);
    if (worst > slack && rep.ordered) {
      rep.ordered = false;
      rep.first_violation_step = static_cast<long>(n);
    }
  }
  return rep;
}

/// Smoothing diagnostics for m > 1, nonnegative data. In original time:
/// empirical K1 = sup_t t^{1/(m-1)} ||u||_inf and the discrete monotonicity
/// defect min over steps/nodes of (u_{n+1}-u_n)/dt + u_{n+1}/((m-1) t_n).
/// For rescaled traces the same quantities are formed from u = (1+tau)^{-1/(m-1)} v,
/// and min_vt reports the nodewise minimum of (v_{n+1}-v_n)/dt.
struct SmoothingReport {
  double k1_emp = 0.0;
  std::vector<double> k1_history;  // t^{1/(m-1)} ||u(t)||_inf per recorded time
  std::vector<double> k1_times;
  double min_monotonicity = 0.0;
  double min_vt = 0.0;  // rescaled traces only
};

inline SmoothingReport smoothing_monitor(const EvolutionTrace& trace, const NonlinearitySpec& nl) {
  if (!(nl.m > 1.0)) throw ConfigError("smoothing_monitor: requires m > 1");
  for (const auto& snap : trace.snapshots)
    if (snap.values().minCoeff() < -1e-12)
      throw ConfigError("smoothing_monitor: requires nonnegative data");
  SmoothingReport rep;
  const double em = 1.0 / (nl.m - 1.0);
  std::vector<double> taus(trace.times.size());
  std::vector<GridFunction> us;
  us.reserve(trace.times.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.rescaled) {
      const double tau = std::expm1(trace.times[i]);
      taus[i] = tau;
      us.push_back(std::pow(1.0 + tau, -em) * trace.snapshots[i]);
    } else {
      taus[i] = trace.times[i];
      us.push_back(trace.snapshots[i]);
    }
  }
  rep.min_monotonicity = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (taus[i] <= 0.0) continue;
    const double q = std::pow(taus[i], em) * us[i].sup_norm();
    rep.k1_times.push_back(taus[i]);
    rep.k1_history.push_back(q);
    rep.k1_emp = std::max(rep.k1_emp, q);
  }
  for (std::size_t n = 0; n + 1 < taus.size(); ++n) {
    if (taus[n] <= 0.0) continue;
    const double dt = taus[n + 1] - taus[n];
    for (std::size_t i = 0; i < us[n].size(); ++i) {
      const double d = (us[n + 1][i] - us[n][i]) / dt + us[n + 1][i] / ((nl.m - 1.0) * taus[n]);
      rep.min_monotonicity = std::min(rep.min_monotonicity, d);
    }
  }
  rep.min_vt = std::numeric_limits<double>::infinity();
  if (trace.rescaled) {
    for (std::size_t n = 0; n + 1 < trace.times.size(); ++n) {
      const double dt = trace.times[n + 1] - trace.times[n];
      const double dmin =
          (trace.snapshots[n + 1].values() - trace.snapshots[n].values()).minCoeff() / dt;
      rep.min_vt = std::min(rep.min_vt, dmin);
    }
  }
  return rep;
}

}  // namespace fpme
