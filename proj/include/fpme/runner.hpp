// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpme/asymptotics.hpp"
#include "fpme/config.hpp"
#include "fpme/errors.hpp"
#include "fpme/evolution.hpp"
#include "fpme/io.hpp"
#include "fpme/operator.hpp"
#include "fpme/rfl.hpp"
#include "fpme/spaces.hpp"
#include "fpme/version.hpp"

namespace fpme {

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

/// Result of one experiment run. Wall time is reported on stdout by the CLI
/// but kept out of the files so identical seeded runs stay byte-identical.
struct RunManifest {
  nlohmann::ordered_json config_echo;
  std::string version = kVersion;
  double wall_time_ms = 0.0;
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["artifact_version"] = version;
    j["config"] = config_echo;
    nlohmann::ordered_json vs = nlohmann::ordered_json::array();
    for (const auto& v : verdicts) {
      nlohmann::ordered_json o;
      o["name"] = v.name;
      o["pass"] = v.pass;
      o["measured"] = v.measured;
      o["expected"] = v.expected;
      o["tolerance"] = v.tolerance;
      vs.push_back(o);
    }
    j["verdicts"] = vs;
    j["warnings"] = warnings;
    return j;
  }
};

namespace detail {

inline Operator build_operator(const ExperimentConfig& cfg) {
  const DomainSpec dom = cfg.domain();
  return cfg.op_kind == OperatorKind::SFL ? make_sfl_operator(dom, cfg.s)
                                          : make_rfl_operator(dom, cfg.s);
}

inline GridFunction initial_data(const ExperimentConfig& cfg, const Operator& op,
                                 const GiantProfile* giant) {
  const DomainSpec dom = cfg.domain();
  switch (cfg.initial) {
    case InitialKind::Sine:
      if (dom.dim() == 1)
        return GridFunction::sample(dom, [&](double x) {
          return cfg.amplitude * std::sin(std::numbers::pi * x);
        });
      return GridFunction::sample(dom, [&](double x, double y) {
        return cfg.amplitude * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
      });
    case InitialKind::Constant:
      return GridFunction::constant(dom, cfg.amplitude);
    case InitialKind::GiantFraction: {
      if (!giant) throw UsageError("initial_data: giant profile required");
      return cfg.amplitude * giant->S;
    }
    case InitialKind::GiantTilted: {
      if (!giant) throw UsageError("initial_data: giant profile required");
      if (dom.dim() != 1) throw ConfigError("initial giant_tilted: Interval geometry only");
      GridFunction f = giant->S;
      for (std::size_t i = 0; i < f.size(); ++i)
        f[i] *= cfg.amplitude * (0.45 + 0.2 * std::sin(2.0 * std::numbers::pi * dom.x_of(i)));
      return f;
    }
  }
  (void)op;
  throw UsageError("initial_data: unreachable");
}

inline std::string trace_csv(const EvolutionTrace& t) {
  CsvBuilder csv({"time", "sup_norm", "hstar_norm", "l1_phi1", "lyapunov", "newton_iters"});
  for (std::size_t n = 0; n < t.times.size(); ++n)
    csv.row({t.times[n], t.sup_norms[n], t.hstar_norms[n], t.l1_phi1_norms[n], t.lyapunov[n],
             static_cast<double>(t.newton_iters[n])});
  return csv.str();
}

inline std::string profile_csv(const GridFunction& f) {
  const DomainSpec& dom = f.domain();
  if (dom.dim() == 1) {
    CsvBuilder csv({"index", "x", "value"});
    for (std::size_t i = 0; i < f.size(); ++i)
      csv.row({static_cast<double>(i), dom.x_of(i), f[i]});
    return csv.str();
  }
  CsvBuilder csv({"index", "x", "y", "value"});
  for (std::size_t i = 0; i < f.size(); ++i)
    csv.row({static_cast<double>(i), dom.x_of(i), dom.y_of(i), f[i]});
  return csv.str();
}

// ---- experiments -----------------------------------------------------------

inline void run_basis(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  const DomainSpec dom = cfg.domain();
  const int K = cfg.modes > 0 ? cfg.modes : static_cast<int>(dom.node_count());
  EigenBasis basis;
  EigenBasis sfl_ref;  // for the RFL eigenvalue comparison
  if (cfg.op_kind == OperatorKind::SFL) {
    basis = build_sfl_basis(dom, cfg.s, K);
  } else {
    const double c = rfl_normalization(cfg.s);
    basis = build_rfl_basis(build_rfl_matrix(dom, cfg.s, c), dom, cfg.s, c, K);
    sfl_ref = build_sfl_basis(dom, cfg.s, std::min(K, 10));
  }
  CsvBuilder mu({"k", "mu"});
  for (int k = 0; k < basis.modes(); ++k)
    mu.row({static_cast<double>(k + 1), basis.mu[k]});
  out.write_text("mu.csv", mu.str());
  for (int k = 0; k < basis.modes(); ++k)
    out.write_text("phi_" + std::to_string(k + 1) + ".csv",
                   profile_csv(GridFunction(dom, basis.phi.col(k))));
  // gram defect
  double gram = 0.0;
  {
    Eigen::MatrixXd g = dom.quad_weight() * (basis.phi.transpose() * basis.phi);
    g -= Eigen::MatrixXd::Identity(basis.modes(), basis.modes());
    gram = g.cwiseAbs().maxCoeff();
  }
  man.verdicts.push_back({"gram_identity", gram <= basis.gram_tolerance, gram, 0.0, 1e-10});
  // eigenpair identity on the first mode
  {
    GridFunction phi0(dom, basis.phi.col(0));
    const GridFunction r = apply(basis, phi0) - basis.mu[0] * phi0;
    const double rel = r.sup_norm() / (basis.mu[0] * phi0.sup_norm());
    man.verdicts.push_back({"eigenpair_identity", rel <= 1e-10, rel, 0.0, 1e-10});
  }
  if (cfg.op_kind == OperatorKind::RFL) {
    double worst = 0.0;
    for (int k = 0; k < sfl_ref.modes(); ++k)
      worst = std::max(worst, basis.mu[k] / sfl_ref.mu[k]);
    man.verdicts.push_back({"rfl_le_sfl_eigenvalues", worst <= 1.01, worst, 1.0, 0.01});
  }
  if (basis.complete() && dom.dim() == 1 && dom.node_count() <= 512)
    out.write_text("kernel.csv", matrix_csv(green_kernel(basis).entries));
}

inline void run_evolve(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  const Operator op = build_operator(cfg);
  const NonlinearitySpec nl(cfg.m);
  GiantProfile giant;
  const bool needs_giant =
      cfg.initial == InitialKind::GiantFraction || cfg.initial == InitialKind::GiantTilted;
  if (needs_giant) giant = giant_fixed_point(op.basis, cfg.m);
  const GridFunction u0 = initial_data(cfg, op, needs_giant ? &giant : nullptr);
  const EvolutionTrace trace = evolve(op, nl, u0, cfg.evolution);
  out.write_text("trace.csv", trace_csv(trace));
  out.write_text("profile_final.csv", profile_csv(trace.snapshots.back()));
  bool finite = true;
  for (const auto& s : trace.snapshots) finite = finite && s.values().allFinite();
  man.verdicts.push_back({"finite_trace", finite, finite ? 1.0 : 0.0, 1.0, 0.0});
  if (!cfg.evolution.rescaled) {
    double worst_inc = 0.0;
    for (std::size_t n = 1; n < trace.lyapunov.size(); ++n)
      worst_inc = std::max(worst_inc, trace.lyapunov[n] - trace.lyapunov[n - 1]);
    man.verdicts.push_back(
        {"lyapunov_nonincreasing", worst_inc <= 1e-10, worst_inc, 0.0, 1e-10});
  }
  if (u0.values().minCoeff() >= 0.0) {
    double worst = 0.0;
    for (const auto& s : trace.snapshots) worst = std::min(worst, s.values().minCoeff());
    man.verdicts.push_back({"nonnegativity", worst >= -1e-10, worst, 0.0, 1e-10});
  }
}

inline void run_giant(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  if (!(cfg.m > 1.0)) throw ConfigError("giant experiment requires m > 1");
  const Operator op = build_operator(cfg);
  const GiantProfile fp = giant_fixed_point(op.basis, cfg.m);
  GiantEvolutionDiagnostics diag;
  const GiantProfile ev = giant_evolution_limit(op, cfg.m, &diag);
  const double cross = (fp.S - ev.S).sup_norm() / fp.S.sup_norm();
  const DomainSpec dom = cfg.domain();
  GridFunction phi1(dom, op.basis.phi.col(0));
  CsvBuilder csv({"x", "S", "phi1", "S_over_phi1_pow"});
  for (std::size_t i = 0; i < fp.S.size(); ++i)
    csv.row({dom.x_of(i), fp.S[i], phi1[i], fp.S[i] / std::pow(phi1[i], 1.0 / cfg.m)});
  out.write_text("giant.csv", csv.str());
  man.verdicts.push_back(
      {"fixed_point_residual", fp.residual_sup < 1e-8, fp.residual_sup, 0.0, 1e-8});
  man.verdicts.push_back(
      {"evolution_two_sided_gap", diag.two_sided_gap < 1e-6, diag.two_sided_gap, 0.0, 1e-6});
  man.verdicts.push_back({"route_cross_validation", cross < 0.01, cross, 0.0, 0.01});
  man.verdicts.push_back(
      {"below_start_monotone", diag.min_vt_below >= -1e-8, diag.min_vt_below, 0.0, 1e-8});
}

inline void run_ghp(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  if (!(cfg.m > 1.0)) throw ConfigError("ghp experiment requires m > 1");
  const Operator op = build_operator(cfg);
  const NonlinearitySpec nl(cfg.m);
  EvolutionParams params = cfg.evolution;
  params.rescaled = false;
  params.grid = TimeGridKind::Geometric;
  std::vector<GHPReport> reports;
  for (std::size_t ai = 0; ai < cfg.ghp_amplitudes.size(); ++ai) {
    ExperimentConfig c = cfg;
    c.amplitude = cfg.amplitude * cfg.ghp_amplitudes[ai];
    const GridFunction u0 = initial_data(c, op, nullptr);
    const EvolutionTrace trace = evolve(op, nl, u0, params);
    const GHPReport rep = ghp_check(trace, op.basis, nl);
    reports.push_back(rep);
    CsvBuilder csv({"t", "band_ratio"});
    for (const auto& [t, ratio] : rep.band_ratio_history) csv.row({t, ratio});
    out.write_text("ghp_band_a" + std::to_string(ai) + ".csv", csv.str());
  }
  // stabilization of the baseline band
  {
    const GHPReport& rep = reports.front();
    const double ts = rep.t_star_empirical;
    double ratio_2t = rep.band_ratio_history.back().second;
    for (const auto& [t, ratio] : rep.band_ratio_history)
      if (t >= 2.0 * ts) {
        ratio_2t = ratio;
        break;
      }
    const double end_ratio = rep.band_ratio_history.back().second;
    const double rel = end_ratio / ratio_2t;
    man.verdicts.push_back(
        {"band_stabilization", rel <= 2.0 && rel >= 0.5, rel, 1.0, 1.0});
  }
  for (std::size_t ai = 1; ai < reports.size(); ++ai) {
    const double a = cfg.ghp_amplitudes[ai] / cfg.ghp_amplitudes[0];
    const double target = std::pow(a, -(cfg.m - 1.0));
    const double measured = reports[ai].t_star_empirical / reports[0].t_star_empirical;
    man.verdicts.push_back({"tstar_scaling_a" + std::to_string(ai),
                            std::abs(measured - target) <= 0.25 * target, measured, target,
                            0.25 * target});
  }
  nlohmann::ordered_json j;
  j["t_star"] = nlohmann::ordered_json::array();
  for (const auto& rep : reports) {
    nlohmann::ordered_json o;
    o["t_star_empirical"] = rep.t_star_empirical;
    o["H0_emp"] = rep.H0_emp;
    o["H1_emp"] = rep.H1_emp;
    o["plateau"] = rep.plateau;
    j["t_star"].push_back(o);
  }
  out.write_text("ghp.json", j.dump(2) + "\n");
}

inline void run_rates(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  if (!(cfg.m > 1.0)) throw ConfigError("rates experiment requires m > 1");
  const Operator op = build_operator(cfg);
  const NonlinearitySpec nl(cfg.m);
  const GiantProfile giant = giant_fixed_point(op.basis, cfg.m);
  // waiting time from an original-time geometric run
  EvolutionParams ghp_params;
  ghp_params.grid = TimeGridKind::Geometric;
  ghp_params.tau0 = 1e-4;
  ghp_params.growth = 0.03;
  ghp_params.t_end = 2000.0;
  ExperimentConfig c0 = cfg;
  c0.initial = InitialKind::Sine;
  const EvolutionTrace ghp_trace = evolve(op, nl, initial_data(c0, op, nullptr), ghp_params);
  const GHPReport ghp = ghp_check(ghp_trace, op.basis, nl);
  const double t0 = 2.0 * empirical_t0(ghp, giant, op.basis, cfg.m);  // 2x inflated
  // rescaled run for the rate fit
  EvolutionParams params = cfg.evolution;
  params.rescaled = true;
  const EvolutionTrace trace = evolve(op, nl, initial_data(c0, op, nullptr), params);
  const RelativeErrorReport rep =
      relative_error_rate(trace, giant, nl, cfg.window_lo, cfg.window_hi, t0);
  const DisplacedWitness wit = displaced_giant_witness(op, giant, nl, 1.0, 4.0, params.dt);
  const double wit_rel = std::abs(wit.measured - wit.expected) / wit.expected;
  man.verdicts.push_back({"relative_error_exponent",
                          std::abs(rep.fit.exponent + 1.0) <= 0.15, rep.fit.exponent, -1.0,
                          0.15});
  man.verdicts.push_back({"displaced_giant_witness", wit_rel <= 0.02, wit.measured,
                          wit.expected, 0.02 * wit.expected});
  man.verdicts.push_back(
      {"rate_bound_never_violated", rep.bound_ok, rep.bound_max_ratio, 1.0, 0.0});
  nlohmann::ordered_json j;
  j["window"] = {cfg.window_lo, cfg.window_hi};
  j["exponent"] = rep.fit.exponent;
  j["r_squared"] = rep.fit.r_squared;
  j["t0_inflated"] = t0;
  j["bound_max_ratio"] = rep.bound_max_ratio;
  j["witness_measured"] = wit.measured;
  j["witness_expected"] = wit.expected;
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : man.verdicts) {
    nlohmann::ordered_json o;
    o["name"] = v.name;
    o["pass"] = v.pass;
    o["measured"] = v.measured;
    o["expected"] = v.expected;
    vs.push_back(o);
  }
  j["verdicts"] = vs;
  out.write_text("rates.json", j.dump(2) + "\n");
}

inline void run_entropy(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  if (!(cfg.m > 1.0)) throw ConfigError("entropy experiment requires m > 1");
  const Operator op = build_operator(cfg);
  const NonlinearitySpec nl(cfg.m);
  const GiantProfile giant = giant_fixed_point(op.basis, cfg.m);
  EvolutionParams params = cfg.evolution;
  params.rescaled = true;
  ExperimentConfig c0 = cfg;
  c0.initial = InitialKind::GiantTilted;
  const EvolutionTrace trace = evolve(op, nl, initial_data(c0, op, &giant), params);
  const EntropyReport rep = entropy_report(trace, giant, nl, cfg.window_lo, cfg.window_hi);
  CsvBuilder csv({"t", "E", "wbar", "L2w", "L1"});
  for (std::size_t n = 0; n < rep.times.size(); ++n)
    csv.row({rep.times[n], rep.entropy[n], rep.weighted_mean[n], rep.weighted_l2[n],
             rep.l1_diff[n]});
  out.write_text("entropy.csv", csv.str());
  double min_entropy = 0.0;
  for (double e : rep.entropy) min_entropy = std::min(min_entropy, e);
  man.verdicts.push_back({"entropy_nonnegative", min_entropy >= 0.0, min_entropy, 0.0, 0.0});
  // eventual monotone decay once ||w||_inf <= 0.1
  double worst_inc = 0.0;
  for (std::size_t n = 1; n < rep.entropy.size(); ++n)
    if (rep.w_sup[n] <= 0.1)
      worst_inc = std::max(worst_inc, rep.entropy[n] - rep.entropy[n - 1]);
  man.verdicts.push_back(
      {"entropy_eventual_monotone", worst_inc <= 1e-10, worst_inc, 0.0, 1e-10});
  // weighted-mean sharpness floor wbar(t) <= e^{-(t-t1)} wbar(t1), 5% slack
  {
    std::size_t i1 = 0;
    while (i1 + 1 < rep.times.size() && rep.times[i1] < cfg.window_lo) ++i1;
    bool ok = true;
    double worst = 0.0;
    for (std::size_t n = i1; n < rep.times.size(); ++n) {
      const double rhs = std::exp(-(rep.times[n] - rep.times[i1])) * rep.weighted_mean[i1];
      const double overshoot = rep.weighted_mean[n] - rhs;
      if (overshoot > 0.05 * std::abs(rhs)) ok = false;
      worst = std::max(worst, std::abs(rhs) > 0 ? overshoot / std::abs(rhs) : 0.0);
    }
    man.verdicts.push_back({"weighted_mean_floor", ok, worst, 0.0, 0.05});
  }
  man.verdicts.push_back({"entropy_exponent", std::abs(rep.entropy_fit.exponent + 2.0) <= 0.3,
                          rep.entropy_fit.exponent, -2.0, 0.3});
  man.verdicts.push_back({"l1_exponent", std::abs(rep.l1_fit.exponent + 1.0) <= 0.2,
                          rep.l1_fit.exponent, -1.0, 0.2});
  man.verdicts.push_back({"weighted_l2_exponent",
                          std::abs(rep.weighted_l2_fit.exponent + 2.0) <= 0.3,
                          rep.weighted_l2_fit.exponent, -2.0, 0.3});
}

inline void run_inequalities(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  const Operator op = build_operator(cfg);
  const SobolevReport rep = sobolev_constants(op.basis, cfg.q, cfg.trials, cfg.seed);
  const double gap = std::abs(rep.primal_constant - rep.dual_constant) / rep.primal_constant;
  man.verdicts.push_back({"sobolev_primal_dual_gap", gap < 0.05, gap, 0.0, 0.05});
  const SobolevReport rep2 = sobolev_constants(op.basis, 2.0, 8, cfg.seed);
  const double mu1 = std::pow(op.basis.mu[0], -0.5);
  const double q2err = std::abs(rep2.primal_constant - mu1) / mu1;
  man.verdicts.push_back({"sobolev_q2_rayleigh", q2err <= 1e-10, rep2.primal_constant, mu1,
                          1e-10 * mu1});
  // Green kernel lower bound against Phi1 x Phi1
  double c0 = 0.0;
  if (op.basis.complete()) {
    const GreenKernel g = green_kernel(op.basis);
    GridFunction phi1(cfg.domain(), op.basis.phi.col(0));
    c0 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < g.entries.rows(); ++i)
      for (Eigen::Index j = 0; j < g.entries.cols(); ++j)
        c0 = std::min(c0, g.entries(i, j) / (phi1[static_cast<std::size_t>(i)] *
                                             phi1[static_cast<std::size_t>(j)]));
    man.verdicts.push_back({"green_kernel_lower_bound", c0 > 0.0, c0, 0.0, 0.0});
  }
  std::string warn;
  double hardy = 0.0;
  if (cfg.geometry == Geometry::Interval) {
    GridFunction phi1(cfg.domain(), op.basis.phi.col(0));
    hardy = hardy_ratio(op.basis, phi1, cfg.s, &warn);
    if (!warn.empty()) man.warnings.push_back(warn);
  }
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  auto record = [&](const std::string& name, double primal, double dual) {
    nlohmann::ordered_json o;
    o["name"] = name;
    o["constant_primal"] = primal;
    o["constant_dual"] = dual;
    o["q"] = cfg.q;
    o["s"] = cfg.s;
    o["grid"] = cfg.n;
    o["seed"] = cfg.seed;
    recs.push_back(o);
  };
  record("sobolev", rep.primal_constant, rep.dual_constant);
  record("sobolev_q2", rep2.primal_constant, rep2.dual_constant);
  if (op.basis.complete()) record("green_lower_c0", c0, c0);
  if (cfg.geometry == Geometry::Interval) record("hardy_ratio", hardy, hardy);
  out.write_text("inequalities.json", recs.dump(2) + "\n");
  out.write_text("sobolev_maximizer.csv", profile_csv(rep.maximizer));
}

inline void run_interp_norm(const ExperimentConfig& cfg, OutputDir& out, RunManifest& man) {
  if (cfg.op_kind != OperatorKind::SFL)
    throw ConfigError("interp_norm experiment requires the SFL (base eigenvalues)");
  const DomainSpec dom = cfg.domain();
  const EigenBasis basis = build_sfl_basis(dom, cfg.s, static_cast<int>(dom.node_count()));
  const std::vector<double> t = sfl_mode_ratios(basis);
  double lam0 = 1.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) lam0 = std::max(lam0, t[k + 1] / t[k]);
  const InterpolationSpec spec(1.0 - cfg.s, lam0 * (1.0 + 1e-9));
  Rng rng(cfg.seed);
  double worst = 0.0;
  CsvBuilder csv({"sample", "h_norm", "j_norm", "rel_diff"});
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd vals(static_cast<Eigen::Index>(dom.node_count()));
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = rng.normal();
    GridFunction f(dom, std::move(vals));
    const double hn = h_norm(basis, f);
    const double jn = discrete_j_norm(t, spectral_coeffs(basis, f), spec);
    const double rel = std::abs(hn - jn) / hn;
    worst = std::max(worst, rel);
    csv.row({static_cast<double>(trial), hn, jn, rel});
  }
  out.write_text("interp_norm.csv", csv.str());
  man.verdicts.push_back({"jmethod_equals_h_norm", worst <= 1e-12, worst, 0.0, 1e-12});
  man.verdicts.push_back({"lambda1_diagnostic", spec.lambda1() > 0.0, spec.lambda1(),
                          spec.lambda1(), 0.0});
}

}  // namespace detail

/// Execute the configured experiment, writing per-module CSV/JSON plus the
/// run manifest into output_dir. Exceptions propagate with the experiment
/// name attached; files written before the failure remain with a .partial
/// suffix.
inline RunManifest run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  man.config_echo = cfg.echo();
  OutputDir out(cfg.output_dir);
  try {
    switch (cfg.experiment) {
      case Experiment::Basis: detail::run_basis(cfg, out, man); break;
      case Experiment::Evolve: detail::run_evolve(cfg, out, man); break;
      case Experiment::Giant: detail::run_giant(cfg, out, man); break;
      case Experiment::Ghp: detail::run_ghp(cfg, out, man); break;
      case Experiment::Rates: detail::run_rates(cfg, out, man); break;
      case Experiment::Entropy: detail::run_entropy(cfg, out, man); break;
      case Experiment::Inequalities: detail::run_inequalities(cfg, out, man); break;
      case Experiment::InterpNorm: detail::run_interp_norm(cfg, out, man); break;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(to_string(cfg.experiment)) + ": " + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(std::string(to_string(cfg.experiment)) + ": " + e.what());
  }
  man.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  out.write_text("manifest.json", man.to_json().dump(2) + "\n");
  out.finalize();
  return man;
}

}  // namespace fpme
