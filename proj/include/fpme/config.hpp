// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpme/errors.hpp"
#include "fpme/evolution.hpp"
#include "fpme/grid.hpp"
#include "fpme/operator.hpp"

namespace fpme {

enum class Experiment { Basis, Evolve, Giant, Ghp, Rates, Entropy, Inequalities, InterpNorm };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Basis: return "basis";
    case Experiment::Evolve: return "evolve";
    case Experiment::Giant: return "giant";
    case Experiment::Ghp: return "ghp";
    case Experiment::Rates: return "rates";
    case Experiment::Entropy: return "entropy";
    case Experiment::Inequalities: return "inequalities";
    case Experiment::InterpNorm: return "interp_norm";
  }
  return "?";
}

enum class InitialKind { Sine, Constant, GiantFraction, GiantTilted };

/// Validated experiment description. Defaults are documented in the README;
/// a minimal config needs only the experiment name.
struct ExperimentConfig {
  Experiment experiment = Experiment::Basis;
  OperatorKind op_kind = OperatorKind::SFL;
  double s = 0.5;
  Geometry geometry = Geometry::Interval;
  int n = 100;
  double m = 2.0;
  EvolutionParams evolution;
  InitialKind initial = InitialKind::Sine;
  double amplitude = 1.0;
  int modes = 0;  // 0 = complete basis
  double q = 3.0;
  int trials = 200;
  double window_lo = 5.0;
  double window_hi = 10.0;
  std::vector<double> ghp_amplitudes = {1.0, 2.0, 4.0};
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  DomainSpec domain() const { return DomainSpec(geometry, n); }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(experiment);
    j["operator"] = {{"kind", op_kind == OperatorKind::SFL ? "sfl" : "rfl"}, {"s", s}};
    j["domain"] = {{"geometry", geometry == Geometry::Interval ? "interval" : "rectangle"},
                   {"n", n}};
    j["nonlinearity"] = {{"m", m}};
    j["evolution"] = {
        {"dt", evolution.dt},
        {"t_end", evolution.t_end},
        {"rescaled", evolution.rescaled},
        {"grid", evolution.grid == TimeGridKind::Uniform ? "uniform" : "geometric"},
        {"tau0", evolution.tau0},
        {"growth", evolution.growth}};
    const char* init = initial == InitialKind::Sine          ? "sine"
                       : initial == InitialKind::Constant    ? "constant"
                       : initial == InitialKind::GiantFraction ? "giant_fraction"
                                                               : "giant_tilted";
    j["initial"] = {{"kind", init}, {"amplitude", amplitude}};
    j["modes"] = modes;
    j["q"] = q;
    j["trials"] = trials;
    j["window"] = {window_lo, window_hi};
    j["ghp_amplitudes"] = ghp_amplitudes;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    return j;
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& j) : root_(j) {}

  void reject_unknown(const nlohmann::json& obj, const std::string& path,
                      const std::set<std::string>& known) {
    if (!obj.is_object()) {
      violations_.push_back(path + ": expected an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!known.count(it.key())) violations_.push_back(path + "." + it.key() + ": unknown key");
  }

  template <typename T>
  void read(const nlohmann::json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      violations_.push_back(path + "." + key + ": wrong type");
    }
  }

  void violation(const std::string& msg) { violations_.push_back(msg); }
  const std::vector<std::string>& violations() const { return violations_; }
  const nlohmann::json& root() const { return root_; }

 private:
  const nlohmann::json& root_;
  std::vector<std::string> violations_;
};

}  // namespace detail

/// Parse and validate a JSON experiment config. Reports every violation at
/// once (unknown keys, types, and semantic rules), not just the first.
inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  detail::ConfigReader r(j);
  ExperimentConfig cfg;

  r.reject_unknown(j, "config",
                   {"experiment", "operator", "domain", "nonlinearity", "evolution", "initial",
                    "modes", "q", "trials", "window", "ghp_amplitudes", "seed", "output_dir"});

  std::string experiment = "basis";
  r.read(j, "config", "experiment", experiment);
  if (experiment == "basis") cfg.experiment = Experiment::Basis;
  else if (experiment == "evolve") cfg.experiment = Experiment::Evolve;
  else if (experiment == "giant") cfg.experiment = Experiment::Giant;
  else if (experiment == "ghp") cfg.experiment = Experiment::Ghp;
  else if (experiment == "rates") cfg.experiment = Experiment::Rates;
  else if (experiment == "entropy") cfg.experiment = Experiment::Entropy;
  else if (experiment == "inequalities") cfg.experiment = Experiment::Inequalities;
  else if (experiment == "interp_norm") cfg.experiment = Experiment::InterpNorm;
  else r.violation("config.experiment: unknown experiment '" + experiment + "'");

  if (j.contains("operator")) {
    const auto& op = j.at("operator");
    r.reject_unknown(op, "config.operator", {"kind", "s"});
    std::string kind = "sfl";
    r.read(op, "config.operator", "kind", kind);
    if (kind == "sfl") cfg.op_kind = OperatorKind::SFL;
    else if (kind == "rfl") cfg.op_kind = OperatorKind::RFL;
    else r.violation("config.operator.kind: must be 'sfl' or 'rfl'");
    r.read(op, "config.operator", "s", cfg.s);
  }
  if (j.contains("domain")) {
    const auto& dom = j.at("domain");
    r.reject_unknown(dom, "config.domain", {"geometry", "n"});
    std::string geom = "interval";
    r.read(dom, "config.domain", "geometry", geom);
    if (geom == "interval") cfg.geometry = Geometry::Interval;
    else if (geom == "rectangle") cfg.geometry = Geometry::Rectangle;
    else r.violation("config.domain.geometry: must be 'interval' or 'rectangle'");
    r.read(dom, "config.domain", "n", cfg.n);
  }
  if (j.contains("nonlinearity")) {
    const auto& nl = j.at("nonlinearity");
    r.reject_unknown(nl, "config.nonlinearity", {"m"});
    r.read(nl, "config.nonlinearity", "m", cfg.m);
  }
  if (j.contains("evolution")) {
    const auto& ev = j.at("evolution");
    r.reject_unknown(ev, "config.evolution",
                     {"dt", "t_end", "rescaled", "grid", "tau0", "growth"});
    r.read(ev, "config.evolution", "dt", cfg.evolution.dt);
    r.read(ev, "config.evolution", "t_end", cfg.evolution.t_end);
    r.read(ev, "config.evolution", "rescaled", cfg.evolution.rescaled);
    std::string grid = "uniform";
    r.read(ev, "config.evolution", "grid", grid);
    if (grid == "uniform") cfg.evolution.grid = TimeGridKind::Uniform;
    else if (grid == "geometric") cfg.evolution.grid = TimeGridKind::Geometric;
    else r.violation("config.evolution.grid: must be 'uniform' or 'geometric'");
    r.read(ev, "config.evolution", "tau0", cfg.evolution.tau0);
    r.read(ev, "config.evolution", "growth", cfg.evolution.growth);
  }
  if (j.contains("initial")) {
    const auto& in = j.at("initial");
    r.reject_unknown(in, "config.initial", {"kind", "amplitude"});
    std::string kind = "sine";
    r.read(in, "config.initial", "kind", kind);
    if (kind == "sine") cfg.initial = InitialKind::Sine;
    else if (kind == "constant") cfg.initial = InitialKind::Constant;
    else if (kind == "giant_fraction") cfg.initial = InitialKind::GiantFraction;
    else if (kind == "giant_tilted") cfg.initial = InitialKind::GiantTilted;
    else r.violation("config.initial.kind: unknown initial data kind '" + kind + "'");
    r.read(in, "config.initial", "amplitude", cfg.amplitude);
  }
  r.read(j, "config", "modes", cfg.modes);
  r.read(j, "config", "q", cfg.q);
  r.read(j, "config", "trials", cfg.trials);
  if (j.contains("window")) {
    std::vector<double> w;
    r.read(j, "config", "window", w);
    if (w.size() == 2) {
      cfg.window_lo = w[0];
      cfg.window_hi = w[1];
    } else {
      r.violation("config.window: expected [t_lo, t_hi]");
    }
  }
  if (j.contains("ghp_amplitudes")) r.read(j, "config", "ghp_amplitudes", cfg.ghp_amplitudes);
  r.read(j, "config", "seed", cfg.seed);
  r.read(j, "config", "output_dir", cfg.output_dir);

  // semantic validation against module preconditions
  if (!(cfg.s > 0.0 && cfg.s < 1.0)) r.violation("config.operator.s: s must lie in (0,1)");
  if (cfg.n < 1) r.violation("config.domain.n: must be a positive integer");
  if (cfg.op_kind == OperatorKind::RFL && cfg.geometry != Geometry::Interval)
    r.violation("config.operator: RFL is only available on Interval geometry");
  if (!(cfg.m > 0.0)) r.violation("config.nonlinearity.m: must be positive");
  if (!(cfg.evolution.dt > 0.0)) r.violation("config.evolution.dt: must be positive");
  if (!(cfg.evolution.t_end > 0.0)) r.violation("config.evolution.t_end: must be positive");
  if (cfg.evolution.rescaled) {
    if (!(cfg.m > 1.0)) r.violation("config.evolution.rescaled: requires m > 1");
    else if (cfg.evolution.dt > 0.5 * (cfg.m - 1.0) + 1e-15)
      r.violation("config.evolution.dt: rescaled flow requires dt <= (m-1)/2");
  }
  if (cfg.evolution.grid == TimeGridKind::Geometric &&
      !(cfg.evolution.tau0 > 0.0 && cfg.evolution.growth > 0.0))
    r.violation("config.evolution: geometric grid requires tau0 > 0 and growth > 0");
  if (cfg.modes < 0) r.violation("config.modes: must be nonnegative (0 = complete)");
  if (cfg.modes > 0 && cfg.n >= 1) {
    const std::size_t cap = DomainSpec(cfg.geometry, cfg.n).node_count();
    if (static_cast<std::size_t>(cfg.modes) > cap)
      r.violation("config.modes: exceeds interior node capacity (" + std::to_string(cap) + ")");
  }
  if (cfg.experiment == Experiment::Inequalities) {
    const int d = cfg.geometry == Geometry::Interval ? 1 : 2;
    if (!(cfg.q >= 1.0)) r.violation("config.q: must be >= 1");
    else if (d > 2.0 * cfg.s && cfg.q > 2.0 * d / (d - 2.0 * cfg.s) + 1e-12)
      r.violation("config.q: exceeds 2d/(d-2s) (admissible only when d <= 2s)");
    if (cfg.trials < 1) r.violation("config.trials: must be >= 1");
  }
  if (!(cfg.window_lo < cfg.window_hi)) r.violation("config.window: requires t_lo < t_hi");
  for (double a : cfg.ghp_amplitudes)
    if (!(a > 0.0)) r.violation("config.ghp_amplitudes: amplitudes must be positive");
  if (cfg.output_dir.empty()) r.violation("config.output_dir: must not be empty");

  if (!r.violations().empty()) {
    std::string msg = "invalid config (" + std::to_string(r.violations().size()) + " violations):";
    for (const auto& viol : r.violations()) msg += "\n  - " + viol;
    throw ConfigError(msg);
  }
  return cfg;
}

}  // namespace fpme
