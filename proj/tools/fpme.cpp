// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0
//
// fpme <experiment> --config <path> [--seed N] [--out DIR]
//
// Exit codes: 0 all verdicts pass, 1 verdict failure, 2 configuration
// error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fpme/config.hpp"
#include "fpme/errors.hpp"
#include "fpme/runner.hpp"
#include "fpme/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fpme: fractional porous-medium dynamics on bounded domains"};
  app.set_version_flag("--version", fpme::kVersion);

  std::string experiment;
  std::string config_path;
  long long seed = -1;
  std::string out_dir;
  app.add_option("experiment", experiment,
                 "basis | evolve | giant | ghp | rates | entropy | inequalities | interp_norm")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the config output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "fpme: cannot read config file " << config_path << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json raw;
    try {
      raw = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "fpme: config syntax error: " << e.what() << "\n";
      return 2;
    }
    raw["experiment"] = experiment;  // the subcommand names the experiment
    if (seed >= 0) raw["seed"] = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) raw["output_dir"] = out_dir;
    const fpme::ExperimentConfig cfg = fpme::parse_config(raw.dump());

    const fpme::RunManifest man = fpme::run(cfg);
    for (const auto& v : man.verdicts)
      std::printf("[%s] %s: measured=%.6g expected=%.6g tol=%.6g\n",
                  v.pass ? "PASS" : "FAIL", v.name.c_str(), v.measured, v.expected,
                  v.tolerance);
    for (const auto& w : man.warnings) std::printf("[warn] %s\n", w.c_str());
    std::printf("wall time: %.1f ms, outputs in %s\n", man.wall_time_ms,
                cfg.output_dir.c_str());
    return man.all_pass() ? 0 : 1;
  } catch (const fpme::ConfigError& e) {
    std::cerr << "fpme: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fpme: " << e.what() << "\n";
    return 3;
  }
}
