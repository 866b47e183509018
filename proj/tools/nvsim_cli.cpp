/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
// Command-line front end. Uses only the C interface of libnvsim.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nvsim/nvsim.h"

namespace {

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned threads = 1;
  std::optional<int> trajectories;
};

void add_run_flags(CLI::App *cmd, RunOptions &o) {
  cmd->add_option("--config", o.config,
                  "Configuration file (default: bundled defaults.json)");
  cmd->add_option("--seed", o.seed, "Base seed of the trajectory streams");
  cmd->add_option("--out", o.out, "Output directory (created if missing)")
      ->capture_default_str();
  cmd->add_option("--threads", o.threads,
                  "Worker threads; results do not depend on this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--trajectories", o.trajectories,
                  "Monte Carlo trajectories per checkpoint")
      ->check(CLI::PositiveNumber);
}

int run(const std::string &name, const RunOptions &o) {
  nvsim_experiment *exp = nullptr;
  if (nvsim_experiment_create(name.c_str(), &exp) != NVSIM_OK) {
    std::cerr << "nvsim: " << nvsim_last_error() << "\n";
    return 1;
  }
  if (!o.config.empty())
    nvsim_experiment_set_config(exp, o.config.c_str());
  nvsim_experiment_set_output_dir(exp, o.out.c_str());
  nvsim_experiment_set_threads(exp, o.threads);
  if (o.seed)
    nvsim_experiment_set_seed(exp, *o.seed);
  if (o.trajectories)
    nvsim_experiment_set_trajectories(exp, *o.trajectories);

  int code = 2;
  if (nvsim_experiment_run(exp, &code) != NVSIM_OK) {
    std::cerr << "nvsim " << name << ": " << nvsim_experiment_message(exp)
              << "\n";
  } else {
    for (std::size_t i = 0; i < nvsim_experiment_output_count(exp); ++i)
      std::cout << nvsim_experiment_output_path(exp, i) << "\n";
  }
  nvsim_experiment_destroy(exp);
  return code;
}

std::string catalog_text() {
  std::string s = "Experiments:\n";
  for (std::size_t i = 0; i < nvsim_catalog_size(); ++i) {
    s += "  ";
    s += nvsim_catalog_name(i);
    s += "\n      ";
    s += nvsim_catalog_summary(i);
    s += "\n";
  }
  s += "\nDefaults are read from ";
  s += nvsim_default_config_path();
  s += " (set NVSIM_DATA to use another data directory).\n";
  return s;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"nvsim: Monte Carlo simulator of a nuclear-spin quantum memory "
               "next to an NV centre during repeated remote-entanglement "
               "attempts."};
  app.set_version_flag("--version", std::string(nvsim_version()));
  app.require_subcommand(1);
  app.footer(catalog_text());

  RunOptions run_opts;
  std::string chosen;
  for (std::size_t i = 0; i < nvsim_catalog_size(); ++i) {
    const std::string name = nvsim_catalog_name(i);
    CLI::App *cmd = app.add_subcommand(name, nvsim_catalog_summary(i));
    if (name == "pump-curve")
      cmd->alias("pump");
    add_run_flags(cmd, run_opts);
    cmd->callback([&chosen, name] { chosen = name; });
  }

  std::string fit_csv, fit_model = "auto", fit_out;
  CLI::App *fit = app.add_subcommand(
      "fit", "Fit the natural model of an emitted CSV (or --model) and print "
             "JSON with model, params, errs, residual_norm and flags.");
  fit->add_option("csv", fit_csv, "CSV written by an experiment")->required();
  fit->add_option("--model", fit_model,
                  "auto, exponential, gaussian, double-exp or scaling")
      ->capture_default_str();
  fit->add_option("--out", fit_out, "Write the JSON here instead of stdout");

  std::string plot_csv, plot_kind = "line", plot_out;
  CLI::App *plot = app.add_subcommand(
      "plotdata", "Convert an emitted CSV into whitespace-separated columns "
                  "with an axis/units header for gnuplot or similar tools.");
  plot->add_option("csv", plot_csv, "CSV written by an experiment")->required();
  plot->add_option("--kind", plot_kind, "line or scatter-logy")
      ->check(CLI::IsMember({"line", "scatter-logy"}))
      ->capture_default_str();
  plot->add_option("--out", plot_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    // Usage errors are configuration errors.
    return code == 0 ? 0 : 1;
  }

  if (fit->parsed()) {
    char *json = nullptr;
    const nvsim_status st =
        nvsim_fit_csv(fit_csv.c_str(), fit_model.c_str(), &json);
    if (st != NVSIM_OK) {
      std::cerr << "nvsim fit: " << nvsim_last_error() << "\n";
      return st == NVSIM_ERR_IO || st == NVSIM_ERR_INVALID_ARGUMENT ? 1 : 2;
    }
    int code = 0;
    if (fit_out.empty()) {
      std::cout << json;
    } else {
      std::ofstream out(fit_out, std::ios::binary);
      out << json;
      if (!out) {
        std::cerr << "nvsim fit: cannot write " << fit_out << "\n";
        code = 2;
      }
    }
    nvsim_string_free(json);
    return code;
  }

  if (plot->parsed()) {
    const nvsim_status st = nvsim_emit_plotdata(
        plot_csv.c_str(), plot_kind.c_str(), plot_out.c_str());
    if (st != NVSIM_OK) {
      std::cerr << "nvsim plotdata: " << nvsim_last_error() << "\n";
      return st == NVSIM_ERR_IO ? 2 : 1;
    }
    std::cout << plot_out << "\n";
    return 0;
  }

  return run(chosen, run_opts);
}
