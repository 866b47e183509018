/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvsim/node_model.hpp"
#include "nvsim/protocol.hpp"
#include "nvsim/pump.hpp"
#include "nvsim/register.hpp"

// Batch experiment runner: configuration, CSV emission, plot data, fits of
// emitted CSVs and run manifests.
namespace nvsim::app {

/// Invalid or incomplete configuration. `field()` is the dotted path of the
/// offending entry, e.g. "protocol.reset.t_slow_ns".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string &what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Configuration

struct PumpSettings {
  std::string scheme_file;
  pump::LevelScheme scheme;
  std::string initial_state = "m1";
  double duration_ns = 3000.0;
  double dt_ns = 0.1;
  double output_step_ns = 1.0;
};

struct GateErrorSettings {
  enum class Mode { none, calibrated, explicit_ } mode = Mode::calibrated;
  std::map<int, double> per_spin;
};

struct DephaseSettings {
  node::SubspaceSpec subspace = node::SubspaceSpec::single(5);
  int n_reps = 400;
  int n_checkpoints = 21;
};

struct SweepTauSettings {
  std::vector<int> spins;
  int n_reps = 200;
  std::vector<double> tau_grid_us;
};

struct SweepTSettings {
  std::vector<int> spins;
  int n_reps = 450;
  double tau_us = 0.0;
  protocol::HyperfineModel model = protocol::HyperfineModel::hyperfine;
  double coupling_offset_khz = 0.0;
  std::vector<double> t_grid_us;
};

/// Repetition range per subspace is chosen from the predicted N_1/e.
struct ScanSettings {
  int n_checkpoints = 16;
  double span_factor = 2.5;
  int min_reps = 50;
  int max_reps = 20000;
};

struct DpsScanSettings {
  int pair_i = 2;
  int pair_j = 3;
  ScanSettings scan;
};

struct IonizationSettings {
  int spin = 5;
  int n_reps = 5000;
  int n_checkpoints = 21;
  double p_reset_needed = 1.0;
  double ionization_n_d = 2820.0;
};

struct InitFidelitySettings {
  long shots = 100000;
};

struct ExperimentsConfig {
  DephaseSettings dephase;
  SweepTauSettings sweep_tau;
  SweepTSettings sweep_t;
  DpsScanSettings dps_scan;
  ScanSettings scaling;
  IonizationSettings ionization;
  InitFidelitySettings init_fidelity;
};

struct AppConfig {
  node::FieldConfig field;
  std::string register_file;
  node::Register reg;
  protocol::ProtocolConfig protocol;
  reg::ReadoutModel readout;
  GateErrorSettings gate_errors;
  PumpSettings pump;
  ExperimentsConfig experiments;
};

/// Parses a complete configuration. Every field is required and unknown
/// fields are rejected. Relative file names resolve against `base_dir`.
AppConfig parse_config(const std::string &json_text,
                       const std::string &base_dir);
AppConfig load_config(const std::string &path);

/// $NVSIM_DATA when set, else the directory the library was built with.
std::string data_dir();
std::string default_config_path();

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentInfo {
  std::string name;
  std::string summary;
};

/// Known experiment names with a one-line physical description each.
const std::vector<ExperimentInfo> &experiment_catalog();
/// Canonical name ("pump" maps to "pump-curve"); empty if unknown.
std::string canonical_experiment(const std::string &name);

struct ExperimentSpec {
  std::string name;
  std::string config_path; // empty: bundled defaults
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trajectories;
  unsigned threads = 1;
};

struct OutputFile {
  std::string name; // relative to the output directory
  std::string content;
};

struct RunResult {
  int exit_code = 0; // 0 ok, 1 configuration error, 2 runtime error
  std::string message;
  std::vector<std::string> files; // written paths, manifest last
};

/// In-memory part of a run: the files an experiment produces, without the
/// manifest. Throws ConfigError or std::exception.
std::vector<OutputFile> compute_experiment(const std::string &name,
                                           const AppConfig &cfg,
                                           unsigned threads);

/// Loads the configuration, runs, then writes every file at once followed by
/// manifest.json. Nothing is written unless the run succeeds.
RunResult run_experiment(const ExperimentSpec &spec);

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip representation with '.' as decimal separator.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string &name) const; // throws if absent
  double number(std::size_t row, std::size_t col) const;
};

std::string to_csv(const CsvTable &table);
CsvTable parse_csv(const std::string &text);
CsvTable read_csv(const std::string &path);

// ---------------------------------------------------------------------------
// Post-processing of emitted CSVs

enum class PlotKind { line, scatter_logy };
PlotKind plot_kind_from_string(const std::string &s);

/// Whitespace-separated columns with a '#' header naming axes and units.
/// Grouped CSVs (sweeps, scans) become blank-line separated blocks.
/// Throws std::invalid_argument on an unknown schema.
std::string plotdata_text(const CsvTable &table, PlotKind kind);
void emit_plotdata(const std::string &csv_path, PlotKind kind,
                   const std::string &out_path);

/// Fits the natural model of a CSV schema ("auto") or the named one:
/// exponential, gaussian, double-exp, scaling. Returns JSON text with
/// fields model, params, errs, residual_norm, flags (per group when the
/// CSV holds several series).
std::string fit_csv_text(const CsvTable &table, const std::string &model);

// ---------------------------------------------------------------------------
// Manifest

std::string sha256_hex(const std::string &bytes);

struct ManifestInput {
  ExperimentSpec spec;
  std::uint64_t seed = 0;
  int trajectories = 0;
  double wall_clock_s = 0.0;
  std::string started_utc;
  std::vector<OutputFile> outputs;
};

std::string manifest_json(const ManifestInput &in);

} // namespace nvsim::app
