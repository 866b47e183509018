/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/qcore.hpp"

namespace nvsim::pump {

// ---------------------------------------------------------------------------
// Level scheme

enum class StateKind { ground_0, ground_m1, ground_p1, excited, singlet };

std::string to_string(StateKind kind);
StateKind state_kind_from_string(const std::string &s);

struct LevelState {
  std::string label;
  StateKind kind = StateKind::excited;
};

/// Directed first-order transition, rate in 1/ns.
struct RateEntry {
  std::string from;
  std::string to;
  double rate_per_ns = 0.0;
};

/// Electronic levels with spontaneous rates plus laser-driven rates.
/// Duplicate (from, to) entries add up.
class LevelScheme {
public:
  LevelScheme() = default;
  LevelScheme(std::vector<LevelState> states, std::vector<RateEntry> rates,
              std::vector<RateEntry> pump_rates);

  const std::vector<LevelState> &states() const { return states_; }
  const std::vector<RateEntry> &rates() const { return rates_; }
  const std::vector<RateEntry> &pump_rates() const { return pump_rates_; }
  std::size_t size() const { return states_.size(); }

  std::size_t index_of(const std::string &label) const;
  /// Generator R with dp/dt = R p (columns sum to zero).
  const Eigen::MatrixXd &generator() const { return generator_; }
  /// Total first-order rate between two labelled states (both lists).
  double rate(const std::string &from, const std::string &to) const;

private:
  std::vector<LevelState> states_;
  std::vector<RateEntry> rates_;
  std::vector<RateEntry> pump_rates_;
  Eigen::MatrixXd generator_;
};

enum class RepumpConfig { a_config, e_config };

/// Parameters of the effective six-level repump model: ground |0>, |-1>,
/// |+1>, two excited states reached from |-1> and |+1>, and the singlet.
struct RepumpParams {
  RepumpConfig config = RepumpConfig::a_config;
  double pump_rate_per_ns = 0.5;     // excitation and stimulated emission
  double excited_lifetime_ns = 10.0; // total spontaneous decay
  double direct_to_zero_per_ns = 0.07;
  double isc_per_ns = 0.006;         // excited -> singlet
  double singlet_lifetime_ns = 440.0;
  double singlet_to_zero = 2.0;      // branching weights
  double singlet_to_p1 = 1.0;
  double singlet_to_m1 = 1.0;

  static RepumpParams defaults(RepumpConfig config);
  void validate() const;
};

LevelScheme build_repump_scheme(const RepumpParams &params);

LevelScheme parse_level_scheme_json(const std::string &text);
LevelScheme load_level_scheme(const std::string &path);
std::string level_scheme_to_json(const LevelScheme &scheme);

// ---------------------------------------------------------------------------
// Rate-equation integration

struct PopulationTrajectory {
  std::vector<LevelState> states;
  std::vector<double> times_ns;
  std::vector<std::vector<double>> populations; // [time][state]

  /// Summed population of all states of one kind at time index i.
  double kind_population(std::size_t i, StateKind kind) const;
};

std::vector<double> initial_populations(const LevelScheme &scheme,
                                        const std::string &label);

/// Fixed-step RK4 for dp/dt = R p. Records every `record_every` steps plus
/// the final point. Throws NumericalError when a population leaves
/// [-1e-6, 1 + 1e-6].
PopulationTrajectory integrate_rates(const LevelScheme &scheme,
                                     const std::vector<double> &p0,
                                     double duration_ns, double dt_ns,
                                     std::size_t record_every = 1);

// ---------------------------------------------------------------------------
// Reset durations and ionization

enum class ResetMode { mixture, singlet_only, fixed, gaussian };

std::string to_string(ResetMode mode);
ResetMode reset_mode_from_string(const std::string &s);

/// Distribution of the optical reset duration. The gaussian mode draws
/// N(t_slow, t_slow): the same mean and spread as singlet_only, used to
/// reproduce a Gaussian phase-kick model. It can return negative values.
struct ResetModel {
  ResetMode mode = ResetMode::singlet_only;
  double t_fast_ns = 29.0;
  double t_slow_ns = 440.0;
  double weight_fast = 0.75;

  static ResetModel a_config();
  static ResetModel e_config();
  static ResetModel singlet_only(double t_slow_ns = 440.0);
  void validate() const;
  double mean_ns() const;
};

struct ResetSample {
  double duration_ns = 0.0;
  bool via_singlet = false; // slow branch taken
};

ResetSample sample_reset(const ResetModel &model, Rng &rng);
double sample_reset_time(const ResetModel &model, Rng &rng);

double ionization_survival(double n_resets, double n_d);
/// Per-reset ionization probability consistent with ionization_survival.
double ionization_probability_per_reset(double n_d);

// ---------------------------------------------------------------------------
// Fit of the ground-state recovery curve

struct ResetCurveFit {
  double w = 0.0, w_err = 0.0;
  double t_fast_ns = 0.0, t_fast_err = 0.0;
  double t_slow_ns = 0.0, t_slow_err = 0.0;
  double residual_norm = 0.0;
  bool degenerate = false; // one component carries (almost) no weight
  bool converged = false;
  int iterations = 0;
};

/// Fits 1 - p_0(t) = w e^{-t/t_fast} + (1 - w) e^{-t/t_slow}.
ResetCurveFit fit_reset_curve(const PopulationTrajectory &traj);
ResetCurveFit fit_reset_curve(const std::vector<double> &t_ns,
                              const std::vector<double> &one_minus_p0);

} // namespace nvsim::pump
