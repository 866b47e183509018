/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "nvsim/node_model.hpp"
#include "nvsim/pump.hpp"
#include "nvsim/qcore.hpp"

namespace nvsim::protocol {

/// How the conditional nuclear precession is built.
///  measured:  z rotations at w0 and w0 - dw, with dw the measured register
///             value. A_perp is ignored.
///  hyperfine: full tilted-axis rotation from (A_par, A_perp).
enum class HyperfineModel { measured, hyperfine };

std::string to_string(HyperfineModel m);
HyperfineModel hyperfine_model_from_string(const std::string &s);

struct ErrorChannels {
  /// Probability per attempt and per spin of a nuclear bit flip.
  double t1_flip_per_rep = 0.0;
  /// Ionization decay constant in resets; infinity disables ionization.
  double ionization_n_d = std::numeric_limits<double>::infinity();
  /// Probability that an electron pulse is followed by a spurious flip.
  double mw_error_per_pulse = 0.0;
  /// Static Gaussian detuning per trajectory reproducing each spin's T2*.
  bool natural_dephasing = false;
};

struct ProtocolConfig {
  double t_us = 2.2727;
  double tau_us = 0.44;
  int n_reps = 1000;
  pump::ResetModel reset = pump::ResetModel::singlet_only(440.0);
  double p_reset_needed = 0.5;
  std::vector<int> checkpoints; // empty: only the final repetition
  std::uint64_t seed = 1;
  ErrorChannels channels;

  /// Extra logical coupling while the electron sits in |-1>, in kHz.
  /// Added so that |dw_eff| grows by this amount (see make_plan).
  double coupling_offset_khz = 0.0;
  HyperfineModel model = HyperfineModel::measured;
  /// When false, the slow (singlet) branch of a reset evolves with the
  /// electron-|0> precession, i.e. without hyperfine dephasing.
  bool dephasing_during_singlet = true;
  /// Wall-clock time of one repetition, used for natural dephasing.
  double rep_period_us = 5.5;
  int trajectories = 2000;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Checkpoints if given, else {n_reps}.
  std::vector<int> effective_checkpoints() const;
};

enum class Outcome { zero, minus_one };

struct AttemptRecord {
  Outcome projection = Outcome::zero;
  double reset_time_ns = 0.0;
  bool via_singlet = false;
  bool ionized = false;
};

/// Everything an attempt needs, precomputed from the configuration.
struct SpinDynamics {
  int id = 0;
  double f0_khz = 0.0;   // precession with the electron in |0>
  double f1_khz = 0.0;   // precession with the electron in |-1>
  double tilt_rad = 0.0; // axis tilt in the |-1> manifold
  double t2_star_ms = 1.0;
};

struct AttemptPlan {
  ProtocolConfig cfg;
  node::SubspaceSpec subspace;
  std::vector<SpinDynamics> spins;
  qcore::Dims dims; // [2, 2, ...]: electron then nuclei
  // Conditional rotations for the two echo intervals: [spin][electron state].
  std::vector<std::array<qcore::ComplexOperator, 2>> first_interval;
  std::vector<std::array<qcore::ComplexOperator, 2>> second_interval;
  double first_interval_us = 0.0;
  double second_interval_us = 0.0;
  double p_ionize = 0.0;
};

AttemptPlan make_plan(const ProtocolConfig &cfg, const node::FieldConfig &field,
                      const node::Register &reg,
                      const node::SubspaceSpec &subspace);

/// Per-spin static detunings (rad/us) for natural dephasing; empty when the
/// channel is off. Drawn first from a trajectory's stream.
std::vector<double> draw_detunings(const AttemptPlan &plan, Rng &rng);

/// One entanglement attempt on the joint electron-nuclear state.
std::pair<qcore::DensityMatrix, AttemptRecord>
run_attempt(const qcore::DensityMatrix &state, const AttemptPlan &plan,
            Rng &rng, std::span<const double> detunings = {});

/// In-place variant on a pure trajectory state.
AttemptRecord run_attempt(qcore::StateVector &state, const AttemptPlan &plan,
                          Rng &rng, std::span<const double> detunings = {});

enum class InitialState { superposition, logical_zero };

qcore::StateVector initial_joint_state(const node::SubspaceSpec &sub,
                                       InitialState initial);

/// Logical Bloch vector of a joint state (pairs decoded to a qubit).
qcore::BlochVector logical_bloch(const qcore::StateVector &state,
                                 const node::SubspaceSpec &sub);
qcore::BlochVector logical_bloch(const qcore::DensityMatrix &state,
                                 const node::SubspaceSpec &sub);

enum TraceFlag : unsigned {
  trace_ok = 0,
  trace_empty = 1u << 0,       // no surviving trajectory
  trace_capped = 1u << 1,      // corrected value capped at 1.05
  trace_unreliable = 1u << 2,  // correction factor below 0.05
};

struct MemoryTrace {
  std::vector<int> checkpoints;
  std::vector<double> xy_length;
  std::vector<double> xy_err;
  std::vector<double> z_value;
  std::vector<double> z_err;
  std::vector<double> survival;
  std::vector<std::size_t> counts; // surviving trajectories
  std::vector<unsigned> flags;
  std::vector<double> correction; // factor divided out (1 if none)

  std::size_t size() const { return checkpoints.size(); }
};

struct ExecOptions {
  unsigned threads = 1;
};

/// Monte Carlo over independent trajectories. Output is bit-identical for
/// any thread count.
MemoryTrace run_sequence(const ProtocolConfig &cfg,
                         const node::FieldConfig &field,
                         const node::Register &reg,
                         const node::SubspaceSpec &subspace,
                         InitialState initial = InitialState::superposition,
                         const ExecOptions &exec = {});

enum class SweepParam { tau, t, n_reps };

struct SweepRow {
  double value = 0.0;
  double xy_length = 0.0;
  double xy_err = 0.0;
  double z_value = 0.0;
  double z_err = 0.0;
  double survival = 0.0;
  unsigned flags = 0;
};

/// One run_sequence per grid value, each with the base seed, recording the
/// final repetition.
std::vector<SweepRow> sweep(SweepParam param, const std::vector<double> &grid,
                            const ProtocolConfig &base,
                            const node::FieldConfig &field,
                            const node::Register &reg,
                            const node::SubspaceSpec &subspace,
                            InitialState initial = InitialState::superposition,
                            const ExecOptions &exec = {});

// ---------------------------------------------------------------------------
// Analytic dephasing models

/// F = 1/2 + 2^-(n+1) (1 + exp(-(2 pi dw)^2 tau^2 / 2))^n.
double analytic_fidelity(double delta_omega_khz, double tau_us, long long n);

/// N_1/e from the per-repetition factor with dw -> |dw| + C.
/// Returns +infinity when the factor is exactly one.
double extended_n1e(double delta_omega_khz, double tau_us, double c_khz);

/// (1/2) |e^{i w tau} + (1 + i w tau_m) / (1 + w^2 tau_m^2)|.
double per_rep_coherence_exact(double delta_omega_khz, double tau_us,
                               double tau_mean_us);

} // namespace nvsim::protocol
