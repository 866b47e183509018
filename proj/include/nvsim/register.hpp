/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <map>
#include <string>
#include <vector>

#include "nvsim/node_model.hpp"
#include "nvsim/qcore.hpp"

// Measurement-based control of the nuclear register with the electron as
// ancilla. States are density matrices over [electron, nucleus...] while a
// sequence runs; public results are nuclear-only states.
namespace nvsim::reg {

struct ReadoutModel {
  double p_detect_given_bright = 0.94;
  double p_false_bright = 0.01;
  double p_state_given_click = 0.99;
  double init_fidelity = 0.99;

  static ReadoutModel ideal() { return {1.0, 0.0, 1.0, 1.0}; }
  void validate() const;
};

/// Depolarizing probability applied to the target nucleus after every
/// conditional gate, per spin id.
struct GateErrorModel {
  std::map<int, double> per_spin;
  double for_spin(int id) const;
  static GateErrorModel none() { return {}; }
};

enum class Axis { x, y };

enum class StepKind {
  electron_half_pi, // R_axis(sign * pi/2) on the electron
  electron_pi,      // R_axis(pi) on the electron
  conditional,      // R_axis(+pi/2) on nucleus `slot` if electron |0>,
                    // R_axis(-pi/2) if electron |-1>
  readout,          // electron readout followed by `branch`
  reset,            // electron re-prepared in |0> (with init error)
};

enum class Branch {
  none,
  repeat_until_click, // start over until the readout clicks; keep the
                      // heralded state
  continue_,          // non-selective: the outcome is discarded
};

struct GateStep {
  StepKind kind = StepKind::electron_half_pi;
  Axis axis = Axis::x;
  int sign = +1;
  std::size_t slot = 0; // nucleus index (0-based) for conditional steps
  Branch branch = Branch::none;
};

struct GateSequence {
  std::vector<GateStep> steps;

  GateSequence &half_pi(Axis a, int sign = +1);
  GateSequence &pi(Axis a = Axis::x);
  GateSequence &conditional(std::size_t slot, Axis a);
  GateSequence &readout(Branch b);
  GateSequence &reset();

  /// Throws std::invalid_argument (for example a readout without branch).
  void validate(std::size_t n_nuclei) const;
};

/// Initialization of one spin in |X> = (|down> + |up>)/sqrt2 by measurement.
GateSequence superposition_sequence();
/// Measurement-free transfer of the electron |0> into nuclear |down>.
GateSequence reduced_swap_sequence();
/// Parity projection of two nuclei prepared in |down down>.
GateSequence dps_sequence(node::Parity parity);

/// Tomography circuit whose bright-state probability is (1 + <P>)/2 for the
/// requested logical Pauli of the subspace (nuclei ordered as in the ids).
GateSequence tomography_sequence(const node::SubspaceSpec &sub, char axis);

struct HeraldedState {
  qcore::DensityMatrix joint; // electron + nuclei after the sequence
  int attempts = 0;
};

class RegisterSimulator {
public:
  RegisterSimulator(node::Register reg, ReadoutModel readout,
                    GateErrorModel gates = GateErrorModel::none());

  const ReadoutModel &readout() const { return readout_; }
  const GateErrorModel &gate_errors() const { return gates_; }
  const node::Register &spins() const { return reg_; }

  /// Runs a sequence on electron (with its init error) tensor `nuclei`.
  /// `ids` names the spin of each nuclear slot (for gate errors).
  HeraldedState execute(const GateSequence &seq,
                        const qcore::DensityMatrix &nuclei,
                        const std::vector<int> &ids, Rng &rng,
                        int max_attempts = 10000) const;

  /// Nuclear state after heralded initialization in |X>.
  qcore::DensityMatrix init_superposition(int spin_id, Rng &rng) const;
  /// Nuclear |down> by the reduced swap, starting from a mixed nucleus.
  qcore::DensityMatrix init_down(int spin_id) const;
  qcore::DensityMatrix init_down(int spin_id, Rng &rng) const {
    (void)rng;
    return init_down(spin_id);
  }
  /// Two-spin parity state from |down down>.
  qcore::DensityMatrix encode_dps(const node::SubspaceSpec &pair,
                                  Rng &rng) const;

  struct Estimate {
    double value = 0.0;
    double err = 0.0;
  };

  /// Exact click probability of the tomography circuit.
  double tomography_click_probability(const qcore::DensityMatrix &nuclei,
                                      const node::SubspaceSpec &sub,
                                      char axis) const;
  /// Sampled estimate of <P> with readout correction.
  Estimate tomography(const qcore::DensityMatrix &nuclei,
                      const node::SubspaceSpec &sub, char axis, long shots,
                      Rng &rng) const;
  /// Readout-corrected expectation without shot noise.
  double tomography_exact(const qcore::DensityMatrix &nuclei,
                          const node::SubspaceSpec &sub, char axis) const;

  /// Combined initialization and readout fidelity of one spin: prepare |X>
  /// and measure X through the ancilla.
  Estimate estimate_f_ir(int spin_id, long shots, Rng &rng) const;
  double expected_f_ir(int spin_id) const;

private:
  qcore::DensityMatrix electron_initial() const;
  void apply_step(qcore::DensityMatrix &rho, const GateStep &step,
                  const std::vector<int> &ids) const;
  /// Heralded post-click mixture of the two electron branches.
  qcore::DensityMatrix herald(const qcore::DensityMatrix &rho) const;

  node::Register reg_;
  ReadoutModel readout_;
  GateErrorModel gates_;
};

/// Per-spin depolarizing probability p such that the ideal-readout F_i,r
/// pipeline reproduces each spin's tabulated f_ir.
GateErrorModel calibrate_gate_errors(const node::Register &reg);

} // namespace nvsim::reg
