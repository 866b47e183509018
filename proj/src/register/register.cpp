/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/register.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvsim::reg {

using qcore::ComplexOperator;
using qcore::DensityMatrix;
namespace gates = qcore::gates;

void ReadoutModel::validate() const {
  auto prob = [](double p, const char *name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string("readout.") + name +
                                  " must lie in [0, 1]");
  };
  prob(p_detect_given_bright, "p_detect_given_bright");
  prob(p_false_bright, "p_false_bright");
  prob(p_state_given_click, "p_state_given_click");
  prob(init_fidelity, "init_fidelity");
}

double GateErrorModel::for_spin(int id) const {
  const auto it = per_spin.find(id);
  return it == per_spin.end() ? 0.0 : it->second;
}

GateSequence &GateSequence::half_pi(Axis a, int sign) {
  steps.push_back({StepKind::electron_half_pi, a, sign, 0, Branch::none});
  return *this;
}
GateSequence &GateSequence::pi(Axis a) {
  steps.push_back({StepKind::electron_pi, a, +1, 0, Branch::none});
  return *this;
}
GateSequence &GateSequence::conditional(std::size_t slot, Axis a) {
  steps.push_back({StepKind::conditional, a, +1, slot, Branch::none});
  return *this;
}
GateSequence &GateSequence::readout(Branch b) {
  steps.push_back({StepKind::readout, Axis::x, +1, 0, b});
  return *this;
}
GateSequence &GateSequence::reset() {
  steps.push_back({StepKind::reset, Axis::x, +1, 0, Branch::none});
  return *this;
}

void GateSequence::validate(std::size_t n_nuclei) const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const GateStep &s = steps[i];
    if (s.kind == StepKind::readout && s.branch == Branch::none)
      throw std::invalid_argument("gate sequence step " + std::to_string(i) +
                                  ": readout needs a branch decision");
    if (s.kind == StepKind::conditional && s.slot >= n_nuclei)
      throw std::invalid_argument("gate sequence step " + std::to_string(i) +
                                  ": nuclear slot out of range");
    if (s.kind == StepKind::electron_half_pi && s.sign != 1 && s.sign != -1)
      throw std::invalid_argument("gate sequence step " + std::to_string(i) +
                                  ": sign must be +1 or -1");
  }
}

GateSequence superposition_sequence() {
  GateSequence s;
  s.half_pi(Axis::y).conditional(0, Axis::x).half_pi(Axis::x);
  s.readout(Branch::repeat_until_click);
  return s;
}

GateSequence reduced_swap_sequence() {
  GateSequence s;
  s.half_pi(Axis::x).conditional(0, Axis::x);
  s.half_pi(Axis::y).conditional(0, Axis::y);
  return s;
}

GateSequence dps_sequence(node::Parity parity) {
  GateSequence s;
  s.half_pi(Axis::x, -1).conditional(0, Axis::y).conditional(1, Axis::y);
  s.half_pi(Axis::x, +1);
  // The bright outcome heralds the parallel state; a pi pulse before the
  // readout makes the click herald the antiparallel one instead.
  if (parity == node::Parity::antiparallel)
    s.pi(Axis::x);
  s.readout(Branch::repeat_until_click);
  return s;
}

GateSequence tomography_sequence(const node::SubspaceSpec &sub, char axis) {
  sub.validate();
  GateSequence s;
  auto single_x = [&](std::size_t slot) {
    s.half_pi(Axis::y).conditional(slot, Axis::x).half_pi(Axis::x);
  };
  if (axis != 'X' && axis != 'Y' && axis != 'Z')
    throw std::invalid_argument("tomography axis must be X, Y or Z");
  if (sub.kind == node::SubspaceKind::single) {
    if (axis == 'X') {
      single_x(0);
    } else if (axis == 'Y') {
      s.half_pi(Axis::y).conditional(0, Axis::y).half_pi(Axis::x);
    } else {
      // With the electron in |0> the conditional gate is a plain R_y(pi/2),
      // which turns Z into X.
      s.conditional(0, Axis::y);
      single_x(0);
    }
    return s;
  }
  if (axis == 'Z') {
    const std::size_t slot = sub.parity == node::Parity::parallel ? 0 : 1;
    s.conditional(slot, Axis::y);
    single_x(slot);
    return s;
  }
  // Logical X = X_i X_j and logical Y = X_i Y_j for both parities.
  s.half_pi(Axis::x).conditional(0, Axis::x);
  s.conditional(1, axis == 'X' ? Axis::x : Axis::y).half_pi(Axis::x);
  return s;
}

// ---------------------------------------------------------------------------

RegisterSimulator::RegisterSimulator(node::Register reg, ReadoutModel readout,
                                     GateErrorModel gates)
    : reg_(std::move(reg)), readout_(readout), gates_(std::move(gates)) {
  readout_.validate();
  for (const auto &s : reg_)
    s.validate();
  for (const auto &[id, p] : gates_.per_spin) {
    (void)node::find_spin(reg_, id);
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("gate error for spin " + std::to_string(id) +
                                  " must lie in [0, 1]");
  }
}

DensityMatrix RegisterSimulator::electron_initial() const {
  qcore::Matrix m = qcore::Matrix::Zero(2, 2);
  m(0, 0) = readout_.init_fidelity;
  m(1, 1) = 1.0 - readout_.init_fidelity;
  return DensityMatrix::unchecked({2}, m);
}

namespace {

ComplexOperator axis_rotation(Axis a, double angle) {
  return a == Axis::x ? gates::rx(angle) : gates::ry(angle);
}

void depolarize(DensityMatrix &rho, std::size_t subsystem, double p) {
  if (p <= 0.0)
    return;
  const qcore::Matrix base = rho.matrix();
  qcore::Matrix acc = (1.0 - 0.75 * p) * base;
  for (const ComplexOperator &pauli :
       {gates::pauli_x(), gates::pauli_y(), gates::pauli_z()}) {
    DensityMatrix tmp = DensityMatrix::unchecked(rho.dims(), base);
    qcore::apply_local(tmp, subsystem, pauli);
    acc += 0.25 * p * tmp.matrix();
  }
  rho.mutable_matrix() = acc;
}

DensityMatrix branch(const DensityMatrix &rho, std::size_t value, double &p) {
  DensityMatrix out = rho;
  p = qcore::basis_probability(out, 0, value);
  if (p > 1e-15)
    qcore::project_basis(out, 0, value);
  return out;
}

} // namespace

void RegisterSimulator::apply_step(DensityMatrix &rho, const GateStep &step,
                                   const std::vector<int> &ids) const {
  switch (step.kind) {
  case StepKind::electron_half_pi:
    qcore::apply_local(rho, 0,
                       axis_rotation(step.axis, step.sign * std::numbers::pi / 2));
    break;
  case StepKind::electron_pi:
    qcore::apply_local(rho, 0, axis_rotation(step.axis, std::numbers::pi));
    break;
  case StepKind::conditional: {
    const std::array<ComplexOperator, 2> ops = {
        axis_rotation(step.axis, std::numbers::pi / 2),
        axis_rotation(step.axis, -std::numbers::pi / 2)};
    qcore::apply_controlled(rho, 0, step.slot + 1, ops);
    depolarize(rho, step.slot + 1, gates_.for_spin(ids.at(step.slot)));
    break;
  }
  case StepKind::reset: {
    std::vector<std::size_t> keep;
    for (std::size_t k = 1; k < rho.dims().size(); ++k)
      keep.push_back(k);
    rho = qcore::tensor(electron_initial(), qcore::partial_trace(rho, keep));
    break;
  }
  case StepKind::readout:
    break; // handled by execute()
  }
}

DensityMatrix RegisterSimulator::herald(const DensityMatrix &rho) const {
  double p0 = 0.0, p1 = 0.0;
  const DensityMatrix b0 = branch(rho, 0, p0);
  const DensityMatrix b1 = branch(rho, 1, p1);
  const double q = readout_.p_state_given_click;
  if (p1 <= 1e-15)
    return b0;
  if (p0 <= 1e-15)
    return b1;
  return DensityMatrix::unchecked(rho.dims(),
                                  q * b0.matrix() + (1.0 - q) * b1.matrix());
}

HeraldedState RegisterSimulator::execute(const GateSequence &seq,
                                         const DensityMatrix &nuclei,
                                         const std::vector<int> &ids, Rng &rng,
                                         int max_attempts) const {
  const std::size_t nn = nuclei.dims().size();
  if (ids.size() != nn)
    throw std::invalid_argument("execute: need one spin id per nucleus");
  seq.validate(nn);
  for (int id : ids)
    (void)node::find_spin(reg_, id);
  const double pd = readout_.p_detect_given_bright;
  const double pf = readout_.p_false_bright;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    DensityMatrix rho = qcore::tensor(electron_initial(), nuclei);
    bool restart = false;
    for (const GateStep &step : seq.steps) {
      if (step.kind != StepKind::readout) {
        apply_step(rho, step, ids);
        continue;
      }
      if (step.branch == Branch::continue_) {
        double p0 = 0.0, p1 = 0.0;
        const DensityMatrix b0 = branch(rho, 0, p0);
        const DensityMatrix b1 = branch(rho, 1, p1);
        rho = DensityMatrix::unchecked(rho.dims(),
                                       p0 * b0.matrix() + p1 * b1.matrix());
        continue;
      }
      const double p0 = qcore::basis_probability(rho, 0, 0);
      const double click = pd * p0 + pf * (1.0 - p0);
      if (uniform01(rng) < click) {
        rho = herald(rho);
      } else {
        restart = true;
        break;
      }
    }
    if (!restart)
      return {std::move(rho), attempt};
  }
  throw std::runtime_error("no readout click within " +
                           std::to_string(max_attempts) + " attempts");
}

DensityMatrix RegisterSimulator::init_superposition(int spin_id,
                                                    Rng &rng) const {
  // Each attempt starts from an unpolarised nucleus.
  const HeraldedState h = execute(superposition_sequence(),
                                  DensityMatrix::maximally_mixed({2}),
                                  {spin_id}, rng);
  return qcore::partial_trace(h.joint, {1});
}

DensityMatrix RegisterSimulator::init_down(int spin_id) const {
  Rng unused(0);
  const HeraldedState h = execute(reduced_swap_sequence(),
                                  DensityMatrix::maximally_mixed({2}),
                                  {spin_id}, unused);
  return qcore::partial_trace(h.joint, {1});
}

DensityMatrix RegisterSimulator::encode_dps(const node::SubspaceSpec &pair,
                                            Rng &rng) const {
  pair.validate();
  if (pair.kind != node::SubspaceKind::pair)
    throw std::invalid_argument("encode_dps needs a pair subspace");
  const DensityMatrix start =
      qcore::tensor(init_down(pair.ids[0]), init_down(pair.ids[1]));
  const HeraldedState h =
      execute(dps_sequence(pair.parity), start, pair.ids, rng);
  return qcore::partial_trace(h.joint, {1, 2});
}

double RegisterSimulator::tomography_click_probability(
    const DensityMatrix &nuclei, const node::SubspaceSpec &sub,
    char axis) const {
  if (nuclei.dims().size() != sub.n_spins())
    throw std::invalid_argument("tomography: state does not match subspace");
  const GateSequence seq = tomography_sequence(sub, axis);
  DensityMatrix rho = qcore::tensor(electron_initial(), nuclei);
  for (const GateStep &step : seq.steps)
    apply_step(rho, step, sub.ids);
  const double p0 = qcore::basis_probability(rho, 0, 0);
  return readout_.p_detect_given_bright * p0 +
         readout_.p_false_bright * (1.0 - p0);
}

double RegisterSimulator::tomography_exact(const DensityMatrix &nuclei,
                                           const node::SubspaceSpec &sub,
                                           char axis) const {
  const double f = tomography_click_probability(nuclei, sub, axis);
  const double contrast =
      readout_.p_detect_given_bright - readout_.p_false_bright;
  if (!(contrast > 0))
    throw std::invalid_argument("readout has no contrast (p_detect <= p_false)");
  return 2.0 * (f - readout_.p_false_bright) / contrast - 1.0;
}

RegisterSimulator::Estimate
RegisterSimulator::tomography(const DensityMatrix &nuclei,
                              const node::SubspaceSpec &sub, char axis,
                              long shots, Rng &rng) const {
  if (shots < 1)
    throw std::invalid_argument("tomography: shots must be >= 1");
  const double f = tomography_click_probability(nuclei, sub, axis);
  long clicks = 0;
  for (long i = 0; i < shots; ++i)
    if (uniform01(rng) < f)
      ++clicks;
  const double fhat = static_cast<double>(clicks) / static_cast<double>(shots);
  const double pf = readout_.p_false_bright;
  const double contrast = readout_.p_detect_given_bright - pf;
  if (!(contrast > 0))
    throw std::invalid_argument("readout has no contrast (p_detect <= p_false)");
  // Correct for the ancilla readout errors.
  const double p0 = (fhat - pf) / contrast;
  const double err =
      2.0 * std::sqrt(fhat * (1.0 - fhat) / static_cast<double>(shots)) /
      contrast;
  return {2.0 * p0 - 1.0, err};
}

RegisterSimulator::Estimate
RegisterSimulator::estimate_f_ir(int spin_id, long shots, Rng &rng) const {
  const DensityMatrix rho = init_superposition(spin_id, rng);
  const Estimate x =
      tomography(rho, node::SubspaceSpec::single(spin_id), 'X', shots, rng);
  return {(1.0 + x.value) / 2.0, x.err / 2.0};
}

double RegisterSimulator::expected_f_ir(int spin_id) const {
  // The heralded state does not depend on how many attempts were needed,
  // so any stream gives the same density matrix.
  Rng rng(0);
  const DensityMatrix rho = init_superposition(spin_id, rng);
  return (1.0 + tomography_exact(rho, node::SubspaceSpec::single(spin_id),
                                 'X')) /
         2.0;
}

GateErrorModel calibrate_gate_errors(const node::Register &reg) {
  GateErrorModel out;
  for (const auto &spin : reg) {
    auto f_of = [&](double p) {
      GateErrorModel g;
      g.per_spin[spin.id] = p;
      return RegisterSimulator(reg, ReadoutModel::ideal(), g)
          .expected_f_ir(spin.id);
    };
    // F decreases monotonically from 1 (p = 0) to 1/2 (p = 1).
    double lo = 0.0, hi = 1.0;
    if (spin.f_ir >= f_of(0.0)) {
      out.per_spin[spin.id] = 0.0;
      continue;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f_of(mid) > spin.f_ir)
        lo = mid;
      else
        hi = mid;
    }
    out.per_spin[spin.id] = 0.5 * (lo + hi);
  }
  return out;
}

} // namespace nvsim::reg
