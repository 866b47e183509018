/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nvsim/qcore.hpp"

namespace nvsim::node {

/// Converts a frequency in kHz (cycles) to an angular rate in rad/us.
constexpr double angular_rad_per_us(double f_khz) {
  return 2.0 * std::numbers::pi * f_khz * 1e-3;
}

/// One row of the nuclear-spin register.
struct NuclearSpinParams {
  int id = 0;
  double a_par_khz = 0.0;       // signed
  double a_perp_khz = 0.0;      // >= 0
  double delta_omega_khz = 0.0; // measured, signed
  double t2_star_ms = 1.0;
  double f_ir = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

using Register = std::vector<NuclearSpinParams>;

struct FieldConfig {
  double b_field_mt = 40.0;
  double gamma_khz_per_mt = 11.0;

  void validate() const;
  double larmor_khz() const { return gamma_khz_per_mt * b_field_mt; }
};

enum class SubspaceKind { single, pair };
enum class Parity { parallel, antiparallel };

struct SubspaceSpec {
  SubspaceKind kind = SubspaceKind::single;
  std::vector<int> ids;
  Parity parity = Parity::parallel; // ignored for single spins

  static SubspaceSpec single(int id);
  static SubspaceSpec pair(int i, int j, Parity parity);

  void validate() const;
  std::size_t n_spins() const { return ids.size(); }
  /// "5", "2-3a" (antiparallel) or "2-3p" (parallel).
  std::string label() const;
};

/// Nuclear basis indices spanning the logical qubit; `zero` is the +Z pole.
/// Index convention: bit value 0 is |down>, spins ordered as in `ids`.
struct LogicalBasis {
  std::size_t zero = 0;
  std::size_t one = 1;
};
LogicalBasis logical_basis(const SubspaceSpec &sub);

struct Precession {
  double omega0_khz = 0.0;
  double omega_m1_khz = 0.0;
  double tilt_rad = 0.0;
};

Precession precession(const NuclearSpinParams &spin, const FieldConfig &field);

/// Nuclear rotations with the electron in |0> (r0) and |-1> (r1).
std::pair<qcore::ComplexOperator, qcore::ComplexOperator>
conditional_rotation(const NuclearSpinParams &spin, const FieldConfig &field,
                     double duration_us);

/// Rotation by 2 pi f t about the axis (sin tilt, 0, cos tilt).
qcore::ComplexOperator precession_rotation(double freq_khz, double tilt_rad,
                                           double duration_us);

const NuclearSpinParams &find_spin(const Register &reg, int id);

/// |dw| for single spins, |dw_i -/+ dw_j| for antiparallel/parallel pairs.
double effective_delta_omega(const SubspaceSpec &sub, const Register &reg);

/// exp(-(elapsed/t2)^2); both arguments in the same unit.
double intrinsic_dephasing_factor(double t2_star_ms, double elapsed_ms);

double combined_t2star(double t2_i_ms, double t2_j_ms);

/// T2* of the logical qubit: the spin's own value or the pair combination.
double subspace_t2star(const SubspaceSpec &sub, const Register &reg);

/// The five single spins followed by every pair in both parities.
std::vector<SubspaceSpec> all_subspaces(const Register &reg);

/// Built-in copy of the reference register used when no file is supplied.
Register reference_register();

Register load_register(const std::string &path);
Register parse_register_json(const std::string &text);
std::string register_to_json(const Register &reg);

} // namespace nvsim::node
