/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/node_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nvsim::node {

void NuclearSpinParams::validate() const {
  const std::string who = "spin " + std::to_string(id) + ": ";
  if (!std::isfinite(a_par_khz))
    throw std::invalid_argument(who + "a_par_khz must be finite");
  if (!(a_perp_khz >= 0.0) || !std::isfinite(a_perp_khz))
    throw std::invalid_argument(who + "a_perp_khz must be >= 0");
  if (!std::isfinite(delta_omega_khz))
    throw std::invalid_argument(who + "delta_omega_khz must be finite");
  if (!(t2_star_ms > 0.0))
    throw std::invalid_argument(who + "t2_star_ms must be > 0");
  if (!(f_ir >= 0.0 && f_ir <= 1.0))
    throw std::invalid_argument(who + "f_ir must lie in [0, 1]");
}

void FieldConfig::validate() const {
  if (!(b_field_mt > 0.0) || !std::isfinite(b_field_mt))
    throw std::invalid_argument("b_field_mt must be > 0");
  if (!(gamma_khz_per_mt > 0.0) || !std::isfinite(gamma_khz_per_mt))
    throw std::invalid_argument("gamma_khz_per_mt must be > 0");
}

SubspaceSpec SubspaceSpec::single(int id) {
  return {SubspaceKind::single, {id}, Parity::parallel};
}

SubspaceSpec SubspaceSpec::pair(int i, int j, Parity parity) {
  return {SubspaceKind::pair, {i, j}, parity};
}

void SubspaceSpec::validate() const {
  if (kind == SubspaceKind::single && ids.size() != 1)
    throw std::invalid_argument("single subspace needs exactly one spin id");
  if (kind == SubspaceKind::pair) {
    if (ids.size() != 2)
      throw std::invalid_argument("pair subspace needs exactly two spin ids");
    if (ids[0] == ids[1])
      throw std::invalid_argument("pair subspace ids must be distinct");
  }
}

std::string SubspaceSpec::label() const {
  if (kind == SubspaceKind::single)
    return std::to_string(ids.at(0));
  return std::to_string(ids.at(0)) + "-" + std::to_string(ids.at(1)) +
         (parity == Parity::antiparallel ? "a" : "p");
}

LogicalBasis logical_basis(const SubspaceSpec &sub) {
  sub.validate();
  if (sub.kind == SubspaceKind::single)
    return {0, 1};
  // Two-spin index = 2 * b_i + b_j with b = 1 meaning |up>.
  if (sub.parity == Parity::parallel)
    return {0b00, 0b11}; // |dd>, |uu>
  return {0b10, 0b01};   // |ud>, |du>
}

Precession precession(const NuclearSpinParams &spin, const FieldConfig &field) {
  const double w0 = field.larmor_khz();
  const double along = w0 + spin.a_par_khz;
  return {w0, std::hypot(along, spin.a_perp_khz),
          std::atan2(spin.a_perp_khz, along)};
}

qcore::ComplexOperator precession_rotation(double freq_khz, double tilt_rad,
                                           double duration_us) {
  return qcore::gates::rotation({std::sin(tilt_rad), 0.0, std::cos(tilt_rad)},
                                angular_rad_per_us(freq_khz) * duration_us);
}

std::pair<qcore::ComplexOperator, qcore::ComplexOperator>
conditional_rotation(const NuclearSpinParams &spin, const FieldConfig &field,
                     double duration_us) {
  if (!(duration_us >= 0.0))
    throw std::invalid_argument("conditional_rotation: duration must be >= 0");
  const Precession p = precession(spin, field);
  return {precession_rotation(p.omega0_khz, 0.0, duration_us),
          precession_rotation(p.omega_m1_khz, p.tilt_rad, duration_us)};
}

const NuclearSpinParams &find_spin(const Register &reg, int id) {
  for (const auto &s : reg)
    if (s.id == id)
      return s;
  throw std::invalid_argument("unknown spin id " + std::to_string(id));
}

double effective_delta_omega(const SubspaceSpec &sub, const Register &reg) {
  sub.validate();
  if (sub.kind == SubspaceKind::single)
    return std::abs(find_spin(reg, sub.ids[0]).delta_omega_khz);
  const double a = find_spin(reg, sub.ids[0]).delta_omega_khz;
  const double b = find_spin(reg, sub.ids[1]).delta_omega_khz;
  return sub.parity == Parity::antiparallel ? std::abs(a - b)
                                            : std::abs(a + b);
}

double intrinsic_dephasing_factor(double t2_star_ms, double elapsed_ms) {
  if (!(t2_star_ms > 0.0))
    throw std::invalid_argument("t2_star must be > 0");
  if (!(elapsed_ms >= 0.0))
    throw std::invalid_argument("elapsed time must be >= 0");
  const double r = elapsed_ms / t2_star_ms;
  return std::exp(-r * r);
}

double combined_t2star(double t2_i_ms, double t2_j_ms) {
  if (!(t2_i_ms > 0.0) || !(t2_j_ms > 0.0))
    throw std::invalid_argument("combined_t2star: inputs must be > 0");
  const double a = 1.0 / t2_i_ms, b = 1.0 / t2_j_ms;
  return 1.0 / std::sqrt(a * a + b * b);
}

double subspace_t2star(const SubspaceSpec &sub, const Register &reg) {
  sub.validate();
  if (sub.kind == SubspaceKind::single)
    return find_spin(reg, sub.ids[0]).t2_star_ms;
  return combined_t2star(find_spin(reg, sub.ids[0]).t2_star_ms,
                         find_spin(reg, sub.ids[1]).t2_star_ms);
}

std::vector<SubspaceSpec> all_subspaces(const Register &reg) {
  std::vector<SubspaceSpec> out;
  for (const auto &s : reg)
    out.push_back(SubspaceSpec::single(s.id));
  for (std::size_t i = 0; i < reg.size(); ++i)
    for (std::size_t j = i + 1; j < reg.size(); ++j)
      for (Parity p : {Parity::antiparallel, Parity::parallel})
        out.push_back(SubspaceSpec::pair(reg[i].id, reg[j].id, p));
  return out;
}

Register reference_register() {
  return {
      {1, -11.0, 55.0, -15.4, 6.0, 0.89},
      {2, 21.2, 43.0, 18.4, 13.0, 0.96},
      {3, 24.7, 26.0, 23.7, 19.0, 0.97},
      {4, -36.0, 25.0, -37.0, 10.0, 0.92},
      {5, -48.7, 12.0, -48.6, 4.0, 0.90},
  };
}

} // namespace nvsim::node
