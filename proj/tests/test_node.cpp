/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvsim/node_model.hpp"
#include "test_support.hpp"

using namespace nvsim;
using namespace nvsim::node;
using qcore::cplx;
using qcore::Matrix;

namespace {

// exp(-i H t) for the nuclear Hamiltonian in one electron manifold,
// H = 2 pi (a_z I_z + a_x I_x) with frequencies in kHz and t in us.
Matrix hamiltonian_propagator(double az_khz, double ax_khz, double t_us) {
  Matrix h(2, 2);
  const double k = 2.0 * std::numbers::pi * 1e-3;
  h << 0.5 * az_khz, 0.5 * ax_khz, 0.5 * ax_khz, -0.5 * az_khz;
  h *= k;
  return (cplx(0.0, -t_us) * h).exp();
}

} // namespace

TEST_SUITE("node-model") {

TEST_CASE("reference register is the tabulated data") {
  const Register reg = reference_register();
  REQUIRE(reg.size() == 5);
  CHECK(reg[0].id == 1);
  CHECK(reg[0].a_par_khz == -11.0);
  CHECK(reg[0].a_perp_khz == 55.0);
  CHECK(reg[0].delta_omega_khz == -15.4);
  CHECK(reg[4].delta_omega_khz == -48.6);
  CHECK(reg[2].t2_star_ms == 19.0);
  CHECK(reg[2].f_ir == 0.97);

  const Register file = load_register(test::data_path("register.json"));
  REQUIRE(file.size() == reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(file[i].id == reg[i].id);
    CHECK(file[i].a_par_khz == reg[i].a_par_khz);
    CHECK(file[i].a_perp_khz == reg[i].a_perp_khz);
    CHECK(file[i].delta_omega_khz == reg[i].delta_omega_khz);
    CHECK(file[i].t2_star_ms == reg[i].t2_star_ms);
    CHECK(file[i].f_ir == reg[i].f_ir);
  }
}

TEST_CASE("register parsing is strict") {
  const std::string ok =
      R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":0.9}]})";
  CHECK(parse_register_json(ok).size() == 1);

  auto expect_error = [](const std::string &text, const std::string &needle) {
    try {
      parse_register_json(text);
      FAIL("expected an error mentioning " << needle);
    } catch (const std::invalid_argument &e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4}]})",
               "f_ir");
  expect_error(R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":0.9,"color":1}]})",
               "color");
  expect_error(R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":-2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":0.9}]})",
               "a_perp");
  expect_error(R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":0,"f_ir":0.9}]})",
               "t2_star");
  expect_error(R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":1.5}]})",
               "f_ir");
  const std::string dup =
      R"({"spins":[{"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":0.9},)"
      R"({"id":1,"a_par_khz":1,"a_perp_khz":2,"delta_omega_khz":3,"t2_star_ms":4,"f_ir":0.9}]})";
  expect_error(dup, "duplicate");
  CHECK_THROWS(parse_register_json("not json"));

  // Serialization round trip.
  const Register back = parse_register_json(register_to_json(reference_register()));
  CHECK(back.size() == 5);
  CHECK(back[3].a_par_khz == -36.0);
}

TEST_CASE("precession examples") {
  const FieldConfig field;
  NuclearSpinParams bare;
  bare.id = 9;
  const auto p0 = precession(bare, field);
  CHECK(p0.omega0_khz == doctest::Approx(440.0));
  CHECK(p0.omega_m1_khz == doctest::Approx(p0.omega0_khz));
  CHECK(p0.tilt_rad == 0.0);
  CHECK(1000.0 / p0.omega0_khz == doctest::Approx(2.2727).epsilon(1e-4));

  const auto p1 = precession(reference_register()[0], field);
  CHECK(p1.omega_m1_khz == doctest::Approx(432.51).epsilon(1e-4));
  CHECK(p1.tilt_rad == doctest::Approx(0.1275).epsilon(1e-3));
  // Closed form evaluated independently.
  CHECK(p1.omega_m1_khz ==
        doctest::Approx(std::hypot(440.0 - 11.0, 55.0)).epsilon(1e-14));

  for (const auto &s : reference_register()) {
    const auto p = precession(s, field);
    CHECK(p.omega_m1_khz >= std::abs(field.larmor_khz() + s.a_par_khz));
  }
}

TEST_CASE("conditional rotations") {
  const FieldConfig field;
  const auto spin3 = reference_register()[2];
  auto [r0, r1] = conditional_rotation(spin3, field, 0.0);
  CHECK(qcore::max_abs_diff(r0, qcore::ComplexOperator::identity(2)) < 1e-15);
  CHECK(qcore::max_abs_diff(r1, qcore::ComplexOperator::identity(2)) < 1e-15);

  NuclearSpinParams bare;
  const double period = 1000.0 / field.larmor_khz();
  auto [b0, b1] = conditional_rotation(bare, field, period);
  CHECK(qcore::distance_up_to_phase(b0, qcore::ComplexOperator::identity(2)) <
        1e-12);
  CHECK(qcore::distance_up_to_phase(b1, qcore::ComplexOperator::identity(2)) <
        1e-12);

  auto [s0, s1] = conditional_rotation(spin3, field, 2.2727);
  CHECK(qcore::distance_up_to_phase(s0, qcore::ComplexOperator::identity(2)) <
        1e-4);
  const Matrix oracle = hamiltonian_propagator(440.0 + spin3.a_par_khz,
                                               spin3.a_perp_khz, 2.2727);
  CHECK((s1.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(qcore::distance_up_to_phase(s1, qcore::ComplexOperator::identity(2)) >
        1e-3);
  CHECK(s0.is_unitary());
  CHECK(s1.is_unitary());
}

TEST_CASE("conditional rotations match the matrix exponential for random spins") {
  Rng rng = make_stream(2024, 0);
  for (int k = 0; k < 100; ++k) {
    NuclearSpinParams s;
    s.id = 1;
    s.a_par_khz = 200.0 * (uniform01(rng) - 0.5);
    s.a_perp_khz = 100.0 * uniform01(rng);
    FieldConfig f;
    f.b_field_mt = 10.0 + 60.0 * uniform01(rng);
    const double t = 5.0 * uniform01(rng);
    auto [r0, r1] = conditional_rotation(s, f, t);
    CHECK((r0.matrix() - hamiltonian_propagator(f.larmor_khz(), 0.0, t))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    CHECK((r1.matrix() - hamiltonian_propagator(f.larmor_khz() + s.a_par_khz,
                                                 s.a_perp_khz, t))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
  }
}

TEST_CASE("effective coupling of subspaces") {
  const Register reg = reference_register();
  CHECK(effective_delta_omega(SubspaceSpec::single(5), reg) == 48.6);
  CHECK(effective_delta_omega(SubspaceSpec::pair(2, 3, Parity::antiparallel), reg) ==
        doctest::Approx(5.3).epsilon(1e-12));
  CHECK(effective_delta_omega(SubspaceSpec::pair(2, 3, Parity::parallel), reg) ==
        doctest::Approx(42.1).epsilon(1e-12));
  CHECK_THROWS(effective_delta_omega(SubspaceSpec::single(8), reg));

  for (const auto &a : reg)
    for (const auto &b : reg)
      if (a.id < b.id && a.delta_omega_khz * b.delta_omega_khz > 0)
        CHECK(effective_delta_omega(
                  SubspaceSpec::pair(a.id, b.id, Parity::antiparallel), reg) <=
              effective_delta_omega(
                  SubspaceSpec::pair(a.id, b.id, Parity::parallel), reg));
}

TEST_CASE("subspace enumeration and labels") {
  const auto subs = all_subspaces(reference_register());
  CHECK(subs.size() == 25);
  CHECK(SubspaceSpec::single(5).label() == "5");
  CHECK(SubspaceSpec::pair(2, 3, Parity::antiparallel).label() == "2-3a");
  CHECK(SubspaceSpec::pair(2, 3, Parity::parallel).label() == "2-3p");
  CHECK_THROWS(SubspaceSpec::pair(2, 2, Parity::parallel).validate());

  const auto anti = logical_basis(SubspaceSpec::pair(1, 2, Parity::antiparallel));
  CHECK(anti.zero == 0b10);
  CHECK(anti.one == 0b01);
  const auto par = logical_basis(SubspaceSpec::pair(1, 2, Parity::parallel));
  CHECK(par.zero == 0b00);
  CHECK(par.one == 0b11);
}

TEST_CASE("intrinsic dephasing and combined T2*") {
  CHECK(intrinsic_dephasing_factor(6.0, 0.0) == 1.0);
  CHECK(intrinsic_dephasing_factor(6.0, 6.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(intrinsic_dephasing_factor(13.0, 6.5) == doctest::Approx(0.7788).epsilon(1e-4));

  CHECK(combined_t2star(8.0, 8.0) == doctest::Approx(8.0 / std::sqrt(2.0)));
  CHECK(combined_t2star(13.0, 19.0) == doctest::Approx(10.73).epsilon(1e-3));
  CHECK(combined_t2star(7.0, 1e9) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(combined_t2star(13.0, 19.0) == combined_t2star(19.0, 13.0));
  CHECK(combined_t2star(13.0, 20.0) > combined_t2star(13.0, 19.0));
  CHECK(combined_t2star(13.0, 19.0) < 13.0);
  CHECK(subspace_t2star(SubspaceSpec::pair(2, 3, Parity::antiparallel),
                        reference_register()) ==
        doctest::Approx(10.73).epsilon(1e-3));
}

} // TEST_SUITE
