/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <doctest.h>

#include <cmath>

#include "nvsim/register.hpp"
#include "test_support.hpp"

using namespace nvsim;
using namespace nvsim::reg;
using node::Parity;
using node::SubspaceSpec;
using qcore::cplx;
using qcore::DensityMatrix;

namespace {

double population(const DensityMatrix &rho, std::size_t index) {
  return rho.matrix()(static_cast<Eigen::Index>(index),
                      static_cast<Eigen::Index>(index))
      .real();
}

double fidelity_with(const DensityMatrix &rho, const qcore::Vector &psi) {
  return (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
}

qcore::Vector plus_state() {
  qcore::Vector v(2);
  v << std::sqrt(0.5), std::sqrt(0.5);
  return v;
}

// Random single-qubit state: a random pure state mixed with the identity.
DensityMatrix random_qubit(Rng &rng) {
  qcore::Vector v(2);
  v << cplx(standard_normal(rng), standard_normal(rng)),
      cplx(standard_normal(rng), standard_normal(rng));
  v.normalize();
  const double mix = uniform01(rng);
  const qcore::Matrix m = (1.0 - mix) * v * v.adjoint() +
                          mix * 0.5 * qcore::Matrix::Identity(2, 2);
  return DensityMatrix({2}, m);
}

ReadoutModel with_click_fidelity(double q) {
  ReadoutModel r = ReadoutModel::ideal();
  r.p_state_given_click = q;
  return r;
}

} // namespace

TEST_SUITE("register") {

TEST_CASE("sequence validation") {
  GateSequence s;
  s.half_pi(Axis::x).conditional(3, Axis::x);
  CHECK_THROWS(s.validate(2));
  GateSequence r;
  r.readout(Branch::none);
  CHECK_THROWS(r.validate(1));
  CHECK_NOTHROW(superposition_sequence().validate(1));
  CHECK_NOTHROW(dps_sequence(Parity::parallel).validate(2));
  CHECK_THROWS(tomography_sequence(SubspaceSpec::single(1), 'Q'));

  ReadoutModel bad = ReadoutModel::ideal();
  bad.p_false_bright = -0.1;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("ideal superposition initialization") {
  const RegisterSimulator sim(node::reference_register(), ReadoutModel::ideal());
  Rng rng = make_stream(3, 0);
  for (int id = 1; id <= 5; ++id) {
    const DensityMatrix rho = sim.init_superposition(id, rng);
    CHECK(fidelity_with(rho, plus_state()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sim.expected_f_ir(id) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("heralding with an imperfect click") {
  const RegisterSimulator sim(node::reference_register(), with_click_fidelity(0.99));
  Rng rng = make_stream(3, 1);
  const DensityMatrix rho = sim.init_superposition(2, rng);
  CHECK(std::abs(fidelity_with(rho, plus_state()) - 0.99) < 0.005);
}

TEST_CASE("reduced swap") {
  const node::Register reg = node::reference_register();
  const RegisterSimulator ideal(reg, ReadoutModel::ideal());
  const DensityMatrix down = ideal.init_down(3);
  CHECK(population(down, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // Dropping the first conditional gate leaves the nucleus unpolarised.
  GateSequence broken;
  bool dropped = false;
  for (const auto &step : reduced_swap_sequence().steps) {
    if (!dropped && step.kind == StepKind::conditional) {
      dropped = true;
      continue;
    }
    broken.steps.push_back(step);
  }
  REQUIRE(dropped);
  Rng rng = make_stream(1, 1);
  const auto h = ideal.execute(broken, DensityMatrix::maximally_mixed({2}), {3}, rng);
  CHECK(population(qcore::partial_trace(h.joint, {1}), 0) ==
        doctest::Approx(0.5).epsilon(1e-9));

  ReadoutModel init_err = ReadoutModel::ideal();
  init_err.init_fidelity = 0.99;
  const RegisterSimulator noisy(reg, init_err);
  const double p = population(noisy.init_down(3), 0);
  CHECK(p >= 0.99 - 1e-12);
  CHECK(p < 1.0);
}

TEST_CASE("parity encoding") {
  const node::Register reg = node::reference_register();
  const RegisterSimulator ideal(reg, ReadoutModel::ideal());
  Rng rng = make_stream(4, 0);
  for (Parity parity : {Parity::parallel, Parity::antiparallel}) {
    const auto sub = SubspaceSpec::pair(2, 3, parity);
    const auto lb = node::logical_basis(sub);
    const DensityMatrix rho = ideal.encode_dps(sub, rng);
    const double inside = population(rho, lb.zero) + population(rho, lb.one);
    CHECK(1.0 - inside < 1e-9);
    // Equal-weight coherent superposition of the two logical states.
    const cplx c = rho.matrix()(static_cast<Eigen::Index>(lb.zero),
                                static_cast<Eigen::Index>(lb.one));
    CHECK(2.0 * std::abs(c) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ideal.tomography_exact(rho, sub, 'Z') == doctest::Approx(0.0).epsilon(1e-9));
  }

  const RegisterSimulator real(reg, ReadoutModel{}, calibrate_gate_errors(reg));
  const auto sub = SubspaceSpec::pair(2, 3, Parity::antiparallel);
  const DensityMatrix rho = real.encode_dps(sub, rng);
  const double x = real.tomography_exact(rho, sub, 'X');
  const double y = real.tomography_exact(rho, sub, 'Y');
  CHECK(std::hypot(x, y) < 1.0);
  CHECK(std::hypot(x, y) > 0.5);
}

TEST_CASE("single-spin tomography reproduces the Bloch vector") {
  const RegisterSimulator sim(node::reference_register(), ReadoutModel::ideal());
  const auto sub = SubspaceSpec::single(1);
  Rng rng = make_stream(8, 0);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = random_qubit(rng);
    const auto b = qcore::bloch_vector(rho);
    CHECK(sim.tomography_exact(rho, sub, 'X') == doctest::Approx(b.x).epsilon(1e-9));
    CHECK(sim.tomography_exact(rho, sub, 'Y') == doctest::Approx(b.y).epsilon(1e-9));
    CHECK(sim.tomography_exact(rho, sub, 'Z') == doctest::Approx(b.z).epsilon(1e-9));
  }
}

TEST_CASE("readout correction and sampled tomography") {
  const RegisterSimulator sim(node::reference_register(), ReadoutModel{});
  const auto sub = SubspaceSpec::single(2);
  DensityMatrix plus = DensityMatrix::from_pure({2}, plus_state());
  const double f = sim.tomography_click_probability(plus, sub, 'X');
  CHECK(f > 0.0);
  CHECK(f < 1.0);
  const double exact = sim.tomography_exact(plus, sub, 'X');
  CHECK(exact ==
        doctest::Approx(2.0 * (f - 0.01) / (0.94 - 0.01) - 1.0).epsilon(1e-12));

  Rng rng = make_stream(12, 0);
  const auto est = sim.tomography(plus, sub, 'X', 200000, rng);
  CHECK(est.err > 0.0);
  CHECK(std::abs(est.value - exact) < 4.0 * est.err);
}

TEST_CASE("F_ir degrades with the heralding error") {
  const node::Register reg = node::reference_register();
  double last = 2.0;
  for (double q : {1.0, 0.995, 0.99, 0.97, 0.9}) {
    const double f = RegisterSimulator(reg, with_click_fidelity(q)).expected_f_ir(2);
    CHECK(f < last + 1e-12);
    last = f;
  }
  CHECK(last < 0.95);
}

TEST_CASE("gate error calibration") {
  const node::Register reg = node::reference_register();
  const GateErrorModel g = calibrate_gate_errors(reg);
  const RegisterSimulator sim(reg, ReadoutModel::ideal(), g);
  for (const auto &spin : reg) {
    CHECK(g.for_spin(spin.id) > 0.0);
    CHECK(sim.expected_f_ir(spin.id) == doctest::Approx(spin.f_ir).epsilon(1e-9));
  }
  CHECK(g.for_spin(99) == 0.0);

  Rng rng = make_stream(5, 0);
  const auto est = sim.estimate_f_ir(3, 100000, rng);
  CHECK(std::abs(est.value - 0.97) < 4.0 * est.err + 1e-3);
}

} // TEST_SUITE
