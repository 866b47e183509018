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
#include <vector>

#include "nvsim/qcore.hpp"

using namespace nvsim;
using namespace nvsim::qcore;
using std::numbers::pi;

namespace {

Matrix random_unitary(std::size_t d, Rng &rng) {
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      a(i, j) = cplx(standard_normal(rng), standard_normal(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(d, d);
}

DensityMatrix random_state(std::size_t d, Rng &rng) {
  Matrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      g(i, j) = cplx(standard_normal(rng), standard_normal(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix({d}, rho);
}

// Index-contraction oracle for tracing out the last subsystem of a
// bipartite (dA x dB) matrix.
Matrix trace_out_b(const Matrix &rho, std::size_t da, std::size_t db) {
  Matrix out = Matrix::Zero(da, da);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k)
        out(i, j) += rho(i * db + k, j * db + k);
  return out;
}

Matrix explicit_kron(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

} // namespace

TEST_SUITE("qcore") {

TEST_CASE("tensor of identities and basis action") {
  const auto i2 = ComplexOperator::identity(2);
  CHECK(max_abs_diff(tensor(i2, i2), ComplexOperator::identity(4)) == 0.0);

  const auto xi = tensor(gates::pauli_x(), i2);
  Vector ket00 = Vector::Zero(4);
  ket00(0) = 1.0;
  const Vector out = xi.matrix() * ket00;
  CHECK(std::abs(out(2) - cplx(1.0)) < 1e-15); // |1>|0>
  CHECK(out.norm() == doctest::Approx(1.0));

  const auto zz = tensor(gates::pauli_z(), gates::pauli_z());
  CHECK(max_abs_diff(zz * zz, ComplexOperator::identity(4)) < 1e-15);
}

TEST_CASE("tensor matches an explicit Kronecker loop") {
  Rng rng = make_stream(3, 0);
  const Matrix a = random_unitary(2, rng), b = random_unitary(3, rng);
  const auto t = tensor(ComplexOperator(a), ComplexOperator(b));
  CHECK((t.matrix() - explicit_kron(a, b)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotation gates are unitary and follow exp(-i theta n.sigma/2)") {
  const double th = 0.7;
  const Matrix rz = gates::rz(th).matrix();
  CHECK(std::abs(rz(0, 0) - std::polar(1.0, -th / 2)) < 1e-15);
  CHECK(std::abs(rz(1, 1) - std::polar(1.0, th / 2)) < 1e-15);
  CHECK(gates::rotation({0.6, 0.0, 0.8}, 1.3).is_unitary());
  CHECK_THROWS_AS(gates::rotation({0.0, 0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("operator and density-matrix validation") {
  Matrix nonsquare(2, 3);
  nonsquare.setZero();
  CHECK_THROWS_AS(ComplexOperator{nonsquare}, DimensionError);

  Matrix bad = Matrix::Identity(2, 2); // trace 2
  CHECK_THROWS(DensityMatrix({2}, bad));
  Matrix nonherm = Matrix::Zero(2, 2);
  nonherm(0, 0) = 1.0;
  nonherm(0, 1) = 0.3;
  CHECK_THROWS(DensityMatrix({2}, nonherm));
  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS(DensityMatrix({2}, negative));
  CHECK_THROWS_AS(DensityMatrix({2, 2}, Matrix::Identity(2, 2) / 2.0),
                  DimensionError);
}

TEST_CASE("evolve examples") {
  Rng rng = make_stream(5, 0);
  const auto rho = random_state(2, rng);
  CHECK((evolve(rho, ComplexOperator::identity(2)).matrix() - rho.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  const auto zero = DensityMatrix::basis_state({2}, 0);
  const auto flipped = evolve(zero, gates::pauli_x());
  CHECK(std::abs(flipped.matrix()(1, 1) - cplx(1.0)) < 1e-15);

  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto b = bloch_vector(evolve(DensityMatrix::from_pure({2}, plus),
                                     gates::rz(pi / 2)));
  CHECK(std::abs(b.x) < 1e-10);
  CHECK(std::abs(b.y - 1.0) < 1e-10);
  CHECK(std::abs(b.z) < 1e-10);

  Matrix notu = Matrix::Identity(2, 2) * 1.1;
  CHECK_THROWS(evolve(zero, ComplexOperator(notu)));
  CHECK_THROWS_AS(evolve(zero, ComplexOperator::identity(4)), DimensionError);
}

TEST_CASE("partial trace examples") {
  Rng rng = make_stream(7, 0);
  const auto ra = random_state(2, rng), rb = random_state(3, rng);
  const auto ab = tensor(ra, rb);
  const auto got = partial_trace(ab, {0});
  CHECK((got.matrix() - ra.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got.matrix() - trace_out_b(ab.matrix(), 2, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto half = partial_trace(DensityMatrix::from_pure({2, 2}, bell), {0});
  CHECK((half.matrix() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <
        1e-15);

  // Three random factors: each marginal is recovered.
  const auto r0 = random_state(2, rng), r1 = random_state(2, rng),
             r2 = random_state(3, rng);
  const auto all = tensor(tensor(r0, r1), r2);
  CHECK((partial_trace(all, {1}).matrix() - r1.matrix()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((partial_trace(all, {2}).matrix() - r2.matrix()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((partial_trace(all, {0, 1}).matrix() - tensor(r0, r1).matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK_THROWS(partial_trace(all, {3}));
}

TEST_CASE("local operations leave remote marginals invariant") {
  Rng rng = make_stream(9, 0);
  const auto rho = DensityMatrix::from_pure({2, 3}, [&] {
    Vector v(6);
    for (int i = 0; i < 6; ++i)
      v(i) = cplx(standard_normal(rng), standard_normal(rng));
    return Vector(v / v.norm());
  }());
  const auto ua = ComplexOperator(random_unitary(2, rng));
  const auto moved = evolve(rho, tensor(ua, ComplexOperator::identity(3)));
  CHECK((partial_trace(moved, {1}).matrix() - partial_trace(rho, {1}).matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("measurement examples") {
  Rng rng = make_stream(11, 0);
  const std::vector<ComplexOperator> z = {gates::projector(2, 0),
                                          gates::projector(2, 1)};
  const auto m0 = measure_projective(DensityMatrix::basis_state({2}, 0), z, rng);
  CHECK(m0.index == 0);
  CHECK(m0.probability == doctest::Approx(1.0));

  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto rp = DensityMatrix::from_pure({2}, plus);
  const auto mp = measure_projective(rp, z, rng);
  CHECK(mp.probability == doctest::Approx(0.5).epsilon(1e-12));

  Vector v(2);
  v << std::sqrt(0.3), std::sqrt(0.7);
  const auto r3 = DensityMatrix::from_pure({2}, v);
  int zeros = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    zeros += measure_projective(r3, z, rng).index == 0;
  CHECK(std::abs(zeros / double(n) - 0.3) < 0.005);

  const std::vector<ComplexOperator> incomplete = {gates::projector(2, 0)};
  CHECK_THROWS(measure_projective(r3, incomplete, rng));
}

TEST_CASE("probability-weighted post states reproduce the dephased state") {
  Rng rng = make_stream(13, 0);
  const auto rho = random_state(3, rng);
  const std::vector<ComplexOperator> ps = {gates::projector(3, 0),
                                           gates::projector(3, 1),
                                           gates::projector(3, 2)};
  Matrix sum = Matrix::Zero(3, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = std::real(rho.matrix()(k, k));
    sum += p * (ps[k].matrix() * rho.matrix() * ps[k].matrix()) / p;
  }
  CHECK((dephase(rho, ps).matrix() - sum).cwiseAbs().maxCoeff() < 1e-10);
  // Off-diagonals vanish, diagonals survive.
  CHECK(std::abs(dephase(rho, ps).matrix()(0, 1)) < 1e-15);
}

TEST_CASE("Bloch vector examples") {
  auto b = bloch_vector(DensityMatrix::basis_state({2}, 0));
  CHECK(b.z == doctest::Approx(1.0));
  b = bloch_vector(DensityMatrix::maximally_mixed({2}));
  CHECK(b.x == 0.0);
  CHECK(b.y == 0.0);
  CHECK(b.z == 0.0);
  for (double phi : {0.1, 1.0, 2.5, -2.0}) {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto r = evolve(DensityMatrix::from_pure({2}, plus), gates::rz(phi));
    const auto bv = bloch_vector(r);
    CHECK(std::abs(bv.xy_length() - 1.0) < 1e-10);
    CHECK(std::abs(std::atan2(bv.y, bv.x) - phi) < 1e-10);
  }
  CHECK_THROWS(bloch_vector(DensityMatrix::maximally_mixed({3})));
}

TEST_CASE("invariants survive ten thousand composed evolutions") {
  Rng rng = make_stream(17, 0);
  std::vector<ComplexOperator> us;
  for (int i = 0; i < 10000; ++i)
    us.emplace_back(random_unitary(4, rng));
  const auto out = evolve_sequence(random_state(4, rng), us);
  CHECK(std::abs(out.trace() - cplx(1.0)) < 1e-9);
  CHECK(out.min_eigenvalue() > -1e-9);
}

TEST_CASE("in-place kernels agree with dense embedding") {
  Rng rng = make_stream(19, 0);
  const Dims dims = {2, 3, 2};
  Vector v(12);
  for (int i = 0; i < 12; ++i)
    v(i) = cplx(standard_normal(rng), standard_normal(rng));
  v /= v.norm();
  const auto u = ComplexOperator(random_unitary(3, rng));

  StateVector psi(dims, v);
  apply_local(psi, 1, u);
  const Matrix full = explicit_kron(
      explicit_kron(Matrix::Identity(2, 2), u.matrix()), Matrix::Identity(2, 2));
  CHECK((psi.amplitudes() - full * v).cwiseAbs().maxCoeff() < 1e-14);

  auto rho = DensityMatrix::from_pure(dims, v);
  apply_local(rho, 1, u);
  CHECK((rho.matrix() - full * v * v.adjoint() * full.adjoint())
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  // Controlled: electron (subsystem 0) selects the operator on subsystem 2.
  const std::vector<ComplexOperator> ops = {ComplexOperator(random_unitary(2, rng)),
                                            ComplexOperator(random_unitary(2, rng))};
  StateVector psi2(dims, v);
  apply_controlled(psi2, 0, 2, ops);
  Matrix ctrl = Matrix::Zero(12, 12);
  for (std::size_t c = 0; c < 2; ++c)
    ctrl += explicit_kron(explicit_kron(gates::projector(2, c).matrix(),
                                        Matrix::Identity(3, 3)),
                          ops[c].matrix());
  CHECK((psi2.amplitudes() - ctrl * v).cwiseAbs().maxCoeff() < 1e-14);

  auto rho2 = DensityMatrix::from_pure(dims, v);
  apply_controlled(rho2, 0, 2, ops);
  CHECK((rho2.matrix() - ctrl * v * v.adjoint() * ctrl.adjoint())
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  const double p = basis_probability(psi2, 0, 1);
  double want = 0.0;
  for (int i = 6; i < 12; ++i)
    want += std::norm((ctrl * v)(i));
  CHECK(p == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a = make_stream(42, 3), b = make_stream(42, 3), c = make_stream(42, 4);
  const auto xa = a(), xb = b(), xc = c();
  CHECK(xa == xb);
  CHECK(xa != xc);
  Rng r = make_stream(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i)
    sum += exponential(r, 2.0);
  CHECK(std::abs(sum / 100000 - 2.0) < 0.03);
}

} // TEST_SUITE
