/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/qcore.hpp"

#include <cmath>
#include <string>

namespace nvsim {

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  // seed_seq output is fully specified by the standard, as is mt19937_64.
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index & 0xffffffffu),
                    static_cast<std::uint32_t>(index >> 32),
                    0x6e76u /* stream domain tag */};
  return Rng(seq);
}

double standard_normal(Rng &rng) {
  const double u1 = 1.0 - uniform01(rng); // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

double exponential(Rng &rng, double mean) {
  return -mean * std::log1p(-uniform01(rng));
}

} // namespace nvsim

namespace nvsim::qcore {

ComplexOperator::ComplexOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw DimensionError("operator must be square, got " +
                         std::to_string(m_.rows()) + "x" +
                         std::to_string(m_.cols()));
  if (m_.rows() == 0)
    throw DimensionError("operator dimension must be positive");
}

ComplexOperator ComplexOperator::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return ComplexOperator(Matrix::Identity(n, n));
}

ComplexOperator ComplexOperator::adjoint() const {
  return ComplexOperator(m_.adjoint());
}

double ComplexOperator::unitarity_defect() const {
  const Matrix d = m_ * m_.adjoint() - Matrix::Identity(m_.rows(), m_.cols());
  return d.cwiseAbs().maxCoeff();
}

ComplexOperator operator*(const ComplexOperator &a, const ComplexOperator &b) {
  if (a.dim() != b.dim())
    throw DimensionError("operator product dimension mismatch: " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  return ComplexOperator(a.m_ * b.m_);
}

ComplexOperator tensor(const ComplexOperator &a, const ComplexOperator &b) {
  const Matrix &ma = a.matrix();
  const Matrix &mb = b.matrix();
  const Eigen::Index na = ma.rows(), nb = mb.rows();
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j)
      out.block(i * nb, j * nb, nb, nb) = ma(i, j) * mb;
  return ComplexOperator(std::move(out));
}

double max_abs_diff(const ComplexOperator &a, const ComplexOperator &b) {
  if (a.dim() != b.dim())
    throw DimensionError("max_abs_diff: dimension mismatch");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double distance_up_to_phase(const ComplexOperator &a,
                            const ComplexOperator &b) {
  if (a.dim() != b.dim())
    throw DimensionError("distance_up_to_phase: dimension mismatch");
  const cplx overlap = (b.matrix().adjoint() * a.matrix()).trace();
  const cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap)
                                           : cplx(1.0, 0.0);
  return (a.matrix() - phase * b.matrix()).cwiseAbs().maxCoeff();
}

namespace gates {

ComplexOperator pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return ComplexOperator(m);
}

ComplexOperator pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return ComplexOperator(m);
}

ComplexOperator pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return ComplexOperator(m);
}

ComplexOperator rotation(const std::array<double, 3> &axis, double angle) {
  const double norm =
      std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(norm > 0))
    throw std::invalid_argument("rotation axis must be non-zero");
  const double nx = axis[0] / norm, ny = axis[1] / norm, nz = axis[2] / norm;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  Matrix m(2, 2);
  m(0, 0) = cplx(c, -s * nz);
  m(0, 1) = cplx(-s * ny, -s * nx);
  m(1, 0) = cplx(s * ny, -s * nx);
  m(1, 1) = cplx(c, s * nz);
  return ComplexOperator(m);
}

ComplexOperator rx(double angle) { return rotation({1, 0, 0}, angle); }
ComplexOperator ry(double angle) { return rotation({0, 1, 0}, angle); }
ComplexOperator rz(double angle) { return rotation({0, 0, 1}, angle); }

ComplexOperator projector(std::size_t dim, std::size_t k) {
  if (k >= dim)
    throw DimensionError("projector index out of range");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m = Matrix::Zero(n, n);
  m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  return ComplexOperator(m);
}

} // namespace gates

} // namespace nvsim::qcore
