/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nvsim {

/// Random stream used everywhere a function needs randomness.
using Rng = std::mt19937_64;

/// Derive the stream for one Monte Carlo trajectory from a run seed.
/// The mapping is fixed so results do not depend on scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) drawn with a portable recipe (53 random bits).
inline double uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal deviate (Box-Muller on two portable uniforms). Unlike
/// std::normal_distribution the output does not depend on the toolchain.
double standard_normal(Rng &rng);

/// Exponential deviate with the given mean.
double exponential(Rng &rng, double mean);

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace nvsim

namespace nvsim::qcore {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<std::size_t>;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenTol = 1e-9;
inline constexpr double kCompletenessTol = 1e-9;

/// Square complex matrix acting on a dim-dimensional space.
class ComplexOperator {
public:
  ComplexOperator() = default;
  explicit ComplexOperator(Matrix m);

  static ComplexOperator identity(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix &matrix() const { return m_; }
  cplx operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  ComplexOperator adjoint() const;
  /// max |(U U^dagger - I)_ij|
  double unitarity_defect() const;
  bool is_unitary(double tol = kUnitaryTol) const {
    return unitarity_defect() < tol;
  }

  friend ComplexOperator operator*(const ComplexOperator &a,
                                   const ComplexOperator &b);

private:
  Matrix m_;
};

/// Kronecker product; the left factor is the more significant subsystem.
ComplexOperator tensor(const ComplexOperator &a, const ComplexOperator &b);

/// Largest elementwise modulus of a - b.
double max_abs_diff(const ComplexOperator &a, const ComplexOperator &b);

/// Distance between unitaries modulo a global phase:
/// min over phi of max_ij |a_ij - e^{i phi} b_ij| (phase fitted from tr(b^dagger a)).
double distance_up_to_phase(const ComplexOperator &a, const ComplexOperator &b);

namespace gates {
ComplexOperator pauli_x();
ComplexOperator pauli_y();
ComplexOperator pauli_z();
/// exp(-i angle (n . sigma) / 2) for a unit axis n.
ComplexOperator rotation(const std::array<double, 3> &axis, double angle);
ComplexOperator rx(double angle);
ComplexOperator ry(double angle);
ComplexOperator rz(double angle);
/// |k><k| in a dim-dimensional space.
ComplexOperator projector(std::size_t dim, std::size_t k);
} // namespace gates

/// Trace-one positive semidefinite matrix over a tensor product of
/// subsystems. Subsystem 0 is the electron by convention.
class DensityMatrix {
public:
  DensityMatrix() = default;
  /// Validates Hermiticity, unit trace and positivity.
  DensityMatrix(Dims dims, Matrix entries);

  static DensityMatrix from_pure(Dims dims, const Vector &psi);
  static DensityMatrix basis_state(Dims dims, std::size_t index);
  static DensityMatrix maximally_mixed(Dims dims);

  const Dims &dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  const Matrix &matrix() const { return rho_; }
  cplx trace() const { return rho_.trace(); }

  /// Throws NumericalError naming the violated invariant.
  void check_invariants(double eig_tol = kEigenTol) const;
  double min_eigenvalue() const;

  /// Unchecked access for in-place kernels. Callers own the invariants.
  Matrix &mutable_matrix() { return rho_; }
  /// Rescale so that the trace is exactly one (drift control).
  void renormalize();

  /// Build without validation. Used by kernels that preserve the invariants
  /// by construction and re-check them periodically.
  static DensityMatrix unchecked(Dims dims, Matrix entries);

private:
  Dims dims_;
  Matrix rho_;
};

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);

/// U rho U^dagger. Throws DimensionError or NumericalError (non-unitary u).
DensityMatrix evolve(const DensityMatrix &rho, const ComplexOperator &u);

/// Applies a sequence of unitaries, renormalising the trace every
/// `renorm_every` steps.
DensityMatrix evolve_sequence(DensityMatrix rho,
                              std::span<const ComplexOperator> us,
                              std::size_t renorm_every = 1000);

/// Reduced state over `keep` (order of the result follows ascending index).
DensityMatrix partial_trace(const DensityMatrix &rho,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix &rho,
                            std::initializer_list<std::size_t> keep);

struct MeasurementOutcome {
  std::size_t index = 0;
  double probability = 0.0;
  DensityMatrix post_state;
};

/// Projectors act on the full space.
MeasurementOutcome measure_projective(const DensityMatrix &rho,
                                      std::span<const ComplexOperator> projectors,
                                      Rng &rng);
/// Projectors act on one subsystem and are embedded with identities.
MeasurementOutcome measure_projective(const DensityMatrix &rho,
                                      std::size_t subsystem,
                                      std::span<const ComplexOperator> projectors,
                                      Rng &rng);

/// sum_k P_k rho P_k (the non-selective measurement).
DensityMatrix dephase(const DensityMatrix &rho,
                      std::span<const ComplexOperator> projectors);

/// Embed a local operator on `subsystem` into the full space.
ComplexOperator embed(const Dims &dims, std::size_t subsystem,
                      const ComplexOperator &op);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double xy_length() const;
};

BlochVector bloch_vector(const DensityMatrix &rho_qubit);

/// Pure state over a tensor product; used by Monte Carlo trajectories.
class StateVector {
public:
  StateVector() = default;
  StateVector(Dims dims, Vector amps);
  static StateVector basis_state(Dims dims, std::size_t index);

  const Dims &dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(psi_.size()); }
  const Vector &amplitudes() const { return psi_; }
  Vector &mutable_amplitudes() { return psi_; }
  double norm_squared() const { return psi_.squaredNorm(); }
  void normalize();
  DensityMatrix to_density() const;

private:
  Dims dims_;
  Vector psi_;
};

std::size_t total_dim(const Dims &dims);

// In-place local kernels shared by the ket and density-matrix paths.
void apply_local(StateVector &psi, std::size_t subsystem,
                 const ComplexOperator &op);
void apply_local(DensityMatrix &rho, std::size_t subsystem,
                 const ComplexOperator &op);

/// Applies ops[v] to `target` on the component where `control` is in
/// basis state v. ops.size() must equal the control dimension.
void apply_controlled(StateVector &psi, std::size_t control,
                      std::size_t target,
                      std::span<const ComplexOperator> ops);
void apply_controlled(DensityMatrix &rho, std::size_t control,
                      std::size_t target,
                      std::span<const ComplexOperator> ops);

/// Probability that `subsystem` is found in basis state `value`.
double basis_probability(const StateVector &psi, std::size_t subsystem,
                         std::size_t value);
double basis_probability(const DensityMatrix &rho, std::size_t subsystem,
                         std::size_t value);

/// Project `subsystem` onto basis state `value` and renormalise.
/// Returns the pre-projection probability. Throws on zero probability.
double project_basis(StateVector &psi, std::size_t subsystem,
                     std::size_t value);
double project_basis(DensityMatrix &rho, std::size_t subsystem,
                     std::size_t value);

} // namespace nvsim::qcore
