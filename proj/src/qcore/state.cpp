/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nvsim::qcore {

std::size_t total_dim(const Dims &dims) {
  if (dims.empty())
    throw DimensionError("subsystem dimension list is empty");
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0)
      throw DimensionError("subsystem dimension must be positive");
    n *= d;
  }
  return n;
}

namespace {

struct Layout {
  std::size_t before = 1; // product of dims preceding the subsystem
  std::size_t d = 1;      // subsystem dimension
  std::size_t after = 1;  // product of dims following the subsystem
};

Layout layout_of(const Dims &dims, std::size_t subsystem) {
  if (subsystem >= dims.size())
    throw DimensionError("subsystem index " + std::to_string(subsystem) +
                         " out of range for " + std::to_string(dims.size()) +
                         " subsystems");
  Layout l;
  for (std::size_t k = 0; k < subsystem; ++k)
    l.before *= dims[k];
  l.d = dims[subsystem];
  for (std::size_t k = subsystem + 1; k < dims.size(); ++k)
    l.after *= dims[k];
  return l;
}

// Left-multiply the rows of m by the local operator on one subsystem.
template <class M>
void left_local(M &m, const Dims &dims, std::size_t subsystem,
                const Matrix &op) {
  const Layout l = layout_of(dims, subsystem);
  if (static_cast<std::size_t>(op.rows()) != l.d)
    throw DimensionError("local operator dimension does not match subsystem");
  const Eigen::Index cols = m.cols();
  if (l.d == 2) {
    const cplx a = op(0, 0), b = op(0, 1), c = op(1, 0), e = op(1, 1);
    for (std::size_t o = 0; o < l.before; ++o)
      for (std::size_t i = 0; i < l.after; ++i) {
        const auto r0 = static_cast<Eigen::Index>((o * 2) * l.after + i);
        const auto r1 = static_cast<Eigen::Index>((o * 2 + 1) * l.after + i);
        for (Eigen::Index col = 0; col < cols; ++col) {
          const cplx x0 = m(r0, col), x1 = m(r1, col);
          m(r0, col) = a * x0 + b * x1;
          m(r1, col) = c * x0 + e * x1;
        }
      }
    return;
  }
  Matrix gathered(static_cast<Eigen::Index>(l.d), cols);
  for (std::size_t o = 0; o < l.before; ++o)
    for (std::size_t i = 0; i < l.after; ++i) {
      for (std::size_t j = 0; j < l.d; ++j)
        gathered.row(static_cast<Eigen::Index>(j)) =
            m.row(static_cast<Eigen::Index>((o * l.d + j) * l.after + i));
      const Matrix out = op * gathered;
      for (std::size_t j = 0; j < l.d; ++j)
        m.row(static_cast<Eigen::Index>((o * l.d + j) * l.after + i)) =
            out.row(static_cast<Eigen::Index>(j));
    }
}

template <class M>
void left_controlled(M &m, const Dims &dims, std::size_t control,
                     std::size_t target, std::span<const ComplexOperator> ops) {
  if (control == target)
    throw DimensionError("control and target subsystems must differ");
  const Layout lc = layout_of(dims, control);
  const Layout lt = layout_of(dims, target);
  if (ops.size() != lc.d)
    throw DimensionError("need one operator per control basis state");
  for (const auto &op : ops)
    if (op.dim() != lt.d)
      throw DimensionError("controlled operator dimension mismatch");
  const std::size_t n = total_dim(dims);
  const Eigen::Index cols = m.cols();
  std::vector<Eigen::Index> rows(lt.d);
  Matrix gathered(static_cast<Eigen::Index>(lt.d), cols);
  for (std::size_t idx = 0; idx < n; ++idx) {
    if ((idx / lt.after) % lt.d != 0)
      continue;
    const std::size_t v = (idx / lc.after) % lc.d;
    const Matrix &op = ops[v].matrix();
    for (std::size_t j = 0; j < lt.d; ++j)
      rows[j] = static_cast<Eigen::Index>(idx + j * lt.after);
    if (lt.d == 2) {
      const cplx a = op(0, 0), b = op(0, 1), c = op(1, 0), e = op(1, 1);
      for (Eigen::Index col = 0; col < cols; ++col) {
        const cplx x0 = m(rows[0], col), x1 = m(rows[1], col);
        m(rows[0], col) = a * x0 + b * x1;
        m(rows[1], col) = c * x0 + e * x1;
      }
      continue;
    }
    for (std::size_t j = 0; j < lt.d; ++j)
      gathered.row(static_cast<Eigen::Index>(j)) = m.row(rows[j]);
    const Matrix out = op * gathered;
    for (std::size_t j = 0; j < lt.d; ++j)
      m.row(rows[j]) = out.row(static_cast<Eigen::Index>(j));
  }
}

inline std::size_t digit(std::size_t idx, const Layout &l) {
  return (idx / l.after) % l.d;
}

} // namespace

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Dims dims, Matrix entries)
    : dims_(std::move(dims)), rho_(std::move(entries)) {
  const std::size_t n = total_dim(dims_);
  if (static_cast<std::size_t>(rho_.rows()) != n ||
      static_cast<std::size_t>(rho_.cols()) != n)
    throw DimensionError("density matrix shape does not match subsystem dims");
  check_invariants();
}

DensityMatrix DensityMatrix::unchecked(Dims dims, Matrix entries) {
  DensityMatrix out;
  const std::size_t n = total_dim(dims);
  if (static_cast<std::size_t>(entries.rows()) != n ||
      static_cast<std::size_t>(entries.cols()) != n)
    throw DimensionError("density matrix shape does not match subsystem dims");
  out.dims_ = std::move(dims);
  out.rho_ = std::move(entries);
  return out;
}

DensityMatrix DensityMatrix::from_pure(Dims dims, const Vector &psi) {
  const double nrm = psi.norm();
  if (!(nrm > 0))
    throw NumericalError("cannot build a state from a zero vector");
  const Vector v = psi / nrm;
  return DensityMatrix(std::move(dims), v * v.adjoint());
}

DensityMatrix DensityMatrix::basis_state(Dims dims, std::size_t index) {
  const std::size_t n = total_dim(dims);
  if (index >= n)
    throw DimensionError("basis index out of range");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(n));
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return unchecked(std::move(dims), std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(Dims dims) {
  const auto n = static_cast<Eigen::Index>(total_dim(dims));
  return unchecked(std::move(dims),
                   Matrix::Identity(n, n) / static_cast<double>(n));
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::check_invariants(double eig_tol) const {
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm < kHermitianTol))
    throw NumericalError("density matrix is not Hermitian (defect " +
                         std::to_string(herm) + ")");
  const cplx tr = rho_.trace();
  if (!(std::abs(tr - cplx(1.0, 0.0)) < kTraceTol))
    throw NumericalError("density matrix trace " + std::to_string(tr.real()) +
                         " differs from 1");
  const double lmin = min_eigenvalue();
  if (!(lmin >= -eig_tol))
    throw NumericalError("density matrix has negative eigenvalue " +
                         std::to_string(lmin));
}

void DensityMatrix::renormalize() {
  const double tr = rho_.trace().real();
  if (!(tr > 0))
    throw NumericalError("cannot renormalise a state with non-positive trace");
  rho_ = 0.5 * (rho_ + rho_.adjoint()) / tr;
}

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  const ComplexOperator k =
      tensor(ComplexOperator(a.matrix()), ComplexOperator(b.matrix()));
  return DensityMatrix::unchecked(std::move(dims), k.matrix());
}

DensityMatrix evolve(const DensityMatrix &rho, const ComplexOperator &u) {
  if (u.dim() != rho.dim())
    throw DimensionError("evolve: operator dimension " +
                         std::to_string(u.dim()) + " does not match state " +
                         std::to_string(rho.dim()));
  const double defect = u.unitarity_defect();
  if (!(defect < kUnitaryTol))
    throw NumericalError("evolve: operator is not unitary (defect " +
                         std::to_string(defect) + ")");
  const Matrix &m = u.matrix();
  return DensityMatrix::unchecked(rho.dims(), m * rho.matrix() * m.adjoint());
}

DensityMatrix evolve_sequence(DensityMatrix rho,
                              std::span<const ComplexOperator> us,
                              std::size_t renorm_every) {
  std::size_t count = 0;
  for (const auto &u : us) {
    rho = evolve(rho, u);
    if (renorm_every > 0 && ++count % renorm_every == 0)
      rho.renormalize();
  }
  return rho;
}

DensityMatrix partial_trace(const DensityMatrix &rho,
                            std::span<const std::size_t> keep) {
  const Dims &dims = rho.dims();
  if (keep.empty())
    throw DimensionError("partial_trace: keep set is empty");
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size())
      throw DimensionError("partial_trace: invalid subsystem index " +
                           std::to_string(k));
    kept[k] = true;
  }
  Dims out_dims;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (kept[k])
      out_dims.push_back(dims[k]);
  const std::size_t n = rho.dim();
  const std::size_t nk = total_dim(out_dims);

  // Split each full index into (kept index, traced index).
  std::vector<std::size_t> kept_idx(n), traced_idx(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx, ki = 0, ti = 0, kmul = 1, tmul = 1;
    for (std::size_t s = dims.size(); s-- > 0;) {
      const std::size_t dg = rem % dims[s];
      rem /= dims[s];
      if (kept[s]) {
        ki += dg * kmul;
        kmul *= dims[s];
      } else {
        ti += dg * tmul;
        tmul *= dims[s];
      }
    }
    kept_idx[idx] = ki;
    traced_idx[idx] = ti;
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(nk),
                            static_cast<Eigen::Index>(nk));
  const Matrix &m = rho.matrix();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (traced_idx[r] == traced_idx[c])
        out(static_cast<Eigen::Index>(kept_idx[r]),
            static_cast<Eigen::Index>(kept_idx[c])) +=
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return DensityMatrix::unchecked(std::move(out_dims), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix &rho,
                            std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(),
                                                         keep.size()));
}

ComplexOperator embed(const Dims &dims, std::size_t subsystem,
                      const ComplexOperator &op) {
  if (subsystem >= dims.size())
    throw DimensionError("embed: subsystem index out of range");
  if (op.dim() != dims[subsystem])
    throw DimensionError("embed: operator dimension mismatch");
  ComplexOperator out = subsystem == 0 ? op : ComplexOperator::identity(dims[0]);
  for (std::size_t k = 1; k < dims.size(); ++k)
    out = tensor(out, k == subsystem ? op : ComplexOperator::identity(dims[k]));
  return out;
}

MeasurementOutcome measure_projective(const DensityMatrix &rho,
                                      std::span<const ComplexOperator> projectors,
                                      Rng &rng) {
  if (projectors.empty())
    throw std::invalid_argument("measure_projective: no projectors given");
  std::vector<double> probs;
  probs.reserve(projectors.size());
  double total = 0.0;
  for (const auto &p : projectors) {
    if (p.dim() != rho.dim())
      throw DimensionError("measure_projective: projector dimension mismatch");
    const double pk = (p.matrix() * rho.matrix()).trace().real();
    probs.push_back(pk);
    total += pk;
  }
  if (!(std::abs(total - 1.0) < kCompletenessTol))
    throw std::invalid_argument(
        "measure_projective: incomplete projector set (probabilities sum to " +
        std::to_string(total) + ")");
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t k = 0;
  for (; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc)
      break;
  }
  // Never settle on an outcome that has no weight because of rounding.
  while (probs[k] <= 0.0 && k > 0)
    --k;
  if (!(probs[k] > 0.0))
    throw NumericalError("measure_projective: sampled a zero-probability outcome");
  const Matrix &pm = projectors[k].matrix();
  Matrix post = pm * rho.matrix() * pm / probs[k];
  return {k, probs[k], DensityMatrix::unchecked(rho.dims(), std::move(post))};
}

MeasurementOutcome measure_projective(const DensityMatrix &rho,
                                      std::size_t subsystem,
                                      std::span<const ComplexOperator> projectors,
                                      Rng &rng) {
  std::vector<ComplexOperator> full;
  full.reserve(projectors.size());
  for (const auto &p : projectors)
    full.push_back(embed(rho.dims(), subsystem, p));
  return measure_projective(rho, full, rng);
}

DensityMatrix dephase(const DensityMatrix &rho,
                      std::span<const ComplexOperator> projectors) {
  Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto &p : projectors) {
    if (p.dim() != rho.dim())
      throw DimensionError("dephase: projector dimension mismatch");
    out += p.matrix() * rho.matrix() * p.matrix();
  }
  return DensityMatrix::unchecked(rho.dims(), std::move(out));
}

double BlochVector::xy_length() const { return std::hypot(x, y); }

BlochVector bloch_vector(const DensityMatrix &rho) {
  if (rho.dim() != 2)
    throw DimensionError("bloch_vector requires a single-qubit state");
  const Matrix &m = rho.matrix();
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(),
          (m(0, 0) - m(1, 1)).real()};
}

// ---------------------------------------------------------------------------
// StateVector and in-place kernels

StateVector::StateVector(Dims dims, Vector amps)
    : dims_(std::move(dims)), psi_(std::move(amps)) {
  if (total_dim(dims_) != static_cast<std::size_t>(psi_.size()))
    throw DimensionError("state vector length does not match subsystem dims");
}

StateVector StateVector::basis_state(Dims dims, std::size_t index) {
  const std::size_t n = total_dim(dims);
  if (index >= n)
    throw DimensionError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(dims), std::move(v));
}

void StateVector::normalize() {
  const double n = psi_.norm();
  if (!(n > 0))
    throw NumericalError("cannot normalise a zero state vector");
  psi_ /= n;
}

DensityMatrix StateVector::to_density() const {
  return DensityMatrix::unchecked(dims_, psi_ * psi_.adjoint());
}

void apply_local(StateVector &psi, std::size_t subsystem,
                 const ComplexOperator &op) {
  left_local(psi.mutable_amplitudes(), psi.dims(), subsystem, op.matrix());
}

void apply_local(DensityMatrix &rho, std::size_t subsystem,
                 const ComplexOperator &op) {
  // U rho U^dagger = U (U rho)^dagger for Hermitian rho.
  Matrix &m = rho.mutable_matrix();
  left_local(m, rho.dims(), subsystem, op.matrix());
  m.adjointInPlace();
  left_local(m, rho.dims(), subsystem, op.matrix());
}

void apply_controlled(StateVector &psi, std::size_t control,
                      std::size_t target,
                      std::span<const ComplexOperator> ops) {
  left_controlled(psi.mutable_amplitudes(), psi.dims(), control, target, ops);
}

void apply_controlled(DensityMatrix &rho, std::size_t control,
                      std::size_t target,
                      std::span<const ComplexOperator> ops) {
  Matrix &m = rho.mutable_matrix();
  left_controlled(m, rho.dims(), control, target, ops);
  m.adjointInPlace();
  left_controlled(m, rho.dims(), control, target, ops);
}

double basis_probability(const StateVector &psi, std::size_t subsystem,
                         std::size_t value) {
  const Layout l = layout_of(psi.dims(), subsystem);
  double p = 0.0;
  const Vector &v = psi.amplitudes();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (digit(static_cast<std::size_t>(i), l) == value)
      p += std::norm(v(i));
  return p;
}

double basis_probability(const DensityMatrix &rho, std::size_t subsystem,
                         std::size_t value) {
  const Layout l = layout_of(rho.dims(), subsystem);
  double p = 0.0;
  const Matrix &m = rho.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (digit(static_cast<std::size_t>(i), l) == value)
      p += m(i, i).real();
  return p;
}

double project_basis(StateVector &psi, std::size_t subsystem,
                     std::size_t value) {
  const Layout l = layout_of(psi.dims(), subsystem);
  Vector &v = psi.mutable_amplitudes();
  double p = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (digit(static_cast<std::size_t>(i), l) == value)
      p += std::norm(v(i));
    else
      v(i) = 0.0;
  }
  if (!(p > 0.0))
    throw NumericalError("projection onto a zero-probability outcome");
  v /= std::sqrt(p);
  return p;
}

double project_basis(DensityMatrix &rho, std::size_t subsystem,
                     std::size_t value) {
  const Layout l = layout_of(rho.dims(), subsystem);
  Matrix &m = rho.mutable_matrix();
  double p = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (digit(static_cast<std::size_t>(i), l) == value) {
      p += m(i, i).real();
    } else {
      m.row(i).setZero();
      m.col(i).setZero();
    }
  }
  if (!(p > 0.0))
    throw NumericalError("projection onto a zero-probability outcome");
  m /= p;
  return p;
}

} // namespace nvsim::qcore
