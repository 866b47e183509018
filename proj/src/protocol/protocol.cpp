/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace nvsim::protocol {

using qcore::cplx;

std::string to_string(HyperfineModel m) {
  return m == HyperfineModel::hyperfine ? "hyperfine" : "measured";
}

HyperfineModel hyperfine_model_from_string(const std::string &s) {
  if (s == "measured")
    return HyperfineModel::measured;
  if (s == "hyperfine")
    return HyperfineModel::hyperfine;
  throw std::invalid_argument("unknown hyperfine model '" + s +
                              "' (expected measured or hyperfine)");
}

void ProtocolConfig::validate() const {
  auto prob = [](double p, const char *name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  if (!(t_us >= 0.0) || !std::isfinite(t_us))
    throw std::invalid_argument("t_us must be >= 0");
  if (!(tau_us >= 0.0) || !std::isfinite(tau_us))
    throw std::invalid_argument("tau_us must be >= 0");
  if (n_reps < 0)
    throw std::invalid_argument("n_reps must be >= 0");
  reset.validate();
  prob(p_reset_needed, "p_reset_needed");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || checkpoints[i] > n_reps)
      throw std::invalid_argument("checkpoints must lie in [0, n_reps]");
    if (i > 0 && checkpoints[i] < checkpoints[i - 1])
      throw std::invalid_argument("checkpoints must be sorted ascending");
  }
  prob(channels.t1_flip_per_rep, "channels.t1_flip_per_rep");
  prob(channels.mw_error_per_pulse, "channels.mw_error_per_pulse");
  if (!(channels.ionization_n_d > 0.0))
    throw std::invalid_argument("channels.ionization_n_d must be > 0");
  if (!std::isfinite(coupling_offset_khz))
    throw std::invalid_argument("coupling_offset_khz must be finite");
  if (!(rep_period_us >= 0.0) || !std::isfinite(rep_period_us))
    throw std::invalid_argument("rep_period_us must be >= 0");
  if (trajectories < 1)
    throw std::invalid_argument("trajectories must be >= 1");
}

std::vector<int> ProtocolConfig::effective_checkpoints() const {
  if (checkpoints.empty())
    return {n_reps};
  return checkpoints;
}

namespace {

double sign_or_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

} // namespace

AttemptPlan make_plan(const ProtocolConfig &cfg, const node::FieldConfig &field,
                      const node::Register &reg,
                      const node::SubspaceSpec &subspace) {
  cfg.validate();
  field.validate();
  subspace.validate();
  AttemptPlan plan;
  plan.cfg = cfg;
  plan.subspace = subspace;
  plan.first_interval_us = cfg.t_us + cfg.tau_us;
  plan.second_interval_us = cfg.t_us;
  plan.p_ionize =
      pump::ionization_probability_per_reset(cfg.channels.ionization_n_d);

  std::vector<node::NuclearSpinParams> spins;
  std::vector<double> signed_dw;
  const double w0 = field.larmor_khz();
  for (int id : subspace.ids) {
    const auto &s = node::find_spin(reg, id);
    spins.push_back(s);
    signed_dw.push_back(cfg.model == HyperfineModel::measured
                            ? s.delta_omega_khz
                            : w0 - node::precession(s, field).omega_m1_khz);
  }

  // Distribute the coupling offset so that the logical |dw_eff| grows by C.
  const double c = cfg.coupling_offset_khz;
  std::vector<double> shift(spins.size(), 0.0);
  if (subspace.kind == node::SubspaceKind::single) {
    shift[0] = sign_or_plus(signed_dw[0]) * c;
  } else if (subspace.parity == node::Parity::antiparallel) {
    const double s = sign_or_plus(signed_dw[0] - signed_dw[1]);
    shift[0] = 0.5 * s * c;
    shift[1] = -0.5 * s * c;
  } else {
    const double s = sign_or_plus(signed_dw[0] + signed_dw[1]);
    shift[0] = shift[1] = 0.5 * s * c;
  }

  plan.dims.assign(spins.size() + 1, 2);
  for (std::size_t k = 0; k < spins.size(); ++k) {
    SpinDynamics d;
    d.id = spins[k].id;
    d.t2_star_ms = spins[k].t2_star_ms;
    d.f0_khz = w0;
    if (cfg.model == HyperfineModel::measured) {
      d.f1_khz = w0 - (spins[k].delta_omega_khz + shift[k]);
      d.tilt_rad = 0.0;
    } else {
      node::NuclearSpinParams shifted = spins[k];
      shifted.a_par_khz -= shift[k];
      const node::Precession p = node::precession(shifted, field);
      d.f1_khz = p.omega_m1_khz;
      d.tilt_rad = p.tilt_rad;
    }
    plan.spins.push_back(d);
    plan.first_interval.push_back(
        {node::precession_rotation(d.f0_khz, 0.0, plan.first_interval_us),
         node::precession_rotation(d.f1_khz, d.tilt_rad,
                                   plan.first_interval_us)});
    plan.second_interval.push_back(
        {node::precession_rotation(d.f0_khz, 0.0, plan.second_interval_us),
         node::precession_rotation(d.f1_khz, d.tilt_rad,
                                   plan.second_interval_us)});
  }
  return plan;
}

std::vector<double> draw_detunings(const AttemptPlan &plan, Rng &rng) {
  std::vector<double> out;
  if (!plan.cfg.channels.natural_dephasing)
    return out;
  for (const auto &s : plan.spins) {
    // <e^{i d t}> = exp(-(t/T2*)^2) needs sd(d) = sqrt(2) / T2*.
    const double t2_us = s.t2_star_ms * 1e3;
    out.push_back(std::sqrt(2.0) / t2_us * standard_normal(rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference attempt on a density matrix, written with the generic qcore
// kernels. The trajectory engine below is an optimised transcription.

std::pair<qcore::DensityMatrix, AttemptRecord>
run_attempt(const qcore::DensityMatrix &state, const AttemptPlan &plan,
            Rng &rng, std::span<const double> detunings) {
  using namespace qcore;
  if (state.dims() != plan.dims)
    throw DimensionError("run_attempt: state dimensions do not match the plan");
  if (!detunings.empty() && detunings.size() != plan.spins.size())
    throw std::invalid_argument("run_attempt: one detuning per spin expected");
  const ProtocolConfig &cfg = plan.cfg;
  const double mw = cfg.channels.mw_error_per_pulse;
  DensityMatrix rho = state;
  AttemptRecord rec;

  apply_local(rho, 0, gates::rx(std::numbers::pi / 2));
  if (mw > 0 && uniform01(rng) < mw)
    apply_local(rho, 0, gates::pauli_x());
  for (std::size_t s = 0; s < plan.spins.size(); ++s)
    apply_controlled(rho, 0, s + 1, plan.first_interval[s]);
  apply_local(rho, 0, gates::rx(std::numbers::pi));
  if (mw > 0 && uniform01(rng) < mw)
    apply_local(rho, 0, gates::pauli_x());
  for (std::size_t s = 0; s < plan.spins.size(); ++s)
    apply_controlled(rho, 0, s + 1, plan.second_interval[s]);

  const bool needs_reset = uniform01(rng) < cfg.p_reset_needed;
  project_basis(rho, 0, needs_reset ? 1 : 0);
  double elapsed_us = plan.first_interval_us + plan.second_interval_us;
  if (needs_reset) {
    rec.projection = Outcome::minus_one;
    const pump::ResetSample smp = pump::sample_reset(cfg.reset, rng);
    rec.reset_time_ns = smp.duration_ns;
    rec.via_singlet = smp.via_singlet;
    if (plan.p_ionize > 0)
      rec.ionized = uniform01(rng) < plan.p_ionize;
    const double d_us = smp.duration_ns * 1e-3;
    const bool frozen = smp.via_singlet && !cfg.dephasing_during_singlet;
    for (std::size_t s = 0; s < plan.spins.size(); ++s) {
      const auto &sp = plan.spins[s];
      apply_local(rho, s + 1,
                  frozen ? node::precession_rotation(sp.f0_khz, 0.0, d_us)
                         : node::precession_rotation(sp.f1_khz, sp.tilt_rad,
                                                     d_us));
    }
    apply_local(rho, 0, gates::pauli_x());
    elapsed_us += d_us;
  }
  for (std::size_t s = 0; s < plan.spins.size(); ++s) {
    double angle =
        -node::angular_rad_per_us(plan.spins[s].f0_khz) * elapsed_us;
    if (!detunings.empty())
      angle += detunings[s] * cfg.rep_period_us;
    apply_local(rho, s + 1, gates::rz(angle));
  }
  if (cfg.channels.t1_flip_per_rep > 0)
    for (std::size_t s = 0; s < plan.spins.size(); ++s)
      if (uniform01(rng) < cfg.channels.t1_flip_per_rep)
        apply_local(rho, s + 1, gates::pauli_x());
  return {std::move(rho), rec};
}

// ---------------------------------------------------------------------------
// Trajectory engine: qubit registers only, electron = most significant bit.

namespace {

struct M2 {
  cplx a, b, c, d; // [[a, b], [c, d]]
};

M2 to_m2(const qcore::ComplexOperator &op) {
  return {op(0, 0), op(0, 1), op(1, 0), op(1, 1)};
}

M2 rotation_m2(double freq_khz, double tilt, double duration_us) {
  const double angle = node::angular_rad_per_us(freq_khz) * duration_us;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const double nx = std::sin(tilt), nz = std::cos(tilt);
  return {cplx(c, -s * nz), cplx(0, -s * nx), cplx(0, -s * nx),
          cplx(c, s * nz)};
}

inline void local(cplx *psi, std::size_t n, std::size_t stride, const M2 &m) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i & stride)
      continue;
    const cplx x0 = psi[i], x1 = psi[i | stride];
    psi[i] = m.a * x0 + m.b * x1;
    psi[i | stride] = m.c * x0 + m.d * x1;
  }
}

inline void flip(cplx *psi, std::size_t n, std::size_t stride) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(i & stride))
      std::swap(psi[i], psi[i | stride]);
}

inline void phase_z(cplx *psi, std::size_t n, std::size_t stride,
                    double angle) {
  const cplx lo = std::polar(1.0, -angle / 2), hi = std::polar(1.0, angle / 2);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= (i & stride) ? hi : lo;
}

inline void controlled(cplx *psi, std::size_t n, std::size_t estride,
                       std::size_t stride, const M2 &m0, const M2 &m1) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i & stride)
      continue;
    const M2 &m = (i & estride) ? m1 : m0;
    const cplx x0 = psi[i], x1 = psi[i | stride];
    psi[i] = m.a * x0 + m.b * x1;
    psi[i | stride] = m.c * x0 + m.d * x1;
  }
}

struct FastPlan {
  std::size_t n = 0;       // amplitudes
  std::size_t estride = 0; // electron bit
  std::vector<std::size_t> strides;
  std::vector<M2> first0, first1, second0, second1;
  M2 half_pi, pi;

  explicit FastPlan(const AttemptPlan &plan) {
    const std::size_t k = plan.spins.size();
    n = std::size_t{1} << (k + 1);
    estride = std::size_t{1} << k;
    for (std::size_t s = 0; s < k; ++s) {
      strides.push_back(std::size_t{1} << (k - 1 - s));
      first0.push_back(to_m2(plan.first_interval[s][0]));
      first1.push_back(to_m2(plan.first_interval[s][1]));
      second0.push_back(to_m2(plan.second_interval[s][0]));
      second1.push_back(to_m2(plan.second_interval[s][1]));
    }
    half_pi = to_m2(qcore::gates::rx(std::numbers::pi / 2));
    pi = to_m2(qcore::gates::rx(std::numbers::pi));
  }
};

AttemptRecord fast_attempt(cplx *psi, const FastPlan &fp,
                           const AttemptPlan &plan, Rng &rng,
                           std::span<const double> detunings) {
  const ProtocolConfig &cfg = plan.cfg;
  const double mw = cfg.channels.mw_error_per_pulse;
  const std::size_t n = fp.n, es = fp.estride, k = fp.strides.size();
  AttemptRecord rec;

  local(psi, n, es, fp.half_pi);
  if (mw > 0 && uniform01(rng) < mw)
    flip(psi, n, es);
  for (std::size_t s = 0; s < k; ++s)
    controlled(psi, n, es, fp.strides[s], fp.first0[s], fp.first1[s]);
  local(psi, n, es, fp.pi);
  if (mw > 0 && uniform01(rng) < mw)
    flip(psi, n, es);
  for (std::size_t s = 0; s < k; ++s)
    controlled(psi, n, es, fp.strides[s], fp.second0[s], fp.second1[s]);

  const bool needs_reset = uniform01(rng) < cfg.p_reset_needed;
  double p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<bool>(i & es) == needs_reset)
      p += std::norm(psi[i]);
    else
      psi[i] = 0.0;
  }
  if (!(p > 0.0))
    throw NumericalError("projection onto a zero-probability outcome");
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= scale;

  double elapsed_us = plan.first_interval_us + plan.second_interval_us;
  if (needs_reset) {
    rec.projection = Outcome::minus_one;
    const pump::ResetSample smp = pump::sample_reset(cfg.reset, rng);
    rec.reset_time_ns = smp.duration_ns;
    rec.via_singlet = smp.via_singlet;
    if (plan.p_ionize > 0)
      rec.ionized = uniform01(rng) < plan.p_ionize;
    const double d_us = smp.duration_ns * 1e-3;
    const bool frozen = smp.via_singlet && !cfg.dephasing_during_singlet;
    for (std::size_t s = 0; s < k; ++s) {
      const auto &sp = plan.spins[s];
      local(psi, n, fp.strides[s],
            frozen ? rotation_m2(sp.f0_khz, 0.0, d_us)
                   : rotation_m2(sp.f1_khz, sp.tilt_rad, d_us));
    }
    flip(psi, n, es);
    elapsed_us += d_us;
  }
  for (std::size_t s = 0; s < k; ++s) {
    double angle =
        -node::angular_rad_per_us(plan.spins[s].f0_khz) * elapsed_us;
    if (!detunings.empty())
      angle += detunings[s] * cfg.rep_period_us;
    phase_z(psi, n, fp.strides[s], angle);
  }
  if (cfg.channels.t1_flip_per_rep > 0)
    for (std::size_t s = 0; s < k; ++s)
      if (uniform01(rng) < cfg.channels.t1_flip_per_rep)
        flip(psi, n, fp.strides[s]);
  return rec;
}

bool all_qubits(const qcore::Dims &dims) {
  return std::all_of(dims.begin(), dims.end(),
                     [](std::size_t d) { return d == 2; });
}

} // namespace

AttemptRecord run_attempt(qcore::StateVector &state, const AttemptPlan &plan,
                          Rng &rng, std::span<const double> detunings) {
  if (state.dims() != plan.dims || !all_qubits(state.dims()))
    throw DimensionError("run_attempt: state dimensions do not match the plan");
  if (!detunings.empty() && detunings.size() != plan.spins.size())
    throw std::invalid_argument("run_attempt: one detuning per spin expected");
  const FastPlan fp(plan);
  return fast_attempt(state.mutable_amplitudes().data(), fp, plan, rng,
                      detunings);
}

qcore::StateVector initial_joint_state(const node::SubspaceSpec &sub,
                                       InitialState initial) {
  sub.validate();
  const node::LogicalBasis lb = node::logical_basis(sub);
  qcore::Dims dims(sub.n_spins() + 1, 2);
  qcore::Vector psi = qcore::Vector::Zero(
      static_cast<Eigen::Index>(qcore::total_dim(dims)));
  // Electron |0> is the lower half of the index range.
  if (initial == InitialState::superposition) {
    psi(static_cast<Eigen::Index>(lb.zero)) = std::sqrt(0.5);
    psi(static_cast<Eigen::Index>(lb.one)) = std::sqrt(0.5);
  } else {
    psi(static_cast<Eigen::Index>(lb.zero)) = 1.0;
  }
  return qcore::StateVector(std::move(dims), std::move(psi));
}

namespace {

qcore::BlochVector bloch_from_amplitudes(const cplx *psi, std::size_t n,
                                         const node::LogicalBasis &lb) {
  const std::size_t half = n / 2;
  cplx rho01 = 0.0;
  double p0 = 0.0, p1 = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    const cplx a0 = psi[e * half + lb.zero], a1 = psi[e * half + lb.one];
    rho01 += a0 * std::conj(a1);
    p0 += std::norm(a0);
    p1 += std::norm(a1);
  }
  return {2.0 * rho01.real(), -2.0 * rho01.imag(), p0 - p1};
}

} // namespace

qcore::BlochVector logical_bloch(const qcore::StateVector &state,
                                 const node::SubspaceSpec &sub) {
  if (state.dims().size() != sub.n_spins() + 1 || !all_qubits(state.dims()))
    throw DimensionError("logical_bloch: state does not match the subspace");
  return bloch_from_amplitudes(state.amplitudes().data(), state.dim(),
                               node::logical_basis(sub));
}

qcore::BlochVector logical_bloch(const qcore::DensityMatrix &state,
                                 const node::SubspaceSpec &sub) {
  if (state.dims().size() != sub.n_spins() + 1 || !all_qubits(state.dims()))
    throw DimensionError("logical_bloch: state does not match the subspace");
  const node::LogicalBasis lb = node::logical_basis(sub);
  const std::size_t half = state.dim() / 2;
  const auto &m = state.matrix();
  cplx rho01 = 0.0;
  double p0 = 0.0, p1 = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    const auto i0 = static_cast<Eigen::Index>(e * half + lb.zero);
    const auto i1 = static_cast<Eigen::Index>(e * half + lb.one);
    rho01 += m(i0, i1);
    p0 += m(i0, i0).real();
    p1 += m(i1, i1).real();
  }
  return {2.0 * rho01.real(), -2.0 * rho01.imag(), p0 - p1};
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
  double x = 0.0, y = 0.0, z = 0.0;
  bool alive = false;
};

void run_trajectory(std::size_t traj, const AttemptPlan &plan,
                    const FastPlan &fp, const qcore::StateVector &init,
                    const std::vector<int> &cks, const node::LogicalBasis &lb,
                    Sample *out) {
  Rng rng = make_stream(plan.cfg.seed, traj);
  const std::vector<double> det = draw_detunings(plan, rng);
  qcore::Vector psi = init.amplitudes();
  cplx *amp = psi.data();
  const std::size_t n = fp.n;
  std::size_t ck = 0;
  bool alive = true;
  auto record = [&](int rep) {
    while (ck < cks.size() && cks[ck] == rep) {
      Sample &s = out[ck];
      s.alive = alive;
      if (alive) {
        const qcore::BlochVector b = bloch_from_amplitudes(amp, n, lb);
        s.x = b.x;
        s.y = b.y;
        s.z = b.z;
      }
      ++ck;
    }
  };
  record(0);
  const int last = cks.empty() ? 0 : cks.back();
  for (int rep = 1; rep <= last && alive; ++rep) {
    const AttemptRecord rec = fast_attempt(amp, fp, plan, rng, det);
    if (rec.ionized)
      alive = false;
    if (rep % 1000 == 0)
      psi.normalize();
    record(rep);
  }
  while (ck < cks.size())
    out[ck++].alive = false;
}

} // namespace

MemoryTrace run_sequence(const ProtocolConfig &cfg,
                         const node::FieldConfig &field,
                         const node::Register &reg,
                         const node::SubspaceSpec &subspace,
                         InitialState initial, const ExecOptions &exec) {
  const AttemptPlan plan = make_plan(cfg, field, reg, subspace);
  const FastPlan fp(plan);
  const std::vector<int> cks = cfg.effective_checkpoints();
  const auto ntraj = static_cast<std::size_t>(cfg.trajectories);
  const std::size_t nck = cks.size();
  const qcore::StateVector init = initial_joint_state(subspace, initial);
  const node::LogicalBasis lb = node::logical_basis(subspace);

  std::vector<Sample> samples(ntraj * nck);
  const unsigned nthreads = std::max(
      1u, std::min<unsigned>(exec.threads, static_cast<unsigned>(ntraj)));
  auto worker = [&](unsigned tid) {
    for (std::size_t t = tid; t < ntraj; t += nthreads)
      run_trajectory(t, plan, fp, init, cks, lb, &samples[t * nck]);
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (unsigned tid = 0; tid < nthreads; ++tid)
      pool.emplace_back([&, tid] {
        try {
          worker(tid);
        } catch (...) {
          errors[tid] = std::current_exception();
        }
      });
    for (auto &th : pool)
      th.join();
    for (auto &e : errors)
      if (e)
        std::rethrow_exception(e);
  }

  // Sequential reduction in trajectory order keeps the sums bit-stable.
  MemoryTrace trace;
  trace.checkpoints = cks;
  for (std::size_t c = 0; c < nck; ++c) {
    double sx = 0, sy = 0, sz = 0;
    std::size_t alive = 0;
    for (std::size_t t = 0; t < ntraj; ++t) {
      const Sample &s = samples[t * nck + c];
      if (!s.alive)
        continue;
      sx += s.x;
      sy += s.y;
      sz += s.z;
      ++alive;
    }
    trace.counts.push_back(alive);
    trace.survival.push_back(static_cast<double>(alive) /
                             static_cast<double>(ntraj));
    trace.correction.push_back(1.0);
    if (alive == 0) {
      trace.xy_length.push_back(0.0);
      trace.xy_err.push_back(0.0);
      trace.z_value.push_back(0.0);
      trace.z_err.push_back(0.0);
      trace.flags.push_back(trace_empty);
      continue;
    }
    const double na = static_cast<double>(alive);
    const double mx = sx / na, my = sy / na, mz = sz / na;
    const double len = std::hypot(mx, my);
    // Spread of the per-trajectory projection onto the mean direction.
    const double ux = len > 0 ? mx / len : 1.0, uy = len > 0 ? my / len : 0.0;
    double su = 0, sz2 = 0;
    for (std::size_t t = 0; t < ntraj; ++t) {
      const Sample &s = samples[t * nck + c];
      if (!s.alive)
        continue;
      const double du = s.x * ux + s.y * uy - len;
      const double dz = s.z - mz;
      su += du * du;
      sz2 += dz * dz;
    }
    const double denom = alive > 1 ? na - 1.0 : 1.0;
    trace.xy_length.push_back(std::min(len, 1.0));
    trace.xy_err.push_back(alive > 1 ? std::sqrt(su / denom / na) : 0.0);
    trace.z_value.push_back(mz);
    trace.z_err.push_back(alive > 1 ? std::sqrt(sz2 / denom / na) : 0.0);
    trace.flags.push_back(trace_ok);
  }
  return trace;
}

std::vector<SweepRow> sweep(SweepParam param, const std::vector<double> &grid,
                            const ProtocolConfig &base,
                            const node::FieldConfig &field,
                            const node::Register &reg,
                            const node::SubspaceSpec &subspace,
                            InitialState initial, const ExecOptions &exec) {
  if (grid.empty())
    throw std::invalid_argument("sweep: grid is empty");
  std::vector<SweepRow> rows;
  for (double v : grid) {
    ProtocolConfig cfg = base;
    switch (param) {
    case SweepParam::tau:
      cfg.tau_us = v;
      break;
    case SweepParam::t:
      cfg.t_us = v;
      break;
    case SweepParam::n_reps:
      if (!(v >= 0.0) || v != std::floor(v))
        throw std::invalid_argument("sweep: n_reps grid values must be "
                                    "non-negative integers");
      cfg.n_reps = static_cast<int>(v);
      break;
    }
    cfg.checkpoints = {cfg.n_reps};
    const MemoryTrace tr = run_sequence(cfg, field, reg, subspace, initial, exec);
    rows.push_back({v, tr.xy_length.back(), tr.xy_err.back(),
                    tr.z_value.back(), tr.z_err.back(), tr.survival.back(),
                    tr.flags.back()});
  }
  return rows;
}

} // namespace nvsim::protocol
