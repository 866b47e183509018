/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/protocol.hpp"

namespace nvsim::analysis {

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 1.0;
};

enum FitFlag : unsigned {
  flag_none = 0,
  flag_no_decay = 1u << 0,          // rate <= 0, n_1e reported as +inf
  flag_amplitude_clamped = 1u << 1, // amplitude hit its bound
  flag_not_converged = 1u << 2,
  flag_flat = 1u << 3,              // no peak in the data
  flag_degenerate = 1u << 4,        // a component carries no information
  flag_ill_conditioned = 1u << 5,   // covariance condition number > 1e8
};

std::vector<std::string> flag_names(unsigned flags);

// ---------------------------------------------------------------------------
// Generic damped Gauss-Newton (Levenberg-Marquardt)

struct LeastSquaresProblem {
  /// Weighted residuals (model - data) / err.
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> residuals;
  /// Jacobian of the residuals; numeric central differences when empty.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> jacobian;
  /// Maps a trial point back into the feasible box; identity when empty.
  std::function<void(Eigen::VectorXd &)> project;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double rel_step_tol = 1e-8;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd errors;     // sqrt(diag(cov))
  Eigen::MatrixXd covariance; // scaled by chi2 / dof when dof > 0
  double residual_norm = 0.0; // ||weighted residuals||
  double condition_number = 0.0;
  int iterations = 0;
  bool converged = false;
};

LeastSquaresResult least_squares(const LeastSquaresProblem &problem,
                                 Eigen::VectorXd start,
                                 const LeastSquaresOptions &opts = {});

Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &f,
    const Eigen::VectorXd &p);

// ---------------------------------------------------------------------------
// Model fits

struct DecayFit {
  double amplitude = 0.0, amplitude_err = 0.0;
  double n_1e = 0.0, n_1e_err = 0.0; // repetitions (or ns for time data)
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  unsigned flags = flag_none;
};

/// value = A exp(-x / n_1e), A in (0, 1.05].
DecayFit fit_exponential(std::vector<DataPoint> points);

struct GaussianPeakFit {
  double center = 0.0, center_err = 0.0;
  double width = 0.0, width_err = 0.0;
  double amplitude = 0.0, amplitude_err = 0.0;
  double offset = 0.0, offset_err = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  unsigned flags = flag_none;
};

/// value = A exp(-(x - c)^2 / (2 w^2)) + offset.
GaussianPeakFit fit_gaussian_peak(std::vector<DataPoint> points);

struct DoubleExpFit {
  double w = 0.0, w_err = 0.0;
  double t_fast = 0.0, t_fast_err = 0.0;
  double t_slow = 0.0, t_slow_err = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  unsigned flags = flag_none;
};

/// value = w exp(-x / t_fast) + (1 - w) exp(-x / t_slow), t_fast <= t_slow.
DoubleExpFit fit_double_exponential(std::vector<DataPoint> points);

struct ScalingPoint {
  double delta_omega_khz = 0.0;
  double n_1e = 0.0;
  double err = 0.0;
};

struct ScalingFit {
  double tau_us = 0.0, tau_err = 0.0;
  double c_khz = 0.0, c_err = 0.0;
  double residual_norm = 0.0;
  double condition_number = 0.0;
  int iterations = 0;
  bool converged = false;
  unsigned flags = flag_none;
};

/// Fit of N_1/e(dw) from the extended dephasing model in log space.
ScalingFit fit_scaling_model(std::vector<ScalingPoint> points,
                             double tau_start_us = 0.4,
                             double c_start_khz = 10.0);

// ---------------------------------------------------------------------------
// Trace post-processing

/// Divides each checkpoint by exp(-(N t_rep / T2*)^2) (values and errors).
/// Values above 1.05 are capped and flagged; factors below 0.05 are flagged
/// as unreliable. An infinite T2* leaves the trace unchanged.
protocol::MemoryTrace correct_t2star(const protocol::MemoryTrace &trace,
                                     double t2_star_ms, double time_per_rep_us);

/// Multiplies the stored correction factors back in.
protocol::MemoryTrace uncorrect_t2star(const protocol::MemoryTrace &trace);

/// Points for fit_exponential from a trace (empty/unreliable checkpoints
/// skipped, zero errors floored).
std::vector<DataPoint> trace_points(const protocol::MemoryTrace &trace);

} // namespace nvsim::analysis
