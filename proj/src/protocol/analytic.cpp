/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "nvsim/protocol.hpp"

namespace nvsim::protocol {

double analytic_fidelity(double delta_omega_khz, double tau_us, long long n) {
  if (n < 0)
    throw std::invalid_argument("analytic_fidelity: n must be >= 0");
  const double w = node::angular_rad_per_us(delta_omega_khz);
  const double x = w * w * tau_us * tau_us / 2.0;
  // (1 + e^{-x})^n / 2^n = exp(n log1p(expm1(-x) / 2)); exact at x = 0.
  const double log_q = std::log1p(std::expm1(-x) / 2.0);
  return 0.5 + 0.5 * std::exp(static_cast<double>(n) * log_q);
}

double extended_n1e(double delta_omega_khz, double tau_us, double c_khz) {
  if (!std::isfinite(delta_omega_khz) || !std::isfinite(tau_us) ||
      !std::isfinite(c_khz))
    throw std::invalid_argument("extended_n1e: inputs must be finite");
  if (!(tau_us > 0.0))
    throw std::invalid_argument("extended_n1e: tau must be > 0");
  const double w = node::angular_rad_per_us(std::abs(delta_omega_khz) + c_khz);
  const double x = w * w * tau_us * tau_us / 2.0;
  const double log_q = std::log1p(std::expm1(-x) / 2.0);
  if (log_q == 0.0)
    return std::numeric_limits<double>::infinity();
  return -1.0 / log_q;
}

double per_rep_coherence_exact(double delta_omega_khz, double tau_us,
                               double tau_mean_us) {
  if (!(tau_mean_us > 0.0))
    throw std::invalid_argument("per_rep_coherence_exact: tau_mean must be > 0");
  const double w = node::angular_rad_per_us(delta_omega_khz);
  const std::complex<double> no_reset = std::polar(1.0, w * tau_us);
  // Characteristic function of an exponential with mean tau_m.
  const std::complex<double> reset =
      std::complex<double>(1.0, w * tau_mean_us) /
      (1.0 + w * w * tau_mean_us * tau_mean_us);
  return 0.5 * std::abs(no_reset + reset);
}

} // namespace nvsim::protocol
