/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace nvsim::analysis {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<std::string> flag_names(unsigned flags) {
  std::vector<std::string> out;
  if (flags & flag_no_decay)
    out.push_back("no_decay");
  if (flags & flag_amplitude_clamped)
    out.push_back("amplitude_clamped");
  if (flags & flag_not_converged)
    out.push_back("not_converged");
  if (flags & flag_flat)
    out.push_back("flat");
  if (flags & flag_degenerate)
    out.push_back("degenerate");
  if (flags & flag_ill_conditioned)
    out.push_back("ill_conditioned");
  return out;
}

MatrixXd numeric_jacobian(
    const std::function<VectorXd(const VectorXd &)> &f, const VectorXd &p) {
  const VectorXd f0 = f(p);
  MatrixXd jac(f0.size(), p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(p(j)), 1e-3);
    VectorXd lo = p, hi = p;
    lo(j) -= h;
    hi(j) += h;
    jac.col(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return jac;
}

LeastSquaresResult least_squares(const LeastSquaresProblem &problem,
                                 VectorXd p, const LeastSquaresOptions &opts) {
  auto project = [&](VectorXd &v) {
    if (problem.project)
      problem.project(v);
  };
  auto jacobian = [&](const VectorXd &v) {
    return problem.jacobian ? problem.jacobian(v)
                            : numeric_jacobian(problem.residuals, v);
  };
  project(p);
  VectorXd r = problem.residuals(p);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost))
    throw NumericalError("least squares: non-finite residuals at start point");

  LeastSquaresResult res;
  double lambda = 1e-3;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const MatrixXd J = jacobian(p);
    const MatrixXd A = J.transpose() * J;
    const VectorXd g = J.transpose() * r;
    const double dmax = std::max(A.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    while (lambda < 1e16) {
      MatrixXd Ad = A;
      for (Eigen::Index i = 0; i < Ad.rows(); ++i)
        Ad(i, i) += lambda * std::max(A(i, i), 1e-12 * dmax);
      VectorXd trial = p + Ad.ldlt().solve(-g);
      project(trial);
      const VectorXd rt = problem.residuals(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct <= cost) {
        double step = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i)
          step = std::max(step, std::abs(trial(i) - p(i)) /
                                    (std::abs(trial(i)) + 1e-10));
        p = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (step < opts.rel_step_tol)
          res.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No damping level lowers the cost: we sit in a numerical minimum.
      res.converged = true;
    }
    if (res.converged)
      break;
  }
  res.iterations = it + 1;
  res.params = p;
  res.residual_norm = std::sqrt(cost);

  const MatrixXd J = jacobian(p);
  const MatrixXd A = J.transpose() * J;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const VectorXd ev = es.eigenvalues();
  const double emax = ev.maxCoeff(), emin = ev.minCoeff();
  res.condition_number = emin > 0 ? emax / emin
                                  : std::numeric_limits<double>::infinity();
  // Pseudo-inverse through the eigen decomposition.
  VectorXd inv = VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-14 * std::max(emax, 1e-300))
      inv(i) = 1.0 / ev(i);
  res.covariance = es.eigenvectors() * inv.asDiagonal() *
                   es.eigenvectors().transpose();
  const Eigen::Index dof = r.size() - p.size();
  if (dof > 0)
    res.covariance *= cost / static_cast<double>(dof);
  res.errors = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return res;
}

namespace {

// Deterministic order makes every fit exactly invariant under reordering.
template <class P, class Key> void canonical_sort(std::vector<P> &v, Key key) {
  std::sort(v.begin(), v.end(),
            [&](const P &a, const P &b) { return key(a) < key(b); });
}

void prepare(std::vector<DataPoint> &pts, std::size_t min_points,
             const char *who) {
  canonical_sort(pts, [](const DataPoint &p) {
    return std::make_tuple(p.x, p.y, p.err);
  });
  std::vector<DataPoint> kept;
  for (const auto &p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument(std::string(who) + ": non-finite data point");
    if (p.err > 0.0 && std::isfinite(p.err))
      kept.push_back(p);
  }
  if (kept.empty())
    throw std::invalid_argument(std::string(who) +
                                ": all points have zero weight");
  if (kept.size() < min_points)
    throw std::invalid_argument(std::string(who) + ": need at least " +
                                std::to_string(min_points) +
                                " weighted points");
  pts = std::move(kept);
}

} // namespace

// ---------------------------------------------------------------------------

DecayFit fit_exponential(std::vector<DataPoint> pts) {
  prepare(pts, 3, "fit_exponential");
  const auto m = static_cast<Eigen::Index>(pts.size());
  double xmax = 0.0;
  for (const auto &p : pts)
    xmax = std::max(xmax, std::abs(p.x));

  // Start: weighted log-linear regression over positive values.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int npos = 0;
  for (const auto &p : pts) {
    if (p.y <= 0.0)
      continue;
    const double w = (p.y / p.err) * (p.y / p.err);
    const double ly = std::log(p.y);
    sw += w;
    sx += w * p.x;
    sy += w * ly;
    sxx += w * p.x * p.x;
    sxy += w * p.x * ly;
    ++npos;
  }
  double a0 = 1.0, k0 = xmax > 0 ? 1.0 / xmax : 1.0;
  const double det = sw * sxx - sx * sx;
  if (npos >= 2 && det > 0) {
    const double slope = (sw * sxy - sx * sy) / det;
    const double icpt = (sy - slope * sx) / sw;
    a0 = std::exp(icpt);
    if (-slope > 0)
      k0 = -slope;
  }
  a0 = std::clamp(a0, 1e-6, 1.05);

  auto residuals = [&](const VectorXd &q) {
    VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      r(i) = (q(0) * std::exp(-q(1) * p.x) - p.y) / p.err;
    }
    return r;
  };
  auto jac = [&](const VectorXd &q) {
    MatrixXd J(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      const double e = std::exp(-q(1) * p.x);
      J(i, 0) = e / p.err;
      J(i, 1) = -q(0) * p.x * e / p.err;
    }
    return J;
  };
  LeastSquaresProblem prob{residuals, jac, [](VectorXd &q) {
                             q(0) = std::clamp(q(0), 1e-12, 1.05);
                             q(1) = std::max(q(1), 0.0);
                           }};
  VectorXd start(2);
  start << a0, k0;
  const LeastSquaresResult r = least_squares(prob, start);

  DecayFit out;
  out.amplitude = r.params(0);
  out.amplitude_err = r.errors(0);
  out.residual_norm = r.residual_norm;
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (!r.converged)
    out.flags |= flag_not_converged;
  if (out.amplitude >= 1.05 - 1e-12)
    out.flags |= flag_amplitude_clamped;
  const double k = r.params(1);
  if (!(k > 0.0) || k * std::max(xmax, 1e-300) < 1e-12) {
    out.n_1e = std::numeric_limits<double>::infinity();
    out.n_1e_err = std::numeric_limits<double>::infinity();
    out.flags |= flag_no_decay;
  } else {
    out.n_1e = 1.0 / k;
    out.n_1e_err = r.errors(1) / (k * k);
  }
  return out;
}

GaussianPeakFit fit_gaussian_peak(std::vector<DataPoint> pts) {
  prepare(pts, 4, "fit_gaussian_peak");
  const auto m = static_cast<Eigen::Index>(pts.size());
  double ymin = pts[0].y, ymax = pts[0].y, xpk = pts[0].x;
  double xlo = pts.front().x, xhi = pts.back().x;
  for (const auto &p : pts) {
    if (p.y > ymax) {
      ymax = p.y;
      xpk = p.x;
    }
    ymin = std::min(ymin, p.y);
  }
  GaussianPeakFit out;
  const double span = std::max(xhi - xlo, 1e-300);
  if (ymax - ymin <= 1e-12 * std::max(1.0, std::abs(ymax))) {
    double sx = 0;
    for (const auto &p : pts)
      sx += p.x;
    out.center = sx / static_cast<double>(pts.size());
    out.width = span;
    out.amplitude = 0.0;
    out.offset = ymin;
    out.converged = true;
    out.flags |= flag_flat;
    return out;
  }
  // Second moment of the baseline-subtracted data around the maximum.
  double s0 = 0, s2 = 0;
  for (const auto &p : pts) {
    const double h = p.y - ymin;
    s0 += h;
    s2 += h * (p.x - xpk) * (p.x - xpk);
  }
  double w0 = s0 > 0 ? std::sqrt(s2 / s0) : span / 4;
  w0 = std::clamp(w0, span / 50, span);

  auto residuals = [&](const VectorXd &q) {
    VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      const double d = (p.x - q(1)) / q(2);
      r(i) = (q(0) * std::exp(-0.5 * d * d) + q(3) - p.y) / p.err;
    }
    return r;
  };
  auto jac = [&](const VectorXd &q) {
    MatrixXd J(m, 4);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      const double d = (p.x - q(1)) / q(2);
      const double g = std::exp(-0.5 * d * d);
      J(i, 0) = g / p.err;
      J(i, 1) = q(0) * g * d / q(2) / p.err;
      J(i, 2) = q(0) * g * d * d / q(2) / p.err;
      J(i, 3) = 1.0 / p.err;
    }
    return J;
  };
  LeastSquaresProblem prob{residuals, jac, [span](VectorXd &q) {
                             q(2) = std::max(std::abs(q(2)), 1e-9 * span);
                           }};
  VectorXd start(4);
  start << ymax - ymin, xpk, w0, ymin;
  const LeastSquaresResult r = least_squares(prob, start);
  out.amplitude = r.params(0);
  out.amplitude_err = r.errors(0);
  out.center = r.params(1);
  out.center_err = r.errors(1);
  out.width = r.params(2);
  out.width_err = r.errors(2);
  out.offset = r.params(3);
  out.offset_err = r.errors(3);
  out.residual_norm = r.residual_norm;
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (!r.converged)
    out.flags |= flag_not_converged;
  if (std::abs(out.amplitude) <
      1e-6 * (std::abs(out.offset) + std::abs(ymax - ymin)))
    out.flags |= flag_flat;
  return out;
}

DoubleExpFit fit_double_exponential(std::vector<DataPoint> pts) {
  prepare(pts, 4, "fit_double_exponential");
  const auto m = static_cast<Eigen::Index>(pts.size());
  const double xmax = std::max(pts.back().x, 1e-300);

  // Peel: slow component from the tail, fast one from what remains early.
  auto loglin = [](const std::vector<std::pair<double, double>> &xy,
                   double &rate, double &amp) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : xy) {
      if (y <= 0)
        continue;
      const double ly = std::log(y);
      n += 1;
      sx += x;
      sy += ly;
      sxx += x * x;
      sxy += x * ly;
    }
    const double det = n * sxx - sx * sx;
    if (n < 2 || !(det > 0))
      return false;
    const double slope = (n * sxy - sx * sy) / det;
    rate = -slope;
    amp = std::exp((sy - slope * sx) / n);
    return rate > 0;
  };
  double t_slow0 = xmax / 3, t_fast0 = xmax / 30, w0 = 0.5;
  {
    std::vector<std::pair<double, double>> tail, head;
    for (const auto &p : pts)
      if (p.x >= 0.5 * xmax)
        tail.emplace_back(p.x, p.y);
    double ks = 0, as = 0;
    if (loglin(tail, ks, as)) {
      t_slow0 = 1.0 / ks;
      w0 = std::clamp(1.0 - as, 0.05, 0.95);
      // Only the leading stretch where the fast part still dominates the
      // noise is usable; stop once it drops below 5% of its first value.
      double first = 0.0;
      for (const auto &p : pts) {
        const double d = p.y - as * std::exp(-ks * p.x);
        if (head.empty())
          first = d;
        if (p.x > 0.2 * xmax || !(d > 0.05 * first))
          break;
        head.emplace_back(p.x, d);
      }
      double kf = 0, af = 0;
      if (loglin(head, kf, af) && 1.0 / kf < t_slow0)
        t_fast0 = 1.0 / kf;
      else
        t_fast0 = t_slow0 / 10;
    }
  }

  auto residuals = [&](const VectorXd &q) {
    VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      r(i) = (q(0) * std::exp(-p.x / q(1)) +
              (1.0 - q(0)) * std::exp(-p.x / q(2)) - p.y) /
             p.err;
    }
    return r;
  };
  auto jac = [&](const VectorXd &q) {
    MatrixXd J(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      const double ef = std::exp(-p.x / q(1)), es = std::exp(-p.x / q(2));
      J(i, 0) = (ef - es) / p.err;
      J(i, 1) = q(0) * ef * p.x / (q(1) * q(1)) / p.err;
      J(i, 2) = (1.0 - q(0)) * es * p.x / (q(2) * q(2)) / p.err;
    }
    return J;
  };
  LeastSquaresProblem prob{residuals, jac, [xmax](VectorXd &q) {
                             q(0) = std::clamp(q(0), 0.0, 1.0);
                             q(1) = std::max(q(1), 1e-9 * xmax);
                             q(2) = std::max(q(2), 1e-9 * xmax);
                           }};
  // The surface has shallow local minima with the fast time pinned at its
  // bound, so a few fast-time seeds are tried and the best fit is kept.
  LeastSquaresResult r;
  bool have = false;
  for (double tf : {t_fast0, t_slow0 / 3, t_slow0 / 10, t_slow0 / 30}) {
    VectorXd start(3);
    start << w0, tf, t_slow0;
    LeastSquaresResult trial = least_squares(prob, start);
    if (!have || (trial.converged && !r.converged) ||
        (trial.converged == r.converged &&
         trial.residual_norm < r.residual_norm)) {
      r = std::move(trial);
      have = true;
    }
  }

  DoubleExpFit out;
  out.w = r.params(0);
  out.w_err = r.errors(0);
  out.t_fast = r.params(1);
  out.t_fast_err = r.errors(1);
  out.t_slow = r.params(2);
  out.t_slow_err = r.errors(2);
  if (out.t_fast > out.t_slow) {
    std::swap(out.t_fast, out.t_slow);
    std::swap(out.t_fast_err, out.t_slow_err);
    out.w = 1.0 - out.w;
  }
  // A component without weight carries no timescale information. Report the
  // dominant component as the fast one with its weight.
  if (out.w < 0.02) {
    out.w = 1.0 - out.w;
    std::swap(out.t_fast, out.t_slow);
    std::swap(out.t_fast_err, out.t_slow_err);
    out.flags |= flag_degenerate;
  } else if (out.w > 0.98 ||
             std::abs(out.t_slow - out.t_fast) < 0.05 * out.t_fast) {
    out.flags |= flag_degenerate;
  }
  out.residual_norm = r.residual_norm;
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (!r.converged)
    out.flags |= flag_not_converged;
  return out;
}

ScalingFit fit_scaling_model(std::vector<ScalingPoint> pts, double tau_start,
                             double c_start) {
  canonical_sort(pts, [](const ScalingPoint &p) {
    return std::make_tuple(p.delta_omega_khz, p.n_1e, p.err);
  });
  if (pts.size() < 4)
    throw std::invalid_argument("fit_scaling_model: need at least 4 points");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto &p : pts) {
    if (!(p.delta_omega_khz > 0) || !(p.n_1e > 0) || !std::isfinite(p.n_1e))
      throw std::invalid_argument(
          "fit_scaling_model: delta_omega and n_1e must be positive and finite");
    if (!(p.err > 0) || !std::isfinite(p.err))
      throw std::invalid_argument("fit_scaling_model: errors must be > 0");
    lo = std::min(lo, p.delta_omega_khz);
    hi = std::max(hi, p.delta_omega_khz);
  }
  if (hi < 10.0 * lo)
    throw std::invalid_argument(
        "fit_scaling_model: points must span at least one decade of delta_omega");
  const auto m = static_cast<Eigen::Index>(pts.size());
  auto residuals = [&](const VectorXd &q) {
    VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto &p = pts[static_cast<std::size_t>(i)];
      const double model =
          protocol::extended_n1e(p.delta_omega_khz, q(0), q(1));
      r(i) = (std::log(model) - std::log(p.n_1e)) / (p.err / p.n_1e);
    }
    return r;
  };
  LeastSquaresProblem prob{residuals, {}, [](VectorXd &q) {
                             q(0) = std::max(q(0), 1e-6);
                           }};
  VectorXd start(2);
  start << tau_start, c_start;
  const LeastSquaresResult r = least_squares(prob, start);
  ScalingFit out;
  out.tau_us = r.params(0);
  out.tau_err = r.errors(0);
  out.c_khz = r.params(1);
  out.c_err = r.errors(1);
  out.residual_norm = r.residual_norm;
  out.condition_number = r.condition_number;
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (!r.converged)
    out.flags |= flag_not_converged;
  if (!(r.condition_number < 1e8))
    out.flags |= flag_ill_conditioned;
  return out;
}

// ---------------------------------------------------------------------------

protocol::MemoryTrace correct_t2star(const protocol::MemoryTrace &trace,
                                     double t2_star_ms,
                                     double time_per_rep_us) {
  if (!(t2_star_ms > 0.0))
    throw std::invalid_argument("correct_t2star: t2_star must be > 0");
  if (!(time_per_rep_us >= 0.0))
    throw std::invalid_argument("correct_t2star: time_per_rep must be >= 0");
  protocol::MemoryTrace out = trace;
  if (out.correction.size() != out.size())
    out.correction.assign(out.size(), 1.0);
  if (out.flags.size() != out.size())
    out.flags.assign(out.size(), protocol::trace_ok);
  if (std::isinf(t2_star_ms))
    return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double elapsed_ms =
        static_cast<double>(out.checkpoints[i]) * time_per_rep_us * 1e-3;
    const double f = node::intrinsic_dephasing_factor(t2_star_ms, elapsed_ms);
    out.correction[i] *= f;
    out.xy_length[i] /= f;
    out.xy_err[i] /= f;
    if (out.xy_length[i] > 1.05) {
      out.xy_length[i] = 1.05;
      out.flags[i] |= protocol::trace_capped;
    }
    if (f < 0.05)
      out.flags[i] |= protocol::trace_unreliable;
  }
  return out;
}

protocol::MemoryTrace uncorrect_t2star(const protocol::MemoryTrace &trace) {
  protocol::MemoryTrace out = trace;
  for (std::size_t i = 0; i < out.size() && i < out.correction.size(); ++i) {
    out.xy_length[i] *= out.correction[i];
    out.xy_err[i] *= out.correction[i];
    out.correction[i] = 1.0;
  }
  return out;
}

std::vector<DataPoint> trace_points(const protocol::MemoryTrace &trace) {
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace.xy_err[i] > 0)
      floor = std::min(floor, trace.xy_err[i]);
  if (!std::isfinite(floor))
    floor = 1e-3;
  std::vector<DataPoint> pts;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const unsigned f = i < trace.flags.size() ? trace.flags[i] : 0u;
    if (f & (protocol::trace_empty | protocol::trace_unreliable |
             protocol::trace_capped))
      continue;
    pts.push_back({static_cast<double>(trace.checkpoints[i]),
                   trace.xy_length[i], std::max(trace.xy_err[i], floor)});
  }
  return pts;
}

} // namespace nvsim::analysis
