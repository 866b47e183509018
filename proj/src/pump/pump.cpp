/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/pump.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nvsim/analysis.hpp"

namespace nvsim::pump {

std::string to_string(StateKind kind) {
  switch (kind) {
  case StateKind::ground_0:
    return "ground_0";
  case StateKind::ground_m1:
    return "ground_m1";
  case StateKind::ground_p1:
    return "ground_p1";
  case StateKind::excited:
    return "excited";
  case StateKind::singlet:
    return "singlet";
  }
  return "excited";
}

StateKind state_kind_from_string(const std::string &s) {
  for (StateKind k : {StateKind::ground_0, StateKind::ground_m1,
                      StateKind::ground_p1, StateKind::excited,
                      StateKind::singlet})
    if (to_string(k) == s)
      return k;
  throw std::invalid_argument("unknown state kind '" + s + "'");
}

LevelScheme::LevelScheme(std::vector<LevelState> states,
                         std::vector<RateEntry> rates,
                         std::vector<RateEntry> pump_rates)
    : states_(std::move(states)), rates_(std::move(rates)),
      pump_rates_(std::move(pump_rates)) {
  if (states_.empty())
    throw std::invalid_argument("level scheme has no states");
  std::set<std::string> labels;
  for (const auto &s : states_)
    if (!labels.insert(s.label).second)
      throw std::invalid_argument("duplicate state label '" + s.label + "'");
  const auto n = static_cast<Eigen::Index>(states_.size());
  generator_ = Eigen::MatrixXd::Zero(n, n);
  auto add = [&](const RateEntry &e, const char *list) {
    if (!(e.rate_per_ns >= 0.0) || !std::isfinite(e.rate_per_ns))
      throw std::invalid_argument(std::string(list) + " entry " + e.from +
                                  "->" + e.to + ": rate must be >= 0");
    if (e.from == e.to)
      throw std::invalid_argument(std::string(list) + " entry " + e.from +
                                  "->" + e.to + ": self-transition");
    const auto f = static_cast<Eigen::Index>(index_of(e.from));
    const auto t = static_cast<Eigen::Index>(index_of(e.to));
    generator_(t, f) += e.rate_per_ns;
    generator_(f, f) -= e.rate_per_ns;
  };
  for (const auto &e : rates_)
    add(e, "rates");
  for (const auto &e : pump_rates_)
    add(e, "pump_rates");
}

std::size_t LevelScheme::index_of(const std::string &label) const {
  for (std::size_t i = 0; i < states_.size(); ++i)
    if (states_[i].label == label)
      return i;
  throw std::invalid_argument("unknown state label '" + label + "'");
}

double LevelScheme::rate(const std::string &from, const std::string &to) const {
  return generator_(static_cast<Eigen::Index>(index_of(to)),
                    static_cast<Eigen::Index>(index_of(from)));
}

RepumpParams RepumpParams::defaults(RepumpConfig config) {
  RepumpParams p;
  p.config = config;
  if (config == RepumpConfig::e_config) {
    p.direct_to_zero_per_ns = 0.042;
    p.isc_per_ns = 0.004;
  }
  return p;
}

void RepumpParams::validate() const {
  auto positive = [](double v, const char *name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  auto nonneg = [](double v, const char *name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be >= 0");
  };
  nonneg(pump_rate_per_ns, "pump_rate_per_ns");
  positive(excited_lifetime_ns, "excited_lifetime_ns");
  nonneg(direct_to_zero_per_ns, "direct_to_zero_per_ns");
  nonneg(isc_per_ns, "isc_per_ns");
  positive(singlet_lifetime_ns, "singlet_lifetime_ns");
  nonneg(singlet_to_zero, "singlet_to_zero");
  nonneg(singlet_to_p1, "singlet_to_p1");
  nonneg(singlet_to_m1, "singlet_to_m1");
  if (!(singlet_to_zero + singlet_to_p1 + singlet_to_m1 > 0.0))
    throw std::invalid_argument("singlet branching weights are all zero");
  if (direct_to_zero_per_ns + isc_per_ns > 1.0 / excited_lifetime_ns)
    throw std::invalid_argument(
        "direct_to_zero_per_ns + isc_per_ns exceed the total excited decay rate");
}

LevelScheme build_repump_scheme(const RepumpParams &p) {
  p.validate();
  std::vector<LevelState> states = {
      {"0", StateKind::ground_0},    {"m1", StateKind::ground_m1},
      {"p1", StateKind::ground_p1},  {"ex_m", StateKind::excited},
      {"ex_p", StateKind::excited},  {"S", StateKind::singlet},
  };
  const double back = 1.0 / p.excited_lifetime_ns - p.direct_to_zero_per_ns -
                      p.isc_per_ns;
  std::vector<RateEntry> rates;
  for (const char *ex : {"ex_m", "ex_p"}) {
    rates.push_back({ex, "0", p.direct_to_zero_per_ns});
    rates.push_back({ex, "S", p.isc_per_ns});
    if (p.config == RepumpConfig::a_config) {
      // Both excited levels mix the +-1 spin projections.
      rates.push_back({ex, "m1", 0.5 * back});
      rates.push_back({ex, "p1", 0.5 * back});
    } else {
      rates.push_back({ex, std::string(ex) == "ex_m" ? "m1" : "p1", back});
    }
  }
  const double ks = 1.0 / p.singlet_lifetime_ns;
  const double wsum = p.singlet_to_zero + p.singlet_to_p1 + p.singlet_to_m1;
  rates.push_back({"S", "0", ks * p.singlet_to_zero / wsum});
  rates.push_back({"S", "p1", ks * p.singlet_to_p1 / wsum});
  rates.push_back({"S", "m1", ks * p.singlet_to_m1 / wsum});
  std::vector<RateEntry> pump = {
      {"m1", "ex_m", p.pump_rate_per_ns},
      {"ex_m", "m1", p.pump_rate_per_ns},
      {"p1", "ex_p", p.pump_rate_per_ns},
      {"ex_p", "p1", p.pump_rate_per_ns},
  };
  return LevelScheme(std::move(states), std::move(rates), std::move(pump));
}

namespace {

using nlohmann::json;

std::vector<RateEntry> parse_rates(const json &doc, const char *key) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw std::invalid_argument(std::string("level scheme: missing array '") +
                                key + "'");
  std::vector<RateEntry> out;
  std::size_t i = 0;
  for (const json &e : doc[key]) {
    const std::string where = std::string(key) + "[" + std::to_string(i++) + "]";
    if (!e.is_object() || !e.contains("from") || !e.contains("to") ||
        !e.contains("rate_per_ns"))
      throw std::invalid_argument(where + ": needs from, to, rate_per_ns");
    if (!e["from"].is_string() || !e["to"].is_string() ||
        !e["rate_per_ns"].is_number())
      throw std::invalid_argument(where + ": wrong field types");
    out.push_back({e["from"].get<std::string>(), e["to"].get<std::string>(),
                   e["rate_per_ns"].get<double>()});
  }
  return out;
}

} // namespace

LevelScheme parse_level_scheme_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(std::string("level scheme is not valid JSON: ") +
                                e.what());
  }
  if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
    throw std::invalid_argument("level scheme: missing array 'states'");
  std::vector<LevelState> states;
  std::size_t i = 0;
  for (const json &s : doc["states"]) {
    const std::string where = "states[" + std::to_string(i++) + "]";
    if (!s.is_object() || !s.contains("label") || !s.contains("kind") ||
        !s["label"].is_string() || !s["kind"].is_string())
      throw std::invalid_argument(where + ": needs string fields label, kind");
    states.push_back({s["label"].get<std::string>(),
                      state_kind_from_string(s["kind"].get<std::string>())});
  }
  return LevelScheme(std::move(states), parse_rates(doc, "rates"),
                     parse_rates(doc, "pump_rates"));
}

LevelScheme load_level_scheme(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open level scheme file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_level_scheme_json(ss.str());
}

std::string level_scheme_to_json(const LevelScheme &scheme) {
  json states = json::array();
  for (const auto &s : scheme.states())
    states.push_back({{"label", s.label}, {"kind", to_string(s.kind)}});
  auto dump_rates = [](const std::vector<RateEntry> &v) {
    json arr = json::array();
    for (const auto &e : v)
      arr.push_back(
          {{"from", e.from}, {"to", e.to}, {"rate_per_ns", e.rate_per_ns}});
    return arr;
  };
  return json{{"states", states},
              {"rates", dump_rates(scheme.rates())},
              {"pump_rates", dump_rates(scheme.pump_rates())}}
             .dump(2) +
         "\n";
}

double PopulationTrajectory::kind_population(std::size_t i,
                                             StateKind kind) const {
  double p = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s)
    if (states[s].kind == kind)
      p += populations.at(i).at(s);
  return p;
}

std::vector<double> initial_populations(const LevelScheme &scheme,
                                        const std::string &label) {
  std::vector<double> p(scheme.size(), 0.0);
  p[scheme.index_of(label)] = 1.0;
  return p;
}

PopulationTrajectory integrate_rates(const LevelScheme &scheme,
                                     const std::vector<double> &p0,
                                     double duration_ns, double dt_ns,
                                     std::size_t record_every) {
  const std::size_t n = scheme.size();
  if (p0.size() != n)
    throw std::invalid_argument("initial populations: expected " +
                                std::to_string(n) + " entries");
  double sum = 0.0;
  for (double v : p0) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("initial populations must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("initial populations must sum to 1");
  if (!(dt_ns > 0.0) || !std::isfinite(dt_ns))
    throw std::invalid_argument("dt must be > 0");
  if (!(duration_ns >= 0.0) || !std::isfinite(duration_ns))
    throw std::invalid_argument("duration must be >= 0");
  if (record_every == 0)
    throw std::invalid_argument("record_every must be >= 1");

  // For a linear system one RK4 step is the degree-4 Taylor polynomial of
  // exp(R dt). Precomputing it keeps the loop to a matrix-vector product.
  const Eigen::MatrixXd h = scheme.generator() * dt_ns;
  const Eigen::MatrixXd h2 = h * h;
  const Eigen::MatrixXd step =
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n)) +
      h + h2 / 2.0 + h2 * h / 6.0 + h2 * h2 / 24.0;

  const auto steps = static_cast<std::size_t>(std::llround(duration_ns / dt_ns));
  PopulationTrajectory traj;
  traj.states = scheme.states();
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(
      p0.data(), static_cast<Eigen::Index>(n));
  auto record = [&](std::size_t k) {
    traj.times_ns.push_back(static_cast<double>(k) * dt_ns);
    traj.populations.emplace_back(p.data(), p.data() + n);
  };
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    p = step * p;
    for (Eigen::Index s = 0; s < p.size(); ++s)
      if (!(p(s) >= -1e-6 && p(s) <= 1.0 + 1e-6))
        throw NumericalError(
            "rate integration unstable at t = " +
            std::to_string(static_cast<double>(k) * dt_ns) +
            " ns (population " + std::to_string(p(s)) + " in state '" +
            scheme.states()[static_cast<std::size_t>(s)].label +
            "'); reduce dt below " + std::to_string(dt_ns) + " ns");
    if (k % record_every == 0 || k == steps)
      record(k);
  }
  return traj;
}

std::string to_string(ResetMode mode) {
  switch (mode) {
  case ResetMode::mixture:
    return "mixture";
  case ResetMode::singlet_only:
    return "singlet_only";
  case ResetMode::fixed:
    return "fixed";
  case ResetMode::gaussian:
    return "gaussian";
  }
  return "mixture";
}

ResetMode reset_mode_from_string(const std::string &s) {
  for (ResetMode m : {ResetMode::mixture, ResetMode::singlet_only,
                      ResetMode::fixed, ResetMode::gaussian})
    if (to_string(m) == s)
      return m;
  throw std::invalid_argument("unknown reset mode '" + s +
                              "' (expected mixture, singlet_only, fixed or "
                              "gaussian)");
}

ResetModel ResetModel::a_config() {
  return {ResetMode::mixture, 29.0, 463.0, 0.75};
}

ResetModel ResetModel::e_config() {
  return {ResetMode::mixture, 48.0, 432.0, 0.75};
}

ResetModel ResetModel::singlet_only(double t_slow_ns) {
  return {ResetMode::singlet_only, 29.0, t_slow_ns, 0.75};
}

void ResetModel::validate() const {
  if (!(t_fast_ns > 0.0) || !std::isfinite(t_fast_ns))
    throw std::invalid_argument("reset.t_fast_ns must be > 0");
  if (!(t_slow_ns > 0.0) || !std::isfinite(t_slow_ns))
    throw std::invalid_argument("reset.t_slow_ns must be > 0");
  if (!(weight_fast >= 0.0 && weight_fast <= 1.0))
    throw std::invalid_argument("reset.weight_fast must lie in [0, 1]");
}

double ResetModel::mean_ns() const {
  if (mode == ResetMode::mixture)
    return weight_fast * t_fast_ns + (1.0 - weight_fast) * t_slow_ns;
  return t_slow_ns;
}

ResetSample sample_reset(const ResetModel &model, Rng &rng) {
  switch (model.mode) {
  case ResetMode::fixed:
    return {model.t_slow_ns, true};
  case ResetMode::singlet_only:
    return {exponential(rng, model.t_slow_ns), true};
  case ResetMode::gaussian:
    return {model.t_slow_ns + model.t_slow_ns * standard_normal(rng), true};
  case ResetMode::mixture: {
    const bool fast = uniform01(rng) < model.weight_fast;
    return {exponential(rng, fast ? model.t_fast_ns : model.t_slow_ns), !fast};
  }
  }
  return {model.t_slow_ns, true};
}

double sample_reset_time(const ResetModel &model, Rng &rng) {
  return sample_reset(model, rng).duration_ns;
}

double ionization_survival(double n_resets, double n_d) {
  if (!(n_resets >= 0.0))
    throw std::invalid_argument("n_resets must be >= 0");
  if (!(n_d > 0.0))
    throw std::invalid_argument("n_d must be > 0");
  return std::exp(-n_resets / n_d);
}

double ionization_probability_per_reset(double n_d) {
  if (!(n_d > 0.0))
    throw std::invalid_argument("n_d must be > 0");
  if (std::isinf(n_d))
    return 0.0;
  return -std::expm1(-1.0 / n_d);
}

ResetCurveFit fit_reset_curve(const std::vector<double> &t_ns,
                              const std::vector<double> &one_minus_p0) {
  if (t_ns.size() != one_minus_p0.size())
    throw std::invalid_argument("fit_reset_curve: length mismatch");
  std::vector<analysis::DataPoint> pts;
  pts.reserve(t_ns.size());
  for (std::size_t i = 0; i < t_ns.size(); ++i)
    pts.push_back({t_ns[i], one_minus_p0[i], 1.0});
  const analysis::DoubleExpFit f = analysis::fit_double_exponential(pts);
  ResetCurveFit out;
  out.w = f.w;
  out.w_err = f.w_err;
  out.t_fast_ns = f.t_fast;
  out.t_fast_err = f.t_fast_err;
  out.t_slow_ns = f.t_slow;
  out.t_slow_err = f.t_slow_err;
  out.residual_norm = f.residual_norm;
  out.degenerate = (f.flags & analysis::flag_degenerate) != 0;
  out.converged = f.converged;
  out.iterations = f.iterations;
  if (!out.converged)
    throw NumericalError("fit_reset_curve did not converge (residual norm " +
                         std::to_string(out.residual_norm) + ")");
  return out;
}

ResetCurveFit fit_reset_curve(const PopulationTrajectory &traj) {
  std::vector<double> y;
  y.reserve(traj.times_ns.size());
  for (std::size_t i = 0; i < traj.times_ns.size(); ++i)
    y.push_back(1.0 - traj.kind_population(i, StateKind::ground_0));
  return fit_reset_curve(traj.times_ns, y);
}

} // namespace nvsim::pump
