/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "nvsim/analysis.hpp"
#include "nvsim/app.hpp"

namespace nvsim::app {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

const std::vector<ExperimentInfo> kCatalog = {
    {"pump-curve",
     "Optical repump of the NV electron from |-1>: rate-equation populations "
     "of the ground, excited and metastable singlet levels versus pump time, "
     "with a double-exponential fit of the ground-state recovery (fast direct "
     "decay, slow singlet)."},
    {"dephase",
     "Stored nuclear coherence versus the number of entanglement attempts for "
     "one configured subspace: Monte Carlo XY Bloch length with an "
     "exponential N_1/e fit."},
    {"sweep-tau",
     "Echo asymmetry scan: coherence after a fixed number of attempts versus "
     "the extra wait tau before the reset, per spin, with Gaussian fits whose "
     "centers locate the optimal tau near the singlet lifetime."},
    {"sweep-t",
     "Echo time scan: population retained by a Z-initialized nucleus after a "
     "fixed number of attempts versus the wait t, using the full tilted-axis "
     "hyperfine precession. Maxima appear at short t and at the bare nuclear "
     "precession period."},
    {"dps-scan",
     "Decoherence-protected subspace: coherence decay of the two single spins "
     "of a pair and of their antiparallel and parallel logical qubits, with "
     "T2* correction and N_1/e fits."},
    {"scaling",
     "Memory robustness versus effective coupling: N_1/e for all five single "
     "spins and twenty pair encodings, ordered by effective coupling, with a "
     "fit of the dephasing model for the reset jitter tau and offset C."},
    {"ionization",
     "Charge-state loss: survival of the stored state versus the number of "
     "optical resets when every attempt ends in a reset, compared with "
     "exp(-N/N_d)."},
    {"init-fidelity",
     "Register initialization and readout: measurement-based preparation of "
     "each nucleus in |X> followed by ancilla-assisted readout, giving the "
     "combined fidelity F_i,r per spin."},
};

// --- small helpers ----------------------------------------------------------

std::vector<int> checkpoint_grid(int n_reps, int count) {
  std::set<int> pts;
  for (int k = 0; k < count; ++k)
    pts.insert(static_cast<int>(std::llround(
        static_cast<double>(n_reps) * k / static_cast<double>(count - 1))));
  return {pts.begin(), pts.end()};
}

std::string fmt_int(long long v) { return std::to_string(v); }

ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json flags_json(unsigned flags) {
  ordered_json arr = ordered_json::array();
  for (const auto &f : analysis::flag_names(flags))
    arr.push_back(f);
  return arr;
}

ordered_json decay_json(const analysis::DecayFit &f) {
  ordered_json j;
  j["model"] = "exponential";
  j["params"] = {{"amplitude", finite_or_null(f.amplitude)},
                 {"n_1e", finite_or_null(f.n_1e)}};
  j["errs"] = {{"amplitude", finite_or_null(f.amplitude_err)},
               {"n_1e", finite_or_null(f.n_1e_err)}};
  j["residual_norm"] = finite_or_null(f.residual_norm);
  j["flags"] = flags_json(f.flags);
  return j;
}

std::string dump(const ordered_json &j) { return j.dump(2) + "\n"; }

reg::GateErrorModel gate_model(const AppConfig &cfg) {
  switch (cfg.gate_errors.mode) {
  case GateErrorSettings::Mode::none:
    return reg::GateErrorModel::none();
  case GateErrorSettings::Mode::explicit_:
    return reg::GateErrorModel{cfg.gate_errors.per_spin};
  case GateErrorSettings::Mode::calibrated:
    break;
  }
  return reg::calibrate_gate_errors(cfg.reg);
}

// Predicted N_1/e of a subspace from the configured dephasing channels,
// used only to choose how many repetitions to simulate.
double predicted_n1e(const AppConfig &cfg, const node::SubspaceSpec &sub) {
  const auto &p = cfg.protocol;
  const double dw = node::effective_delta_omega(sub, cfg.reg);
  double rate = 0.0;
  if (p.tau_us > 0.0) {
    const double n_ext = protocol::extended_n1e(dw, p.tau_us,
                                                p.coupling_offset_khz);
    if (std::isfinite(n_ext))
      rate += 1.0 / n_ext;
  }
  rate += 2.0 * p.channels.t1_flip_per_rep * static_cast<double>(sub.n_spins());
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

int choose_n_reps(const AppConfig &cfg, const node::SubspaceSpec &sub,
                  const ScanSettings &scan) {
  double n = scan.span_factor * predicted_n1e(cfg, sub);
  if (cfg.protocol.channels.natural_dephasing) {
    // Keep the T2* correction factor above 0.08 at the last checkpoint.
    const double t2_us = node::subspace_t2star(sub, cfg.reg) * 1000.0;
    n = std::min(n, std::sqrt(std::log(1.0 / 0.08)) * t2_us /
                        cfg.protocol.rep_period_us);
  }
  if (!std::isfinite(n))
    n = scan.max_reps;
  return std::clamp(static_cast<int>(std::ceil(n)), scan.min_reps,
                    scan.max_reps);
}

struct CorrectedRun {
  protocol::MemoryTrace trace; // corrected when natural dephasing is on
  analysis::DecayFit fit;
};

CorrectedRun run_and_fit(const AppConfig &cfg, protocol::ProtocolConfig pc,
                         const node::SubspaceSpec &sub, unsigned threads) {
  CorrectedRun out;
  protocol::MemoryTrace trace = protocol::run_sequence(
      pc, cfg.field, cfg.reg, sub, protocol::InitialState::superposition,
      protocol::ExecOptions{threads});
  if (pc.channels.natural_dephasing)
    trace = analysis::correct_t2star(
        trace, node::subspace_t2star(sub, cfg.reg), pc.rep_period_us);
  out.fit = analysis::fit_exponential(analysis::trace_points(trace));
  out.trace = std::move(trace);
  return out;
}

// --- experiments ------------------------------------------------------------

std::vector<OutputFile> pump_curve(const AppConfig &cfg) {
  const auto &ps = cfg.pump;
  const auto every = static_cast<std::size_t>(
      std::llround(ps.output_step_ns / ps.dt_ns));
  const auto traj = pump::integrate_rates(
      ps.scheme, pump::initial_populations(ps.scheme, ps.initial_state),
      ps.duration_ns, ps.dt_ns, every);

  CsvTable t;
  t.header = {"t_ns", "p_0", "p_m1", "p_p1", "p_ex", "p_singlet"};
  for (std::size_t i = 0; i < traj.times_ns.size(); ++i) {
    using pump::StateKind;
    t.rows.push_back({format_double(traj.times_ns[i]),
                      format_double(traj.kind_population(i, StateKind::ground_0)),
                      format_double(traj.kind_population(i, StateKind::ground_m1)),
                      format_double(traj.kind_population(i, StateKind::ground_p1)),
                      format_double(traj.kind_population(i, StateKind::excited)),
                      format_double(traj.kind_population(i, StateKind::singlet))});
  }

  const auto fit = pump::fit_reset_curve(traj);
  ordered_json j;
  j["model"] = "double-exp";
  j["params"] = {{"w", fit.w}, {"t_fast_ns", fit.t_fast_ns},
                 {"t_slow_ns", fit.t_slow_ns}};
  j["errs"] = {{"w", finite_or_null(fit.w_err)},
               {"t_fast_ns", finite_or_null(fit.t_fast_err)},
               {"t_slow_ns", finite_or_null(fit.t_slow_err)}};
  j["residual_norm"] = fit.residual_norm;
  j["flags"] = flags_json(fit.degenerate ? analysis::flag_degenerate : 0u);
  return {{"pump.csv", to_csv(t)}, {"pump_fit.json", dump(j)}};
}

void append_trace_row(CsvTable &t, std::vector<std::string> prefix,
                      const protocol::MemoryTrace &tr, std::size_t k) {
  prefix.push_back(fmt_int(tr.checkpoints[k]));
  prefix.push_back(format_double(tr.xy_length[k]));
  prefix.push_back(format_double(tr.xy_err[k]));
  prefix.push_back(format_double(tr.z_value[k]));
  prefix.push_back(format_double(tr.survival[k]));
  t.rows.push_back(std::move(prefix));
}

std::vector<OutputFile> dephase(const AppConfig &cfg, unsigned threads) {
  const auto &d = cfg.experiments.dephase;
  protocol::ProtocolConfig pc = cfg.protocol;
  pc.n_reps = d.n_reps;
  pc.checkpoints = checkpoint_grid(d.n_reps, d.n_checkpoints);
  const auto trace = protocol::run_sequence(
      pc, cfg.field, cfg.reg, d.subspace, protocol::InitialState::superposition,
      protocol::ExecOptions{threads});

  CsvTable t;
  t.header = {"n", "xy_len", "xy_err", "z", "survival"};
  for (std::size_t k = 0; k < trace.size(); ++k)
    append_trace_row(t, {}, trace, k);

  // The fit describes the attempt-induced decay, so natural dephasing is
  // divided out first when it is simulated.
  protocol::MemoryTrace for_fit = trace;
  if (pc.channels.natural_dephasing)
    for_fit = analysis::correct_t2star(
        trace, node::subspace_t2star(d.subspace, cfg.reg), pc.rep_period_us);
  ordered_json j = decay_json(analysis::fit_exponential(
      analysis::trace_points(for_fit)));
  j["subspace"] = d.subspace.label();
  j["t2star_corrected"] = pc.channels.natural_dephasing;
  return {{"dephase.csv", to_csv(t)}, {"dephase_fit.json", dump(j)}};
}

std::vector<OutputFile> sweep_tau(const AppConfig &cfg, unsigned threads) {
  const auto &s = cfg.experiments.sweep_tau;
  protocol::ProtocolConfig pc = cfg.protocol;
  pc.n_reps = s.n_reps;
  pc.checkpoints.clear();

  CsvTable t;
  t.header = {"spin_id", "tau_us", "n", "xy_len", "xy_err", "z", "z_err",
              "survival"};
  ordered_json fits = ordered_json::array();
  for (int id : s.spins) {
    const auto sub = node::SubspaceSpec::single(id);
    const auto rows = protocol::sweep(protocol::SweepParam::tau, s.tau_grid_us,
                                      pc, cfg.field, cfg.reg, sub,
                                      protocol::InitialState::superposition,
                                      protocol::ExecOptions{threads});
    std::vector<analysis::DataPoint> pts;
    for (const auto &r : rows) {
      t.rows.push_back({fmt_int(id), format_double(r.value), fmt_int(s.n_reps),
                        format_double(r.xy_length), format_double(r.xy_err),
                        format_double(r.z_value), format_double(r.z_err),
                        format_double(r.survival)});
      if (!(r.flags & protocol::trace_empty))
        pts.push_back({r.value, r.xy_length, r.xy_err});
    }
    ordered_json j;
    j["spin_id"] = id;
    j["model"] = "gaussian";
    if (pts.size() >= 4) {
      const auto f = analysis::fit_gaussian_peak(pts);
      j["params"] = {{"center_us", f.center}, {"width_us", f.width},
                     {"amplitude", f.amplitude}, {"offset", f.offset}};
      j["errs"] = {{"center_us", finite_or_null(f.center_err)},
                   {"width_us", finite_or_null(f.width_err)},
                   {"amplitude", finite_or_null(f.amplitude_err)},
                   {"offset", finite_or_null(f.offset_err)}};
      j["residual_norm"] = finite_or_null(f.residual_norm);
      j["flags"] = flags_json(f.flags);
    } else {
      j["params"] = nullptr;
      j["errs"] = nullptr;
      j["residual_norm"] = nullptr;
      j["flags"] = ordered_json::array({"too_few_points"});
    }
    fits.push_back(j);
  }
  return {{"sweep_tau.csv", to_csv(t)},
          {"sweep_tau_fit.json", dump(ordered_json{{"fits", fits}})}};
}

std::vector<OutputFile> sweep_t(const AppConfig &cfg, unsigned threads) {
  const auto &s = cfg.experiments.sweep_t;
  protocol::ProtocolConfig pc = cfg.protocol;
  pc.n_reps = s.n_reps;
  pc.checkpoints.clear();
  pc.tau_us = s.tau_us;
  pc.model = s.model;
  pc.coupling_offset_khz = s.coupling_offset_khz;

  CsvTable t;
  t.header = {"spin_id", "t_us", "n", "xy_len", "xy_err", "z", "z_err",
              "survival"};
  for (int id : s.spins) {
    const auto rows = protocol::sweep(
        protocol::SweepParam::t, s.t_grid_us, pc, cfg.field, cfg.reg,
        node::SubspaceSpec::single(id), protocol::InitialState::logical_zero,
        protocol::ExecOptions{threads});
    for (const auto &r : rows)
      t.rows.push_back({fmt_int(id), format_double(r.value), fmt_int(s.n_reps),
                        format_double(r.xy_length), format_double(r.xy_err),
                        format_double(r.z_value), format_double(r.z_err),
                        format_double(r.survival)});
  }
  return {{"sweep_t.csv", to_csv(t)}};
}

// One N_1/e measurement per subspace: the shared core of dps-scan and
// scaling.
struct ScanResult {
  CsvTable traces;
  CsvTable summary;
  std::vector<analysis::ScalingPoint> points;
};

ScanResult scan_subspaces(const AppConfig &cfg,
                          std::vector<node::SubspaceSpec> subs,
                          const ScanSettings &scan, bool sort_by_coupling,
                          unsigned threads) {
  if (sort_by_coupling)
    std::stable_sort(subs.begin(), subs.end(),
                     [&](const auto &a, const auto &b) {
                       return node::effective_delta_omega(a, cfg.reg) <
                              node::effective_delta_omega(b, cfg.reg);
                     });
  ScanResult out;
  out.traces.header = {"subspace", "n",        "xy_len",    "xy_err",
                       "z",        "survival", "t2_factor", "flags"};
  out.summary.header = {"subspace", "delta_omega_khz", "n_1e", "err",
                        "predicted_n_1e", "n_reps", "flags"};
  for (const auto &sub : subs) {
    protocol::ProtocolConfig pc = cfg.protocol;
    pc.n_reps = choose_n_reps(cfg, sub, scan);
    pc.checkpoints = checkpoint_grid(pc.n_reps, scan.n_checkpoints);
    const auto run = run_and_fit(cfg, pc, sub, threads);
    const auto &tr = run.trace;
    for (std::size_t k = 0; k < tr.size(); ++k)
      out.traces.rows.push_back(
          {sub.label(), fmt_int(tr.checkpoints[k]),
           format_double(tr.xy_length[k]), format_double(tr.xy_err[k]),
           format_double(tr.z_value[k]), format_double(tr.survival[k]),
           format_double(tr.correction[k]), fmt_int(tr.flags[k])});
    const double dw = node::effective_delta_omega(sub, cfg.reg);
    out.summary.rows.push_back(
        {sub.label(), format_double(dw), format_double(run.fit.n_1e),
         format_double(run.fit.n_1e_err),
         format_double(predicted_n1e(cfg, sub)), fmt_int(pc.n_reps),
         fmt_int(run.fit.flags)});
    if (run.fit.flags == analysis::flag_none && std::isfinite(run.fit.n_1e) &&
        run.fit.n_1e > 0.0 && run.fit.n_1e_err > 0.0 && dw > 0.0)
      out.points.push_back({dw, run.fit.n_1e, run.fit.n_1e_err});
  }
  return out;
}

std::vector<OutputFile> dps_scan(const AppConfig &cfg, unsigned threads) {
  const auto &d = cfg.experiments.dps_scan;
  const std::vector<node::SubspaceSpec> subs = {
      node::SubspaceSpec::single(d.pair_i),
      node::SubspaceSpec::single(d.pair_j),
      node::SubspaceSpec::pair(d.pair_i, d.pair_j, node::Parity::antiparallel),
      node::SubspaceSpec::pair(d.pair_i, d.pair_j, node::Parity::parallel)};
  auto res = scan_subspaces(cfg, subs, d.scan, false, threads);
  return {{"dps_scan.csv", to_csv(res.traces)},
          {"dps_fit.csv", to_csv(res.summary)}};
}

std::vector<OutputFile> scaling(const AppConfig &cfg, unsigned threads) {
  auto res = scan_subspaces(cfg, node::all_subspaces(cfg.reg),
                            cfg.experiments.scaling, true, threads);
  ordered_json j;
  j["model"] = "scaling";
  if (res.points.size() >= 4) {
    const auto f = analysis::fit_scaling_model(res.points);
    j["params"] = {{"tau_us", f.tau_us}, {"c_khz", f.c_khz}};
    j["errs"] = {{"tau_us", finite_or_null(f.tau_err)},
                 {"c_khz", finite_or_null(f.c_err)}};
    j["residual_norm"] = finite_or_null(f.residual_norm);
    j["condition_number"] = finite_or_null(f.condition_number);
    j["flags"] = flags_json(f.flags);
  } else {
    j["params"] = nullptr;
    j["errs"] = nullptr;
    j["residual_norm"] = nullptr;
    j["flags"] = ordered_json::array({"too_few_points"});
  }
  j["points_used"] = res.points.size();
  return {{"scaling.csv", to_csv(res.summary)},
          {"scaling_traces.csv", to_csv(res.traces)},
          {"scaling_fit.json", dump(j)}};
}

std::vector<OutputFile> ionization(const AppConfig &cfg, unsigned threads) {
  const auto &s = cfg.experiments.ionization;
  protocol::ProtocolConfig pc = cfg.protocol;
  pc.n_reps = s.n_reps;
  pc.checkpoints = checkpoint_grid(s.n_reps, s.n_checkpoints);
  pc.p_reset_needed = s.p_reset_needed;
  pc.channels.ionization_n_d = s.ionization_n_d;
  const auto tr = protocol::run_sequence(
      pc, cfg.field, cfg.reg, node::SubspaceSpec::single(s.spin),
      protocol::InitialState::superposition, protocol::ExecOptions{threads});

  CsvTable t;
  t.header = {"n", "survival", "survival_err", "analytic"};
  const double n_traj = pc.trajectories;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double sv = tr.survival[k];
    // Expected number of resets after n attempts is n * p_reset_needed.
    const double resets = tr.checkpoints[k] * s.p_reset_needed;
    t.rows.push_back({fmt_int(tr.checkpoints[k]), format_double(sv),
                      format_double(std::sqrt(sv * (1.0 - sv) / n_traj)),
                      format_double(pump::ionization_survival(
                          resets, s.ionization_n_d))});
  }
  return {{"ionization.csv", to_csv(t)}};
}

std::vector<OutputFile> init_fidelity(const AppConfig &cfg) {
  const reg::RegisterSimulator sim(cfg.reg, cfg.readout, gate_model(cfg));
  CsvTable t;
  t.header = {"spin_id", "f_ir", "err"};
  for (std::size_t i = 0; i < cfg.reg.size(); ++i) {
    Rng rng = make_stream(cfg.protocol.seed, i);
    const auto est =
        sim.estimate_f_ir(cfg.reg[i].id, cfg.experiments.init_fidelity.shots, rng);
    t.rows.push_back({fmt_int(cfg.reg[i].id), format_double(est.value),
                      format_double(est.err)});
  }
  return {{"init_fidelity.csv", to_csv(t)}};
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace

const std::vector<ExperimentInfo> &experiment_catalog() { return kCatalog; }

std::string canonical_experiment(const std::string &name) {
  if (name == "pump")
    return "pump-curve";
  for (const auto &e : kCatalog)
    if (e.name == name)
      return name;
  return {};
}

std::vector<OutputFile> compute_experiment(const std::string &name,
                                           const AppConfig &cfg,
                                           unsigned threads) {
  const std::string n = canonical_experiment(name);
  if (threads == 0)
    threads = 1;
  if (n == "pump-curve")
    return pump_curve(cfg);
  if (n == "dephase")
    return dephase(cfg, threads);
  if (n == "sweep-tau")
    return sweep_tau(cfg, threads);
  if (n == "sweep-t")
    return sweep_t(cfg, threads);
  if (n == "dps-scan")
    return dps_scan(cfg, threads);
  if (n == "scaling")
    return scaling(cfg, threads);
  if (n == "ionization")
    return ionization(cfg, threads);
  if (n == "init-fidelity")
    return init_fidelity(cfg);
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

RunResult run_experiment(const ExperimentSpec &spec) {
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();

  const std::string name = canonical_experiment(spec.name);
  if (name.empty()) {
    res.exit_code = 1;
    res.message = "experiment: unknown experiment '" + spec.name + "'";
    return res;
  }

  AppConfig cfg;
  std::vector<OutputFile> outputs;
  try {
    cfg = load_config(spec.config_path.empty() ? default_config_path()
                                               : spec.config_path);
    if (spec.seed)
      cfg.protocol.seed = *spec.seed;
    if (spec.trajectories) {
      if (*spec.trajectories < 1)
        throw ConfigError("trajectories", "must be >= 1");
      cfg.protocol.trajectories = *spec.trajectories;
    }
    outputs = compute_experiment(name, cfg, spec.threads);
  } catch (const ConfigError &e) {
    res.exit_code = 1;
    res.message = std::string("configuration error: ") + e.what();
    return res;
  } catch (const std::exception &e) {
    res.exit_code = 2;
    res.message = std::string("runtime error: ") + e.what();
    return res;
  }

  ManifestInput man;
  man.spec = spec;
  man.spec.name = name;
  man.seed = cfg.protocol.seed;
  man.trajectories = cfg.protocol.trajectories;
  man.started_utc = started;
  man.outputs = outputs;
  man.wall_clock_s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  outputs.push_back({"manifest.json", manifest_json(man)});

  try {
    const fs::path dir(spec.out_dir.empty() ? "." : spec.out_dir);
    fs::create_directories(dir);
    for (const auto &f : outputs) {
      const fs::path path = dir / f.name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(f.content.data(),
                static_cast<std::streamsize>(f.content.size()));
      out.close();
      if (!out)
        throw std::runtime_error("cannot write " + path.string());
      res.files.push_back(path.string());
    }
  } catch (const std::exception &e) {
    res.exit_code = 2;
    res.message = std::string("output error: ") + e.what();
    return res;
  }
  res.message = "ok";
  return res;
}

} // namespace nvsim::app
