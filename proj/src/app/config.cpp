/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nvsim/app.hpp"

namespace nvsim::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Strict view of one JSON object: every read is recorded so that leftover
// keys can be reported as unknown fields.
class Obj {
public:
  Obj(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string sub(const std::string &key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string &key) const { return j_.contains(key); }

  const json &take(const std::string &key) {
    auto it = j_.find(key);
    if (it == j_.end())
      throw ConfigError(sub(key), "missing field");
    seen_.insert(key);
    return *it;
  }

  double num(const std::string &key) {
    const json &v = take(key);
    if (!v.is_number())
      throw ConfigError(sub(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
      throw ConfigError(sub(key), "must be finite");
    return d;
  }

  /// A number, or null meaning +infinity.
  double num_or_inf(const std::string &key) {
    const json &v = take(key);
    if (v.is_null())
      return std::numeric_limits<double>::infinity();
    if (!v.is_number())
      throw ConfigError(sub(key), "expected a number or null");
    return v.get<double>();
  }

  long long integer(const std::string &key, long long lo, long long hi) {
    const json &v = take(key);
    if (!v.is_number_integer())
      throw ConfigError(sub(key), "expected an integer");
    if (v.is_number_unsigned() &&
        v.get<unsigned long long>() >
            static_cast<unsigned long long>(std::numeric_limits<long long>::max()))
      throw ConfigError(sub(key), "out of range");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      throw ConfigError(sub(key), "must lie in [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
    return x;
  }

  std::uint64_t u64(const std::string &key) {
    const json &v = take(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(sub(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string &key) {
    const json &v = take(key);
    if (!v.is_boolean())
      throw ConfigError(sub(key), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string &key) {
    const json &v = take(key);
    if (!v.is_string())
      throw ConfigError(sub(key), "expected a string");
    return v.get<std::string>();
  }

  Obj obj(const std::string &key) { return Obj(take(key), sub(key)); }

  std::vector<double> nums(const std::string &key) {
    const json &v = take(key);
    if (!v.is_array())
      throw ConfigError(sub(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto &e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        throw ConfigError(sub(key), "expected an array of finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> ints(const std::string &key) {
    const json &v = take(key);
    if (!v.is_array())
      throw ConfigError(sub(key), "expected an array of integers");
    std::vector<int> out;
    for (const auto &e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0 ||
          e.get<long long>() > std::numeric_limits<int>::max())
        throw ConfigError(sub(key), "expected an array of non-negative integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  const json &raw() const { return j_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(sub(it.key()), "unknown field");
  }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a validator and rethrows its message as a ConfigError under `path`.
template <class F> void validated(const std::string &path, F &&f) {
  try {
    f();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    throw ConfigError(path, e.what());
  }
}

// Like validated(), but when the message starts with a field name
// ("tau_us must be >= 0") the reported path points at that field.
template <class F> void validated_fields(const std::string &prefix, F &&f) {
  try {
    f();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    const std::string msg = e.what();
    const std::size_t sp = msg.find(' ');
    std::string name = msg.substr(0, sp);
    if (name.rfind(prefix + ".", 0) == 0)
      name.erase(0, prefix.size() + 1);
    const bool is_field =
        sp != std::string::npos && !name.empty() &&
        name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_.") ==
            std::string::npos;
    throw ConfigError(is_field ? prefix + "." + name : prefix, msg);
  }
}

std::string resolve(const std::string &file, const std::string &base_dir) {
  fs::path p(file);
  if (p.is_relative() && !base_dir.empty())
    p = fs::path(base_dir) / p;
  return p.string();
}

void require_spin(const node::Register &reg, int id, const std::string &path) {
  for (const auto &s : reg)
    if (s.id == id)
      return;
  throw ConfigError(path, "spin id " + std::to_string(id) +
                              " is not in the register");
}

void require_positive(double v, const std::string &path) {
  if (!(v > 0.0))
    throw ConfigError(path, "must be > 0");
}

protocol::ProtocolConfig read_protocol(Obj o) {
  protocol::ProtocolConfig p;
  p.t_us = o.num("t_us");
  p.tau_us = o.num("tau_us");
  p.n_reps = static_cast<int>(o.integer("n_reps", 0, 100000000));
  {
    Obj r = o.obj("reset");
    const std::string mode = r.str("mode");
    validated(r.sub("mode"),
              [&] { p.reset.mode = pump::reset_mode_from_string(mode); });
    p.reset.t_fast_ns = r.num("t_fast_ns");
    p.reset.t_slow_ns = r.num("t_slow_ns");
    p.reset.weight_fast = r.num("weight_fast");
    r.finish();
    validated(o.sub("reset"), [&] { p.reset.validate(); });
  }
  p.p_reset_needed = o.num("p_reset_needed");
  p.checkpoints = o.ints("checkpoints");
  p.seed = o.u64("seed");
  {
    Obj c = o.obj("channels");
    p.channels.t1_flip_per_rep = c.num("t1_flip_per_rep");
    p.channels.ionization_n_d = c.num_or_inf("ionization_n_d");
    p.channels.mw_error_per_pulse = c.num("mw_error_per_pulse");
    p.channels.natural_dephasing = c.boolean("natural_dephasing");
    c.finish();
  }
  p.coupling_offset_khz = o.num("coupling_offset_khz");
  const std::string model = o.str("model");
  validated(o.sub("model"),
            [&] { p.model = protocol::hyperfine_model_from_string(model); });
  p.dephasing_during_singlet = o.boolean("dephasing_during_singlet");
  p.rep_period_us = o.num("rep_period_us");
  p.trajectories = static_cast<int>(o.integer("trajectories", 1, 100000000));
  o.finish();
  return p;
}

node::SubspaceSpec read_subspace(Obj o) {
  const std::vector<int> ids = o.ints("ids");
  const std::string parity = o.str("parity");
  o.finish();
  node::Parity par;
  if (parity == "parallel")
    par = node::Parity::parallel;
  else if (parity == "antiparallel")
    par = node::Parity::antiparallel;
  else
    throw ConfigError(o.sub("parity"), "expected parallel or antiparallel");
  if (ids.size() == 1)
    return node::SubspaceSpec::single(ids[0]);
  if (ids.size() == 2)
    return node::SubspaceSpec::pair(ids[0], ids[1], par);
  throw ConfigError(o.sub("ids"), "expected one or two spin ids");
}

ScanSettings read_scan(Obj &o) {
  ScanSettings s;
  s.n_checkpoints = static_cast<int>(o.integer("n_checkpoints", 3, 100000));
  s.span_factor = o.num("span_factor");
  require_positive(s.span_factor, o.sub("span_factor"));
  s.min_reps = static_cast<int>(o.integer("min_reps", 2, 100000000));
  s.max_reps = static_cast<int>(o.integer("max_reps", 2, 100000000));
  if (s.max_reps < s.min_reps)
    throw ConfigError(o.sub("max_reps"), "must be >= min_reps");
  return s;
}

ExperimentsConfig read_experiments(Obj o, const node::Register &reg) {
  ExperimentsConfig e;
  {
    Obj d = o.obj("dephase");
    e.dephase.subspace = read_subspace(d.obj("subspace"));
    for (int id : e.dephase.subspace.ids)
      require_spin(reg, id, d.sub("subspace.ids"));
    e.dephase.n_reps = static_cast<int>(d.integer("n_reps", 1, 100000000));
    e.dephase.n_checkpoints =
        static_cast<int>(d.integer("n_checkpoints", 2, 100000));
    d.finish();
  }
  {
    Obj s = o.obj("sweep_tau");
    e.sweep_tau.spins = s.ints("spins");
    if (e.sweep_tau.spins.empty())
      throw ConfigError(s.sub("spins"), "must not be empty");
    for (int id : e.sweep_tau.spins)
      require_spin(reg, id, s.sub("spins"));
    e.sweep_tau.n_reps = static_cast<int>(s.integer("n_reps", 1, 100000000));
    e.sweep_tau.tau_grid_us = s.nums("tau_grid_us");
    if (e.sweep_tau.tau_grid_us.empty())
      throw ConfigError(s.sub("tau_grid_us"), "must not be empty");
    for (double v : e.sweep_tau.tau_grid_us)
      if (v < 0.0)
        throw ConfigError(s.sub("tau_grid_us"), "values must be >= 0");
    s.finish();
  }
  {
    Obj s = o.obj("sweep_t");
    e.sweep_t.spins = s.ints("spins");
    if (e.sweep_t.spins.empty())
      throw ConfigError(s.sub("spins"), "must not be empty");
    for (int id : e.sweep_t.spins)
      require_spin(reg, id, s.sub("spins"));
    e.sweep_t.n_reps = static_cast<int>(s.integer("n_reps", 1, 100000000));
    e.sweep_t.tau_us = s.num("tau_us");
    const std::string model = s.str("model");
    validated(s.sub("model"), [&] {
      e.sweep_t.model = protocol::hyperfine_model_from_string(model);
    });
    e.sweep_t.coupling_offset_khz = s.num("coupling_offset_khz");
    e.sweep_t.t_grid_us = s.nums("t_grid_us");
    if (e.sweep_t.t_grid_us.empty())
      throw ConfigError(s.sub("t_grid_us"), "must not be empty");
    for (double v : e.sweep_t.t_grid_us)
      require_positive(v, s.sub("t_grid_us"));
    s.finish();
  }
  {
    Obj s = o.obj("dps_scan");
    const std::vector<int> pair = s.ints("pair");
    if (pair.size() != 2 || pair[0] == pair[1])
      throw ConfigError(s.sub("pair"), "expected two distinct spin ids");
    for (int id : pair)
      require_spin(reg, id, s.sub("pair"));
    e.dps_scan.pair_i = pair[0];
    e.dps_scan.pair_j = pair[1];
    e.dps_scan.scan = read_scan(s);
    s.finish();
  }
  {
    Obj s = o.obj("scaling");
    e.scaling = read_scan(s);
    s.finish();
  }
  {
    Obj s = o.obj("ionization");
    e.ionization.spin = static_cast<int>(s.integer("spin", 0, 1000000));
    require_spin(reg, e.ionization.spin, s.sub("spin"));
    e.ionization.n_reps = static_cast<int>(s.integer("n_reps", 1, 100000000));
    e.ionization.n_checkpoints =
        static_cast<int>(s.integer("n_checkpoints", 2, 100000));
    e.ionization.p_reset_needed = s.num("p_reset_needed");
    if (e.ionization.p_reset_needed < 0.0 || e.ionization.p_reset_needed > 1.0)
      throw ConfigError(s.sub("p_reset_needed"), "must lie in [0, 1]");
    e.ionization.ionization_n_d = s.num("ionization_n_d");
    require_positive(e.ionization.ionization_n_d, s.sub("ionization_n_d"));
    s.finish();
  }
  {
    Obj s = o.obj("init_fidelity");
    e.init_fidelity.shots = static_cast<long>(s.integer("shots", 1, 1000000000));
    s.finish();
  }
  o.finish();
  return e;
}

} // namespace

AppConfig parse_config(const std::string &json_text,
                       const std::string &base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  Obj o(root, "");
  AppConfig cfg;

  {
    Obj f = o.obj("field");
    cfg.field.b_field_mt = f.num("b_field_mt");
    cfg.field.gamma_khz_per_mt = f.num("gamma_khz_per_mt");
    f.finish();
    validated("field", [&] { cfg.field.validate(); });
  }

  cfg.register_file = resolve(o.str("register_file"), base_dir);
  validated("register_file",
            [&] { cfg.reg = node::load_register(cfg.register_file); });

  cfg.protocol = read_protocol(o.obj("protocol"));
  validated_fields("protocol", [&] { cfg.protocol.validate(); });

  {
    Obj r = o.obj("readout");
    cfg.readout.p_detect_given_bright = r.num("p_detect_given_bright");
    cfg.readout.p_false_bright = r.num("p_false_bright");
    cfg.readout.p_state_given_click = r.num("p_state_given_click");
    cfg.readout.init_fidelity = r.num("init_fidelity");
    r.finish();
    validated_fields("readout", [&] { cfg.readout.validate(); });
  }

  {
    Obj g = o.obj("gate_errors");
    const std::string mode = g.str("mode");
    Obj per = g.obj("per_spin");
    for (auto it = per.raw().begin(); it != per.raw().end(); ++it) {
      int id = 0;
      try {
        std::size_t used = 0;
        id = std::stoi(it.key(), &used);
        if (used != it.key().size())
          throw std::invalid_argument("id");
      } catch (const std::exception &) {
        throw ConfigError(per.sub(it.key()), "keys must be spin ids");
      }
      require_spin(cfg.reg, id, per.sub(it.key()));
      const double p = per.num(it.key());
      if (p < 0.0 || p > 1.0)
        throw ConfigError(per.sub(it.key()), "must lie in [0, 1]");
      cfg.gate_errors.per_spin[id] = p;
    }
    if (mode == "none")
      cfg.gate_errors.mode = GateErrorSettings::Mode::none;
    else if (mode == "calibrated")
      cfg.gate_errors.mode = GateErrorSettings::Mode::calibrated;
    else if (mode == "explicit")
      cfg.gate_errors.mode = GateErrorSettings::Mode::explicit_;
    else
      throw ConfigError("gate_errors.mode",
                        "expected none, calibrated or explicit");
    if (cfg.gate_errors.mode != GateErrorSettings::Mode::explicit_ &&
        !cfg.gate_errors.per_spin.empty())
      throw ConfigError("gate_errors.per_spin",
                        "only allowed with mode \"explicit\"");
    g.finish();
  }

  {
    Obj p = o.obj("pump");
    cfg.pump.scheme_file = resolve(p.str("scheme_file"), base_dir);
    validated(p.sub("scheme_file"), [&] {
      cfg.pump.scheme = pump::load_level_scheme(cfg.pump.scheme_file);
    });
    cfg.pump.initial_state = p.str("initial_state");
    validated(p.sub("initial_state"),
              [&] { (void)cfg.pump.scheme.index_of(cfg.pump.initial_state); });
    cfg.pump.duration_ns = p.num("duration_ns");
    require_positive(cfg.pump.duration_ns, p.sub("duration_ns"));
    cfg.pump.dt_ns = p.num("dt_ns");
    require_positive(cfg.pump.dt_ns, p.sub("dt_ns"));
    cfg.pump.output_step_ns = p.num("output_step_ns");
    require_positive(cfg.pump.output_step_ns, p.sub("output_step_ns"));
    const double ratio = cfg.pump.output_step_ns / cfg.pump.dt_ns;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw ConfigError(p.sub("output_step_ns"),
                        "must be an integer multiple of dt_ns");
    p.finish();
  }

  cfg.experiments = read_experiments(o.obj("experiments"), cfg.reg);
  o.finish();
  return cfg;
}

AppConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("<config>", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse_config(ss.str(), parent.string());
}

std::string data_dir() {
  if (const char *env = std::getenv("NVSIM_DATA"); env && *env)
    return env;
  return NVSIM_DEFAULT_DATA_DIR;
}

std::string default_config_path() {
  return (fs::path(data_dir()) / "defaults.json").string();
}

} // namespace nvsim::app
