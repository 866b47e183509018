/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/nvsim.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "nvsim/app.hpp"

struct nvsim_config {
  nvsim::app::AppConfig cfg;
};

struct nvsim_experiment {
  nvsim::app::ExperimentSpec spec;
  std::string message;
  std::vector<std::string> outputs;
};

struct nvsim_register {
  nvsim::node::Register reg;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_scratch;

nvsim_status fail(nvsim_status s, const std::string &msg) {
  g_last_error = msg;
  return s;
}

// Maps exceptions escaping the C++ core to status codes.
template <class F> nvsim_status guarded(F &&f) {
  try {
    return f();
  } catch (const nvsim::app::ConfigError &e) {
    return fail(NVSIM_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument &e) {
    return fail(NVSIM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc &) {
    return fail(NVSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(NVSIM_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(NVSIM_ERR_INTERNAL, "unknown error");
  }
}

#define NVSIM_REQUIRE(ptr)                                                     \
  do {                                                                         \
    if (!(ptr))                                                                \
      return fail(NVSIM_ERR_NULL_ARGUMENT, #ptr " is NULL");                   \
  } while (0)

char *dup_string(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (p)
    std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

} // namespace

extern "C" {

const char *nvsim_version(void) { return NVSIM_VERSION_STRING; }

const char *nvsim_last_error(void) { return g_last_error.c_str(); }

const char *nvsim_status_string(nvsim_status status) {
  switch (status) {
  case NVSIM_OK:
    return "ok";
  case NVSIM_ERR_NULL_ARGUMENT:
    return "null argument";
  case NVSIM_ERR_INVALID_ARGUMENT:
    return "invalid argument";
  case NVSIM_ERR_CONFIG:
    return "configuration error";
  case NVSIM_ERR_RUNTIME:
    return "runtime error";
  case NVSIM_ERR_IO:
    return "i/o error";
  case NVSIM_ERR_SCHEMA:
    return "schema mismatch";
  case NVSIM_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

void nvsim_string_free(char *s) { std::free(s); }

const char *nvsim_data_dir(void) {
  g_scratch = nvsim::app::data_dir();
  return g_scratch.c_str();
}

const char *nvsim_default_config_path(void) {
  g_scratch = nvsim::app::default_config_path();
  return g_scratch.c_str();
}

size_t nvsim_catalog_size(void) {
  return nvsim::app::experiment_catalog().size();
}

const char *nvsim_catalog_name(size_t index) {
  const auto &c = nvsim::app::experiment_catalog();
  return index < c.size() ? c[index].name.c_str() : nullptr;
}

const char *nvsim_catalog_summary(size_t index) {
  const auto &c = nvsim::app::experiment_catalog();
  return index < c.size() ? c[index].summary.c_str() : nullptr;
}

// ---- configuration ---------------------------------------------------------

nvsim_status nvsim_config_load(const char *path, nvsim_config **out) {
  NVSIM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<nvsim_config>();
    h->cfg = nvsim::app::load_config(path ? path
                                          : nvsim::app::default_config_path());
    *out = h.release();
    return NVSIM_OK;
  });
}

void nvsim_config_destroy(nvsim_config *cfg) { delete cfg; }

nvsim_status nvsim_config_seed(const nvsim_config *cfg, uint64_t *out) {
  NVSIM_REQUIRE(cfg);
  NVSIM_REQUIRE(out);
  *out = cfg->cfg.protocol.seed;
  return NVSIM_OK;
}

nvsim_status nvsim_config_trajectories(const nvsim_config *cfg, int *out) {
  NVSIM_REQUIRE(cfg);
  NVSIM_REQUIRE(out);
  *out = cfg->cfg.protocol.trajectories;
  return NVSIM_OK;
}

// ---- experiments -----------------------------------------------------------

nvsim_status nvsim_experiment_create(const char *name, nvsim_experiment **out) {
  NVSIM_REQUIRE(name);
  NVSIM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const std::string canon = nvsim::app::canonical_experiment(name);
    if (canon.empty())
      return fail(NVSIM_ERR_INVALID_ARGUMENT,
                  std::string("unknown experiment '") + name + "'");
    auto h = std::make_unique<nvsim_experiment>();
    h->spec.name = canon;
    *out = h.release();
    return NVSIM_OK;
  });
}

void nvsim_experiment_destroy(nvsim_experiment *exp) { delete exp; }

nvsim_status nvsim_experiment_set_config(nvsim_experiment *exp,
                                         const char *path) {
  NVSIM_REQUIRE(exp);
  exp->spec.config_path = path ? path : "";
  return NVSIM_OK;
}

nvsim_status nvsim_experiment_set_output_dir(nvsim_experiment *exp,
                                             const char *dir) {
  NVSIM_REQUIRE(exp);
  NVSIM_REQUIRE(dir);
  exp->spec.out_dir = dir;
  return NVSIM_OK;
}

nvsim_status nvsim_experiment_set_seed(nvsim_experiment *exp, uint64_t seed) {
  NVSIM_REQUIRE(exp);
  exp->spec.seed = seed;
  return NVSIM_OK;
}

nvsim_status nvsim_experiment_set_trajectories(nvsim_experiment *exp,
                                               int trajectories) {
  NVSIM_REQUIRE(exp);
  if (trajectories < 1)
    return fail(NVSIM_ERR_INVALID_ARGUMENT, "trajectories must be >= 1");
  exp->spec.trajectories = trajectories;
  return NVSIM_OK;
}

nvsim_status nvsim_experiment_set_threads(nvsim_experiment *exp,
                                          unsigned threads) {
  NVSIM_REQUIRE(exp);
  if (threads < 1)
    return fail(NVSIM_ERR_INVALID_ARGUMENT, "threads must be >= 1");
  exp->spec.threads = threads;
  return NVSIM_OK;
}

nvsim_status nvsim_experiment_run(nvsim_experiment *exp, int *exit_code) {
  NVSIM_REQUIRE(exp);
  NVSIM_REQUIRE(exit_code);
  *exit_code = 2;
  return guarded([&] {
    const auto res = nvsim::app::run_experiment(exp->spec);
    exp->message = res.message;
    exp->outputs = res.files;
    *exit_code = res.exit_code;
    if (res.exit_code == 1)
      return fail(NVSIM_ERR_CONFIG, res.message);
    if (res.exit_code != 0)
      return fail(NVSIM_ERR_RUNTIME, res.message);
    return NVSIM_OK;
  });
}

const char *nvsim_experiment_message(const nvsim_experiment *exp) {
  return exp ? exp->message.c_str() : "";
}

size_t nvsim_experiment_output_count(const nvsim_experiment *exp) {
  return exp ? exp->outputs.size() : 0;
}

const char *nvsim_experiment_output_path(const nvsim_experiment *exp,
                                         size_t index) {
  if (!exp || index >= exp->outputs.size())
    return nullptr;
  return exp->outputs[index].c_str();
}

// ---- post-processing -------------------------------------------------------

nvsim_status nvsim_emit_plotdata(const char *csv_path, const char *kind,
                                 const char *out_path) {
  NVSIM_REQUIRE(csv_path);
  NVSIM_REQUIRE(kind);
  NVSIM_REQUIRE(out_path);
  return guarded([&] {
    nvsim::app::PlotKind k;
    try {
      k = nvsim::app::plot_kind_from_string(kind);
    } catch (const std::exception &e) {
      return fail(NVSIM_ERR_INVALID_ARGUMENT, e.what());
    }
    nvsim::app::CsvTable table;
    try {
      table = nvsim::app::read_csv(csv_path);
    } catch (const std::runtime_error &e) {
      return fail(NVSIM_ERR_IO, e.what());
    }
    std::string text;
    try {
      text = nvsim::app::plotdata_text(table, k);
    } catch (const std::invalid_argument &e) {
      return fail(NVSIM_ERR_SCHEMA, e.what());
    }
    std::FILE *f = std::fopen(out_path, "wb");
    if (!f)
      return fail(NVSIM_ERR_IO, std::string("cannot write ") + out_path);
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok)
      return fail(NVSIM_ERR_IO, std::string("cannot write ") + out_path);
    return NVSIM_OK;
  });
}

nvsim_status nvsim_fit_csv(const char *csv_path, const char *model,
                           char **json_out) {
  NVSIM_REQUIRE(csv_path);
  NVSIM_REQUIRE(json_out);
  *json_out = nullptr;
  return guarded([&] {
    nvsim::app::CsvTable table;
    try {
      table = nvsim::app::read_csv(csv_path);
    } catch (const std::runtime_error &e) {
      return fail(NVSIM_ERR_IO, e.what());
    }
    const std::string text =
        nvsim::app::fit_csv_text(table, model ? model : "auto");
    *json_out = dup_string(text);
    if (!*json_out)
      return fail(NVSIM_ERR_INTERNAL, "out of memory");
    return NVSIM_OK;
  });
}

// ---- analytic models -------------------------------------------------------

nvsim_status nvsim_analytic_fidelity(double delta_omega_khz, double tau_us,
                                     long long n, double *out) {
  NVSIM_REQUIRE(out);
  return guarded([&] {
    *out = nvsim::protocol::analytic_fidelity(delta_omega_khz, tau_us, n);
    return NVSIM_OK;
  });
}

nvsim_status nvsim_extended_n1e(double delta_omega_khz, double tau_us,
                                double c_khz, double *out) {
  NVSIM_REQUIRE(out);
  return guarded([&] {
    *out = nvsim::protocol::extended_n1e(delta_omega_khz, tau_us, c_khz);
    return NVSIM_OK;
  });
}

nvsim_status nvsim_per_rep_coherence(double delta_omega_khz, double tau_us,
                                     double tau_mean_us, double *out) {
  NVSIM_REQUIRE(out);
  return guarded([&] {
    *out = nvsim::protocol::per_rep_coherence_exact(delta_omega_khz, tau_us,
                                                    tau_mean_us);
    return NVSIM_OK;
  });
}

// ---- register --------------------------------------------------------------

nvsim_status nvsim_register_load(const char *path, nvsim_register **out) {
  NVSIM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const std::string p =
        path ? std::string(path)
             : (std::filesystem::path(nvsim::app::data_dir()) / "register.json")
                   .string();
    auto h = std::make_unique<nvsim_register>();
    try {
      h->reg = nvsim::node::load_register(p);
    } catch (const std::invalid_argument &e) {
      return fail(NVSIM_ERR_CONFIG, e.what());
    }
    *out = h.release();
    return NVSIM_OK;
  });
}

void nvsim_register_destroy(nvsim_register *reg) { delete reg; }

size_t nvsim_register_size(const nvsim_register *reg) {
  return reg ? reg->reg.size() : 0;
}

nvsim_status nvsim_register_spin(const nvsim_register *reg, size_t index,
                                 nvsim_spin_params *out) {
  NVSIM_REQUIRE(reg);
  NVSIM_REQUIRE(out);
  if (index >= reg->reg.size())
    return fail(NVSIM_ERR_INVALID_ARGUMENT, "spin index out of range");
  const auto &s = reg->reg[index];
  *out = {s.id, s.a_par_khz, s.a_perp_khz, s.delta_omega_khz, s.t2_star_ms,
          s.f_ir};
  return NVSIM_OK;
}

} // extern "C"
