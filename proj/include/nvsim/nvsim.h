/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#ifndef NVSIM_NVSIM_H
#define NVSIM_NVSIM_H

/*
 * Stable C interface of the nvsim library.
 *
 * Objects are opaque handles created by *_create / *_load and released by the
 * matching *_destroy. Every fallible call returns an nvsim_status; on failure
 * nvsim_last_error() describes the problem. The message is stored per thread
 * and stays valid until the next failing call on that thread.
 *
 * Strings returned as `const char *` are owned by the library. Strings
 * returned through `char **` are owned by the caller and must be released
 * with nvsim_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NVSIM_BUILDING_LIBRARY)
#define NVSIM_API __declspec(dllexport)
#else
#define NVSIM_API __declspec(dllimport)
#endif
#else
#define NVSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nvsim_status {
  NVSIM_OK = 0,
  NVSIM_ERR_NULL_ARGUMENT = 1,
  NVSIM_ERR_INVALID_ARGUMENT = 2,
  NVSIM_ERR_CONFIG = 3,   /* configuration missing, malformed or invalid */
  NVSIM_ERR_RUNTIME = 4,  /* model or numerical failure */
  NVSIM_ERR_IO = 5,
  NVSIM_ERR_SCHEMA = 6,   /* CSV with an unrecognized layout */
  NVSIM_ERR_INTERNAL = 7
} nvsim_status;

NVSIM_API const char *nvsim_version(void);
NVSIM_API const char *nvsim_last_error(void);
NVSIM_API const char *nvsim_status_string(nvsim_status status);
NVSIM_API void nvsim_string_free(char *s);

/* Bundled data directory ($NVSIM_DATA when set) and default config file. */
NVSIM_API const char *nvsim_data_dir(void);
NVSIM_API const char *nvsim_default_config_path(void);

/* ---- experiment catalog ------------------------------------------------ */

NVSIM_API size_t nvsim_catalog_size(void);
NVSIM_API const char *nvsim_catalog_name(size_t index);    /* NULL if out of range */
NVSIM_API const char *nvsim_catalog_summary(size_t index); /* NULL if out of range */

/* ---- configuration ----------------------------------------------------- */

typedef struct nvsim_config nvsim_config;

/* Loads and validates a configuration; NULL path loads the bundled one. */
NVSIM_API nvsim_status nvsim_config_load(const char *path, nvsim_config **out);
NVSIM_API void nvsim_config_destroy(nvsim_config *cfg);
NVSIM_API nvsim_status nvsim_config_seed(const nvsim_config *cfg, uint64_t *out);
NVSIM_API nvsim_status nvsim_config_trajectories(const nvsim_config *cfg, int *out);

/* ---- experiments ------------------------------------------------------- */

typedef struct nvsim_experiment nvsim_experiment;

/* Fails with NVSIM_ERR_INVALID_ARGUMENT for an unknown experiment name. */
NVSIM_API nvsim_status nvsim_experiment_create(const char *name,
                                               nvsim_experiment **out);
NVSIM_API void nvsim_experiment_destroy(nvsim_experiment *exp);

NVSIM_API nvsim_status nvsim_experiment_set_config(nvsim_experiment *exp,
                                                   const char *path);
NVSIM_API nvsim_status nvsim_experiment_set_output_dir(nvsim_experiment *exp,
                                                       const char *dir);
NVSIM_API nvsim_status nvsim_experiment_set_seed(nvsim_experiment *exp,
                                                 uint64_t seed);
NVSIM_API nvsim_status nvsim_experiment_set_trajectories(nvsim_experiment *exp,
                                                         int trajectories);
NVSIM_API nvsim_status nvsim_experiment_set_threads(nvsim_experiment *exp,
                                                    unsigned threads);

/*
 * Runs the experiment. *exit_code receives 0 on success, 1 for a
 * configuration error and 2 for a runtime error; the return value is
 * NVSIM_OK, NVSIM_ERR_CONFIG or NVSIM_ERR_RUNTIME accordingly.
 */
NVSIM_API nvsim_status nvsim_experiment_run(nvsim_experiment *exp,
                                            int *exit_code);
NVSIM_API const char *nvsim_experiment_message(const nvsim_experiment *exp);
NVSIM_API size_t nvsim_experiment_output_count(const nvsim_experiment *exp);
NVSIM_API const char *nvsim_experiment_output_path(const nvsim_experiment *exp,
                                                   size_t index);

/* ---- post-processing --------------------------------------------------- */

/* kind: "line" or "scatter-logy". */
NVSIM_API nvsim_status nvsim_emit_plotdata(const char *csv_path,
                                           const char *kind,
                                           const char *out_path);
/* model: "auto", "exponential", "gaussian", "double-exp" or "scaling". */
NVSIM_API nvsim_status nvsim_fit_csv(const char *csv_path, const char *model,
                                     char **json_out);

/* ---- analytic dephasing models ------------------------------------------ */

NVSIM_API nvsim_status nvsim_analytic_fidelity(double delta_omega_khz,
                                               double tau_us, long long n,
                                               double *out);
NVSIM_API nvsim_status nvsim_extended_n1e(double delta_omega_khz, double tau_us,
                                          double c_khz, double *out);
NVSIM_API nvsim_status nvsim_per_rep_coherence(double delta_omega_khz,
                                               double tau_us,
                                               double tau_mean_us, double *out);

/* ---- nuclear-spin register --------------------------------------------- */

typedef struct nvsim_spin_params {
  int id;
  double a_par_khz;
  double a_perp_khz;
  double delta_omega_khz;
  double t2_star_ms;
  double f_ir;
} nvsim_spin_params;

typedef struct nvsim_register nvsim_register;

/* NULL path loads the bundled register. */
NVSIM_API nvsim_status nvsim_register_load(const char *path,
                                           nvsim_register **out);
NVSIM_API void nvsim_register_destroy(nvsim_register *reg);
NVSIM_API size_t nvsim_register_size(const nvsim_register *reg);
NVSIM_API nvsim_status nvsim_register_spin(const nvsim_register *reg,
                                           size_t index,
                                           nvsim_spin_params *out);

#ifdef __cplusplus
}
#endif

#endif /* NVSIM_NVSIM_H */
