/* Copyright (C) 2026 the dil authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the dil library: few-step DDPM inversion, pseudo-guided editing,
 * the DDS optimization loop, and the statistics pipelines, behind opaque
 * handles. All functions return DIL_OK on success; on failure they return a
 * status code and leave a message retrievable with dil_last_error() (the
 * message is thread-local). Strings returned through char** are heap
 * allocated and must be released with dil_string_free(); handles with their
 * matching *_free().
 *
 * Configuration documents are JSON strings; see README.md for the schemas.
 */
#ifndef DIL_H
#define DIL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dil_status {
    DIL_OK = 0,
    DIL_ERR_CONFIG = 1,    /* invalid configuration or malformed document */
    DIL_ERR_BOUNDS = 2,    /* timestep outside the schedule table */
    DIL_ERR_ORDERING = 3,  /* timestep pair in the wrong order */
    DIL_ERR_SHAPE = 4,     /* vector dimension mismatch */
    DIL_ERR_LOOKUP = 5,    /* unknown condition id */
    DIL_ERR_INTEGRITY = 6, /* record does not match the active schedule/denoiser */
    DIL_ERR_UNDEFINED = 7, /* mathematically undefined result requested */
    DIL_ERR_IO = 8,        /* file i/o failure */
    DIL_ERR_INVALID = 9    /* null handle or bad argument */
} dil_status;

typedef struct dil_schedule dil_schedule;
typedef struct dil_denoiser dil_denoiser;
typedef struct dil_plan dil_plan;
typedef struct dil_record dil_record;
typedef struct dil_trajectory dil_trajectory;

const char* dil_version(void);

/* Last error message of the calling thread; empty string if none. */
const char* dil_last_error(void);

void dil_string_free(char* s);

/* Built-in experiment configuration (schedule, toy denoiser, plan, editing
 * defaults) as a JSON document. */
dil_status dil_default_config(char** json_out);

/* Canonical content hash (sorted keys, %.17g floats) of any JSON document. */
dil_status dil_config_hash(const char* json, char** hex_out);

/* ---- schedule ---- */

/* config: {"kind":"linear|scaled_linear|constant","beta_start":..,"beta_end":..,"T":..} */
dil_status dil_schedule_create(const char* config_json, dil_schedule** out);
void dil_schedule_free(dil_schedule* schedule);
dil_status dil_schedule_hash(const dil_schedule* schedule, char** hex_out);
/* CSV columns: t,beta,alpha,alpha_bar */
dil_status dil_schedule_table_csv(const dil_schedule* schedule, char** csv_out);

/* ---- denoiser ---- */

dil_status dil_denoiser_create(const char* spec_json, dil_denoiser** out);
void dil_denoiser_free(dil_denoiser* denoiser);
dil_status dil_denoiser_hash(const dil_denoiser* denoiser, char** hex_out);
dil_status dil_denoiser_dim(const dil_denoiser* denoiser, size_t* dim_out);
/* Draw one clean sample of the condition's data law (gaussian/gmm only). */
dil_status dil_denoiser_sample_x0(const dil_denoiser* denoiser, int condition_id,
                                  uint64_t seed, double* buf, size_t dim);
/* Posterior probability of target_condition against source_condition under
 * equal priors, evaluated at x (gaussian/gmm only). */
dil_status dil_target_responsibility(const dil_denoiser* denoiser, const double* x, size_t dim,
                                     int target_condition, int source_condition, double* out);

/* ---- timestep plans ---- */

dil_status dil_plan_uniform(const dil_schedule* schedule, int k, int t_start, int delta,
                            dil_plan** out);
dil_status dil_plan_explicit(const dil_schedule* schedule, const int* steps, size_t n_steps,
                             int delta, dil_plan** out);
void dil_plan_free(dil_plan* plan);
dil_status dil_plan_to_json(const dil_plan* plan, char** json_out);

/* ---- inversion ---- */

/* options: {"clip_max": 15.5, "cfg": {"phi": 2, "lambda": 1.5}} — both optional;
 * pass NULL or "{}" for plain inversion. */
dil_status dil_invert(const dil_schedule* schedule, const dil_denoiser* denoiser,
                      const dil_plan* plan, const double* x0, size_t dim, int condition_id,
                      uint64_t seed, const char* options_json, dil_record** out);
void dil_record_free(dil_record* record);
dil_status dil_record_to_json(const dil_record* record, char** json_out);
dil_status dil_record_from_json(const dil_schedule* schedule, const char* json, dil_record** out);

/* ---- editing & sampling ---- */

/* edit config: {"mode":"ef|decomposed|pseudo|cfg_both","w":1.5,"w_p":1,"w_t":1,"lambda_s":1} */
dil_status dil_edit(const dil_schedule* schedule, const dil_denoiser* denoiser,
                    const dil_record* record, int target_condition,
                    const char* edit_config_json, dil_trajectory** out);
/* Same semantics without a precomputed record; clip_max <= 0 disables clipping. */
dil_status dil_edit_on_the_fly(const dil_schedule* schedule, const dil_denoiser* denoiser,
                               const dil_plan* plan, const double* x0, size_t dim,
                               int condition_id, int target_condition, uint64_t seed,
                               double clip_max, const char* edit_config_json,
                               dil_trajectory** out);
dil_status dil_generate(const dil_schedule* schedule, const dil_denoiser* denoiser,
                        const dil_plan* plan, int condition_id, uint64_t seed,
                        dil_trajectory** out);
dil_status dil_sdedit(const dil_schedule* schedule, const dil_denoiser* denoiser,
                      const dil_plan* plan, const double* x0, size_t dim, double strength,
                      int target_condition, uint64_t seed, dil_trajectory** out);

void dil_trajectory_free(dil_trajectory* trajectory);
dil_status dil_trajectory_to_json(const dil_trajectory* trajectory, char** json_out);
dil_status dil_trajectory_from_json(const dil_schedule* schedule, const char* json,
                                    dil_trajectory** out);
dil_status dil_trajectory_dim(const dil_trajectory* trajectory, size_t* dim_out);
dil_status dil_trajectory_final_state(const dil_trajectory* trajectory, double* buf, size_t dim);

/* Max relative error of an invert-then-replay round trip under the source
 * condition; options as in dil_invert. */
dil_status dil_reconstruct_check(const dil_schedule* schedule, const dil_denoiser* denoiser,
                                 const dil_plan* plan, const double* x0, size_t dim,
                                 int condition_id, uint64_t seed, const char* options_json,
                                 double* max_rel_err_out);

/* ---- reports (CSV strings) ---- */

/* options: {"n":10000,"seed":0,"condition":0,"constant":[..]} — "constant"
 * replaces the condition's data law with a fixed vector. CSV columns:
 * step,t,s,measured_std,expected_sigma,ci_half */
dil_status dil_correction_std_csv(const dil_schedule* schedule, const dil_denoiser* denoiser,
                                  const dil_plan* plan, const char* options_json,
                                  char** csv_out);

/* curve_csv is the output of dil_correction_std_csv. options:
 * {"stride":"plan|adjacent"}; CSV columns: t,t_star,offset. The summary
 * (median/IQR) is appended as comment lines. */
dil_status dil_offset_histogram_csv(const dil_schedule* schedule, const char* curve_csv,
                                    const char* options_json, char** csv_out);

/* Per-step cosine diagnostics of an edit of the given record towards
 * target_condition. CSV columns: t,cos_a,cos_b */
dil_status dil_cosine_csv(const dil_schedule* schedule, const dil_denoiser* denoiser,
                          const dil_record* record, int target_condition, char** csv_out);

/* options: {"configs":50,"base_seed":0,"lr_mode":"eq_lr|constant"}.
 * CSV columns: dim,K,denoiser_seed,lr_mode,max_abs_diff */
dil_status dil_dds_equiv_csv(const dil_schedule* schedule, const char* options_json,
                             char** csv_out);

/* options: {"configs":100,"base_seed":0,"w":[1,1.5,2,3]}.
 * CSV columns: config,dim,K,seed,w,max_abs_diff,max_residual */
dil_status dil_cfg_equiv_csv(const dil_schedule* schedule, const char* options_json,
                             char** csv_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DIL_H */
