// Copyright 2026 The vjm-stiffness Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VJM_VJM_H_
#define VJM_VJM_H_

/*
 * C interface to the vjm elastostatics library.
 *
 * Units: mm, N, rad. Wrenches, stiffness matrices and poses passed through
 * the chain and parallel-model functions carry moments in N*mm, so stiffness
 * blocks are N/mm, N (= N*mm/mm) and N*mm/rad. The command functions report
 * moments in N*m.
 *
 * Matrices are dense row-major arrays. Rotations are 3x3 row-major.
 *
 * Every function returning vjm_status sets a thread-local error message on
 * failure (vjm_last_error_message). Output pointers are written only on
 * success.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(VJM_BUILDING_LIBRARY)
#define VJM_API __attribute__((visibility("default")))
#else
#define VJM_API
#endif

typedef enum vjm_status {
  VJM_OK = 0,
  VJM_ERR_INVALID_ARGUMENT = 1,
  VJM_ERR_DIMENSION_MISMATCH = 2,
  VJM_ERR_ANGLE_OUT_OF_RANGE = 3,
  VJM_ERR_INVALID_MODEL = 4,
  VJM_ERR_SINGULAR_SYSTEM = 5,
  VJM_ERR_MAX_ITERATIONS = 6,
  VJM_ERR_BUCKLING = 7,
  VJM_ERR_SINGULAR_JACOBIAN = 8,
  VJM_ERR_SINGULAR_AGGREGATE = 9,
  VJM_ERR_SINGULAR_STIFFNESS = 10,
  VJM_ERR_NOT_CONVERGED = 11,
  VJM_ERR_UNREACHABLE = 12,
  VJM_ERR_CONFIG = 13,
  VJM_ERR_INTERNAL = 14
} vjm_status;

typedef enum vjm_joint_type {
  VJM_REVOLUTE = 0,
  VJM_PRISMATIC = 1,
  VJM_PARALLELOGRAM = 2
} vjm_joint_type;

/* Spring deflection axes in the current local frame. */
typedef enum vjm_spring_axis {
  VJM_TX = 0, VJM_TY, VJM_TZ, VJM_RX, VJM_RY, VJM_RZ
} vjm_spring_axis;

typedef struct vjm_chain vjm_chain;
typedef struct vjm_parallel vjm_parallel;
typedef struct vjm_config vjm_config;
typedef struct vjm_result vjm_result;

VJM_API const char* vjm_version(void);
/* Symbolic name of a status, e.g. "UnreachableTarget". */
VJM_API const char* vjm_status_name(vjm_status status);
/* Process exit code for a status: 0, 2 (configuration), 3 (solver), 4 (unreachable). */
VJM_API int vjm_status_exit_code(vjm_status status);
VJM_API const char* vjm_last_error_message(void);
/* Index of the chain involved in the last error, or -1. */
VJM_API long vjm_last_error_chain(void);
/* Location of the last configuration error ("line:column" or a JSON pointer), or "". */
VJM_API const char* vjm_last_error_location(void);

/* ---- Serial chains ---- */

VJM_API vjm_status vjm_chain_create(vjm_chain** out);
VJM_API void vjm_chain_free(vjm_chain* chain);
VJM_API vjm_status vjm_chain_add_const(vjm_chain* chain, const double R[9], const double d[3]);
VJM_API vjm_status vjm_chain_add_actuated(vjm_chain* chain, vjm_joint_type type,
                                          const double axis[3], double value);
/* `bar` is used by VJM_PARALLELOGRAM only and may be NULL otherwise. */
VJM_API vjm_status vjm_chain_add_passive(vjm_chain* chain, vjm_joint_type type,
                                         const double axis[3], const double bar[3]);
/* K is n x n; preload may be NULL. */
VJM_API vjm_status vjm_chain_add_spring(vjm_chain* chain, size_t n, const vjm_spring_axis* axes,
                                        const double* K, const double* preload);
/* Perturbation applied after element `element`. */
VJM_API vjm_status vjm_chain_add_error(vjm_chain* chain, size_t element, const double R[9],
                                       const double d[3]);
VJM_API vjm_status vjm_chain_counts(vjm_chain* chain, size_t* passive, size_t* virt);
VJM_API vjm_status vjm_chain_forward(vjm_chain* chain, const double* q, const double* theta,
                                     double R[9], double d[3]);
/* Jq is 6 x n_q, Jtheta is 6 x n_theta. */
VJM_API vjm_status vjm_chain_jacobians(vjm_chain* chain, const double* q, const double* theta,
                                       double* Jq, double* Jtheta);
/* Equilibrium at the target end-pose starting from (q, theta), which are
 * overwritten with the solution. F receives (force, moment). */
VJM_API vjm_status vjm_chain_solve(vjm_chain* chain, const double target_R[9],
                                   const double target_d[3], double* q, double* theta,
                                   double F[6]);
/* Stiffness at an equilibrium (q, theta, F). Kq is n_q x 6 and Ktheta is
 * n_theta x 6; either may be NULL. */
VJM_API vjm_status vjm_chain_stiffness(vjm_chain* chain, const double* q, const double* theta,
                                       const double F[6], double K[36], double* Kq,
                                       double* Ktheta);

/* ---- Configuration files and commands ---- */

VJM_API vjm_status vjm_config_load_file(const char* path, vjm_config** out);
VJM_API vjm_status vjm_config_load_string(const char* text, const char* source,
                                          vjm_config** out);
VJM_API void vjm_config_free(vjm_config* config);

typedef struct vjm_run_options {
  const char* point;       /* NULL or "": default selection */
  const char* error_case;  /* NULL: "none" */
  int compensate;
  int jobs;
  double tolerance;        /* <= 0: configured wrench tolerance */
  const char* scenario;    /* NULL: "milling" */
} vjm_run_options;

VJM_API void vjm_run_options_init(vjm_run_options* options);

VJM_API vjm_status vjm_analyze(const vjm_config* config, const vjm_run_options* options,
                               vjm_result** out);
VJM_API vjm_status vjm_assemble(const vjm_config* config, const vjm_run_options* options,
                                vjm_result** out);
VJM_API vjm_status vjm_trajectory(const vjm_config* config, const vjm_run_options* options,
                                  vjm_result** out);
VJM_API vjm_status vjm_compensate(const vjm_config* config, const vjm_run_options* options,
                                  vjm_result** out);

/* Result payloads; empty strings when a command produces no such part. */
VJM_API const char* vjm_result_command(const vjm_result* result);
VJM_API const char* vjm_result_json(const vjm_result* result);
VJM_API const char* vjm_result_csv(const vjm_result* result);
VJM_API const char* vjm_result_text(const vjm_result* result);
VJM_API const char* vjm_result_metadata(const vjm_result* result);
VJM_API void vjm_result_free(vjm_result* result);

/* ---- Parallel models from a configuration ---- */

/* point may be NULL for the configuration's first point (or t0). */
VJM_API vjm_status vjm_parallel_from_config(const vjm_config* config, const char* error_case,
                                            const char* point, vjm_parallel** out);
VJM_API void vjm_parallel_free(vjm_parallel* model);
VJM_API size_t vjm_parallel_chain_count(const vjm_parallel* model);
/* Platform wrench and tangent stiffness holding the platform at (R, d). */
VJM_API vjm_status vjm_parallel_force(vjm_parallel* model, const double R[9], const double d[3],
                                      double F[6], double K[36]);
/* Unloaded equilibrium shift (translation, rotation vector). */
VJM_API vjm_status vjm_parallel_unloaded_shift(vjm_parallel* model, double shift[6]);
/* Platform pose under external wrench F; tolerance <= 0 selects the default. */
VJM_API vjm_status vjm_parallel_invert_compliance(vjm_parallel* model, const double F[6],
                                                  double tolerance, double R[9], double d[3]);

#ifdef __cplusplus
}
#endif

#endif  // VJM_VJM_H_
