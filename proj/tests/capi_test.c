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

/* Exercises the C interface from plain C. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "vjm/vjm.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const double kIdentity[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

static void test_chain(void) {
  vjm_chain* chain = NULL;
  EXPECT(vjm_chain_create(&chain) == VJM_OK);
  const double d[3] = {100, 0, 0};
  const vjm_spring_axis axes[6] = {VJM_TX, VJM_TY, VJM_TZ, VJM_RX, VJM_RY, VJM_RZ};
  double K[36] = {0};
  for (int i = 0; i < 6; ++i) K[i * 7] = i < 3 ? 1000.0 : 1e6;
  EXPECT(vjm_chain_add_spring(chain, 6, axes, K, NULL) == VJM_OK);
  const double z[3] = {0, 0, 1};
  EXPECT(vjm_chain_add_passive(chain, VJM_REVOLUTE, z, NULL) == VJM_OK);
  EXPECT(vjm_chain_add_const(chain, kIdentity, d) == VJM_OK);

  size_t nq = 0, nt = 0;
  EXPECT(vjm_chain_counts(chain, &nq, &nt) == VJM_OK);
  EXPECT(nq == 1 && nt == 6);

  double q[1] = {0.0}, theta[6] = {0};
  double R[9], p[3];
  EXPECT(vjm_chain_forward(chain, q, theta, R, p) == VJM_OK);
  EXPECT(fabs(p[0] - 100.0) < 1e-12);

  double Jq[6], Jt[36];
  EXPECT(vjm_chain_jacobians(chain, q, theta, Jq, Jt) == VJM_OK);
  /* Revolute about z at the origin moves the end-point along y. */
  EXPECT(fabs(Jq[1] - 100.0) < 1e-12 && fabs(Jq[5] - 1.0) < 1e-12);

  const double target[3] = {100.5, 0, 0};
  double F[6];
  EXPECT(vjm_chain_solve(chain, kIdentity, target, q, theta, F) == VJM_OK);
  EXPECT(fabs(F[0] - 500.0) < 1e-6);
  EXPECT(fabs(theta[0] - 0.5) < 1e-9);

  double Kc[36], Kq[6], Kt[36];
  EXPECT(vjm_chain_stiffness(chain, q, theta, F, Kc, Kq, Kt) == VJM_OK);
  EXPECT(fabs(Kc[0] - 1000.0) < 1e-6);

  const double bad_axis[3] = {1, 1, 0};
  EXPECT(vjm_chain_add_passive(chain, VJM_REVOLUTE, bad_axis, NULL) == VJM_OK);
  EXPECT(vjm_chain_counts(chain, &nq, &nt) == VJM_ERR_INVALID_MODEL);
  EXPECT(strlen(vjm_last_error_message()) > 0);
  EXPECT(vjm_chain_forward(NULL, q, theta, R, p) == VJM_ERR_INVALID_ARGUMENT);
  vjm_chain_free(chain);
}

static void test_commands(const char* dir) {
  char path[1024];
  snprintf(path, sizeof path, "%s/orthoglide.json", dir);
  vjm_config* config = NULL;
  EXPECT(vjm_config_load_file(path, &config) == VJM_OK);

  vjm_run_options o;
  vjm_run_options_init(&o);
  o.error_case = "A";
  o.point = "Q2";
  vjm_result* r = NULL;
  EXPECT(vjm_assemble(config, &o, &r) == VJM_OK);
  EXPECT(strcmp(vjm_result_command(r), "assemble") == 0);
  EXPECT(strstr(vjm_result_json(r), "\"Q2\"") != NULL);
  EXPECT(strstr(vjm_result_metadata(r), "config_hash") != NULL);
  EXPECT(strlen(vjm_result_csv(r)) == 0);
  vjm_result_free(r);

  o.point = "nowhere";
  EXPECT(vjm_analyze(config, &o, &r) == VJM_ERR_CONFIG);
  EXPECT(vjm_status_exit_code(VJM_ERR_CONFIG) == 2);
  EXPECT(strcmp(vjm_last_error_location(), "/points") == 0);

  vjm_parallel* model = NULL;
  EXPECT(vjm_parallel_from_config(config, "none", "Q1", &model) == VJM_OK);
  EXPECT(vjm_parallel_chain_count(model) == 3);
  double shift[6];
  EXPECT(vjm_parallel_unloaded_shift(model, shift) == VJM_OK);
  EXPECT(fabs(shift[0]) < 1e-12 && fabs(shift[4]) < 1e-12);
  const double W[6] = {100, -50, 20, 1000, -2000, 500};
  double R[9], d[3], F[6], K[36];
  EXPECT(vjm_parallel_invert_compliance(model, W, 1e-8, R, d) == VJM_OK);
  EXPECT(vjm_parallel_force(model, R, d, F, K) == VJM_OK);
  double err = 0.0;
  for (int i = 0; i < 6; ++i) err += (F[i] - W[i]) * (F[i] - W[i]) / (i < 3 ? 1.0 : 1e6);
  EXPECT(sqrt(err) < 1e-6);
  vjm_parallel_free(model);
  vjm_config_free(config);

  EXPECT(vjm_config_load_string("{\"format_version\": 1,", "inline", &config) == VJM_ERR_CONFIG);
  EXPECT(strchr(vjm_last_error_location(), ':') != NULL);
  EXPECT(vjm_status_exit_code(VJM_ERR_UNREACHABLE) == 4);
  EXPECT(vjm_status_exit_code(VJM_ERR_NOT_CONVERGED) == 3);
  EXPECT(strcmp(vjm_status_name(VJM_ERR_BUCKLING), "BucklingDetected") == 0);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s CONFIG_DIR\n", argv[0]);
    return 2;
  }
  EXPECT(strcmp(vjm_version(), "0.1.0") == 0);
  test_chain();
  test_commands(argv[1]);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("capi: all checks passed\n");
  return failures ? 1 : 0;
}
