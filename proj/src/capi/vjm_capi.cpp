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

#include "vjm/vjm.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/aggregation_loaded.hpp"
#include "core/chain_solver.hpp"
#include "core/commands.hpp"
#include "core/config.hpp"

struct vjm_chain {
  std::vector<vjm::ChainElement> elements;
  std::vector<vjm::GeometricError> errors;
  vjm::ChainModel model;
  bool dirty = true;

  const vjm::ChainModel& get() {
    if (dirty) {
      model = vjm::ChainModel(elements, errors);
      dirty = false;
    }
    return model;
  }
};

struct vjm_config {
  vjm::Config config;
};

struct vjm_result {
  vjm::ResultBundle bundle;
};

struct vjm_parallel {
  vjm::ParallelModel model;
  vjm::LoadedSettings settings;
};

namespace {

struct LastError {
  std::string message;
  long chain = -1;
  std::string location;
};

thread_local LastError last_error;

vjm_status to_status(vjm::ErrorCode code) {
  using vjm::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return VJM_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return VJM_ERR_DIMENSION_MISMATCH;
    case ErrorCode::AngleOutOfRange: return VJM_ERR_ANGLE_OUT_OF_RANGE;
    case ErrorCode::InvalidModel: return VJM_ERR_INVALID_MODEL;
    case ErrorCode::SingularSystem: return VJM_ERR_SINGULAR_SYSTEM;
    case ErrorCode::MaxIterationsExceeded: return VJM_ERR_MAX_ITERATIONS;
    case ErrorCode::BucklingDetected: return VJM_ERR_BUCKLING;
    case ErrorCode::SingularJacobian: return VJM_ERR_SINGULAR_JACOBIAN;
    case ErrorCode::SingularAggregateStiffness: return VJM_ERR_SINGULAR_AGGREGATE;
    case ErrorCode::SingularStiffness: return VJM_ERR_SINGULAR_STIFFNESS;
    case ErrorCode::NotConverged: return VJM_ERR_NOT_CONVERGED;
    case ErrorCode::UnreachableTarget: return VJM_ERR_UNREACHABLE;
    case ErrorCode::ConfigError: return VJM_ERR_CONFIG;
  }
  return VJM_ERR_INTERNAL;
}

vjm_status fail(vjm_status status, std::string message) {
  last_error = {std::move(message), -1, {}};
  return status;
}

template <class F>
vjm_status guard(F&& body) {
  try {
    body();
    last_error = {};
    return VJM_OK;
  } catch (const vjm::ConfigIssue& e) {
    last_error = {e.what(), -1, e.location()};
    return VJM_ERR_CONFIG;
  } catch (const vjm::Error& e) {
    last_error = {e.what(), e.chain() ? static_cast<long>(*e.chain()) : -1, {}};
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    return fail(VJM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VJM_ERR_INTERNAL, e.what());
  }
}

vjm::Mat3 read_rotation(const double* R) {
  if (R == nullptr) return vjm::Mat3::Identity();
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(R);
}

vjm::Vec3 read_vec3(const double* v) {
  if (v == nullptr) return vjm::Vec3::Zero();
  return vjm::Vec3(v[0], v[1], v[2]);
}

void write_transform(const vjm::RigidTransform& t, double* R, double* d) {
  if (R != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> out(R);
    out = t.R;
  }
  if (d != nullptr) {
    for (int i = 0; i < 3; ++i) d[i] = t.d[i];
  }
}

void write_matrix(const vjm::MatX& M, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out, M.rows(), M.cols()) = M;
}

vjm::JointType joint_type(vjm_joint_type t) {
  switch (t) {
    case VJM_REVOLUTE: return vjm::JointType::Revolute;
    case VJM_PRISMATIC: return vjm::JointType::Prismatic;
    case VJM_PARALLELOGRAM: return vjm::JointType::Parallelogram;
  }
  throw vjm::Error(vjm::ErrorCode::InvalidArgument, "unknown joint type");
}

vjm::ChainConfiguration read_configuration(const vjm::ChainModel& m, const double* q,
                                           const double* theta) {
  vjm::ChainConfiguration cfg = m.zero_configuration();
  if (m.passive_count() > 0 && q == nullptr) {
    throw vjm::Error(vjm::ErrorCode::InvalidArgument, "q is NULL");
  }
  if (m.virtual_count() > 0 && theta == nullptr) {
    throw vjm::Error(vjm::ErrorCode::InvalidArgument, "theta is NULL");
  }
  for (std::size_t i = 0; i < m.passive_count(); ++i) cfg.q[i] = q[i];
  for (std::size_t i = 0; i < m.virtual_count(); ++i) cfg.theta[i] = theta[i];
  return cfg;
}

vjm::CommandOptions command_options(const vjm_run_options* o) {
  vjm::CommandOptions out;
  if (o == nullptr) return out;
  if (o->point != nullptr) out.point = o->point;
  if (o->error_case != nullptr) out.error_case = o->error_case;
  out.compensate = o->compensate != 0;
  out.jobs = o->jobs;
  if (o->tolerance > 0.0) out.tolerance = o->tolerance;
  if (o->scenario != nullptr) out.scenario = o->scenario;
  return out;
}

template <class Cmd>
vjm_status run_command(Cmd cmd, const vjm_config* config, const vjm_run_options* options,
                       vjm_result** out) {
  if (config == nullptr || out == nullptr) {
    return fail(VJM_ERR_INVALID_ARGUMENT, "config and out must not be NULL");
  }
  return guard([&] {
    auto* r = new vjm_result{cmd(config->config, command_options(options))};
    *out = r;
  });
}

#define VJM_REQUIRE(cond, msg) \
  if (!(cond)) return fail(VJM_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* vjm_version(void) { return "0.1.0"; }

const char* vjm_status_name(vjm_status status) {
  switch (status) {
    case VJM_OK: return "Ok";
    case VJM_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case VJM_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case VJM_ERR_ANGLE_OUT_OF_RANGE: return "AngleOutOfRange";
    case VJM_ERR_INVALID_MODEL: return "InvalidModel";
    case VJM_ERR_SINGULAR_SYSTEM: return "SingularSystem";
    case VJM_ERR_MAX_ITERATIONS: return "MaxIterationsExceeded";
    case VJM_ERR_BUCKLING: return "BucklingDetected";
    case VJM_ERR_SINGULAR_JACOBIAN: return "SingularJacobian";
    case VJM_ERR_SINGULAR_AGGREGATE: return "SingularAggregateStiffness";
    case VJM_ERR_SINGULAR_STIFFNESS: return "SingularStiffness";
    case VJM_ERR_NOT_CONVERGED: return "NotConverged";
    case VJM_ERR_UNREACHABLE: return "UnreachableTarget";
    case VJM_ERR_CONFIG: return "ConfigError";
    case VJM_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

int vjm_status_exit_code(vjm_status status) {
  switch (status) {
    case VJM_OK: return 0;
    case VJM_ERR_CONFIG:
    case VJM_ERR_INVALID_ARGUMENT:
    case VJM_ERR_DIMENSION_MISMATCH:
    case VJM_ERR_ANGLE_OUT_OF_RANGE:
    case VJM_ERR_INVALID_MODEL:
      return 2;
    case VJM_ERR_UNREACHABLE: return 4;
    default: return 3;
  }
}

const char* vjm_last_error_message(void) { return last_error.message.c_str(); }
long vjm_last_error_chain(void) { return last_error.chain; }
const char* vjm_last_error_location(void) { return last_error.location.c_str(); }

vjm_status vjm_chain_create(vjm_chain** out) {
  VJM_REQUIRE(out != nullptr, "out is NULL");
  return guard([&] { *out = new vjm_chain; });
}

void vjm_chain_free(vjm_chain* chain) { delete chain; }

vjm_status vjm_chain_add_const(vjm_chain* chain, const double R[9], const double d[3]) {
  VJM_REQUIRE(chain != nullptr, "chain is NULL");
  return guard([&] {
    vjm::RigidTransform t{read_rotation(R), read_vec3(d)};
    if (!t.is_valid(1e-9)) {
      throw vjm::Error(vjm::ErrorCode::InvalidArgument, "R is not a rotation matrix");
    }
    chain->elements.push_back(vjm::ConstTransform{t});
    chain->dirty = true;
  });
}

vjm_status vjm_chain_add_actuated(vjm_chain* chain, vjm_joint_type type, const double axis[3],
                                  double value) {
  VJM_REQUIRE(chain != nullptr && axis != nullptr, "chain and axis must not be NULL");
  return guard([&] {
    chain->elements.push_back(vjm::ActuatedFrozen{joint_type(type), read_vec3(axis), value});
    chain->dirty = true;
  });
}

vjm_status vjm_chain_add_passive(vjm_chain* chain, vjm_joint_type type, const double axis[3],
                                 const double bar[3]) {
  VJM_REQUIRE(chain != nullptr && axis != nullptr, "chain and axis must not be NULL");
  return guard([&] {
    chain->elements.push_back(vjm::PassiveJoint{joint_type(type), read_vec3(axis),
                                                read_vec3(bar)});
    chain->dirty = true;
  });
}

vjm_status vjm_chain_add_spring(vjm_chain* chain, size_t n, const vjm_spring_axis* axes,
                                const double* K, const double* preload) {
  VJM_REQUIRE(chain != nullptr && axes != nullptr && K != nullptr,
              "chain, axes and K must not be NULL");
  VJM_REQUIRE(n >= 1 && n <= 6, "a spring has between 1 and 6 axes");
  return guard([&] {
    vjm::VirtualSpring s;
    for (size_t i = 0; i < n; ++i) {
      if (axes[i] < VJM_TX || axes[i] > VJM_RZ) {
        throw vjm::Error(vjm::ErrorCode::InvalidArgument, "unknown spring axis");
      }
      s.axes.push_back(static_cast<vjm::SpringAxis>(axes[i]));
    }
    const auto N = static_cast<Eigen::Index>(n);
    s.stiffness = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(K, N, N);
    if (preload != nullptr) s.preload = Eigen::Map<const vjm::VecX>(preload, N);
    chain->elements.push_back(std::move(s));
    chain->dirty = true;
  });
}

vjm_status vjm_chain_add_error(vjm_chain* chain, size_t element, const double R[9],
                               const double d[3]) {
  VJM_REQUIRE(chain != nullptr, "chain is NULL");
  return guard([&] {
    chain->errors.push_back({element, {read_rotation(R), read_vec3(d)}});
    chain->dirty = true;
  });
}

vjm_status vjm_chain_counts(vjm_chain* chain, size_t* passive, size_t* virt) {
  VJM_REQUIRE(chain != nullptr, "chain is NULL");
  return guard([&] {
    const vjm::ChainModel& m = chain->get();
    if (passive != nullptr) *passive = m.passive_count();
    if (virt != nullptr) *virt = m.virtual_count();
  });
}

vjm_status vjm_chain_forward(vjm_chain* chain, const double* q, const double* theta, double R[9],
                             double d[3]) {
  VJM_REQUIRE(chain != nullptr, "chain is NULL");
  return guard([&] {
    const vjm::ChainModel& m = chain->get();
    write_transform(vjm::forward_geometry(m, read_configuration(m, q, theta)), R, d);
  });
}

vjm_status vjm_chain_jacobians(vjm_chain* chain, const double* q, const double* theta,
                               double* Jq, double* Jtheta) {
  VJM_REQUIRE(chain != nullptr, "chain is NULL");
  return guard([&] {
    const vjm::ChainModel& m = chain->get();
    const vjm::ChainJacobians J = vjm::chain_jacobians(m, read_configuration(m, q, theta));
    if (Jq != nullptr) write_matrix(J.Jq, Jq);
    if (Jtheta != nullptr) write_matrix(J.Jtheta, Jtheta);
  });
}

vjm_status vjm_chain_solve(vjm_chain* chain, const double target_R[9], const double target_d[3],
                           double* q, double* theta, double F[6]) {
  VJM_REQUIRE(chain != nullptr && target_d != nullptr, "chain and target_d must not be NULL");
  return guard([&] {
    const vjm::ChainModel& m = chain->get();
    const vjm::RigidTransform target{read_rotation(target_R), read_vec3(target_d)};
    const vjm::ChainState s =
        vjm::solve_chain_equilibrium(m, target, read_configuration(m, q, theta));
    for (std::size_t i = 0; i < m.passive_count(); ++i) q[i] = s.cfg.q[i];
    for (std::size_t i = 0; i < m.virtual_count(); ++i) theta[i] = s.cfg.theta[i];
    if (F != nullptr) {
      const vjm::Vec6 w = s.F.vector();
      for (int i = 0; i < 6; ++i) F[i] = w[i];
    }
  });
}

vjm_status vjm_chain_stiffness(vjm_chain* chain, const double* q, const double* theta,
                               const double F[6], double K[36], double* Kq, double* Ktheta) {
  VJM_REQUIRE(chain != nullptr && F != nullptr && K != nullptr,
              "chain, F and K must not be NULL");
  return guard([&] {
    const vjm::ChainModel& m = chain->get();
    vjm::ChainState s;
    s.cfg = read_configuration(m, q, theta);
    s.F = vjm::Wrench::from_vector(Eigen::Map<const vjm::Vec6>(F));
    s.t = vjm::forward_geometry(m, s.cfg);
    const vjm::StiffnessTriple k = vjm::chain_stiffness(m, s);
    write_matrix(k.K_C, K);
    if (Kq != nullptr) write_matrix(k.K_Cq, Kq);
    if (Ktheta != nullptr) write_matrix(k.K_Ctheta, Ktheta);
  });
}

vjm_status vjm_config_load_file(const char* path, vjm_config** out) {
  VJM_REQUIRE(path != nullptr && out != nullptr, "path and out must not be NULL");
  return guard([&] { *out = new vjm_config{vjm::load_config_file(path)}; });
}

vjm_status vjm_config_load_string(const char* text, const char* source, vjm_config** out) {
  VJM_REQUIRE(text != nullptr && out != nullptr, "text and out must not be NULL");
  return guard([&] {
    *out = new vjm_config{vjm::parse_config(text, source != nullptr ? source : "<string>")};
  });
}

void vjm_config_free(vjm_config* config) { delete config; }

void vjm_run_options_init(vjm_run_options* options) {
  if (options == nullptr) return;
  options->point = nullptr;
  options->error_case = "none";
  options->compensate = 0;
  options->jobs = 1;
  options->tolerance = 0.0;
  options->scenario = "milling";
}

vjm_status vjm_analyze(const vjm_config* config, const vjm_run_options* options,
                       vjm_result** out) {
  return run_command(vjm::cmd_analyze, config, options, out);
}

vjm_status vjm_assemble(const vjm_config* config, const vjm_run_options* options,
                        vjm_result** out) {
  return run_command(vjm::cmd_assemble, config, options, out);
}

vjm_status vjm_trajectory(const vjm_config* config, const vjm_run_options* options,
                          vjm_result** out) {
  return run_command(vjm::cmd_trajectory, config, options, out);
}

vjm_status vjm_compensate(const vjm_config* config, const vjm_run_options* options,
                          vjm_result** out) {
  return run_command(vjm::cmd_compensate, config, options, out);
}

const char* vjm_result_command(const vjm_result* r) { return r ? r->bundle.command.c_str() : ""; }
const char* vjm_result_json(const vjm_result* r) { return r ? r->bundle.json.c_str() : ""; }
const char* vjm_result_csv(const vjm_result* r) { return r ? r->bundle.csv.c_str() : ""; }
const char* vjm_result_text(const vjm_result* r) { return r ? r->bundle.text.c_str() : ""; }
const char* vjm_result_metadata(const vjm_result* r) {
  return r ? r->bundle.metadata.c_str() : "";
}
void vjm_result_free(vjm_result* result) { delete result; }

vjm_status vjm_parallel_from_config(const vjm_config* config, const char* error_case,
                                    const char* point, vjm_parallel** out) {
  VJM_REQUIRE(config != nullptr && out != nullptr, "config and out must not be NULL");
  return guard([&] {
    const vjm::Config& c = config->config;
    std::string p = point != nullptr ? point : "";
    if (p.empty() && c.kind == vjm::ManipulatorKind::Orthoglide) {
      if (c.points.empty()) {
        throw vjm::ConfigIssue("configuration defines no points", "/points");
      }
      p = c.points.front().first;
    }
    *out = new vjm_parallel{
        vjm::configured_model(c, error_case != nullptr ? error_case : "none", p), c.solver};
  });
}

void vjm_parallel_free(vjm_parallel* model) { delete model; }

size_t vjm_parallel_chain_count(const vjm_parallel* model) {
  return model != nullptr ? model->model.size() : 0;
}

vjm_status vjm_parallel_force(vjm_parallel* model, const double R[9], const double d[3],
                              double F[6], double K[36]) {
  VJM_REQUIRE(model != nullptr && d != nullptr, "model and d must not be NULL");
  return guard([&] {
    const vjm::LoadedState s = vjm::manipulator_force(
        model->model, {read_rotation(R), read_vec3(d)}, nullptr, model->settings.chain);
    if (F != nullptr) {
      const vjm::Vec6 w = s.F_total.vector();
      for (int i = 0; i < 6; ++i) F[i] = w[i];
    }
    if (K != nullptr) write_matrix(s.K_c, K);
  });
}

vjm_status vjm_parallel_unloaded_shift(vjm_parallel* model, double shift[6]) {
  VJM_REQUIRE(model != nullptr && shift != nullptr, "model and shift must not be NULL");
  return guard([&] {
    const vjm::Vec6 v = vjm::unloaded_shift(model->model, model->settings).vector();
    for (int i = 0; i < 6; ++i) shift[i] = v[i];
  });
}

vjm_status vjm_parallel_invert_compliance(vjm_parallel* model, const double F[6],
                                          double tolerance, double R[9], double d[3]) {
  VJM_REQUIRE(model != nullptr && F != nullptr, "model and F must not be NULL");
  return guard([&] {
    vjm::LoadedSettings s = model->settings;
    if (tolerance > 0.0) s.force_tolerance = tolerance;
    const vjm::LoadedState r = vjm::invert_compliance(
        model->model, vjm::Wrench::from_vector(Eigen::Map<const vjm::Vec6>(F)), s);
    write_transform(r.t, R, d);
  });
}

}  // extern "C"
