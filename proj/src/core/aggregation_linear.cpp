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

#include "core/aggregation_linear.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "core/error.hpp"

namespace vjm {
// Null space of the stacked projections of J_v onto each chain's unmodeled
// directions.
MatX platform_basis(std::span<const StiffnessTriple> stiffness, std::span<const Vec3> adapters) {
  MatX stack(0, 6);
  for (std::size_t i = 0; i < stiffness.size(); ++i) {
    const MatX& D = stiffness[i].deficient_directions;
    if (D.cols() == 0) continue;
    const MatX rows = D.transpose() * adapter_jacobian(adapters[i]);
    MatX grown(stack.rows() + rows.rows(), 6);
    grown << stack, rows;
    stack = grown;
  }
  if (stack.rows() == 0) return MatX::Identity(6, 6);
  Eigen::JacobiSVD<MatX> svd(stack, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * std::max(1.0, sv[0])) ++rank;
  return svd.matrixV().rightCols(6 - rank);
}

Mat6 aggregate_stiffness(std::span<const StiffnessTriple> chains, std::span<const Vec3> adapters) {
  if (chains.size() != adapters.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one adapter per chain is required");
  }
  Mat6 K = Mat6::Zero();
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const Mat6 Jv = adapter_jacobian(adapters[i]);
    K += Jv.transpose() * chains[i].K_C * Jv;
  }
  return K;
}

JointSensitivities joint_sensitivities_unloaded(const StiffnessTriple& triple,
                                                const Vec3& adapter) {
  const Mat6 Jv = adapter_jacobian(adapter);
  return {triple.K_Cq * Jv, triple.K_Ctheta * Jv};
}

AssemblyReport assemble_nonperfect(const ParallelModel& model,
                                   std::span<const PoseDisplacement> errors,
                                   std::span<const StiffnessTriple> stiffness) {
  const std::size_t m = model.size();
  if (errors.size() != m || stiffness.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "one error and one stiffness triple per chain");
  }
  std::vector<Vec3> adapters(m);
  std::vector<Mat6> Jv(m);
  for (std::size_t i = 0; i < m; ++i) {
    adapters[i] = model.adapter(i);
    Jv[i] = adapter_jacobian(adapters[i]);
  }

  Mat6 K = Mat6::Zero();
  Vec6 rhs = Vec6::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const Mat6 Ki = Jv[i].transpose() * stiffness[i].K_C * Jv[i];
    const Vec6 eps_ref = adapter_jacobian(-adapters[i]) * errors[i].vector();
    K += Ki;
    rhs += Ki * eps_ref;
  }
  const MatX P = platform_basis(stiffness, adapters);
  const MatX Kp = P.transpose() * K * P;
  Eigen::FullPivLU<MatX> lu(Kp);
  lu.setThreshold(1e-12);
  if (P.cols() == 0 || !lu.isInvertible()) {
    throw Error(ErrorCode::SingularAggregateStiffness,
                "aggregate stiffness is singular: the platform is not fully constrained");
  }
  const Vec6 dt = P * lu.solve(P.transpose() * rhs);

  AssemblyReport report;
  report.dt = PoseDisplacement::from_vector(dt);
  report.chains.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& mount = model.mount(i);
    const ChainJacobians J = chain_jacobians(mount.chain, mount.nominal);
    ChainAssembly& c = report.chains[i];
    const Vec6 dti = Jv[i] * dt - errors[i].vector();
    const Vec6 Fi = stiffness[i].K_C * dti;
    c.error = errors[i];
    c.dt = PoseDisplacement::from_vector(dti);
    c.F = Wrench::from_vector(Fi);
    c.tau = J.Jtheta.transpose() * Fi;
    c.dtheta = stiffness[i].K_Ctheta * dti;
    c.dq = stiffness[i].K_Cq * dti;
    report.energy += 0.5 * dti.dot(Fi);
  }
  return report;
}

StiffnessTriple unloaded_stiffness(const ParallelModel& model, std::size_t i) {
  const auto& mount = model.mount(i);
  ChainState state;
  state.cfg = mount.nominal;
  state.t = forward_geometry(mount.chain, mount.nominal);
  try {
    return chain_stiffness(mount.chain, state);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), i);
  }
}

AssemblyReport assemble_nonperfect(const ParallelModel& model) {
  std::vector<PoseDisplacement> errors(model.size());
  std::vector<StiffnessTriple> stiffness(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    errors[i] = model.chain_error(i);
    stiffness[i] = unloaded_stiffness(model, i);
  }
  return assemble_nonperfect(model, errors, stiffness);
}

}  // namespace vjm
