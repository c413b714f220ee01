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

#pragma once

// Small-deflection aggregation of chain stiffness at the platform, and the
// assembly of chains whose geometry deviates from nominal.

#include <span>
#include <vector>

#include "core/chain_solver.hpp"
#include "core/parallel_model.hpp"

namespace vjm {

/// Sum of the chain stiffnesses, each transported to the platform reference
/// point: sum_i J_v(v_i)^T K_C(i) J_v(v_i).
Mat6 aggregate_stiffness(std::span<const StiffnessTriple> chains, std::span<const Vec3> adapters);

struct JointSensitivities {
  MatX passive;  // n_q x 6: dq per platform displacement
  MatX virt;     // n_theta x 6: dtheta per platform displacement
};

/// Unloaded joint sensitivities of one chain with respect to the platform
/// pose: (K_Cq J_v, K_Ctheta J_v).
JointSensitivities joint_sensitivities_unloaded(const StiffnessTriple& triple, const Vec3& adapter);

struct ChainAssembly {
  PoseDisplacement error;   // epsilon_i at the chain end-point
  PoseDisplacement dt;      // J_v dt - epsilon_i
  Wrench F;                 // internal wrench at the chain end-point
  VecX tau;                 // virtual-joint loadings J_theta^T F
  VecX dtheta;
  VecX dq;
};

struct AssemblyReport {
  PoseDisplacement dt;  // platform shift
  std::vector<ChainAssembly> chains;
  double energy = 0.0;  // N*mm
};

/// Linear assembly from explicit chain errors and unloaded stiffness triples.
/// Platform directions that some chain does not model are excluded; the
/// remaining aggregate stiffness must be nonsingular.
AssemblyReport assemble_nonperfect(const ParallelModel& model,
                                   std::span<const PoseDisplacement> errors,
                                   std::span<const StiffnessTriple> stiffness);

/// Linear assembly with errors taken from the model's chains and stiffness
/// evaluated unloaded at the nominal configurations.
AssemblyReport assemble_nonperfect(const ParallelModel& model);

/// Orthonormal basis of the platform directions constrained by every
/// chain; the identity when all chains model all six directions.
MatX platform_basis(std::span<const StiffnessTriple> stiffness, std::span<const Vec3> adapters);

/// Unloaded stiffness triple of chain i at its nominal configuration.
StiffnessTriple unloaded_stiffness(const ParallelModel& model, std::size_t i);

}  // namespace vjm
