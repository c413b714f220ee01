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

// Elastostatic equilibrium of one serial chain with a prescribed end-pose,
// and its linearization into Cartesian stiffness and joint sensitivities.

#include "core/chain_model.hpp"

namespace vjm {

struct SolverSettings {
  double pose_tolerance = 1e-9;   // mixed mm / rad
  double step_tolerance = 1e-9;   // mixed mm / rad
  int max_iterations = 100;
  double trust_angle = 0.1;       // rad per iteration
  double trust_fraction = 0.1;    // of the chain characteristic length
  double rank_tolerance = 1e-10;  // relative singular-value cut-off
};

struct ChainState {
  ChainConfiguration cfg;
  Wrench F;             // wrench applied to the chain end-point, moment in N*mm
  RigidTransform t;     // achieved end-pose
  double residual = 0;  // final pose residual
  int iterations = 0;
};

struct StiffnessTriple {
  Mat6 K_C = Mat6::Zero();  // N/mm, N, N*mm/rad blocks
  MatX K_Cq;                // n_q x 6
  MatX K_Ctheta;            // n_theta x 6
  /// Orthonormal 6 x r basis of the end-point directions the chain models;
  /// K_C acts on this subspace only.
  MatX modeled_basis;
  /// Orthonormal complement of modeled_basis (6 x (6 - r)).
  MatX deficient_directions;
};

/// Orthonormal basis of range([J_q J_theta]). The identity when the chain
/// spans all six directions.
MatX modeled_basis(const ChainJacobians& J, double rank_tolerance = 1e-10);

/// Iterates the block system
///   [0 Jq Jt; Jq^T 0 0; Jt^T 0 -K] [F; dq; dt] = [t - g; 0; K (theta - theta0)]
/// from `init` until the pose residual vanishes.
ChainState solve_chain_equilibrium(const ChainModel& chain, const RigidTransform& target,
                                   const ChainConfiguration& init,
                                   const SolverSettings& settings = {});

/// Same, with the target given as a displacement from `t0`.
ChainState solve_chain_equilibrium(const ChainModel& chain, const PoseDisplacement& target,
                                   const RigidTransform& t0, const ChainConfiguration& init,
                                   const SolverSettings& settings = {});

/// Wrench the chain exerts when its end-point is held at `t`.
Wrench chain_force_deflection(const ChainModel& chain, const RigidTransform& t,
                              const ChainConfiguration& init,
                              const SolverSettings& settings = {});

StiffnessTriple chain_stiffness(const ChainModel& chain, const ChainState& state,
                                double rank_tolerance = 1e-10);

}  // namespace vjm
