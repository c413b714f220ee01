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

// Nonlinear aggregation: platform force-deflection, unloaded equilibrium of
// mismatched chains, compliance inversion under load, and compensation of
// compliance errors by target modification.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "core/aggregation_linear.hpp"

namespace vjm {

struct LoadedSettings {
  double force_tolerance = 1e-8;  // wrench_norm units
  int max_outer = 100;
  int continuation_steps = 10;
  double alpha_comp = 0.5;
  int max_halvings = 30;
  double position_tolerance = 1e-6;  // mm, compensation
  double rotation_tolerance = 1e-8;  // rad, compensation
  int max_compensation = 200;
  /// Platform displacement components the commanded target can change.
  std::array<bool, 6> controllable = {true, true, true, true, true, true};
  SolverSettings chain;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct LoadedState {
  RigidTransform t;
  std::vector<ChainState> chains;
  std::vector<StiffnessTriple> stiffness;
  Wrench F_total;  // at the platform reference point
  Mat6 K_c = Mat6::Zero();
  int iterations = 0;
};

/// Platform wrench needed to hold the platform at `t`, with the aggregate
/// tangent stiffness there. Chain solves start from `warm` when given,
/// otherwise from the nominal configurations.
LoadedState manipulator_force(const ParallelModel& model, const RigidTransform& t,
                              const LoadedState* warm = nullptr,
                              const SolverSettings& chain_settings = {});

/// Newton iteration on the platform pose from `start` until the platform
/// wrench equals `F`. Steps are halved while the residual does not decrease.
LoadedState solve_platform(const ParallelModel& model, const Wrench& F, const LoadedState& start,
                           const LoadedSettings& settings = {});

/// Equilibrium with no external load; the returned state's pose minus t0 is
/// the unloaded shift.
LoadedState unloaded_equilibrium(const ParallelModel& model, const LoadedSettings& settings = {});
PoseDisplacement unloaded_shift(const ParallelModel& model, const LoadedSettings& settings = {});

/// Platform pose under external wrench `F`, reached by load continuation
/// from t0.
LoadedState invert_compliance(const ParallelModel& model, const Wrench& F,
                              const LoadedSettings& settings = {});

/// Model commanded to the given platform target.
using ModelFactory = std::function<ParallelModel(const RigidTransform& commanded)>;

struct Compensation {
  RigidTransform commanded;
  LoadedState verified;         // loaded equilibrium at the commanded target
  PoseDisplacement residual;    // desired minus reached
  int iterations = 0;
};

/// Modifies the commanded target until the loaded platform reaches
/// `desired` on every controllable component.
Compensation compensate_target(const ModelFactory& factory, const Wrench& F,
                               const RigidTransform& desired,
                               const LoadedSettings& settings = {});

/// Model whose chain i is commanded to platform target commands[i]; the
/// model's reference pose is `reference`. Empty `commands` commands every
/// chain to `reference`.
using ChainTargetFactory = std::function<ParallelModel(
    const RigidTransform& reference, std::span<const RigidTransform> commands)>;

struct ErrorCompensation {
  PoseDisplacement load_part;    // common target change from loading
  PoseDisplacement error_shift;  // unloaded shift of the mismatched model
  std::vector<PoseDisplacement> chain_changes;  // per-chain target change
  std::vector<RigidTransform> commands;
  LoadedState verified;
  PoseDisplacement residual;
  int iterations = 0;
};

/// Per-chain target modification combining load and error compensation,
/// refined by common corrections until the loaded platform reaches
/// `desired` on every controllable component.
ErrorCompensation compensate_with_errors(const ChainTargetFactory& factory, const Wrench& F,
                                         const RigidTransform& desired,
                                         const LoadedSettings& settings = {});

}  // namespace vjm
