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

// Three-leg translational manipulator of the Orthoglide family: model
// construction with actuator location errors, inverse kinematics, and the
// assembly and milling studies.

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/aggregation_loaded.hpp"

namespace vjm {

/// Cantilever properties of one leg link; the link spring reproduces the
/// tip compliance of an Euler-Bernoulli beam of the leg length.
struct BeamProperties {
  double EA = 0.0;   // N
  double EIy = 0.0;  // N*mm^2
  double EIz = 0.0;  // N*mm^2
  double GJ = 0.0;   // N*mm^2
};

struct OrthoglideParams {
  double leg_length = 310.0;     // mm
  double platform_offset = 40.0; // mm, reference point to leg end-point along its axis
  std::array<Vec3, 3> actuator_axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  double actuator_stiffness = 1000.0;  // N/mm
  BeamProperties link;
  /// Platform position whose actuator values locate the angular-error pivot.
  Vec3 error_pivot_point = Vec3::Zero();

  /// Throws InvalidModel when the geometry or stiffness is invalid.
  void validate() const;
};

enum class ErrorKind { None, CaseA, CaseB };

struct ErrorCase {
  ErrorKind kind = ErrorKind::None;
  double magnitude = 0.0;  // mm for CaseA, rad for CaseB

  static ErrorCase none() { return {}; }
  static ErrorCase case_a(double mm = 1.0) { return {ErrorKind::CaseA, mm}; }
  static ErrorCase case_b(double rad = 0.017453292519943295) { return {ErrorKind::CaseB, rad}; }
};

/// Leg frame: columns (a_i, a_{i+1}, a_i x a_{i+1}).
Mat3 leg_frame(const OrthoglideParams& params, std::size_t leg);

/// Actuator and passive coordinates of one leg reaching platform position p.
struct LegSolution {
  double actuator = 0.0;  // mm
  Vec3 passive = Vec3::Zero();  // (q1, q2, q3), rad
};

/// Throws UnreachableTarget when the leg cannot reach p.
LegSolution leg_inverse_kinematics(const OrthoglideParams& params, std::size_t leg, const Vec3& p);

/// Actuator values for platform position p.
std::array<double, 3> inverse_kinematics(const OrthoglideParams& params, const Vec3& p);

/// Model with every leg commanded to platform position p.
ParallelModel build_orthoglide(const OrthoglideParams& params, const ErrorCase& error,
                               const Vec3& p);

/// Model with leg i commanded to commands[i] (all legs to `reference` when
/// `commands` is empty) and reference pose `reference`.
ParallelModel build_orthoglide_commanded(const OrthoglideParams& params, const ErrorCase& error,
                                         const Vec3& reference,
                                         std::span<const RigidTransform> commands);

/// Platform directions the actuators control: the three translations.
inline constexpr std::array<bool, 6> kOrthoglideControllable = {true, true, true,
                                                                false, false, false};

struct AssemblySummary {
  std::string point;
  Vec3 position = Vec3::Zero();
  AssemblyReport report;
  double dq_max = 0.0;         // deg
  double theta_p_max = 0.0;    // mm
  double theta_phi_max = 0.0;  // deg
  double tau_p_max = 0.0;      // N
  double tau_phi_max = 0.0;    // N*m
  double M_max = 0.0;          // N*m
  Vec6 force_balance = Vec6::Zero();  // sum of transported internal wrenches, N and N*m
};

AssemblySummary summarize_assembly(const ParallelModel& model, const AssemblyReport& report,
                                   std::string point, const Vec3& position);

std::vector<AssemblySummary> run_assembly_study(
    const OrthoglideParams& params, const std::vector<std::pair<std::string, Vec3>>& points,
    const ErrorCase& error);

struct MillingScenario {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  int samples = 101;
  Wrench wrench;  // at the platform reference point, moment in N*mm
};

/// Cutting wrench at the platform reference for a force acting at the tool
/// tip located at `tool_offset` from the reference point.
Wrench tool_wrench(const Vec3& force, const Vec3& tool_offset);

struct MillingSample {
  double s = 0.0;
  Vec3 target = Vec3::Zero();
  Vec6 cutting = Vec6::Zero();
  Vec6 geometry = Vec6::Zero();
  Vec6 total = Vec6::Zero();
  Vec6 superposition = Vec6::Zero();
  bool compensated = false;
  Vec6 residual = Vec6::Zero();
};

struct MillingOptions {
  bool compensate = false;
  int jobs = 1;
  LoadedSettings settings;
};

std::vector<MillingSample> run_milling_study(const OrthoglideParams& params,
                                             const MillingScenario& scenario,
                                             const ErrorCase& error,
                                             const MillingOptions& options);

/// Loaded pose error at `desired` before and after compensation under `F`.
struct PointCompensation {
  Vec6 uncompensated = Vec6::Zero();
  Vec6 residual = Vec6::Zero();
  std::vector<Vec6> chain_changes;
  int iterations = 0;
};

PointCompensation compensate_point(const OrthoglideParams& params, const ErrorCase& error,
                                   const Vec3& desired, const Wrench& F,
                                   const LoadedSettings& settings);

}  // namespace vjm
