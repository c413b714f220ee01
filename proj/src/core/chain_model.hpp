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

// Serial chain description in virtual-joint form and its geometry function
// g(q, theta): Jacobians with respect to passive coordinates q and virtual
// spring coordinates theta, and the load-dependent Hessians of g^T F.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "core/spatial.hpp"

namespace vjm {

enum class JointType {
  Revolute,
  Prismatic,
  /// One-dof parallelogram: the distal side translates along a circle,
  /// T(q) = Trans(Rot(axis, q) * bar). Orientation is preserved.
  Parallelogram,
};

enum class SpringAxis { Tx = 0, Ty, Tz, Rx, Ry, Rz };

inline bool is_rotational(SpringAxis a) { return static_cast<int>(a) >= 3; }

struct ConstTransform {
  RigidTransform transform;
};

/// Actuated joint locked at the value computed by inverse kinematics.
struct ActuatedFrozen {
  JointType type = JointType::Prismatic;  // Revolute or Prismatic
  Vec3 axis = Vec3::UnitX();
  double value = 0.0;
};

struct PassiveJoint {
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();
  Vec3 bar = Vec3::Zero();  // Parallelogram only
};

/// Localized elasticity. Deflection coordinates are applied in list order,
/// each about/along the current local frame axis.
struct VirtualSpring {
  std::vector<SpringAxis> axes;
  MatX stiffness;  // axes.size() square, symmetric positive definite
  VecX preload;    // empty means zero
};

using ChainElement = std::variant<ConstTransform, ActuatedFrozen, PassiveJoint, VirtualSpring>;

/// Perturbation post-multiplied onto the transform of element `element`.
struct GeometricError {
  std::size_t element = 0;
  RigidTransform perturbation;
};

struct ChainConfiguration {
  VecX q;
  VecX theta;
};

enum class CoordinateKind { Translational, Rotational };

class ChainModel {
 public:
  ChainModel() = default;
  explicit ChainModel(std::vector<ChainElement> elements,
                      std::vector<GeometricError> errors = {});

  const std::vector<ChainElement>& elements() const { return elements_; }
  const std::vector<GeometricError>& geometric_errors() const { return errors_; }

  std::size_t passive_count() const { return passive_kinds_.size(); }
  std::size_t virtual_count() const { return virtual_kinds_.size(); }

  /// Block-diagonal K_theta0 over all virtual coordinates.
  const MatX& spring_stiffness() const { return stiffness_; }
  const VecX& preload() const { return preload_; }

  std::span<const CoordinateKind> passive_kinds() const { return passive_kinds_; }
  std::span<const CoordinateKind> virtual_kinds() const { return virtual_kinds_; }

  /// Sum of the rigid lengths in the chain, at least 1 mm.
  double characteristic_length() const { return characteristic_length_; }

  ChainModel nominal() const { return ChainModel(elements_); }
  ChainModel with_errors(std::vector<GeometricError> errors) const {
    return ChainModel(elements_, std::move(errors));
  }

  ChainConfiguration zero_configuration() const {
    return {VecX::Zero(passive_count()), VecX::Zero(virtual_count())};
  }

  /// Throws DimensionMismatch unless cfg matches this chain.
  void check(const ChainConfiguration& cfg) const;

 private:
  std::vector<ChainElement> elements_;
  std::vector<GeometricError> errors_;
  std::vector<CoordinateKind> passive_kinds_;
  std::vector<CoordinateKind> virtual_kinds_;
  MatX stiffness_;
  VecX preload_;
  double characteristic_length_ = 1.0;
};

RigidTransform forward_geometry(const ChainModel& chain, const ChainConfiguration& cfg);

/// End-point twist columns (translation of the end-point; rotation), base
/// frame, for every passive and virtual coordinate.
struct ChainJacobians {
  MatX Jq;      // 6 x n_q
  MatX Jtheta;  // 6 x n_theta
  RigidTransform end;
};

ChainJacobians chain_jacobians(const ChainModel& chain, const ChainConfiguration& cfg);

/// Second derivatives of the virtual work g^T F for a wrench F held fixed in
/// the base frame, with the force acting at the moving end-point.
struct LoadHessians {
  MatX qq;
  MatX qtheta;
  MatX thetaq;
  MatX thetatheta;
};

LoadHessians load_hessians(const ChainModel& chain, const ChainConfiguration& cfg,
                           const Wrench& F);

}  // namespace vjm
