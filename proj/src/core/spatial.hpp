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

// Spatial algebra used throughout the library.
//
// Unit system: lengths in mm, forces in N, angles in rad. Inside the numerical
// core moments are carried in N*mm so that J^T F is dimensionally homogeneous;
// reports and configuration files use N*m (see kMomentScale).
//
// Every 6-vector and 6x6 matrix is ordered translation block first, rotation
// block second.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vjm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// N*mm per N*m.
inline constexpr double kMomentScale = 1000.0;

/// Small pose displacement: translation (mm) and a rotation vector (rad),
/// the latter expressed in base-frame axes.
struct PoseDisplacement {
  Vec3 p = Vec3::Zero();
  Vec3 phi = Vec3::Zero();

  static PoseDisplacement from_vector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  Vec6 vector() const {
    Vec6 v;
    v << p, phi;
    return v;
  }
};

/// Force (N) and moment (N*mm) acting at a chain end-point or at the platform
/// reference point.
struct Wrench {
  Vec3 f = Vec3::Zero();
  Vec3 m = Vec3::Zero();

  static Wrench from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vec6 vector() const {
    Vec6 v;
    v << f, m;
    return v;
  }
  bool is_finite() const { return f.allFinite() && m.allFinite(); }
};

/// Norm used for every wrench tolerance: sqrt(|f|^2 [N^2] + |m|^2 [(N*m)^2]).
double wrench_norm(const Wrench& w);

struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 d = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& d) { return {Mat3::Identity(), d}; }
  static RigidTransform rotation(const Mat3& R) { return {R, Vec3::Zero()}; }

  RigidTransform operator*(const RigidTransform& o) const {
    return {R * o.R, R * o.d + d};
  }
  RigidTransform inverse() const { return {R.transpose(), -(R.transpose() * d)}; }
  Vec3 apply(const Vec3& x) const { return R * x + d; }

  /// True when R is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-12) const;
};

/// S such that S*w = v x w.
Mat3 skew(const Vec3& v);

/// [[I, -(v x)], [0, I]]: maps a platform reference-point displacement to the
/// displacement of a point located at `v` relative to the reference point.
/// Its transpose maps a wrench at that point to the reference point.
Mat6 adapter_jacobian(const Vec3& v);

Mat3 axis_rotation(const Vec3& unit_axis, double angle);
Mat3 rotation_exp(const Vec3& phi);

/// Inverse of rotation_exp. Throws AngleOutOfRange when the rotation angle is
/// within 1e-6 of pi.
Vec3 rotation_log(const Mat3& R);

/// p = a.d - b.d, phi = log(a.R * b.R^T).
PoseDisplacement pose_difference(const RigidTransform& a, const RigidTransform& b);

/// Inverse of pose_difference in its first argument.
RigidTransform apply_displacement(const RigidTransform& base, const PoseDisplacement& d);

}  // namespace vjm
