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

#include "core/spatial.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "core/error.hpp"

namespace vjm {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::BucklingDetected: return "BucklingDetected";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::SingularAggregateStiffness: return "SingularAggregateStiffness";
    case ErrorCode::SingularStiffness: return "SingularStiffness";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::UnreachableTarget: return "UnreachableTarget";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

double wrench_norm(const Wrench& w) {
  return std::sqrt(w.f.squaredNorm() + (w.m / kMomentScale).squaredNorm());
}

bool RigidTransform::is_valid(double tol) const {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol && d.allFinite();
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Mat6 adapter_jacobian(const Vec3& v) {
  Mat6 J = Mat6::Identity();
  J.topRightCorner<3, 3>() = -skew(v);
  return J;
}

Mat3 axis_rotation(const Vec3& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

Mat3 rotation_exp(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-14) return Mat3::Identity() + skew(phi);
  return Eigen::AngleAxisd(angle, phi / angle).toRotationMatrix();
}

Vec3 rotation_log(const Mat3& R) {
  // w = sin(angle) * axis, c = cos(angle)
  const Vec3 w(0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)),
               0.5 * (R(1, 0) - R(0, 1)));
  const double c = 0.5 * (R.trace() - 1.0);
  const double s = w.norm();
  const double angle = std::atan2(s, c);
  if (angle >= std::numbers::pi - 1e-6) {
    throw Error(ErrorCode::AngleOutOfRange,
                "relative rotation angle " + std::to_string(angle) +
                    " rad is too close to pi for a local displacement");
  }
  if (s < 1e-300) return Vec3::Zero();
  return w * (angle / s);
}

PoseDisplacement pose_difference(const RigidTransform& a, const RigidTransform& b) {
  return {a.d - b.d, rotation_log(a.R * b.R.transpose())};
}

RigidTransform apply_displacement(const RigidTransform& base, const PoseDisplacement& d) {
  if (!(d.phi.norm() < std::numbers::pi)) {
    throw Error(ErrorCode::AngleOutOfRange, "displacement rotation must be below pi");
  }
  return {rotation_exp(d.phi) * base.R, base.d + d.p};
}

}  // namespace vjm
