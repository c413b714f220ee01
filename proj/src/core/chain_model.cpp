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

#include "core/chain_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace vjm {
namespace {

constexpr double kAxisTol = 1e-12;

void check_unit(const Vec3& axis, const char* what) {
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > kAxisTol) {
    throw Error(ErrorCode::InvalidModel, std::string(what) + " axis must be a unit vector");
  }
}

Vec3 spring_direction(SpringAxis a) {
  return Vec3::Unit(static_cast<int>(a) % 3);
}

RigidTransform joint_motion(JointType type, const Vec3& axis, const Vec3& bar, double value) {
  switch (type) {
    case JointType::Revolute:
      return RigidTransform::rotation(axis_rotation(axis, value));
    case JointType::Prismatic:
      return RigidTransform::translation(axis * value);
    case JointType::Parallelogram:
      return RigidTransform::translation(axis_rotation(axis, value) * bar);
  }
  return {};
}

// One coordinate's instantaneous motion, base frame.
struct CoordinateTwist {
  bool rotational = false;
  Vec3 axis;   // rotation axis, or translation direction of the end-point
  Vec3 point;  // a point on the rotation axis
};

struct Walk {
  RigidTransform end;
  std::vector<CoordinateTwist> passive;
  std::vector<CoordinateTwist> virt;
};

class ErrorLookup {
 public:
  explicit ErrorLookup(const ChainModel& chain) : chain_(chain) {}
  RigidTransform apply(std::size_t element, const RigidTransform& T) const {
    RigidTransform out = T;
    for (const auto& e : chain_.geometric_errors()) {
      if (e.element == element) out = out * e.perturbation;
    }
    return out;
  }

 private:
  const ChainModel& chain_;
};

Walk walk(const ChainModel& chain, const ChainConfiguration& cfg, bool twists) {
  chain.check(cfg);
  const ErrorLookup errors(chain);
  Walk w;
  if (twists) {
    w.passive.reserve(chain.passive_count());
    w.virt.reserve(chain.virtual_count());
  }
  RigidTransform T;
  std::size_t iq = 0;
  std::size_t it = 0;
  const auto& elements = chain.elements();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& element = elements[e];
    if (const auto* c = std::get_if<ConstTransform>(&element)) {
      T = T * errors.apply(e, c->transform);
    } else if (const auto* a = std::get_if<ActuatedFrozen>(&element)) {
      T = T * errors.apply(e, joint_motion(a->type, a->axis, Vec3::Zero(), a->value));
    } else if (const auto* p = std::get_if<PassiveJoint>(&element)) {
      const double q = cfg.q[static_cast<Eigen::Index>(iq++)];
      if (twists) {
        switch (p->type) {
          case JointType::Revolute:
            w.passive.push_back({true, T.R * p->axis, T.d});
            break;
          case JointType::Prismatic:
            w.passive.push_back({false, T.R * p->axis, T.d});
            break;
          case JointType::Parallelogram:
            w.passive.push_back(
                {false, T.R * p->axis.cross(axis_rotation(p->axis, q) * p->bar), T.d});
            break;
        }
      }
      T = T * errors.apply(e, joint_motion(p->type, p->axis, p->bar, q));
    } else if (const auto* s = std::get_if<VirtualSpring>(&element)) {
      for (SpringAxis axis : s->axes) {
        const double th = cfg.theta[static_cast<Eigen::Index>(it++)];
        const Vec3 dir = spring_direction(axis);
        if (is_rotational(axis)) {
          if (twists) w.virt.push_back({true, T.R * dir, T.d});
          T = T * RigidTransform::rotation(axis_rotation(dir, th));
        } else {
          if (twists) w.virt.push_back({false, T.R * dir, T.d});
          T = T * RigidTransform::translation(dir * th);
        }
      }
      T = errors.apply(e, T);
    }
  }
  w.end = T;
  return w;
}

MatX twist_columns(const std::vector<CoordinateTwist>& twists, const Vec3& end) {
  MatX J(6, static_cast<Eigen::Index>(twists.size()));
  for (std::size_t k = 0; k < twists.size(); ++k) {
    const auto& t = twists[k];
    const auto col = static_cast<Eigen::Index>(k);
    if (t.rotational) {
      J.block<3, 1>(0, col) = t.axis.cross(end - t.point);
      J.block<3, 1>(3, col) = t.axis;
    } else {
      J.block<3, 1>(0, col) = t.axis;
      J.block<3, 1>(3, col).setZero();
    }
  }
  return J;
}

}  // namespace

ChainModel::ChainModel(std::vector<ChainElement> elements, std::vector<GeometricError> errors)
    : elements_(std::move(elements)), errors_(std::move(errors)) {
  std::vector<MatX> blocks;
  std::vector<VecX> preloads;
  double length = 0.0;
  for (const auto& element : elements_) {
    if (const auto* c = std::get_if<ConstTransform>(&element)) {
      if (!c->transform.is_valid(1e-12)) {
        throw Error(ErrorCode::InvalidModel, "constant transform is not a rigid motion");
      }
      length += c->transform.d.norm();
    } else if (const auto* a = std::get_if<ActuatedFrozen>(&element)) {
      if (a->type == JointType::Parallelogram) {
        throw Error(ErrorCode::InvalidModel, "actuated joints are revolute or prismatic");
      }
      check_unit(a->axis, "actuated joint");
      if (!std::isfinite(a->value)) throw Error(ErrorCode::InvalidModel, "actuated value is not finite");
    } else if (const auto* p = std::get_if<PassiveJoint>(&element)) {
      check_unit(p->axis, "passive joint");
      if (p->type == JointType::Parallelogram) {
        if (!p->bar.allFinite() || p->bar.norm() == 0.0) {
          throw Error(ErrorCode::InvalidModel, "parallelogram bar must be non-zero");
        }
        length += p->bar.norm();
      }
      passive_kinds_.push_back(p->type == JointType::Prismatic ? CoordinateKind::Translational
                                                               : CoordinateKind::Rotational);
    } else if (const auto* s = std::get_if<VirtualSpring>(&element)) {
      const auto n = static_cast<Eigen::Index>(s->axes.size());
      if (n == 0) throw Error(ErrorCode::InvalidModel, "virtual spring without axes");
      for (std::size_t i = 0; i < s->axes.size(); ++i) {
        for (std::size_t j = i + 1; j < s->axes.size(); ++j) {
          if (s->axes[i] == s->axes[j]) {
            throw Error(ErrorCode::InvalidModel, "virtual spring axes must be distinct");
          }
        }
        virtual_kinds_.push_back(is_rotational(s->axes[i]) ? CoordinateKind::Rotational
                                                           : CoordinateKind::Translational);
      }
      if (s->stiffness.rows() != n || s->stiffness.cols() != n) {
        throw Error(ErrorCode::InvalidModel, "spring stiffness must be square in its axes");
      }
      if (!s->stiffness.allFinite() ||
          (s->stiffness - s->stiffness.transpose()).norm() > 1e-12 * s->stiffness.norm()) {
        throw Error(ErrorCode::InvalidModel, "spring stiffness must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<MatX> eig(s->stiffness);
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw Error(ErrorCode::InvalidModel, "spring stiffness must be positive definite");
      }
      if (s->preload.size() != 0 && s->preload.size() != n) {
        throw Error(ErrorCode::InvalidModel, "spring preload size does not match its axes");
      }
      blocks.push_back(s->stiffness);
      preloads.push_back(s->preload.size() == 0 ? VecX::Zero(n) : s->preload);
    }
  }
  for (const auto& e : errors_) {
    if (e.element >= elements_.size()) {
      throw Error(ErrorCode::InvalidModel, "geometric error refers to a missing element");
    }
    if (!e.perturbation.is_valid(1e-12)) {
      throw Error(ErrorCode::InvalidModel, "geometric error is not a rigid motion");
    }
  }
  const auto nt = static_cast<Eigen::Index>(virtual_kinds_.size());
  stiffness_ = MatX::Zero(nt, nt);
  preload_ = VecX::Zero(nt);
  Eigen::Index offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto n = blocks[b].rows();
    stiffness_.block(offset, offset, n, n) = blocks[b];
    preload_.segment(offset, n) = preloads[b];
    offset += n;
  }
  characteristic_length_ = std::max(1.0, length);
}

void ChainModel::check(const ChainConfiguration& cfg) const {
  if (static_cast<std::size_t>(cfg.q.size()) != passive_count() ||
      static_cast<std::size_t>(cfg.theta.size()) != virtual_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "configuration has " + std::to_string(cfg.q.size()) + " passive and " +
                    std::to_string(cfg.theta.size()) + " virtual coordinates, chain expects " +
                    std::to_string(passive_count()) + " and " + std::to_string(virtual_count()));
  }
}

RigidTransform forward_geometry(const ChainModel& chain, const ChainConfiguration& cfg) {
  return walk(chain, cfg, false).end;
}

ChainJacobians chain_jacobians(const ChainModel& chain, const ChainConfiguration& cfg) {
  const Walk w = walk(chain, cfg, true);
  return {twist_columns(w.passive, w.end.d), twist_columns(w.virt, w.end.d), w.end};
}

LoadHessians load_hessians(const ChainModel& chain, const ChainConfiguration& cfg,
                           const Wrench& F) {
  chain.check(cfg);
  const auto nq = static_cast<Eigen::Index>(chain.passive_count());
  const auto nt = static_cast<Eigen::Index>(chain.virtual_count());
  const auto n = nq + nt;
  MatX H = MatX::Zero(n, n);
  const Vec6 load = F.vector();
  if (load.isZero(0.0) || n == 0) {
    return {H.topLeftCorner(nq, nq), H.topRightCorner(nq, nt), H.bottomLeftCorner(nt, nq),
            H.bottomRightCorner(nt, nt)};
  }

  // Directional derivatives of the generalized force J^T F by central
  // differences of the analytic Jacobian; the symmetric part is the Hessian
  // of the scalar virtual work.
  constexpr double h = 1e-5;
  auto generalized_force = [&](const ChainConfiguration& c) {
    const ChainJacobians J = chain_jacobians(chain, c);
    VecX g(n);
    g.head(nq) = J.Jq.transpose() * load;
    g.tail(nt) = J.Jtheta.transpose() * load;
    return g;
  };
  MatX D(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    ChainConfiguration plus = cfg;
    ChainConfiguration minus = cfg;
    if (k < nq) {
      plus.q[k] += h;
      minus.q[k] -= h;
    } else {
      plus.theta[k - nq] += h;
      minus.theta[k - nq] -= h;
    }
    D.col(k) = (generalized_force(plus) - generalized_force(minus)) / (2.0 * h);
  }
  H = 0.5 * (D + D.transpose());
  return {H.topLeftCorner(nq, nq), H.topRightCorner(nq, nt), H.bottomLeftCorner(nt, nq),
          H.bottomRightCorner(nt, nt)};
}

}  // namespace vjm
