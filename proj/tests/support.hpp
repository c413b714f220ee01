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

// Shared generators and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "core/chain_solver.hpp"
#include "core/parallel_model.hpp"

namespace vjm::testing {

class Random {
 public:
  explicit Random(unsigned seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Vec3 vec3(double scale) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
  }
  Vec3 unit() {
    Vec3 v;
    do {
      v = vec3(1.0);
    } while (v.norm() < 0.1);
    return v.normalized();
  }
  RigidTransform transform(double length, double angle = 1.0) {
    return {rotation_exp(unit() * uniform(0.0, angle)), vec3(length)};
  }
  /// Symmetric positive definite n x n matrix with eigenvalues in about
  /// [scale, 4 scale].
  MatX spd(int n, double scale) {
    MatX A(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) A(r, c) = uniform(-1.0, 1.0);
    }
    return scale * (MatX::Identity(n, n) + 0.5 * A * A.transpose() / n);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<SpringAxis> all_axes() {
  return {SpringAxis::Tx, SpringAxis::Ty, SpringAxis::Tz,
          SpringAxis::Rx, SpringAxis::Ry, SpringAxis::Rz};
}

/// Six-axis spring with translational stiffness near `kt` (N/mm) and
/// rotational stiffness near `kr` (N*mm/rad).
inline VirtualSpring full_spring(Random& rng, double kt, double kr) {
  VirtualSpring s;
  s.axes = all_axes();
  s.stiffness = MatX::Zero(6, 6);
  s.stiffness.topLeftCorner(3, 3) = rng.spd(3, kt);
  s.stiffness.bottomRightCorner(3, 3) = rng.spd(3, kr);
  return s;
}

/// Random chain whose springs cover all six end-point directions, with one
/// to `max_joints` passive revolute, prismatic or parallelogram joints in
/// between.
inline ChainModel random_full_chain(Random& rng, int max_joints = 3) {
  std::vector<ChainElement> e;
  e.push_back(ConstTransform{rng.transform(100.0)});
  e.push_back(full_spring(rng, 1000.0, 1e6));
  const int joints = rng.integer(1, max_joints);
  for (int k = 0; k < joints; ++k) {
    e.push_back(ConstTransform{rng.transform(80.0)});
    switch (rng.integer(0, 2)) {
      case 0: e.push_back(PassiveJoint{JointType::Revolute, rng.unit(), {}}); break;
      case 1: e.push_back(PassiveJoint{JointType::Prismatic, rng.unit(), {}}); break;
      default: e.push_back(PassiveJoint{JointType::Parallelogram, rng.unit(), rng.vec3(100.0)});
    }
  }
  e.push_back(ConstTransform{rng.transform(80.0)});
  e.push_back(full_spring(rng, 2000.0, 2e6));
  e.push_back(ConstTransform{rng.transform(50.0)});
  return ChainModel(std::move(e));
}

/// Small chain: one to three springs with random axis subsets and up to two
/// passive joints.
inline ChainModel random_toy_chain(Random& rng) {
  std::vector<ChainElement> e;
  e.push_back(ConstTransform{rng.transform(50.0)});
  const int springs = rng.integer(1, 3);
  for (int k = 0; k < springs; ++k) {
    std::vector<SpringAxis> axes = all_axes();
    std::shuffle(axes.begin(), axes.end(), std::mt19937(static_cast<unsigned>(rng.integer(0, 1 << 20))));
    axes.resize(static_cast<std::size_t>(k == 0 ? 6 : rng.integer(1, 6)));
    VirtualSpring s;
    s.axes = axes;
    const int n = static_cast<int>(axes.size());
    s.stiffness = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      s.stiffness(i, i) = is_rotational(axes[static_cast<std::size_t>(i)]) ? rng.uniform(5e5, 2e6)
                                                                            : rng.uniform(500, 2000);
    }
    e.push_back(std::move(s));
    e.push_back(ConstTransform{rng.transform(60.0)});
    if (rng.integer(0, 1) == 1) e.push_back(PassiveJoint{JointType::Revolute, rng.unit(), {}});
  }
  e.push_back(ConstTransform{rng.transform(40.0)});
  return ChainModel(std::move(e));
}

/// Right Jacobian of the chart s -> exp(s) at s, transposed onto moments:
/// the moment conjugate to d(s) for a wrench m applied at exp(s) R.
inline Mat3 chart_jacobian(const Vec3& s) {
  const double th = s.norm();
  const Mat3 S = skew(s);
  if (th < 1e-9) return Mat3::Identity() + 0.5 * S;
  return Mat3::Identity() + (1.0 - std::cos(th)) / (th * th) * S +
         (th - std::sin(th)) / (th * th * th) * S * S;
}

/// Central finite differences of the end-point wrench with respect to the
/// end-pose, perturbed in the chart t(s) = (d + s_p, exp(s_phi) R).
inline Mat6 fd_stiffness(const ChainModel& chain, const ChainState& state, double h,
                         const SolverSettings& settings) {
  auto wrench = [&](const Vec6& s) {
    const ChainState r = solve_chain_equilibrium(chain, PoseDisplacement::from_vector(s), state.t,
                                                 state.cfg, settings);
    Vec6 g;
    g << r.F.f, chart_jacobian(s.tail<3>()).transpose() * r.F.m;
    return g;
  };
  Mat6 K;
  for (int k = 0; k < 6; ++k) {
    const double step = k < 3 ? h : h / 100.0;
    Vec6 e = Vec6::Zero();
    e[k] = step;
    K.col(k) = (wrench(e) - wrench(-e)) / (2.0 * step);
  }
  return K;
}

/// Mount placing the platform attachment on the chain's nominal end-pose
/// when the platform sits at t0.
inline ChainMount mount_for(const ChainModel& chain, const RigidTransform& t0) {
  ChainMount m;
  m.chain = chain;
  m.nominal = chain.zero_configuration();
  const RigidTransform end = forward_geometry(chain.nominal(), m.nominal);
  m.attachment = t0.R.transpose() * (end.d - t0.d);
  m.attachment_rotation = t0.R.transpose() * end.R;
  return m;
}

/// Parallel model of `count` random full chains meeting the platform at t0.
/// Each chain has a single passive joint, so two or more chains constrain
/// the platform redundantly.
inline ParallelModel random_parallel_model(Random& rng, int count, const RigidTransform& t0) {
  std::vector<ChainMount> mounts;
  for (int i = 0; i < count; ++i) mounts.push_back(mount_for(random_full_chain(rng, 1), t0));
  return ParallelModel(std::move(mounts), t0);
}

/// Same model with one random rigid error per chain, translations up to
/// `length` mm and rotations up to `angle` rad.
inline ParallelModel with_random_errors(Random& rng, const ParallelModel& model, double length,
                                        double angle) {
  std::vector<ChainMount> mounts = model.mounts();
  for (auto& m : mounts) {
    const int n = static_cast<int>(m.chain.elements().size());
    const GeometricError e{static_cast<std::size_t>(rng.integer(0, n - 1)),
                           {rotation_exp(rng.vec3(angle)), rng.vec3(length)}};
    m.chain = m.chain.with_errors({e});
  }
  return ParallelModel(std::move(mounts), model.t0());
}

inline double relative_error(const MatX& a, const MatX& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Least-squares problem for Eigen's Levenberg-Marquardt driver.
template <class Residual>
struct LeastSquares {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Residual residual;
  int n_inputs;
  int n_values;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f = residual(x);
    return 0;
  }
};

/// Minimizes 0.5 |r(x)|^2 from x0 with finite-difference Jacobians:
/// Levenberg-Marquardt, then Gauss-Newton polishing steps.
template <class Residual>
Eigen::VectorXd minimize_least_squares(Residual r, Eigen::VectorXd x0, int n_values) {
  using Problem = LeastSquares<Residual>;
  Problem p{r, static_cast<int>(x0.size()), n_values};
  Eigen::NumericalDiff<Problem, Eigen::Central> diff(p, 1e-10);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Problem, Eigen::Central>> lm(diff);
  lm.parameters.ftol = 1e-16;
  lm.parameters.xtol = 1e-16;
  lm.parameters.gtol = 0.0;
  lm.parameters.maxfev = 20000;
  lm.minimize(x0);

  const Eigen::Index n = x0.size();
  Eigen::VectorXd f = r(x0);
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 20; ++it) {
    Eigen::MatrixXd J(f.size(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      // Five-point stencil: truncation O(h^4) allows a step large enough
      // that rounding in r does not bias the stationary point.
      const double h = 1e-3 * std::max(1.0, std::abs(x0[k]));
      auto at = [&](double t) {
        Eigen::VectorXd y = x0;
        y[k] += t;
        return Eigen::VectorXd(r(y));
      };
      J.col(k) = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    }
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-f);
    // Near the minimum the objective is flat to rounding, so steps are
    // accepted while their length keeps shrinking.
    if (!(step.norm() < last_step)) break;
    last_step = step.norm();
    x0 += step;
    f = r(x0);
  }
  return x0;
}

/// End-point wrench of a chain held at `target`, from penalty minimization
/// of the spring energy plus rho/2 |W e|^2 with e the pose mismatch. The
/// constrained wrench is the Richardson extrapolation over rho and 2 rho.
inline Wrench penalty_wrench(const ChainModel& chain, const RigidTransform& target,
                             double rho_scale) {
  const Eigen::Index nq = static_cast<Eigen::Index>(chain.passive_count());
  const Eigen::Index nt = static_cast<Eigen::Index>(chain.virtual_count());
  const MatX& K = chain.spring_stiffness();
  const MatX L = Eigen::LLT<MatX>(K).matrixU();
  double kt = 0.0, kr = 0.0;
  for (Eigen::Index i = 0; i < nt; ++i) {
    if (chain.virtual_kinds()[static_cast<std::size_t>(i)] == CoordinateKind::Rotational) {
      kr = std::max(kr, K(i, i));
    } else {
      kt = std::max(kt, K(i, i));
    }
  }
  if (kt == 0.0) kt = 1000.0;
  if (kr == 0.0) kr = 1e6;

  auto solve = [&](double factor, Eigen::VectorXd x0) {
    const double rt = factor * rho_scale * kt, rr = factor * rho_scale * kr;
    auto residual = [&, rt, rr](const Eigen::VectorXd& x) {
      ChainConfiguration cfg{x.head(nq), x.tail(nt)};
      const PoseDisplacement e = pose_difference(forward_geometry(chain, cfg), target);
      Eigen::VectorXd f(nt + 6);
      f.head(nt) = L * cfg.theta;
      f.segment<3>(nt) = std::sqrt(rt) * e.p;
      f.segment<3>(nt + 3) = std::sqrt(rr) * e.phi;
      return f;
    };
    const Eigen::VectorXd x = minimize_least_squares(residual, x0, static_cast<int>(nt + 6));
    ChainConfiguration cfg{x.head(nq), x.tail(nt)};
    const PoseDisplacement e = pose_difference(forward_geometry(chain, cfg), target);
    Vec6 w;
    w << rt * e.p, rr * e.phi;
    return std::pair{w, x};
  };
  // The mismatch e is the end-point pose minus the target: the wrench
  // applied by the surroundings is -rho e.
  const auto [w1, x1] = solve(1.0, Eigen::VectorXd::Zero(nq + nt));
  const auto [w2, x2] = solve(2.0, x1);
  return Wrench::from_vector(-(2.0 * w2 - w1));
}

}  // namespace vjm::testing
