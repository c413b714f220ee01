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

#include "core/chain_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace vjm {
namespace {

MatX stacked(const ChainJacobians& J) {
  MatX A(6, J.Jq.cols() + J.Jtheta.cols());
  A << J.Jq, J.Jtheta;
  return A;
}

double step_scale(const ChainModel& chain, const VecX& dq, const VecX& dtheta,
                  const SolverSettings& s) {
  const double max_length = s.trust_fraction * chain.characteristic_length();
  double scale = 1.0;
  auto limit = [&](CoordinateKind kind, double value) {
    const double cap = kind == CoordinateKind::Rotational ? s.trust_angle : max_length;
    const double a = std::abs(value);
    if (a * scale > cap) scale = cap / a;
  };
  const auto qk = chain.passive_kinds();
  const auto tk = chain.virtual_kinds();
  for (Eigen::Index i = 0; i < dq.size(); ++i) limit(qk[static_cast<std::size_t>(i)], dq[i]);
  for (Eigen::Index i = 0; i < dtheta.size(); ++i) {
    limit(tk[static_cast<std::size_t>(i)], dtheta[i]);
  }
  return scale;
}

}  // namespace

MatX modeled_basis(const ChainJacobians& J, double rank_tolerance) {
  const MatX A = stacked(J);
  if (A.cols() == 0) return MatX(6, 0);
  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cut = rank_tolerance * std::max(1.0, sv[0]);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  if (rank == 6) return MatX::Identity(6, 6);
  return svd.matrixU().leftCols(rank);
}

ChainState solve_chain_equilibrium(const ChainModel& chain, const RigidTransform& target,
                                   const ChainConfiguration& init,
                                   const SolverSettings& settings) {
  chain.check(init);
  if (!target.is_valid(1e-9)) {
    throw Error(ErrorCode::InvalidArgument, "target is not a rigid motion");
  }
  const auto nq = static_cast<Eigen::Index>(chain.passive_count());
  const auto nt = static_cast<Eigen::Index>(chain.virtual_count());
  const MatX& K = chain.spring_stiffness();
  const VecX& theta0 = chain.preload();

  ChainState state;
  state.cfg = init;
  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    const ChainJacobians J = chain_jacobians(chain, state.cfg);
    const Vec6 r = pose_difference(target, J.end).vector();
    const MatX U = modeled_basis(J, settings.rank_tolerance);
    const Eigen::Index m = U.cols();

    const MatX Jq = U.transpose() * J.Jq;
    const MatX Jt = U.transpose() * J.Jtheta;
    const Eigen::Index n = m + nq + nt;
    MatX A = MatX::Zero(n, n);
    A.block(0, m, m, nq) = Jq;
    A.block(0, m + nq, m, nt) = Jt;
    A.block(m, 0, nq, m) = Jq.transpose();
    A.block(m + nq, 0, nt, m) = Jt.transpose();
    A.block(m + nq, m + nq, nt, nt) = -K;
    VecX b(n);
    b.head(m) = U.transpose() * r;
    b.segment(m, nq).setZero();
    b.tail(nt) = K * (state.cfg.theta - theta0);

    Eigen::FullPivLU<MatX> lu(A);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::SingularSystem,
                  "equilibrium system is singular (kinematic singularity)");
    }
    const VecX x = lu.solve(b);
    if (!x.allFinite()) {
      throw Error(ErrorCode::SingularSystem, "equilibrium system produced non-finite values");
    }
    const VecX dq = x.segment(m, nq);
    const VecX dtheta = x.tail(nt);
    const double residual = b.head(m).norm();
    const double step = std::sqrt(dq.squaredNorm() + dtheta.squaredNorm());

    const double scale = step_scale(chain, dq, dtheta, settings);
    state.cfg.q += scale * dq;
    state.cfg.theta += scale * dtheta;
    state.F = Wrench::from_vector(U * x.head(m));
    state.iterations = iter;
    state.residual = residual;
    if (scale == 1.0 && residual < settings.pose_tolerance &&
        step < settings.step_tolerance) {
      state.t = forward_geometry(chain, state.cfg);
      return state;
    }
  }
  throw Error(ErrorCode::MaxIterationsExceeded,
              "chain equilibrium did not converge in " +
                  std::to_string(settings.max_iterations) + " iterations (residual " +
                  short_number(state.residual) + ")");
}

ChainState solve_chain_equilibrium(const ChainModel& chain, const PoseDisplacement& target,
                                   const RigidTransform& t0, const ChainConfiguration& init,
                                   const SolverSettings& settings) {
  return solve_chain_equilibrium(chain, apply_displacement(t0, target), init, settings);
}

Wrench chain_force_deflection(const ChainModel& chain, const RigidTransform& t,
                              const ChainConfiguration& init, const SolverSettings& settings) {
  return solve_chain_equilibrium(chain, t, init, settings).F;
}

StiffnessTriple chain_stiffness(const ChainModel& chain, const ChainState& state,
                                double rank_tolerance) {
  const ChainJacobians J = chain_jacobians(chain, state.cfg);
  const LoadHessians H = load_hessians(chain, state.cfg, state.F);
  const MatX U = modeled_basis(J, rank_tolerance);
  const auto nq = static_cast<Eigen::Index>(chain.passive_count());

  const MatX Jq = U.transpose() * J.Jq;
  const MatX Jt = U.transpose() * J.Jtheta;

  const MatX Kt = chain.spring_stiffness() - H.thetatheta;
  Eigen::LLT<MatX> llt(0.5 * (Kt + Kt.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::BucklingDetected,
                "loaded spring stiffness lost positive definiteness");
  }
  const MatX k = llt.solve(MatX::Identity(Kt.rows(), Kt.cols()));

  const MatX C0 = Jt * k * Jt.transpose();
  Eigen::FullPivLU<MatX> c0lu(C0);
  if (!c0lu.isInvertible()) {
    throw Error(ErrorCode::SingularJacobian, "J_theta k J_theta^T is singular");
  }
  const MatX K0 = c0lu.inverse();

  MatX Kc;
  MatX Kcq(nq, U.cols());
  if (nq == 0) {
    Kc = K0;
  } else {
    const MatX M = Jq + Jt * k * H.thetaq;
    const MatX Ahat = H.qq + H.qtheta * k * H.thetaq - M.transpose() * K0 * M;
    Eigen::FullPivLU<MatX> alu(Ahat);
    if (!alu.isInvertible()) {
      throw Error(ErrorCode::SingularJacobian, "passive-joint block is singular");
    }
    Kcq = -alu.solve(M.transpose() * K0);
    Kc = K0 - K0 * M * Kcq;
  }
  const MatX Kct = k * Jt.transpose() * Kc + (nq == 0 ? MatX::Zero(Kt.rows(), U.cols())
                                                      : MatX(k * H.thetaq * Kcq));

  StiffnessTriple out;
  out.K_C = U * Kc * U.transpose();
  out.K_Cq = Kcq * U.transpose();
  out.K_Ctheta = Kct * U.transpose();
  out.modeled_basis = U;
  if (U.cols() == 6) {
    out.deficient_directions = MatX(6, 0);
  } else {
    Eigen::JacobiSVD<MatX> svd(U, Eigen::ComputeFullU);
    out.deficient_directions = svd.matrixU().rightCols(6 - U.cols());
  }
  return out;
}

}  // namespace vjm
