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

#include <doctest.h>

#include "core/aggregation_linear.hpp"
#include "core/error.hpp"
#include "support.hpp"

using namespace vjm;

namespace {

ChainModel scalar_chain(double k) {
  VirtualSpring s;
  s.axes = {SpringAxis::Tx};
  s.stiffness = MatX::Constant(1, 1, k);
  return ChainModel({ConstTransform{}, s});
}

ParallelModel two_scalar_chains(double k1, double k2, double eps2) {
  std::vector<ChainMount> mounts = {testing::mount_for(scalar_chain(k1), {}),
                                    testing::mount_for(scalar_chain(k2), {})};
  mounts[1].chain = mounts[1].chain.with_errors(
      {{0, RigidTransform::translation(Vec3(eps2, 0.0, 0.0))}});
  return ParallelModel(std::move(mounts), {});
}

Vec6 balance(const ParallelModel& model, const AssemblyReport& r) {
  Vec6 sum = Vec6::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    sum += transport_to_reference(r.chains[i].F, model.adapter(i)).vector();
  }
  return sum;
}

double max_internal(const AssemblyReport& r) {
  double out = 0.0;
  for (const auto& c : r.chains) {
    out = std::max({out, c.F.vector().norm(), c.dt.vector().norm(),
                    c.tau.size() ? c.tau.cwiseAbs().maxCoeff() : 0.0,
                    c.dtheta.size() ? c.dtheta.cwiseAbs().maxCoeff() : 0.0});
  }
  return out;
}

double energy_at(const ParallelModel& model, std::span<const PoseDisplacement> errors,
                 std::span<const StiffnessTriple> k, const Vec6& dt) {
  double e = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Vec6 d = adapter_jacobian(model.adapter(i)) * dt - errors[i].vector();
    e += 0.5 * d.dot(k[i].K_C * d);
  }
  return e;
}

}  // namespace

TEST_CASE("two scalar chains settle at the stiffness-weighted mean") {
  const ParallelModel model = two_scalar_chains(1.0, 3.0, 1.0);
  const AssemblyReport r = assemble_nonperfect(model);
  CHECK(std::abs(r.dt.p.x() - 0.75) < 1e-12);
  CHECK(r.dt.vector().tail<5>().norm() < 1e-12);
  CHECK((r.chains[0].F.vector() + r.chains[1].F.vector()).norm() < 1e-12);
  CHECK(std::abs(r.chains[0].F.f.x()) == doctest::Approx(0.75));
  CHECK(r.energy == doctest::Approx(0.5 * 0.75 * 0.75 + 0.5 * 3.0 * 0.25 * 0.25));

  // Independent route: minimize the assembly energy numerically.
  auto residual = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(2);
    f << std::sqrt(1.0) * x[0], std::sqrt(3.0) * (x[0] - 1.0);
    return f;
  };
  const Eigen::VectorXd x = testing::minimize_least_squares(residual, Eigen::VectorXd::Zero(1), 2);
  CHECK(std::abs(x[0] - r.dt.p.x()) < 1e-12);
}

TEST_CASE("chains missing the same directions restrict the platform basis") {
  const ParallelModel model = two_scalar_chains(1.0, 3.0, 0.0);
  std::vector<StiffnessTriple> k = {unloaded_stiffness(model, 0), unloaded_stiffness(model, 1)};
  std::vector<Vec3> v = {model.adapter(0), model.adapter(1)};
  const MatX P = platform_basis(k, v);
  CHECK(P.cols() == 1);
  CHECK(std::abs(std::abs(P(0, 0)) - 1.0) < 1e-12);
  const AssemblyReport r = assemble_nonperfect(model);
  CHECK(r.dt.vector().norm() < 1e-15);
  CHECK(r.energy == 0.0);
}

TEST_CASE("identical errors relocate the platform without strain") {
  testing::Random rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const ParallelModel model = testing::random_parallel_model(rng, 3, rng.transform(50.0, 0.5));
    Vec6 eps;
    eps << rng.vec3(1.0), rng.vec3(0.01);
    std::vector<PoseDisplacement> errors;
    std::vector<StiffnessTriple> k;
    double scale = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      errors.push_back(PoseDisplacement::from_vector(adapter_jacobian(model.adapter(i)) * eps));
      k.push_back(unloaded_stiffness(model, i));
      scale = std::max(scale, k.back().K_C.norm() * errors.back().vector().norm());
    }
    const AssemblyReport r = assemble_nonperfect(model, errors, k);
    CHECK((r.dt.vector() - eps).norm() < 1e-12 * eps.norm());
    CHECK(max_internal(r) < 1e-12 * scale);
    for (const auto& c : r.chains) CHECK(c.dt.vector().norm() < 1e-12);
  }
}

TEST_CASE("common rigid translation of every chain moves the platform rigidly") {
  testing::Random rng(32);
  const ParallelModel base = testing::random_parallel_model(rng, 3, {});
  const Vec3 shift(0.3, -0.2, 0.5);
  std::vector<ChainMount> mounts = base.mounts();
  for (auto& m : mounts) {
    const auto& c0 = std::get<ConstTransform>(m.chain.elements()[0]).transform;
    m.chain = m.chain.with_errors({{0, RigidTransform::translation(c0.R.transpose() * shift)}});
  }
  const ParallelModel model(std::move(mounts), {});
  const AssemblyReport r = assemble_nonperfect(model);
  CHECK((r.dt.p - shift).norm() < 1e-12);
  CHECK(r.dt.phi.norm() < 1e-14);
  for (const auto& c : r.chains) CHECK(c.F.vector().norm() < 1e-9);
}

TEST_CASE("internal wrenches balance at the platform") {
  testing::Random rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const ParallelModel model = testing::with_random_errors(
        rng, testing::random_parallel_model(rng, rng.integer(2, 4), rng.transform(50.0)), 0.5,
        0.01);
    const AssemblyReport r = assemble_nonperfect(model);
    double scale = 0.0;
    for (const auto& c : r.chains) scale = std::max(scale, c.F.vector().norm());
    CHECK(balance(model, r).norm() <= 1e-9 * scale);
  }
}

TEST_CASE("assembly minimizes the strain energy") {
  testing::Random rng(34);
  const ParallelModel model =
      testing::with_random_errors(rng, testing::random_parallel_model(rng, 3, {}), 0.5, 0.01);
  std::vector<PoseDisplacement> errors;
  std::vector<StiffnessTriple> k;
  for (std::size_t i = 0; i < model.size(); ++i) {
    errors.push_back(model.chain_error(i));
    k.push_back(unloaded_stiffness(model, i));
  }
  const AssemblyReport r = assemble_nonperfect(model, errors, k);
  const double e0 = energy_at(model, errors, k, r.dt.vector());
  CHECK(e0 == doctest::Approx(r.energy).epsilon(1e-10));
  for (int trial = 0; trial < 20; ++trial) {
    Vec6 d;
    d << rng.vec3(1e-3), rng.vec3(1e-5);
    CHECK(energy_at(model, errors, k, r.dt.vector() + d) > e0);
  }
}

TEST_CASE("assembly is linear in the errors") {
  testing::Random rng(35);
  const ParallelModel model = testing::random_parallel_model(rng, 3, {});
  std::vector<PoseDisplacement> errors, scaled;
  std::vector<StiffnessTriple> k;
  for (std::size_t i = 0; i < model.size(); ++i) {
    Vec6 e;
    e << rng.vec3(0.5), rng.vec3(0.005);
    errors.push_back(PoseDisplacement::from_vector(e));
    scaled.push_back(PoseDisplacement::from_vector(-2.5 * e));
    k.push_back(unloaded_stiffness(model, i));
  }
  const AssemblyReport a = assemble_nonperfect(model, errors, k);
  const AssemblyReport b = assemble_nonperfect(model, scaled, k);
  CHECK((b.dt.vector() + 2.5 * a.dt.vector()).norm() < 1e-12 * (1.0 + a.dt.vector().norm()));
  CHECK(b.energy == doctest::Approx(6.25 * a.energy).epsilon(1e-10));
}

TEST_CASE("aggregate stiffness transports chain stiffness to the platform") {
  testing::Random rng(36);
  const ParallelModel model = testing::random_parallel_model(rng, 2, {});
  std::vector<StiffnessTriple> k = {unloaded_stiffness(model, 0), unloaded_stiffness(model, 1)};
  std::vector<Vec3> v = {model.adapter(0), model.adapter(1)};
  const Mat6 K = aggregate_stiffness(k, v);
  CHECK((K - K.transpose()).norm() < 1e-8 * K.norm());
  // Work of a platform twist equals the summed chain work.
  Vec6 x;
  x << rng.vec3(1.0), rng.vec3(0.01);
  double work = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const Vec6 xi = adapter_jacobian(v[i]) * x;
    work += xi.dot(k[i].K_C * xi);
  }
  CHECK(x.dot(K * x) == doctest::Approx(work).epsilon(1e-12));
  std::vector<Vec3> wrong = {v[0]};
  CHECK_THROWS_AS(aggregate_stiffness(k, wrong), Error);
  const JointSensitivities s = joint_sensitivities_unloaded(k[0], v[0]);
  CHECK(s.virt.rows() == static_cast<Eigen::Index>(model.mount(0).chain.virtual_count()));
}

TEST_CASE("platform basis keeps the directions every chain can follow") {
  VirtualSpring sy;
  sy.axes = {SpringAxis::Ty};
  sy.stiffness = MatX::Constant(1, 1, 1.0);
  VirtualSpring sx = sy;
  sx.axes = {SpringAxis::Tx};
  const ChainModel a({ConstTransform{}, sx, sy});
  std::vector<ChainMount> mounts = {testing::mount_for(a, {}), testing::mount_for(a, {})};
  const ParallelModel model(std::move(mounts), {});
  std::vector<StiffnessTriple> k = {unloaded_stiffness(model, 0), unloaded_stiffness(model, 1)};
  std::vector<Vec3> v = {model.adapter(0), model.adapter(1)};
  CHECK(platform_basis(k, v).cols() == 2);
  CHECK_NOTHROW(assemble_nonperfect(model));
}

TEST_CASE("a direction followed by passive joints alone is singular") {
  VirtualSpring sx;
  sx.axes = {SpringAxis::Tx};
  sx.stiffness = MatX::Constant(1, 1, 1.0);
  const ChainModel a({ConstTransform{}, sx, PassiveJoint{JointType::Prismatic, Vec3::UnitY(), {}}});
  std::vector<ChainMount> mounts = {testing::mount_for(a, {}), testing::mount_for(a, {})};
  const ParallelModel model(std::move(mounts), {});
  try {
    assemble_nonperfect(model);
    FAIL("expected a singular aggregate");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::SingularAggregateStiffness ||
           e.code() == ErrorCode::SingularJacobian));
  }
}
