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

#include <Eigen/Eigenvalues>

#include "core/aggregation_loaded.hpp"
#include "core/error.hpp"
#include "core/orthoglide.hpp"
#include "support.hpp"

using namespace vjm;

namespace {

OrthoglideParams shipped() {
  OrthoglideParams p;
  p.link = {2e6, 1e8, 1e8, 8e7};
  return p;
}

const std::vector<std::pair<std::string, Vec3>>& study_points() {
  static const std::vector<std::pair<std::string, Vec3>> pts = {
      {"Q0", {0, 0, 0}},
      {"Q1", {126.35, 126.35, 126.35}},
      {"Q2", {-73.65, -73.65, -73.65}},
      {"Q3", {126.35, 126.35, -73.65}},
      {"Q4", {-73.65, -73.65, 126.35}}};
  return pts;
}

// Platform position from actuator values: each leg end-point lies on a
// sphere of radius L around its actuator carriage.
Vec3 sphere_intersection(const OrthoglideParams& p, const std::array<double, 3>& rho) {
  auto residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(3);
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec3& a = p.actuator_axes[i];
      const Vec3 leg = Vec3(x.head<3>()) + p.platform_offset * a - rho[i] * a;
      f[static_cast<Eigen::Index>(i)] = leg.norm() - p.leg_length;
    }
    return f;
  };
  return testing::minimize_least_squares(residual, Eigen::VectorXd::Zero(3), 3);
}

}  // namespace

TEST_CASE("inverse kinematics agrees with the sphere-intersection forward model") {
  const OrthoglideParams p = shipped();
  testing::Random rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 target = rng.vec3(120.0);
    const auto rho = inverse_kinematics(p, target);
    CHECK((sphere_intersection(p, rho) - target).norm() < 1e-9);
  }
}

TEST_CASE("legs reach the platform at the commanded point") {
  const OrthoglideParams p = shipped();
  for (const auto& [name, q] : study_points()) {
    const ParallelModel model = build_orthoglide(p, ErrorCase::none(), q);
    CHECK(model.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(model.chain_error(i).vector().norm() < 1e-10);
  }
}

TEST_CASE("out-of-reach targets are reported") {
  try {
    inverse_kinematics(shipped(), Vec3(0, 400, 0));
    FAIL("expected UnreachableTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnreachableTarget);
  }
}

TEST_CASE("invalid parameters are rejected") {
  OrthoglideParams p = shipped();
  p.actuator_axes[1] = Vec3(1, 0, 0);
  CHECK_THROWS_AS(p.validate(), Error);
  p = shipped();
  p.link.EA = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = shipped();
  std::swap(p.actuator_axes[0], p.actuator_axes[1]);
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("perfect manipulator is isotropic at the reference point") {
  const ParallelModel model = build_orthoglide(shipped(), ErrorCase::none(), Vec3::Zero());
  const LoadedState s = unloaded_equilibrium(model);
  const Mat3 Kt = s.K_c.topLeftCorner<3, 3>();
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (Kt + Kt.transpose()));
  const Vec3 ev = es.eigenvalues();
  CHECK(ev.minCoeff() > 0.0);
  CHECK((ev.maxCoeff() - ev.minCoeff()) / ev.maxCoeff() < 1e-9);
  CHECK((s.K_c - s.K_c.transpose()).norm() < 1e-8 * s.K_c.norm());
}

TEST_CASE("actuator offsets shift the platform without internal loading") {
  const auto rows = run_assembly_study(shipped(), study_points(), ErrorCase::case_a());
  const std::vector<Vec3> expected_dt = {{1.00, 1.00, 1.00}, {0.50, 0.50, 0.50},
                                         {2.02, 2.02, 2.02}, {0.73, 0.73, 0.27},
                                         {0.56, 0.56, 1.28}};
  const std::vector<double> expected_dq = {0.18, 0.14, 0.42, 0.20, 0.26};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    CAPTURE(r.point);
    CHECK((r.report.dt.p - expected_dt[k]).cwiseAbs().maxCoeff() < 0.006);
    CHECK(r.report.dt.phi.norm() < 1e-10);
    CHECK(std::abs(r.dq_max - expected_dq[k]) < 0.006);
    CHECK(r.theta_p_max < 1e-10);
    CHECK(r.theta_phi_max < 1e-10);
    CHECK(r.tau_p_max < 1e-10);
    CHECK(r.tau_phi_max < 1e-10);
    CHECK(r.force_balance.norm() < 1e-10);
  }
}

TEST_CASE("actuator axis rotation loads the links in rotation only") {
  const auto rows = run_assembly_study(shipped(), study_points(), ErrorCase::case_b());
  for (const auto& r : rows) {
    CAPTURE(r.point);
    CHECK(r.tau_p_max < 1e-9);
    CHECK(r.tau_phi_max > 0.1);
    CHECK(r.M_max > 0.1);
    CHECK(r.theta_p_max > 0.0);
    CHECK(r.force_balance.norm() < 1e-9 * std::max(1.0, r.M_max));
  }
  // The reference point is symmetric under the cyclic permutation of legs.
  const Vec6 q0 = rows[0].report.dt.vector();
  CHECK(std::abs(q0[0] - q0[1]) < 1e-9);
  CHECK(std::abs(q0[1] - q0[2]) < 1e-9);
  CHECK(std::abs(q0[3] - q0[4]) < 1e-12);
  CHECK(std::abs(q0[4] - q0[5]) < 1e-12);
}

TEST_CASE("tool wrench transports the cutting force to the platform") {
  const Wrench w = tool_wrench(Vec3(215, -10, -25), Vec3(0, 0, 100));
  CHECK((w.m - Vec3(1000, 21500, 0)).norm() < 1e-12);
  CHECK(wrench_norm(w) > 217.0);
}

TEST_CASE("milling study is independent of the job count") {
  MillingScenario sc;
  sc.start = {-73.65, -73.65, -73.65};
  sc.end = {-73.65, 126.35, -73.65};
  sc.samples = 4;
  sc.wrench = tool_wrench(Vec3(215, -10, -25), Vec3(0, 0, 100));
  MillingOptions serial;
  MillingOptions pool;
  pool.jobs = 3;
  const auto a = run_milling_study(shipped(), sc, ErrorCase::case_a(), serial);
  const auto b = run_milling_study(shipped(), sc, ErrorCase::case_a(), pool);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].s == b[k].s);
    // Warm and cold starts agree to the force tolerance over the compliance.
    CHECK((a[k].total - b[k].total).norm() < 1e-6);
    CHECK((a[k].cutting - b[k].cutting).norm() < 1e-6);
    CHECK((a[k].superposition - a[k].cutting - a[k].geometry).norm() < 1e-15);
    CHECK((a[k].geometry.head<3>() - b[k].geometry.head<3>()).norm() < 1e-10);
  }
  CHECK(a.back().target == sc.end);
  for (const auto& row : run_milling_study(shipped(), sc, ErrorCase::none(), serial)) {
    CHECK(row.geometry.norm() < 1e-12);
    CHECK((row.total - row.cutting).norm() < 1e-12);
  }
}

TEST_CASE("point compensation cancels loading and geometric errors") {
  const Wrench w = tool_wrench(Vec3(215, -10, -25), Vec3(0, 0, 100));
  for (const ErrorCase& e : {ErrorCase::none(), ErrorCase::case_a(), ErrorCase::case_b()}) {
    const PointCompensation c = compensate_point(shipped(), e, Vec3(-73.65, 26.35, -73.65), w, {});
    CHECK(c.uncompensated.head<3>().norm() > 0.1);
    CHECK(c.residual.head<3>().norm() < 1e-4);
    CHECK(c.chain_changes.size() == 3);
  }
}
