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

#include "core/orthoglide.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <thread>

#include "core/error.hpp"

namespace vjm {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Link spring stiffness at the proximal end of the link whose tip compliance
// is that of a cantilever of length L along local x.
MatX link_stiffness(const BeamProperties& b, double L) {
  Mat6 C = Mat6::Zero();
  C(0, 0) = L / b.EA;
  C(1, 1) = L * L * L / (3.0 * b.EIz);
  C(1, 5) = C(5, 1) = L * L / (2.0 * b.EIz);
  C(2, 2) = L * L * L / (3.0 * b.EIy);
  C(2, 4) = C(4, 2) = -L * L / (2.0 * b.EIy);
  C(3, 3) = L / b.GJ;
  C(4, 4) = L / b.EIy;
  C(5, 5) = L / b.EIz;
  const Mat6 A = adapter_jacobian(-L * Vec3::UnitX());
  const Mat6 root = A * C * A.transpose();
  const Mat6 K = root.inverse();
  return 0.5 * (K + K.transpose());
}

RigidTransform error_perturbation(const OrthoglideParams& params, const ErrorCase& error,
                                  std::size_t leg) {
  switch (error.kind) {
    case ErrorKind::None:
      return {};
    case ErrorKind::CaseA:
      return RigidTransform::translation(error.magnitude * Vec3::UnitX());
    case ErrorKind::CaseB: {
      const Vec3 pivot(leg_inverse_kinematics(params, leg, params.error_pivot_point).actuator, 0,
                       0);
      return RigidTransform::translation(pivot) *
             RigidTransform::rotation(axis_rotation(Vec3::UnitY(), error.magnitude)) *
             RigidTransform::translation(-pivot);
    }
  }
  return {};
}

ChainMount leg_mount(const OrthoglideParams& params, const ErrorCase& error, std::size_t leg,
                     const Vec3& command) {
  const Mat3 R = leg_frame(params, leg);
  const LegSolution ik = leg_inverse_kinematics(params, leg, command);

  VirtualSpring actuator;
  actuator.axes = {SpringAxis::Tx};
  actuator.stiffness = MatX::Constant(1, 1, params.actuator_stiffness);
  VirtualSpring link;
  link.axes = {SpringAxis::Tx, SpringAxis::Ty, SpringAxis::Tz,
               SpringAxis::Rx, SpringAxis::Ry, SpringAxis::Rz};
  link.stiffness = link_stiffness(params.link, params.leg_length);

  std::vector<ChainElement> elements = {
      ConstTransform{RigidTransform::rotation(R)},
      ActuatedFrozen{JointType::Prismatic, Vec3::UnitX(), ik.actuator},
      actuator,
      PassiveJoint{JointType::Revolute, Vec3::UnitZ(), Vec3::Zero()},
      link,
      PassiveJoint{JointType::Parallelogram, Vec3::UnitY(), params.leg_length * Vec3::UnitX()},
      PassiveJoint{JointType::Revolute, Vec3::UnitZ(), Vec3::Zero()},
  };
  std::vector<GeometricError> errors;
  if (error.kind != ErrorKind::None) errors.push_back({0, error_perturbation(params, error, leg)});

  ChainMount mount;
  mount.chain = ChainModel(std::move(elements), std::move(errors));
  mount.nominal = mount.chain.zero_configuration();
  mount.nominal.q = ik.passive;
  mount.attachment = params.platform_offset * params.actuator_axes[leg];
  mount.attachment_rotation = R;
  return mount;
}

double max_abs(const VecX& v, std::span<const CoordinateKind> kinds, CoordinateKind kind) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (kinds[static_cast<std::size_t>(k)] == kind) out = std::max(out, std::abs(v[k]));
  }
  return out;
}

Vec6 displacement(const RigidTransform& reached, const Vec3& desired) {
  return pose_difference(reached, RigidTransform::translation(desired)).vector();
}

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        failures[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min(jobs, count));
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace

void OrthoglideParams::validate() const {
  if (!(leg_length > 0.0) || !(platform_offset >= 0.0)) {
    throw Error(ErrorCode::InvalidModel, "leg length must be positive and offset non-negative");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(actuator_axes[i].norm() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidModel, "actuator axes must be unit vectors");
    }
    for (std::size_t j = i + 1; j < 3; ++j) {
      if (std::abs(actuator_axes[i].dot(actuator_axes[j])) > 1e-12) {
        throw Error(ErrorCode::InvalidModel, "actuator axes must be pairwise orthogonal");
      }
    }
  }
  if (actuator_axes[0].cross(actuator_axes[1]).dot(actuator_axes[2]) <= 0.0) {
    throw Error(ErrorCode::InvalidModel, "actuator axes must form a right-handed triad");
  }
  if (!(actuator_stiffness > 0.0) || !(link.EA > 0.0) || !(link.EIy > 0.0) ||
      !(link.EIz > 0.0) || !(link.GJ > 0.0)) {
    throw Error(ErrorCode::InvalidModel, "stiffness values must be positive");
  }
}

Mat3 leg_frame(const OrthoglideParams& params, std::size_t leg) {
  const Vec3& a = params.actuator_axes.at(leg);
  const Vec3& b = params.actuator_axes[(leg + 1) % 3];
  Mat3 R;
  R << a, b, a.cross(b);
  return R;
}

LegSolution leg_inverse_kinematics(const OrthoglideParams& params, std::size_t leg,
                                   const Vec3& p) {
  const Vec3 local = leg_frame(params, leg).transpose() * p;
  const double L = params.leg_length;
  const double disc = L * L - local.y() * local.y() - local.z() * local.z();
  if (!std::isfinite(disc) || disc <= 0.0) {
    throw Error(ErrorCode::UnreachableTarget,
                "leg " + std::to_string(leg) + " cannot reach the target position", leg);
  }
  const double reach = std::sqrt(disc);
  LegSolution out;
  out.actuator = local.x() + params.platform_offset - reach;
  const double q1 = std::atan2(local.y(), reach);
  out.passive = Vec3(q1, -std::asin(local.z() / L), -q1);
  return out;
}

std::array<double, 3> inverse_kinematics(const OrthoglideParams& params, const Vec3& p) {
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = leg_inverse_kinematics(params, i, p).actuator;
  return out;
}

ParallelModel build_orthoglide(const OrthoglideParams& params, const ErrorCase& error,
                               const Vec3& p) {
  return build_orthoglide_commanded(params, error, p, {});
}

ParallelModel build_orthoglide_commanded(const OrthoglideParams& params, const ErrorCase& error,
                                         const Vec3& reference,
                                         std::span<const RigidTransform> commands) {
  params.validate();
  if (!commands.empty() && commands.size() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "one command per leg is required");
  }
  std::vector<ChainMount> mounts;
  bool aligned = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec3 command = commands.empty() ? reference : commands[i].d;
    aligned = aligned && command == reference;
    mounts.push_back(leg_mount(params, error, i, command));
  }
  return ParallelModel(std::move(mounts), RigidTransform::translation(reference),
                       aligned ? Alignment::Checked : Alignment::Unchecked);
}

AssemblySummary summarize_assembly(const ParallelModel& model, const AssemblyReport& report,
                                   std::string point, const Vec3& position) {
  AssemblySummary s;
  s.point = std::move(point);
  s.position = position;
  s.report = report;
  Vec6 balance = Vec6::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& chain = model.mount(i).chain;
    const auto& c = report.chains[i];
    s.dq_max = std::max(s.dq_max,
                        kDeg * max_abs(c.dq, chain.passive_kinds(), CoordinateKind::Rotational));
    s.theta_p_max = std::max(
        s.theta_p_max, max_abs(c.dtheta, chain.virtual_kinds(), CoordinateKind::Translational));
    s.theta_phi_max = std::max(
        s.theta_phi_max,
        kDeg * max_abs(c.dtheta, chain.virtual_kinds(), CoordinateKind::Rotational));
    s.tau_p_max = std::max(
        s.tau_p_max, max_abs(c.tau, chain.virtual_kinds(), CoordinateKind::Translational));
    s.tau_phi_max = std::max(
        s.tau_phi_max,
        max_abs(c.tau, chain.virtual_kinds(), CoordinateKind::Rotational) / kMomentScale);
    s.M_max = std::max(s.M_max, c.F.m.norm() / kMomentScale);
    balance += transport_to_reference(c.F, model.adapter(i)).vector();
  }
  balance.tail<3>() /= kMomentScale;
  s.force_balance = balance;
  return s;
}

std::vector<AssemblySummary> run_assembly_study(
    const OrthoglideParams& params, const std::vector<std::pair<std::string, Vec3>>& points,
    const ErrorCase& error) {
  std::vector<AssemblySummary> out;
  out.reserve(points.size());
  for (const auto& [name, p] : points) {
    const ParallelModel model = build_orthoglide(params, error, p);
    out.push_back(summarize_assembly(model, assemble_nonperfect(model), name, p));
  }
  return out;
}

Wrench tool_wrench(const Vec3& force, const Vec3& tool_offset) {
  return {force, tool_offset.cross(force)};
}

std::vector<MillingSample> run_milling_study(const OrthoglideParams& params,
                                             const MillingScenario& scenario,
                                             const ErrorCase& error,
                                             const MillingOptions& options) {
  if (scenario.samples < 2) throw Error(ErrorCode::InvalidArgument, "at least two samples");
  if (options.jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be at least 1");
  const LoadedSettings& settings = options.settings;
  const int n = scenario.samples;
  std::vector<MillingSample> rows(static_cast<std::size_t>(n));
  const bool warm = options.jobs == 1;
  std::optional<LoadedState> prev_cut;
  std::optional<LoadedState> prev_total;

  // Starts from the neighbouring sample's solution when one is available.
  auto loaded = [&](const ParallelModel& model, std::optional<LoadedState>& prev,
                    const Vec3& shift) {
    if (warm && prev) {
      const RigidTransform t{prev->t.R, prev->t.d + shift};
      const LoadedState start = manipulator_force(model, t, &*prev, settings.chain);
      prev = solve_platform(model, scenario.wrench, start, settings);
    } else {
      prev = invert_compliance(model, scenario.wrench, settings);
    }
    return prev->t;
  };

  auto point = [&](int k) {
    const double s = static_cast<double>(k) / (n - 1);
    return k == n - 1 ? scenario.end : Vec3(scenario.start + s * (scenario.end - scenario.start));
  };
  parallel_for(n, options.jobs, [&](int k) {
    MillingSample& row = rows[static_cast<std::size_t>(k)];
    row.s = static_cast<double>(k) / (n - 1);
    row.target = point(k);
    const Vec3 shift = k == 0 ? Vec3::Zero() : Vec3(row.target - point(k - 1));
    std::optional<LoadedState> cold_cut;
    std::optional<LoadedState> cold_total;
    auto& cut_state = warm ? prev_cut : cold_cut;
    auto& total_state = warm ? prev_total : cold_total;

    const ParallelModel perfect = build_orthoglide(params, ErrorCase::none(), row.target);
    const ParallelModel faulty = build_orthoglide(params, error, row.target);
    row.cutting = displacement(loaded(perfect, cut_state, shift), row.target);
    row.geometry = unloaded_shift(faulty, settings).vector();
    row.total = displacement(loaded(faulty, total_state, shift), row.target);
    row.superposition = row.cutting + row.geometry;
    if (options.compensate) {
      row.compensated = true;
      row.residual = compensate_point(params, error, row.target, scenario.wrench, settings).residual;
    }
  });
  return rows;
}

PointCompensation compensate_point(const OrthoglideParams& params, const ErrorCase& error,
                                   const Vec3& desired, const Wrench& F,
                                   const LoadedSettings& base) {
  LoadedSettings settings = base;
  settings.controllable = kOrthoglideControllable;
  const RigidTransform target = RigidTransform::translation(desired);
  PointCompensation out;
  out.uncompensated =
      displacement(invert_compliance(build_orthoglide(params, error, desired), F, settings).t,
                   desired);
  if (error.kind == ErrorKind::None) {
    const Compensation c = compensate_target(
        [&](const RigidTransform& t) { return build_orthoglide(params, error, t.d); }, F, target,
        settings);
    out.residual = displacement(c.verified.t, desired);
    out.chain_changes.assign(3, pose_difference(c.commanded, target).vector());
    out.iterations = c.iterations;
  } else {
    const ErrorCompensation c = compensate_with_errors(
        [&](const RigidTransform& reference, std::span<const RigidTransform> commands) {
          return build_orthoglide_commanded(params, error, reference.d, commands);
        },
        F, target, settings);
    out.residual = displacement(c.verified.t, desired);
    for (const auto& d : c.chain_changes) out.chain_changes.push_back(d.vector());
    out.iterations = c.iterations;
  }
  return out;
}

}  // namespace vjm
