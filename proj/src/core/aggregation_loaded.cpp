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

#include "core/aggregation_loaded.hpp"

#include <Eigen/LU>
#include <cmath>
#include <optional>
#include <string>

#include "core/error.hpp"

namespace vjm {
namespace {

Error tagged(const Error& e, std::size_t chain) {
  return Error(e.code(), "chain " + std::to_string(chain) + ": " + e.what(), chain);
}

Vec6 masked(const Vec6& v, const std::array<bool, 6>& mask) {
  Vec6 out = v;
  for (int k = 0; k < 6; ++k) {
    if (!mask[static_cast<std::size_t>(k)]) out[k] = 0.0;
  }
  return out;
}

bool within(const PoseDisplacement& r, const LoadedSettings& s) {
  const Vec6 v = masked(r.vector(), s.controllable);
  return v.head<3>().norm() <= s.position_tolerance && v.tail<3>().norm() <= s.rotation_tolerance;
}

Vec6 platform_step(const LoadedState& state, const ParallelModel& model, const Vec6& load_residual) {
  std::vector<Vec3> adapters(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) adapters[i] = model.adapter(i, state.t);
  const MatX P = platform_basis(state.stiffness, adapters);
  const MatX Kp = P.transpose() * state.K_c * P;
  Eigen::FullPivLU<MatX> lu(Kp);
  lu.setThreshold(1e-12);
  if (P.cols() == 0 || !lu.isInvertible()) {
    throw Error(ErrorCode::SingularStiffness, "aggregate tangent stiffness is singular");
  }
  return P * lu.solve(P.transpose() * load_residual);
}

}  // namespace

void LoadedSettings::validate() const {
  if (!(force_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "force tolerance must be positive");
  if (max_outer < 1) throw Error(ErrorCode::InvalidArgument, "max_outer must be at least 1");
  if (continuation_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "continuation_steps must be at least 1");
  }
  if (!(alpha_comp > 0.0 && alpha_comp < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha_comp must lie in (0, 1)");
  }
  if (!(position_tolerance > 0.0 && rotation_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "compensation tolerances must be positive");
  }
  if (max_halvings < 0 || max_compensation < 1) {
    throw Error(ErrorCode::InvalidArgument, "iteration limits out of range");
  }
}

LoadedState manipulator_force(const ParallelModel& model, const RigidTransform& t,
                              const LoadedState* warm, const SolverSettings& chain_settings) {
  const std::size_t m = model.size();
  if (warm != nullptr && warm->chains.size() != m) warm = nullptr;
  LoadedState out;
  out.t = t;
  out.chains.resize(m);
  out.stiffness.resize(m);
  Vec6 total = Vec6::Zero();
  // Fixed chain order keeps the sums reproducible.
  for (std::size_t i = 0; i < m; ++i) {
    const auto& mount = model.mount(i);
    const RigidTransform target = model.chain_target(i, t);
    try {
      if (warm != nullptr) {
        try {
          out.chains[i] =
              solve_chain_equilibrium(mount.chain, target, warm->chains[i].cfg, chain_settings);
        } catch (const Error&) {
          out.chains[i] = solve_chain_equilibrium(mount.chain, target, mount.nominal, chain_settings);
        }
      } else {
        out.chains[i] = solve_chain_equilibrium(mount.chain, target, mount.nominal, chain_settings);
      }
      out.stiffness[i] = chain_stiffness(mount.chain, out.chains[i], chain_settings.rank_tolerance);
    } catch (const Error& e) {
      throw tagged(e, i);
    }
    const Vec3 v = model.adapter(i, t);
    const Mat6 Jv = adapter_jacobian(v);
    const Wrench& F = out.chains[i].F;
    total += transport_to_reference(F, v).vector();
    Mat3 G = skew(F.f) * skew(v);
    out.K_c += Jv.transpose() * out.stiffness[i].K_C * Jv;
    out.K_c.bottomRightCorner<3, 3>() += 0.5 * (G + G.transpose());
  }
  out.F_total = Wrench::from_vector(total);
  return out;
}

LoadedState solve_platform(const ParallelModel& model, const Wrench& F, const LoadedState& start,
                           const LoadedSettings& settings) {
  settings.validate();
  LoadedState state = start;
  const Vec6 target = F.vector();
  double norm = wrench_norm(Wrench::from_vector(target - state.F_total.vector()));
  for (int it = 0; it < settings.max_outer; ++it) {
    if (norm < settings.force_tolerance) {
      state.iterations = it;
      return state;
    }
    const Vec6 step = platform_step(state, model, target - state.F_total.vector());
    double lambda = 1.0;
    bool accepted = false;
    std::optional<Error> last;
    for (int h = 0; h <= settings.max_halvings; ++h, lambda *= 0.5) {
      try {
        const RigidTransform t =
            apply_displacement(state.t, PoseDisplacement::from_vector(lambda * step));
        LoadedState trial = manipulator_force(model, t, &state, settings.chain);
        const double n = wrench_norm(Wrench::from_vector(target - trial.F_total.vector()));
        if (n < norm) {
          state = std::move(trial);
          norm = n;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        last = e;
      }
    }
    if (!accepted) {
      if (last) throw *last;
      throw Error(ErrorCode::NotConverged,
                  "platform equilibrium stalled at wrench residual " + short_number(norm));
    }
  }
  if (norm < settings.force_tolerance) {
    state.iterations = settings.max_outer;
    return state;
  }
  throw Error(ErrorCode::NotConverged, "platform equilibrium did not converge in " +
                                           std::to_string(settings.max_outer) +
                                           " iterations (wrench residual " +
                                           short_number(norm) + ")");
}

LoadedState unloaded_equilibrium(const ParallelModel& model, const LoadedSettings& settings) {
  const LoadedState start = manipulator_force(model, model.t0(), nullptr, settings.chain);
  return solve_platform(model, Wrench{}, start, settings);
}

PoseDisplacement unloaded_shift(const ParallelModel& model, const LoadedSettings& settings) {
  return pose_difference(unloaded_equilibrium(model, settings).t, model.t0());
}

LoadedState invert_compliance(const ParallelModel& model, const Wrench& F,
                              const LoadedSettings& settings) {
  settings.validate();
  if (!F.is_finite()) throw Error(ErrorCode::InvalidArgument, "external wrench is not finite");
  LoadedState state = manipulator_force(model, model.t0(), nullptr, settings.chain);
  const int n = settings.continuation_steps;
  for (int k = 1; k <= n; ++k) {
    const double alpha = k == n ? 1.0 : static_cast<double>(k) / n;
    try {
      state = solve_platform(model, Wrench::from_vector(alpha * F.vector()), state, settings);
    } catch (const Error& e) {
      throw Error(e.code(),
                  std::string(e.what()) + " (load continuation reached alpha " +
                      std::to_string(static_cast<double>(k - 1) / n) + ")",
                  e.chain());
    }
  }
  return state;
}

Compensation compensate_target(const ModelFactory& factory, const Wrench& F,
                               const RigidTransform& desired, const LoadedSettings& settings) {
  settings.validate();
  Compensation out;
  out.commanded = desired;
  LoadedState state = invert_compliance(factory(out.commanded), F, settings);
  for (int it = 0; it <= settings.max_compensation; ++it) {
    out.residual = pose_difference(desired, state.t);
    if (within(out.residual, settings)) {
      out.verified = std::move(state);
      out.iterations = it;
      return out;
    }
    if (it == settings.max_compensation) break;
    const Vec6 change = settings.alpha_comp * masked(out.residual.vector(), settings.controllable);
    out.commanded = apply_displacement(out.commanded, PoseDisplacement::from_vector(change));
    const ParallelModel model = factory(out.commanded);
    const LoadedState start = manipulator_force(model, state.t, &state, settings.chain);
    state = solve_platform(model, F, start, settings);
  }
  throw Error(ErrorCode::NotConverged,
              "target compensation did not converge (residual " +
                  short_number(out.residual.p.norm()) + " mm)");
}

ErrorCompensation compensate_with_errors(const ChainTargetFactory& factory, const Wrench& F,
                                         const RigidTransform& desired,
                                         const LoadedSettings& settings) {
  settings.validate();
  auto common = [&](const RigidTransform& t) { return factory(t, {}); };
  const ParallelModel base = common(desired);
  const std::size_t m = base.size();

  ErrorCompensation out;
  out.error_shift = unloaded_shift(base, settings);
  const Compensation load = compensate_target(common, F, desired, settings);
  out.load_part = pose_difference(load.commanded, desired);

  out.chain_changes.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec6 change =
        out.load_part.vector() + out.error_shift.vector() - base.platform_error(i).vector();
    out.chain_changes[i] = PoseDisplacement::from_vector(masked(change, settings.controllable));
  }

  Vec6 correction = Vec6::Zero();
  auto commanded = [&]() {
    std::vector<RigidTransform> commands(m);
    for (std::size_t i = 0; i < m; ++i) {
      commands[i] = apply_displacement(
          desired, PoseDisplacement::from_vector(out.chain_changes[i].vector() + correction));
    }
    return commands;
  };

  out.commands = commanded();
  LoadedState state = invert_compliance(factory(desired, out.commands), F, settings);
  for (int it = 0; it <= settings.max_compensation; ++it) {
    out.residual = pose_difference(desired, state.t);
    if (within(out.residual, settings)) {
      for (std::size_t i = 0; i < m; ++i) {
        out.chain_changes[i] =
            PoseDisplacement::from_vector(out.chain_changes[i].vector() + correction);
      }
      out.verified = std::move(state);
      out.iterations = it;
      return out;
    }
    if (it == settings.max_compensation) break;
    correction += settings.alpha_comp * masked(out.residual.vector(), settings.controllable);
    out.commands = commanded();
    const ParallelModel model = factory(desired, out.commands);
    const LoadedState start = manipulator_force(model, state.t, &state, settings.chain);
    state = solve_platform(model, F, start, settings);
  }
  throw Error(ErrorCode::NotConverged,
              "error compensation did not converge (residual " +
                  short_number(out.residual.p.norm()) + " mm)");
}

}  // namespace vjm
