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

#include "core/parallel_model.hpp"

#include <string>

#include "core/error.hpp"

namespace vjm {

ParallelModel::ParallelModel(std::vector<ChainMount> mounts, const RigidTransform& t0,
                             Alignment alignment)
    : mounts_(std::move(mounts)), t0_(t0), alignment_(alignment) {
  if (mounts_.size() < 2) {
    throw Error(ErrorCode::InvalidModel, "a parallel model needs at least two chains");
  }
  if (!t0_.is_valid(1e-12)) throw Error(ErrorCode::InvalidModel, "t0 is not a rigid motion");
  for (std::size_t i = 0; i < mounts_.size(); ++i) {
    const auto& m = mounts_[i];
    m.chain.check(m.nominal);
    if (alignment == Alignment::Unchecked) continue;
    const RigidTransform reached = forward_geometry(m.chain.nominal(), m.nominal);
    const Vec6 gap = pose_difference(reached, chain_target(i, t0_)).vector();
    if (!(gap.norm() <= 1e-9)) {
      throw Error(ErrorCode::InvalidModel,
                  "perfect chain does not meet the platform at t0 (gap " +
                      std::to_string(gap.norm()) + ")",
                  i);
    }
  }
}

Vec3 ParallelModel::adapter(std::size_t i, const RigidTransform& platform) const {
  return platform.R * mount(i).attachment;
}

RigidTransform ParallelModel::chain_target(std::size_t i, const RigidTransform& platform) const {
  const auto& m = mount(i);
  return {platform.R * m.attachment_rotation, platform.d + platform.R * m.attachment};
}

PoseDisplacement ParallelModel::chain_error(std::size_t i) const {
  const auto& m = mount(i);
  return pose_difference(forward_geometry(m.chain, m.nominal), chain_target(i, t0_));
}

PoseDisplacement ParallelModel::platform_error(std::size_t i) const {
  return PoseDisplacement::from_vector(adapter_jacobian(-adapter(i)) * chain_error(i).vector());
}

ParallelModel ParallelModel::perfect() const {
  std::vector<ChainMount> nominal = mounts_;
  for (auto& m : nominal) m.chain = m.chain.nominal();
  return ParallelModel(std::move(nominal), t0_, alignment_);
}

Wrench transport_to_reference(const Wrench& w, const Vec3& v) {
  return {w.f, w.m + v.cross(w.f)};
}

}  // namespace vjm
