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

// Several serial chains joined by a rigid platform.

#include <vector>

#include "core/chain_model.hpp"

namespace vjm {

/// One chain of a parallel model. The chain end-point is rigidly attached to
/// the platform at body-fixed offset `attachment` from the platform reference
/// point, with end-frame orientation `attachment_rotation` relative to the
/// platform frame.
struct ChainMount {
  ChainModel chain;
  ChainConfiguration nominal;  // configuration reaching t0 on the perfect chain
  Vec3 attachment = Vec3::Zero();
  Mat3 attachment_rotation = Mat3::Identity();
};

enum class Alignment {
  /// Every perfect chain must reach its attachment at t0 within 1e-9.
  Checked,
  /// Chains may be commanded to poses other than t0.
  Unchecked,
};

class ParallelModel {
 public:
  /// Throws InvalidModel for fewer than two chains or a failed alignment.
  ParallelModel(std::vector<ChainMount> mounts, const RigidTransform& t0,
                Alignment alignment = Alignment::Checked);

  std::size_t size() const { return mounts_.size(); }
  const ChainMount& mount(std::size_t i) const { return mounts_.at(i); }
  const std::vector<ChainMount>& mounts() const { return mounts_; }
  const RigidTransform& t0() const { return t0_; }

  /// Offset from the platform reference point to chain i's end-point
  /// (base frame) when the platform is at `platform`.
  Vec3 adapter(std::size_t i, const RigidTransform& platform) const;
  Vec3 adapter(std::size_t i) const { return adapter(i, t0_); }

  /// Pose chain i's end-point must take for the platform to sit at `platform`.
  RigidTransform chain_target(std::size_t i, const RigidTransform& platform) const;

  /// Error of chain i: its end-pose at the nominal configuration minus the
  /// attachment pose at t0. Zero for a perfect chain.
  PoseDisplacement chain_error(std::size_t i) const;

  /// Platform displacement that would carry chain i's attachment onto its
  /// erroneous end-point.
  PoseDisplacement platform_error(std::size_t i) const;

  /// Same model with every chain replaced by its nominal counterpart.
  ParallelModel perfect() const;

 private:
  std::vector<ChainMount> mounts_;
  RigidTransform t0_;
  Alignment alignment_ = Alignment::Checked;
};

/// Wrench acting at a point offset `v` from the reference point, expressed
/// at the reference point.
Wrench transport_to_reference(const Wrench& w, const Vec3& v);

}  // namespace vjm
