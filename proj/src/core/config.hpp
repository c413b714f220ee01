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

// Manipulator configuration files: strict JSON with unknown-field rejection.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"
#include "core/orthoglide.hpp"

namespace vjm {

/// Configuration failure with the location of the offending input: a
/// "line:column" pair for malformed text, a JSON pointer otherwise.
class ConfigIssue : public Error {
 public:
  ConfigIssue(const std::string& message, std::string location)
      : Error(ErrorCode::ConfigError, message), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

enum class ManipulatorKind { Orthoglide, Generic };

struct GenericManipulator {
  std::vector<ChainMount> mounts;
  RigidTransform t0;
  /// Per-chain geometric errors keyed by case name.
  std::map<std::string, std::vector<std::vector<GeometricError>>> error_cases;
};

struct MillingConfig {
  std::string from;
  std::string to;
  int samples = 101;
  Vec3 force = Vec3::Zero();        // N, (F_r, F_t, F_z) in platform (x, y, z)
  Vec3 tool_offset = Vec3::Zero();  // mm, tool tip from the platform reference point
};

struct Config {
  std::string source;
  std::string text;
  int format_version = 1;
  ManipulatorKind kind = ManipulatorKind::Orthoglide;
  OrthoglideParams orthoglide;
  GenericManipulator generic;
  std::vector<std::pair<std::string, Vec3>> points;
  std::map<std::string, ErrorCase> error_cases;
  std::map<std::string, MillingConfig> scenarios;
  LoadedSettings solver;

  /// Throws ConfigIssue for an unknown point name.
  Vec3 point(const std::string& name) const;
};

inline constexpr int kFormatVersion = 1;

Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config_file(const std::string& path);

/// 64-bit FNV-1a of the raw configuration text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace vjm
