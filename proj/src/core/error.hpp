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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vjm {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  AngleOutOfRange,
  InvalidModel,
  SingularSystem,
  MaxIterationsExceeded,
  BucklingDetected,
  SingularJacobian,
  SingularAggregateStiffness,
  SingularStiffness,
  NotConverged,
  UnreachableTarget,
  ConfigError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Three significant digits, for residuals in diagnostic messages.
std::string short_number(double v);

/// Failure raised anywhere in the numerical core. Chain-level failures that
/// surface through a parallel model carry the index of the offending chain.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> chain = std::nullopt)
      : std::runtime_error(message), code_(code), chain_(chain) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> chain() const noexcept { return chain_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> chain_;
};

}  // namespace vjm
