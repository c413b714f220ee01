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

// Command implementations shared by the C interface and the command-line
// tool. Every command returns its payload as text so that identical inputs
// give byte-identical output.

#include <optional>
#include <string>

#include "core/config.hpp"

namespace vjm {

struct CommandOptions {
  std::string point;              // empty: every configured point (analyze: the first)
  std::string error_case = "none";
  bool compensate = false;
  int jobs = 1;
  std::optional<double> tolerance;  // overrides the wrench tolerance
  std::string scenario = "milling";
};

struct ResultBundle {
  std::string command;
  std::string json;      // numeric payload
  std::string csv;       // trajectory only
  std::string text;      // human-readable summary
  std::string metadata;  // run information (config hash, time, settings)
};

ResultBundle cmd_analyze(const Config& config, const CommandOptions& options);
ResultBundle cmd_assemble(const Config& config, const CommandOptions& options);
ResultBundle cmd_trajectory(const Config& config, const CommandOptions& options);
ResultBundle cmd_compensate(const Config& config, const CommandOptions& options);

/// Model for a configured manipulator with the named error case at a point.
ParallelModel configured_model(const Config& config, const std::string& error_case,
                               const std::string& point);

/// JSON form of an assembly report in reporting units, and its inverse.
std::string assembly_report_json(const ParallelModel& model, const AssemblyReport& report);
AssemblyReport assembly_report_from_json(const std::string& json);

/// Decimal form with 17 significant digits.
std::string format_number(double v);

}  // namespace vjm
