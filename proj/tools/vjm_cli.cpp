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

// vjm command-line front end. Talks to the library through the C API only.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vjm/vjm.h"

namespace {

struct Args {
  std::string config;
  std::string point;
  std::string error_case = "none";
  bool compensate = false;
  int jobs = 1;
  std::string out;
  double tolerance = 0.0;
  std::string scenario = "milling";
  bool json = false;
};

int report_error(vjm_status status) {
  const long chain = vjm_last_error_chain();
  const std::string location = vjm_last_error_location();
  nlohmann::ordered_json err = {{"code", vjm_status_name(status)},
                                {"exit_code", vjm_status_exit_code(status)},
                                {"message", vjm_last_error_message()}};
  err["chain"] = chain >= 0 ? nlohmann::ordered_json(chain) : nlohmann::ordered_json(nullptr);
  err["location"] = location.empty() ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(location);
  std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << '\n';
  return vjm_status_exit_code(status);
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  return static_cast<bool>(f);
}

int emit(const std::string& command, const vjm_result* result, const Args& args) {
  const std::string json = vjm_result_json(result);
  const std::string csv = vjm_result_csv(result);
  const std::string text = vjm_result_text(result);
  if (args.out.empty()) {
    if (args.json) {
      std::cout << json << '\n';
    } else if (!csv.empty()) {
      std::cout << csv;
    } else {
      std::cout << text;
    }
    return 0;
  }
  std::error_code ec;
  const std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir, ec);
  bool ok = !ec;
  ok = ok && write_file(dir / (command + ".json"), json + "\n");
  ok = ok && write_file(dir / (command + ".txt"), text);
  if (!csv.empty()) ok = ok && write_file(dir / (command + ".csv"), csv);
  ok = ok && write_file(dir / "run.json", std::string(vjm_result_metadata(result)) + "\n");
  if (!ok) {
    nlohmann::ordered_json err = {{"code", "OutputError"},
                                  {"exit_code", 2},
                                  {"message", "cannot write to " + args.out},
                                  {"chain", nullptr},
                                  {"location", nullptr}};
    std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << '\n';
    return 2;
  }
  std::cout << text;
  return 0;
}

int run(const std::string& command, const Args& args) {
  vjm_config* config = nullptr;
  vjm_status st = vjm_config_load_file(args.config.c_str(), &config);
  if (st != VJM_OK) return report_error(st);

  vjm_run_options options;
  vjm_run_options_init(&options);
  options.point = args.point.c_str();
  options.error_case = args.error_case.c_str();
  options.compensate = args.compensate ? 1 : 0;
  options.jobs = args.jobs;
  options.tolerance = args.tolerance;
  options.scenario = args.scenario.c_str();

  vjm_result* result = nullptr;
  if (command == "analyze") {
    st = vjm_analyze(config, &options, &result);
  } else if (command == "assemble") {
    st = vjm_assemble(config, &options, &result);
  } else if (command == "trajectory") {
    st = vjm_trajectory(config, &options, &result);
  } else {
    st = vjm_compensate(config, &options, &result);
  }
  vjm_config_free(config);
  if (st != VJM_OK) return report_error(st);
  const int code = emit(command, result, args);
  vjm_result_free(result);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-joint-method stiffness analysis of parallel manipulators"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", vjm_version());

  Args args;
  const auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config, "Configuration file (JSON)")->required();
    sub->add_option("--point", args.point, "Named point; default depends on the command");
    sub->add_option("--case", args.error_case, "Geometric error case (none, A, B, ...)");
    sub->add_option("--jobs", args.jobs, "Concurrent per-sample solves")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", args.out, "Write payloads and run.json into this directory");
    sub->add_option("--tolerance", args.tolerance, "Wrench tolerance (N, N*m)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--json", args.json, "Print the JSON payload instead of the summary");
  };

  add_common(app.add_subcommand("analyze", "Stiffness matrices at an unloaded equilibrium"));
  add_common(app.add_subcommand("assemble", "Internal forces after assembly of erroneous chains"));
  CLI::App* traj = app.add_subcommand("trajectory", "Loaded deflections along a milling path");
  add_common(traj);
  traj->add_flag("--compensate", args.compensate, "Also compensate each sample");
  traj->add_option("--scenario", args.scenario, "Scenario name");
  CLI::App* comp = app.add_subcommand("compensate", "Commanded targets cancelling the load");
  add_common(comp);
  comp->add_option("--scenario", args.scenario, "Scenario providing the wrench");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(app.get_subcommands().front()->get_name(), args);
}
