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

#include "core/commands.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace vjm {
namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr double kDeg = 180.0 / std::numbers::pi;

ojson array(const Eigen::Ref<const VecX>& v, double scale = 1.0) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i] * scale);
  return a;
}

ojson matrix(const MatX& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(array(m.row(r).transpose()));
  return rows;
}

ojson pose_json(const Vec6& d) {
  return {{"p_mm", array(d.head<3>())}, {"phi_rad", array(d.tail<3>())}};
}

ojson wrench_json(const Wrench& w) {
  return {{"f_N", array(w.f)}, {"m_Nm", array(w.m, 1.0 / kMomentScale)}};
}

// Report units: moment rows in N*m.
MatX report_stiffness(const Mat6& K) {
  MatX out = K;
  out.bottomRows(3) /= kMomentScale;
  return out;
}

ojson kinds_json(std::span<const CoordinateKind> kinds) {
  ojson a = ojson::array();
  for (auto k : kinds) a.push_back(k == CoordinateKind::Rotational ? "rotational" : "translational");
  return a;
}

ojson loadings_json(const VecX& tau, std::span<const CoordinateKind> kinds) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    a.push_back(kinds[static_cast<std::size_t>(i)] == CoordinateKind::Rotational
                    ? tau[i] / kMomentScale
                    : tau[i]);
  }
  return a;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LoadedSettings settings_for(const Config& config, const CommandOptions& options) {
  LoadedSettings s = config.solver;
  if (options.tolerance) {
    if (!(*options.tolerance > 0.0) || !std::isfinite(*options.tolerance)) {
      throw Error(ErrorCode::InvalidArgument, "tolerance must be a positive number");
    }
    s.force_tolerance = *options.tolerance;
  }
  if (options.jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be at least 1");
  return s;
}

std::string metadata(const Config& config, const CommandOptions& options, const char* command,
                     const LoadedSettings& s) {
  ojson m;
  m["tool"] = "vjm";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config.source;
  m["config_hash"] = config_hash(config.text);
  m["timestamp"] = timestamp();
  m["options"] = {{"point", options.point},
                  {"case", options.error_case},
                  {"compensate", options.compensate},
                  {"jobs", options.jobs},
                  {"scenario", options.scenario}};
  m["solver"] = {{"force_tolerance", s.force_tolerance},
                 {"chain_pose_tolerance", s.chain.pose_tolerance},
                 {"chain_step_tolerance", s.chain.step_tolerance},
                 {"max_outer", s.max_outer},
                 {"continuation_steps", s.continuation_steps},
                 {"alpha_comp", s.alpha_comp},
                 {"position_tolerance_mm", s.position_tolerance},
                 {"rotation_tolerance_rad", s.rotation_tolerance}};
  m["units"] = {{"length", "mm"}, {"angle", "rad"}, {"force", "N"}, {"moment", "N*m"}};
  return m.dump(2) + "\n";
}

ErrorCase orthoglide_case(const Config& config, const std::string& name) {
  if (name == "none") return ErrorCase::none();
  const auto it = config.error_cases.find(name);
  if (it == config.error_cases.end()) {
    throw ConfigIssue("unknown error case \"" + name + "\"", "/error_cases");
  }
  return it->second;
}

void require_orthoglide(const Config& config, const char* command) {
  if (config.kind != ManipulatorKind::Orthoglide) {
    throw ConfigIssue(std::string(command) + " requires an orthoglide manipulator",
                      "/manipulator/type");
  }
}

std::vector<std::pair<std::string, Vec3>> selected_points(const Config& config,
                                                          const std::string& point) {
  if (point.empty()) return config.points;
  return {{point, config.point(point)}};
}

void print_matrix(std::ostringstream& os, const MatX& m) {
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, " %13.5g", m(r, c));
      os << buf;
    }
    os << "\n";
  }
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, std::abs(v) < 0.5 * std::pow(10.0, -digits) ? 0.0 : v);
  return buf;
}

Wrench scenario_wrench(const MillingConfig& mc) { return tool_wrench(mc.force, mc.tool_offset); }

const MillingConfig& scenario(const Config& config, const std::string& name) {
  const auto it = config.scenarios.find(name);
  if (it == config.scenarios.end()) {
    throw ConfigIssue("unknown scenario \"" + name + "\"", "/scenarios");
  }
  return it->second;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ParallelModel configured_model(const Config& config, const std::string& error_case,
                               const std::string& point) {
  if (config.kind == ManipulatorKind::Orthoglide) {
    return build_orthoglide(config.orthoglide, orthoglide_case(config, error_case),
                            config.point(point));
  }
  if (!point.empty() && point != "t0") {
    throw ConfigIssue("generic manipulators are evaluated at t0 only", "/manipulator/t0");
  }
  std::vector<ChainMount> mounts = config.generic.mounts;
  if (error_case != "none") {
    const auto it = config.generic.error_cases.find(error_case);
    if (it == config.generic.error_cases.end()) {
      throw ConfigIssue("unknown error case \"" + error_case + "\"", "/error_cases");
    }
    for (std::size_t i = 0; i < mounts.size(); ++i) {
      mounts[i].chain = mounts[i].chain.with_errors(it->second[i]);
    }
  }
  return ParallelModel(std::move(mounts), config.generic.t0);
}

std::string assembly_report_json(const ParallelModel& model, const AssemblyReport& report) {
  ojson j;
  j["dt"] = pose_json(report.dt.vector());
  j["energy_Nmm"] = report.energy;
  ojson chains = ojson::array();
  for (std::size_t i = 0; i < report.chains.size(); ++i) {
    const auto& c = report.chains[i];
    const auto& chain = model.mount(i).chain;
    chains.push_back({{"error", pose_json(c.error.vector())},
                      {"dt", pose_json(c.dt.vector())},
                      {"F", wrench_json(c.F)},
                      {"virtual_kinds", kinds_json(chain.virtual_kinds())},
                      {"tau", loadings_json(c.tau, chain.virtual_kinds())},
                      {"dtheta", array(c.dtheta)},
                      {"passive_kinds", kinds_json(chain.passive_kinds())},
                      {"dq", array(c.dq)}});
  }
  j["chains"] = chains;
  return j.dump();
}

AssemblyReport assembly_report_from_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  auto vec = [](const ojson& a, double scale = 1.0) {
    VecX v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>() * scale;
    return v;
  };
  auto pose = [&](const ojson& p) {
    PoseDisplacement d;
    d.p = vec(p.at("p_mm"));
    d.phi = vec(p.at("phi_rad"));
    return d;
  };
  AssemblyReport r;
  r.dt = pose(j.at("dt"));
  r.energy = j.at("energy_Nmm").get<double>();
  for (const auto& c : j.at("chains")) {
    ChainAssembly a;
    a.error = pose(c.at("error"));
    a.dt = pose(c.at("dt"));
    a.F.f = vec(c.at("F").at("f_N"));
    a.F.m = vec(c.at("F").at("m_Nm"), kMomentScale);
    a.tau = vec(c.at("tau"));
    const auto& kinds = c.at("virtual_kinds");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i].get<std::string>() == "rotational") a.tau[static_cast<Eigen::Index>(i)] *= kMomentScale;
    }
    a.dtheta = vec(c.at("dtheta"));
    a.dq = vec(c.at("dq"));
    r.chains.push_back(std::move(a));
  }
  return r;
}

ResultBundle cmd_analyze(const Config& config, const CommandOptions& options) {
  const LoadedSettings s = settings_for(config, options);
  std::string point = options.point;
  if (point.empty() && config.kind == ManipulatorKind::Orthoglide) point = config.points.front().first;
  const ParallelModel model = configured_model(config, options.error_case, point);
  const LoadedState state = unloaded_equilibrium(model, s);

  const Mat6& K = state.K_c;
  Eigen::SelfAdjointEigenSolver<Mat3> et(K.topLeftCorner<3, 3>());
  Eigen::SelfAdjointEigenSolver<Mat3> er(Mat3(K.bottomRightCorner<3, 3>() / kMomentScale));
  Eigen::SelfAdjointEigenSolver<Mat6> ek(0.5 * (K + K.transpose()));
  auto cond = [](const auto& ev) {
    const double lo = ev.cwiseAbs().minCoeff();
    return lo > 0.0 ? ev.cwiseAbs().maxCoeff() / lo : std::numeric_limits<double>::infinity();
  };
  auto cond_json = [](double c) { return std::isfinite(c) ? ojson(c) : ojson(nullptr); };

  ojson j;
  j["point"] = point.empty() ? "t0" : point;
  j["position_mm"] = array(model.t0().d);
  j["error_case"] = options.error_case;
  j["units"] = {{"K_rows", "force rows N, moment rows N*m"},
                {"K_cols", "translation columns per mm, rotation columns per rad"},
                {"internal_eigenvalues", "N/mm, N*mm/rad mixed"}};
  j["platform_shift"] = pose_json(pose_difference(state.t, model.t0()).vector());
  j["K_c"] = matrix(report_stiffness(K));
  j["eigenvalues"] = {{"translational_N_per_mm", array(et.eigenvalues())},
                      {"rotational_Nm_per_rad", array(er.eigenvalues())},
                      {"internal", array(ek.eigenvalues())}};
  j["condition_number"] = {{"translational", cond_json(cond(et.eigenvalues()))},
                           {"rotational", cond_json(cond(er.eigenvalues()))},
                           {"internal", cond_json(cond(ek.eigenvalues()))}};
  ojson chains = ojson::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& t = state.stiffness[i];
    chains.push_back({{"K_C", matrix(report_stiffness(t.K_C))},
                      {"modeled_rank", t.modeled_basis.cols()},
                      {"F", wrench_json(state.chains[i].F)}});
  }
  j["chains"] = chains;

  std::ostringstream os;
  os << "Platform stiffness at " << j["point"].get<std::string>() << " (case " << options.error_case
     << ")\n";
  os << "K_c [N/mm N/rad; N*m/mm N*m/rad]:\n";
  print_matrix(os, report_stiffness(K));
  os << "translational eigenvalues [N/mm]:";
  for (int k = 0; k < 3; ++k) os << " " << format_number(et.eigenvalues()[k]);
  os << "\nrotational eigenvalues [N*m/rad]:";
  for (int k = 0; k < 3; ++k) os << " " << format_number(er.eigenvalues()[k]);
  os << "\ncondition numbers: translational " << format_number(cond(et.eigenvalues()))
     << ", rotational " << format_number(cond(er.eigenvalues())) << "\n";

  return {"analyze", j.dump(2) + "\n", "", os.str(), metadata(config, options, "analyze", s)};
}

ResultBundle cmd_assemble(const Config& config, const CommandOptions& options) {
  const LoadedSettings s = settings_for(config, options);
  ojson j;
  j["error_case"] = options.error_case;
  j["units"] = {{"displacement", "mm, rad"},
                {"dq_max", "deg"},
                {"theta_p_max", "mm"},
                {"theta_phi_max", "deg"},
                {"tau_p_max", "N"},
                {"tau_phi_max", "N*m"},
                {"M_max", "N*m"}};
  ojson rows = ojson::array();
  std::ostringstream os;
  os << "Assembly with case " << options.error_case << "\n";
  os << "point       dx[mm]     dy[mm]     dz[mm]   phx[deg]   phy[deg]   phz[deg]"
        "  dq[deg]  thp[mm] thphi[deg]  taup[N] tauphi[Nm]   M[Nm]\n";
  std::vector<std::pair<std::string, Vec3>> points;
  if (config.kind == ManipulatorKind::Orthoglide) {
    points = selected_points(config, options.point);
  } else {
    points = {{"t0", config.generic.t0.d}};
  }
  for (const auto& [name, p] : points) {
    const ParallelModel model = configured_model(
        config, options.error_case, config.kind == ManipulatorKind::Orthoglide ? name : "");
    const AssemblyReport report = assemble_nonperfect(model);
    const AssemblySummary sm = summarize_assembly(model, report, name, model.t0().d);
    ojson row;
    row["point"] = name;
    row["position_mm"] = array(model.t0().d);
    row["dq_max"] = sm.dq_max;
    row["theta_p_max"] = sm.theta_p_max;
    row["theta_phi_max"] = sm.theta_phi_max;
    row["tau_p_max"] = sm.tau_p_max;
    row["tau_phi_max"] = sm.tau_phi_max;
    row["M_max"] = sm.M_max;
    row["force_balance"] = {{"f_N", array(sm.force_balance.head<3>())},
                            {"m_Nm", array(sm.force_balance.tail<3>())}};
    row["report"] = ojson::parse(assembly_report_json(model, report));
    rows.push_back(row);

    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s", name.c_str());
    os << buf;
    const Vec6 d = report.dt.vector();
    for (int k = 0; k < 6; ++k) {
      std::snprintf(buf, sizeof buf, " %10s", fixed(k < 3 ? d[k] : d[k] * kDeg, 4).c_str());
      os << buf;
    }
    for (double v : {sm.dq_max, sm.theta_p_max, sm.theta_phi_max, sm.tau_p_max, sm.tau_phi_max,
                     sm.M_max}) {
      std::snprintf(buf, sizeof buf, " %9s", fixed(v, 3).c_str());
      os << buf;
    }
    os << "\n";
  }
  j["points"] = rows;
  return {"assemble", j.dump(2) + "\n", "", os.str(), metadata(config, options, "assemble", s)};
}

ResultBundle cmd_trajectory(const Config& config, const CommandOptions& options) {
  require_orthoglide(config, "trajectory");
  const LoadedSettings s = settings_for(config, options);
  const MillingConfig& mc = scenario(config, options.scenario);
  MillingScenario sc;
  sc.start = config.point(mc.from);
  sc.end = config.point(mc.to);
  sc.samples = mc.samples;
  sc.wrench = scenario_wrench(mc);
  MillingOptions mo;
  mo.compensate = options.compensate;
  mo.jobs = options.jobs;
  mo.settings = s;
  const ErrorCase error = orthoglide_case(config, options.error_case);
  const std::vector<MillingSample> rows = run_milling_study(config.orthoglide, sc, error, mo);

  static const char* comps[6] = {"dx_mm", "dy_mm", "dz_mm", "drx_rad", "dry_rad", "drz_rad"};
  std::string csv = "s,target_x_mm,target_y_mm,target_z_mm,target_rx_rad,target_ry_rad,target_rz_rad";
  std::vector<const char*> curves = {"cutting", "geometry", "total", "superposition"};
  if (options.compensate) curves.push_back("residual");
  for (const char* c : curves) {
    for (const char* k : comps) csv += std::string(",") + c + "_" + k;
  }
  csv += "\n";
  Vec6 max_cut = Vec6::Zero(), max_geo = Vec6::Zero(), max_tot = Vec6::Zero(),
       max_sup = Vec6::Zero(), max_res = Vec6::Zero();
  for (const auto& r : rows) {
    Vec6 target = Vec6::Zero();
    target.head<3>() = r.target;
    std::string line = format_number(r.s);
    auto put = [&line](const Vec6& v) {
      for (int k = 0; k < 6; ++k) line += "," + format_number(v[k]);
    };
    put(target);
    put(r.cutting);
    put(r.geometry);
    put(r.total);
    put(r.superposition);
    if (options.compensate) put(r.residual);
    csv += line + "\n";
    max_cut = max_cut.cwiseMax(r.cutting.cwiseAbs());
    max_geo = max_geo.cwiseMax(r.geometry.cwiseAbs());
    max_tot = max_tot.cwiseMax(r.total.cwiseAbs());
    max_sup = max_sup.cwiseMax((r.total - r.superposition).cwiseAbs());
    max_res = max_res.cwiseMax(r.residual.cwiseAbs());
  }

  ojson j;
  j["scenario"] = options.scenario;
  j["from"] = mc.from;
  j["to"] = mc.to;
  j["samples"] = mc.samples;
  j["error_case"] = options.error_case;
  j["wrench"] = wrench_json(sc.wrench);
  j["max_abs"] = {{"cutting", array(max_cut)},
                  {"geometry", array(max_geo)},
                  {"total", array(max_tot)},
                  {"superposition_discrepancy", array(max_sup)}};
  if (options.compensate) j["max_abs"]["residual"] = array(max_res);
  j["columns"] = 7 + 6 * static_cast<int>(curves.size());

  std::ostringstream os;
  os << "Trajectory " << mc.from << " -> " << mc.to << ", " << mc.samples << " samples, case "
     << options.error_case << "\n";
  os << "max |position error| [mm]: cutting " << format_number(max_cut.head<3>().maxCoeff())
     << ", geometry " << format_number(max_geo.head<3>().maxCoeff()) << ", total "
     << format_number(max_tot.head<3>().maxCoeff()) << "\n";
  os << "max |total - superposition| [mm]: " << format_number(max_sup.head<3>().maxCoeff()) << "\n";
  if (options.compensate) {
    os << "max |compensated residual| [mm]: " << format_number(max_res.head<3>().maxCoeff())
       << "\n";
  }
  return {"trajectory", j.dump(2) + "\n", csv, os.str(),
          metadata(config, options, "trajectory", s)};
}

ResultBundle cmd_compensate(const Config& config, const CommandOptions& options) {
  require_orthoglide(config, "compensate");
  const LoadedSettings s = settings_for(config, options);
  const MillingConfig& mc = scenario(config, options.scenario);
  const Wrench W = scenario_wrench(mc);
  const ErrorCase error = orthoglide_case(config, options.error_case);

  ojson j;
  j["scenario"] = options.scenario;
  j["error_case"] = options.error_case;
  j["wrench"] = wrench_json(W);
  ojson rows = ojson::array();
  std::ostringstream os;
  os << "Compensation under scenario " << options.scenario << ", case " << options.error_case
     << "\n";
  for (const auto& [name, p] : selected_points(config, options.point)) {
    const PointCompensation c = compensate_point(config.orthoglide, error, p, W, s);
    ojson changes = ojson::array();
    for (const auto& d : c.chain_changes) changes.push_back(pose_json(d));
    rows.push_back({{"point", name},
                    {"position_mm", array(p)},
                    {"uncompensated", pose_json(c.uncompensated)},
                    {"residual", pose_json(c.residual)},
                    {"chain_target_changes", changes},
                    {"iterations", c.iterations}});
    os << name << ": uncompensated " << format_number(c.uncompensated.head<3>().norm())
       << " mm, residual " << format_number(c.residual.head<3>().norm()) << " mm after "
       << c.iterations << " corrections\n";
  }
  j["points"] = rows;
  return {"compensate", j.dump(2) + "\n", "", os.str(),
          metadata(config, options, "compensate", s)};
}

}  // namespace vjm
