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

#include "core/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vjm {
namespace {

using json = nlohmann::json;

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw ConfigIssue((where.empty() ? std::string("/") : where) + ": " + message,
                    where.empty() ? "/" : where);
}

const char* type_name(const json& j) { return j.type_name(); }

// Read-once view of a JSON value that remembers which object members were
// consumed so the rest can be reported as unknown.
class Node {
 public:
  Node(const json& j, std::string where) : j_(&j), where_(std::move(where)) {}

  const std::string& where() const { return where_; }
  const json& raw() const { return *j_; }

  bool is_object() const { return j_->is_object(); }
  bool is_array() const { return j_->is_array(); }
  bool is_string() const { return j_->is_string(); }

  Node required(const std::string& key) {
    expect_object();
    used_->insert(key);
    const auto it = j_->find(key);
    if (it == j_->end()) fail(where_, "missing required field \"" + key + "\"");
    return Node(*it, where_ + "/" + escape_token(key));
  }

  std::optional<Node> optional(const std::string& key) {
    expect_object();
    used_->insert(key);
    const auto it = j_->find(key);
    if (it == j_->end()) return std::nullopt;
    return Node(*it, where_ + "/" + escape_token(key));
  }

  /// Rejects members that were never requested.
  void done() const {
    expect_object();
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_->count(it.key())) {
        fail(where_ + "/" + escape_token(it.key()), "unknown field \"" + it.key() + "\"");
      }
    }
  }

  std::vector<std::string> keys() const {
    expect_object();
    std::vector<std::string> out;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      used_->insert(it.key());
      out.push_back(it.key());
    }
    return out;
  }

  std::size_t size() const {
    if (!j_->is_array()) fail(where_, std::string("expected an array, found ") + type_name(*j_));
    return j_->size();
  }

  Node operator[](std::size_t i) const {
    size();
    return Node((*j_)[i], where_ + "/" + std::to_string(i));
  }

  double number() const {
    if (!j_->is_number()) fail(where_, std::string("expected a number, found ") + type_name(*j_));
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail(where_, "number is not finite");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail(where_, "must be positive");
    return v;
  }

  int integer() const {
    if (!j_->is_number_integer()) {
      fail(where_, std::string("expected an integer, found ") + type_name(*j_));
    }
    return j_->get<int>();
  }

  std::string string() const {
    if (!j_->is_string()) fail(where_, std::string("expected a string, found ") + type_name(*j_));
    return j_->get<std::string>();
  }

  VecX numbers() const {
    const std::size_t n = size();
    VecX out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = (*this)[i].number();
    return out;
  }

  Vec3 vec3() const {
    const VecX v = numbers();
    if (v.size() != 3) fail(where_, "expected 3 numbers, found " + std::to_string(v.size()));
    return v;
  }

  Vec3 unit3() const {
    const Vec3 v = vec3();
    if (std::abs(v.norm() - 1.0) > 1e-12) fail(where_, "axis must be a unit vector");
    return v;
  }

 private:
  void expect_object() const {
    if (!j_->is_object()) fail(where_, std::string("expected an object, found ") + type_name(*j_));
  }

  const json* j_;
  std::string where_;
  std::shared_ptr<std::set<std::string>> used_ = std::make_shared<std::set<std::string>>();
};

RigidTransform read_transform(Node& n, const char* translation, const char* rotation) {
  RigidTransform T;
  if (auto t = n.optional(translation)) T.d = t->vec3();
  if (auto r = n.optional(rotation)) {
    const Vec3 phi = r->vec3();
    if (!(phi.norm() < std::numbers::pi)) fail(r->where(), "rotation angle must be below pi");
    T.R = rotation_exp(phi);
  }
  return T;
}

JointType read_joint(const Node& n, bool allow_parallelogram) {
  const std::string s = n.string();
  if (s == "revolute") return JointType::Revolute;
  if (s == "prismatic") return JointType::Prismatic;
  if (s == "parallelogram" && allow_parallelogram) return JointType::Parallelogram;
  fail(n.where(), "unknown joint \"" + s + "\"");
}

SpringAxis read_axis(const Node& n) {
  static const std::map<std::string, SpringAxis> names = {
      {"Tx", SpringAxis::Tx}, {"Ty", SpringAxis::Ty}, {"Tz", SpringAxis::Tz},
      {"Rx", SpringAxis::Rx}, {"Ry", SpringAxis::Ry}, {"Rz", SpringAxis::Rz}};
  const std::string s = n.string();
  const auto it = names.find(s);
  if (it == names.end()) fail(n.where(), "unknown spring axis \"" + s + "\"");
  return it->second;
}

VirtualSpring read_spring(Node& n) {
  VirtualSpring s;
  Node axes = n.required("axes");
  for (std::size_t i = 0; i < axes.size(); ++i) s.axes.push_back(read_axis(axes[i]));
  const auto size = static_cast<Eigen::Index>(s.axes.size());
  auto diag = n.optional("stiffness_diagonal");
  auto full = n.optional("stiffness_matrix");
  if (diag.has_value() == full.has_value()) {
    fail(n.where(), "exactly one of \"stiffness_diagonal\" and \"stiffness_matrix\" is required");
  }
  if (diag) {
    const VecX d = diag->numbers();
    if (d.size() != size) fail(diag->where(), "one value per spring axis is required");
    s.stiffness = MatX::Zero(size, size);
    for (Eigen::Index k = 0; k < size; ++k) {
      if (!(d[k] > 0.0)) fail((*diag)[static_cast<std::size_t>(k)].where(), "must be positive");
      // N/mm for translations, N*m/rad for rotations.
      s.stiffness(k, k) = d[k] * (is_rotational(s.axes[static_cast<std::size_t>(k)]) ? kMomentScale : 1.0);
    }
  } else {
    if (full->size() != s.axes.size()) fail(full->where(), "one row per spring axis is required");
    s.stiffness = MatX(size, size);
    for (std::size_t r = 0; r < s.axes.size(); ++r) {
      const VecX row = (*full)[r].numbers();
      if (row.size() != size) fail((*full)[r].where(), "one column per spring axis is required");
      s.stiffness.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
  }
  if (auto p = n.optional("preload")) {
    s.preload = p->numbers();
    if (s.preload.size() != size) fail(p->where(), "one value per spring axis is required");
  }
  return s;
}

ChainElement read_element(Node& n) {
  const std::string type = n.required("type").string();
  if (type == "const") {
    return ConstTransform{read_transform(n, "translation_mm", "rotation_vector_rad")};
  }
  if (type == "actuated") {
    ActuatedFrozen a;
    a.type = read_joint(n.required("joint"), false);
    a.axis = n.required("axis").unit3();
    a.value = n.required("value").number();
    return a;
  }
  if (type == "passive") {
    PassiveJoint p;
    p.type = read_joint(n.required("joint"), true);
    p.axis = n.required("axis").unit3();
    if (p.type == JointType::Parallelogram) p.bar = n.required("bar_mm").vec3();
    return p;
  }
  if (type == "spring") return read_spring(n);
  fail(n.where() + "/type", "unknown element type \"" + type + "\"");
}

std::vector<GeometricError> read_errors(const Node& list, std::size_t element_count) {
  std::vector<GeometricError> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    Node e = list[k];
    GeometricError g;
    Node idx = e.required("element");
    const int element = idx.integer();
    if (element < 0 || static_cast<std::size_t>(element) >= element_count) {
      fail(idx.where(), "element index out of range");
    }
    g.element = static_cast<std::size_t>(element);
    g.perturbation = read_transform(e, "translation_mm", "rotation_vector_rad");
    e.done();
    out.push_back(g);
  }
  return out;
}

void read_generic(Node& m, Config& cfg) {
  GenericManipulator& g = cfg.generic;
  Node t0 = m.required("t0");
  g.t0 = read_transform(t0, "position_mm", "rotation_vector_rad");
  t0.done();
  Node chains = m.required("chains");
  if (chains.size() < 2) fail(chains.where(), "at least two chains are required");
  for (std::size_t i = 0; i < chains.size(); ++i) {
    Node c = chains[i];
    std::vector<ChainElement> elements;
    Node list = c.required("elements");
    for (std::size_t k = 0; k < list.size(); ++k) {
      Node e = list[k];
      elements.push_back(read_element(e));
      e.done();
    }
    ChainMount mount;
    try {
      mount.chain = ChainModel(std::move(elements));
    } catch (const Error& e) {
      fail(list.where(), e.what());
    }
    mount.nominal = mount.chain.zero_configuration();
    if (auto q = c.optional("nominal_q")) {
      mount.nominal.q = q->numbers();
      if (mount.nominal.q.size() != static_cast<Eigen::Index>(mount.chain.passive_count())) {
        fail(q->where(), "one value per passive joint is required");
      }
    }
    const RigidTransform attach =
        read_transform(c, "attachment_mm", "attachment_rotation_vector_rad");
    mount.attachment = attach.d;
    mount.attachment_rotation = attach.R;
    c.done();
    g.mounts.push_back(std::move(mount));
  }
  try {
    ParallelModel check(g.mounts, g.t0);
  } catch (const Error& e) {
    fail(chains.where(), e.what());
  }
}

void read_orthoglide(Node& m, Config& cfg, std::optional<Node>& pivot) {
  OrthoglideParams& p = cfg.orthoglide;
  if (auto n = m.optional("note")) n->string();
  p.leg_length = m.required("leg_length_mm").positive();
  if (auto n = m.optional("platform_offset_mm")) p.platform_offset = n->number();
  if (auto n = m.optional("actuator_axes")) {
    if (n->size() != 3) fail(n->where(), "three actuator axes are required");
    for (std::size_t i = 0; i < 3; ++i) p.actuator_axes[i] = (*n)[i].unit3();
  }
  p.actuator_stiffness = m.required("actuator_stiffness_N_per_mm").positive();
  Node beam = m.required("link_beam");
  p.link.EA = beam.required("EA_N").positive();
  p.link.EIy = beam.required("EIy_N_mm2").positive();
  p.link.EIz = beam.required("EIz_N_mm2").positive();
  p.link.GJ = beam.required("GJ_N_mm2").positive();
  beam.done();
  pivot = m.optional("error_pivot");
  try {
    p.validate();
  } catch (const Error& e) {
    fail(m.where(), e.what());
  }
}

void read_points(Node& list, Config& cfg) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    Node p = list[i];
    const std::string name = p.required("name").string();
    if (name == "none" || name.empty()) fail(p.where() + "/name", "invalid point name");
    for (const auto& [existing, unused] : cfg.points) {
      if (existing == name) fail(p.where() + "/name", "duplicate point \"" + name + "\"");
    }
    cfg.points.emplace_back(name, p.required("position_mm").vec3());
    p.done();
  }
}

void read_error_cases(Node& cases, Config& cfg) {
  for (const std::string& name : cases.keys()) {
    if (name == "none") fail(cases.where() + "/none", "\"none\" is reserved");
    Node c = cases.required(name);
    if (cfg.kind == ManipulatorKind::Orthoglide) {
      const std::string type = c.required("type").string();
      if (type == "actuator_offset") {
        cfg.error_cases[name] = ErrorCase::case_a(c.required("offset_mm").number());
      } else if (type == "actuator_rotation") {
        cfg.error_cases[name] =
            ErrorCase::case_b(c.required("angle_deg").number() * std::numbers::pi / 180.0);
      } else {
        fail(c.where() + "/type", "unknown error case type \"" + type + "\"");
      }
      c.done();
    } else {
      const auto& mounts = cfg.generic.mounts;
      if (c.size() != mounts.size()) fail(c.where(), "one error list per chain is required");
      std::vector<std::vector<GeometricError>> per_chain;
      for (std::size_t i = 0; i < mounts.size(); ++i) {
        per_chain.push_back(read_errors(c[i], mounts[i].chain.elements().size()));
      }
      cfg.generic.error_cases[name] = std::move(per_chain);
    }
  }
}

void read_scenarios(Node& scenarios, Config& cfg) {
  for (const std::string& name : scenarios.keys()) {
    Node s = scenarios.required(name);
    MillingConfig mc;
    mc.from = s.required("from").string();
    mc.to = s.required("to").string();
    for (const auto& [ptr, label] : {std::pair{"/from", mc.from}, std::pair{"/to", mc.to}}) {
      try {
        cfg.point(label);
      } catch (const ConfigIssue&) {
        fail(s.where() + ptr, "unknown point \"" + label + "\"");
      }
    }
    if (auto n = s.optional("samples")) {
      mc.samples = n->integer();
      if (mc.samples < 2) fail(n->where(), "at least two samples are required");
    }
    mc.force = s.required("force_N").vec3();
    mc.tool_offset = s.required("tool_offset_mm").vec3();
    if (auto n = s.optional("note")) n->string();
    s.done();
    cfg.scenarios[name] = mc;
  }
}

void read_solver(Node& s, LoadedSettings& out) {
  if (auto n = s.optional("chain_pose_tolerance")) out.chain.pose_tolerance = n->positive();
  if (auto n = s.optional("chain_step_tolerance")) out.chain.step_tolerance = n->positive();
  if (auto n = s.optional("chain_max_iterations")) out.chain.max_iterations = n->integer();
  if (auto n = s.optional("force_tolerance")) out.force_tolerance = n->positive();
  if (auto n = s.optional("max_outer")) out.max_outer = n->integer();
  if (auto n = s.optional("continuation_steps")) out.continuation_steps = n->integer();
  if (auto n = s.optional("alpha_comp")) out.alpha_comp = n->number();
  if (auto n = s.optional("position_tolerance_mm")) out.position_tolerance = n->positive();
  if (auto n = s.optional("rotation_tolerance_rad")) out.rotation_tolerance = n->positive();
  if (auto n = s.optional("max_compensation")) out.max_compensation = n->integer();
  try {
    out.validate();
    if (out.chain.max_iterations < 1) {
      throw Error(ErrorCode::InvalidArgument, "chain_max_iterations must be at least 1");
    }
  } catch (const Error& e) {
    fail(s.where(), e.what());
  }
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

}  // namespace

Vec3 Config::point(const std::string& name) const {
  for (const auto& [n, p] : points) {
    if (n == name) return p;
  }
  throw ConfigIssue("unknown point \"" + name + "\"", "/points");
}

Config parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::string where = line_column(text, e.byte);
    std::string what = e.what();
    const auto pos = what.find("parse error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw ConfigIssue(source + ":" + where + ": " + what, where);
  }

  Config cfg;
  cfg.source = source;
  cfg.text = text;
  cfg.solver.chain.pose_tolerance = 1e-11;
  cfg.solver.chain.step_tolerance = 1e-11;

  Node root(doc, "");
  Node version = root.required("format_version");
  cfg.format_version = version.integer();
  if (cfg.format_version != kFormatVersion) {
    fail(version.where(), "unsupported format version " + std::to_string(cfg.format_version));
  }
  if (auto d = root.optional("description")) d->string();

  Node m = root.required("manipulator");
  const std::string type = m.required("type").string();
  std::optional<Node> pivot;
  if (type == "orthoglide") {
    cfg.kind = ManipulatorKind::Orthoglide;
    read_orthoglide(m, cfg, pivot);
  } else if (type == "generic") {
    cfg.kind = ManipulatorKind::Generic;
    read_generic(m, cfg);
  } else {
    fail(m.where() + "/type", "unknown manipulator type \"" + type + "\"");
  }
  m.done();

  if (auto p = root.optional("points")) {
    read_points(*p, cfg);
  } else if (cfg.kind == ManipulatorKind::Orthoglide) {
    fail("", "missing required field \"points\"");
  }
  if (cfg.kind == ManipulatorKind::Orthoglide && cfg.points.empty()) {
    fail("/points", "at least one point is required");
  }
  if (pivot) {
    if (pivot->is_string()) {
      const std::string name = pivot->string();
      try {
        cfg.orthoglide.error_pivot_point = cfg.point(name);
      } catch (const ConfigIssue&) {
        fail(pivot->where(), "unknown point \"" + name + "\"");
      }
    } else {
      cfg.orthoglide.error_pivot_point = pivot->vec3();
    }
  }
  if (cfg.kind == ManipulatorKind::Orthoglide) {
    try {
      inverse_kinematics(cfg.orthoglide, cfg.orthoglide.error_pivot_point);
    } catch (const Error& e) {
      fail(pivot ? pivot->where() : "/manipulator", e.what());
    }
  }

  if (auto c = root.optional("error_cases")) read_error_cases(*c, cfg);
  if (auto s = root.optional("scenarios")) {
    if (cfg.kind == ManipulatorKind::Generic) {
      fail(s->where(), "scenarios require an orthoglide manipulator");
    }
    read_scenarios(*s, cfg);
  }
  if (auto s = root.optional("solver")) {
    read_solver(*s, cfg.solver);
    s->done();
  }
  root.done();
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigIssue("cannot open configuration file " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vjm
