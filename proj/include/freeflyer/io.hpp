// Copyright 2026 The freeflyer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "freeflyer/errors.hpp"
#include "freeflyer/scenario.hpp"

// JSON file schemas (SI units throughout; angles in radians):
//
// Model document:
//   base { mass, inertia = [ixx,iyy,izz] or 3x3 rows, mounts = [[x,y,z], ...] }
//   arms = [ { role = "mission"|"balance"|"passive",
//              joints = [ { axis = [x,y,z], offset = [x,y,z] }, ... ],
//              links  = [ { mass, length, com = [x,y,z], inertia = ... }, ... ] } ]
//
// Scenario document:
//   model = "<path, relative to the scenario file>"
//   mission { target = [rad,...], duration, via = [[rad,...], ...] (optional) }
//   control { kp = [...], kd = [...] }           (full joint vector)
//   sim     { dt, t_end, balance = true|false }
//   initial { base_attitude_rpy = [r,p,y], joint_angles = [...] }
//
// State document (used by the coupling CLI):
//   base_position, base_attitude_rpy, base_twist = [v;w], joint_angles, joint_rates

namespace freeflyer {

using nlohmann::json;

namespace io_detail {

inline const json& require(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ParseError(path + ": expected true or false");
  return j.get<bool>();
}

inline Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ParseError(path + ": expected [x, y, z]");
  Vec3 v;
  for (int k = 0; k < 3; ++k) v[k] = as_number(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

inline VecX as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of numbers");
  VecX v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = as_number(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

inline Mat3 as_inertia(const json& j, const std::string& path) {
  if (j.is_array() && j.size() == 3 && j[0].is_number())
    return Mat3(as_vec3(j, path).asDiagonal());
  if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      m.row(r) = as_vec3(j[r], path + "[" + std::to_string(r) + "]").transpose();
    return m;
  }
  throw ParseError(path + ": expected [ixx, iyy, izz] or three 3-element rows");
}

inline json inertia_to_json(const Mat3& inertia) {
  if (inertia.isDiagonal(0.0))
    return json::array({inertia(0, 0), inertia(1, 1), inertia(2, 2)});
  json rows = json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(json::array({inertia(r, 0), inertia(r, 1), inertia(r, 2)}));
  return rows;
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline std::string hash_string(const json& j) {
  const std::string dump = j.dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(dump.data(), dump.size())));
  return std::string(buf);
}

}  // namespace io_detail

inline RobotModel model_from_json(const json& doc) {
  namespace d = io_detail;
  RobotModel model;
  const json& base = d::require(doc, "base", "base");
  model.base.mass = d::as_number(d::require(base, "mass", "base"), "base.mass");
  model.base.inertia = d::as_inertia(d::require(base, "inertia", "base"), "base.inertia");
  const json& mounts = d::require(base, "mounts", "base");
  if (!mounts.is_array()) throw ParseError("base.mounts: expected an array of [x,y,z]");
  for (std::size_t i = 0; i < mounts.size(); ++i)
    model.base.arm_mounts.push_back(
        d::as_vec3(mounts[i], "base.mounts[" + std::to_string(i) + "]"));

  const json& arms = d::require(doc, "arms", "arms");
  if (!arms.is_array()) throw ParseError("arms: expected an array");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string arm_path = "arms[" + std::to_string(i) + "]";
    const json& arm_doc = arms[i];
    ArmChain arm;
    const json& role = d::require(arm_doc, "role", arm_path);
    if (!role.is_string()) throw ParseError(arm_path + ".role: expected a string");
    const std::string role_str = role.get<std::string>();
    if (role_str == "mission") arm.role = ArmRole::kMission;
    else if (role_str == "balance") arm.role = ArmRole::kBalance;
    else if (role_str == "passive") arm.role = ArmRole::kPassive;
    else throw ParseError(arm_path + ".role: expected \"mission\", \"balance\" or \"passive\"");

    const json& joints = d::require(arm_doc, "joints", arm_path);
    const json& links = d::require(arm_doc, "links", arm_path);
    if (!joints.is_array() || !links.is_array() || joints.size() != links.size())
      throw ParseError(arm_path + ": joints and links must be arrays of equal length");
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const std::string joint_path = arm_path + ".joints[" + std::to_string(j) + "]";
      const std::string link_path = arm_path + ".links[" + std::to_string(j) + "]";
      ArmSegment seg;
      seg.joint.axis = d::as_vec3(d::require(joints[j], "axis", joint_path), joint_path + ".axis");
      seg.joint.mount_offset =
          d::as_vec3(d::require(joints[j], "offset", joint_path), joint_path + ".offset");
      seg.link.mass = d::as_number(d::require(links[j], "mass", link_path), link_path + ".mass");
      seg.link.length =
          d::as_number(d::require(links[j], "length", link_path), link_path + ".length");
      seg.link.com_offset =
          d::as_vec3(d::require(links[j], "com", link_path), link_path + ".com");
      seg.link.inertia =
          d::as_inertia(d::require(links[j], "inertia", link_path), link_path + ".inertia");
      arm.segments.push_back(seg);
    }
    model.arms.push_back(std::move(arm));
  }
  model.validate();
  return model;
}

inline json model_to_json(const RobotModel& model) {
  namespace d = io_detail;
  json doc;
  doc["base"]["mass"] = model.base.mass;
  doc["base"]["inertia"] = d::inertia_to_json(model.base.inertia);
  json mounts = json::array();
  for (const Vec3& m : model.base.arm_mounts) mounts.push_back(d::vec3_to_json(m));
  doc["base"]["mounts"] = mounts;
  json arms = json::array();
  for (const ArmChain& arm : model.arms) {
    json arm_doc;
    arm_doc["role"] = to_string(arm.role);
    json joints = json::array();
    json links = json::array();
    for (const ArmSegment& seg : arm.segments) {
      joints.push_back({{"axis", d::vec3_to_json(seg.joint.axis)},
                        {"offset", d::vec3_to_json(seg.joint.mount_offset)}});
      links.push_back({{"mass", seg.link.mass},
                       {"length", seg.link.length},
                       {"com", d::vec3_to_json(seg.link.com_offset)},
                       {"inertia", d::inertia_to_json(seg.link.inertia)}});
    }
    arm_doc["joints"] = joints;
    arm_doc["links"] = links;
    arms.push_back(arm_doc);
  }
  doc["arms"] = arms;
  return doc;
}

inline RobotModel load_model(const std::filesystem::path& path) {
  return model_from_json(io_detail::parse_file(path));
}

inline void write_model(const RobotModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline SystemState state_from_json(const json& doc, const RobotModel& model) {
  namespace d = io_detail;
  SystemState s = SystemState::rest(model);
  if (doc.contains("base_position"))
    s.base_position = d::as_vec3(doc["base_position"], "base_position");
  if (doc.contains("base_attitude_rpy"))
    s.base_attitude = quat_from_rpy(d::as_vec3(doc["base_attitude_rpy"], "base_attitude_rpy"));
  if (doc.contains("base_twist")) {
    const VecX twist = d::as_vector(doc["base_twist"], "base_twist");
    if (twist.size() != 6) throw ParseError("base_twist: expected 6 numbers");
    s.base_twist = twist;
  }
  if (doc.contains("joint_angles")) s.joint_angles = d::as_vector(doc["joint_angles"], "joint_angles");
  if (doc.contains("joint_rates")) s.joint_rates = d::as_vector(doc["joint_rates"], "joint_rates");
  s.validate_against(model);
  return s;
}

inline SystemState load_state(const std::filesystem::path& path, const RobotModel& model) {
  return state_from_json(io_detail::parse_file(path), model);
}

/// Loads a scenario; the "model" entry is resolved relative to the scenario
/// file's directory. Provenance hashes are stamped from the canonical dumps.
inline Scenario load_scenario(const std::filesystem::path& path) {
  namespace d = io_detail;
  const json doc = d::parse_file(path);

  Scenario scn;
  const json& model_ref = d::require(doc, "model", "scenario");
  if (!model_ref.is_string()) throw ParseError("model: expected a path string");
  const std::filesystem::path model_path =
      path.parent_path() / model_ref.get<std::string>();
  const json model_doc = d::parse_file(model_path);
  scn.model = model_from_json(model_doc);
  scn.model_hash = d::hash_string(model_doc);
  scn.scenario_hash = d::hash_string(doc);

  const json& mission = d::require(doc, "mission", "scenario");
  scn.mission_target = d::as_vector(d::require(mission, "target", "mission"), "mission.target");
  scn.mission_duration =
      d::as_number(d::require(mission, "duration", "mission"), "mission.duration");
  if (mission.contains("via")) {
    const json& vias = mission["via"];
    if (!vias.is_array()) throw ParseError("mission.via: expected an array of joint vectors");
    for (std::size_t i = 0; i < vias.size(); ++i)
      scn.mission_vias.push_back(
          d::as_vector(vias[i], "mission.via[" + std::to_string(i) + "]"));
  }

  const json& control = d::require(doc, "control", "scenario");
  scn.gains.kp = d::as_vector(d::require(control, "kp", "control"), "control.kp");
  scn.gains.kd = d::as_vector(d::require(control, "kd", "control"), "control.kd");

  const json& sim = d::require(doc, "sim", "scenario");
  scn.dt = d::as_number(d::require(sim, "dt", "sim"), "sim.dt");
  scn.t_end = d::as_number(d::require(sim, "t_end", "sim"), "sim.t_end");
  scn.balance_enabled = d::as_bool(d::require(sim, "balance", "sim"), "sim.balance");

  scn.initial_state = SystemState::rest(scn.model);
  const json& initial = d::require(doc, "initial", "scenario");
  if (initial.contains("base_attitude_rpy"))
    scn.initial_state.base_attitude =
        quat_from_rpy(d::as_vec3(initial["base_attitude_rpy"], "initial.base_attitude_rpy"));
  const VecX angles =
      d::as_vector(d::require(initial, "joint_angles", "initial"), "initial.joint_angles");
  if (angles.size() != scn.model.dof())
    throw ParseError("initial.joint_angles: expected " + std::to_string(scn.model.dof()) +
                     " values");
  scn.initial_state.joint_angles = angles;

  scn.validate();
  return scn;
}

}  // namespace freeflyer
