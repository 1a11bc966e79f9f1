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

// Test-side oracles, deliberately independent of the library's Jacobian /
// momentum-matrix code paths: plain per-body recursions over the chain.

#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "freeflyer/freeflyer.hpp"

namespace fftest {

using namespace freeflyer;

inline std::string fixture(const std::string& name) {
  return std::string(FF_FIXTURE_DIR) + "/" + name;
}

struct BodyKin {
  double mass;
  Mat3 inertia_world;  // about the centroid
  Vec3 com;
  Vec3 velocity;  // of the centroid, world
  Vec3 omega;     // world
};

/// Straightforward per-body pose/velocity recursion (base first, then each
/// link outward), written without Jacobians or momentum matrices.
inline std::vector<BodyKin> per_body_kinematics(const RobotModel& model,
                                                const SystemState& state) {
  std::vector<BodyKin> bodies;
  const Mat3 base_rot = state.base_attitude.toRotationMatrix();
  const Vec3 v0 = state.base_twist.head<3>();
  const Vec3 w0 = state.base_twist.tail<3>();
  bodies.push_back({model.base.mass, base_rot * model.base.inertia * base_rot.transpose(),
                    state.base_position, v0, w0});

  for (int i = 0; i < model.arm_count(); ++i) {
    Mat3 rot = base_rot;
    Vec3 joint = state.base_position;
    Vec3 parent_com = state.base_position;
    Vec3 parent_vel = v0;
    Vec3 parent_omega = w0;
    const int off = model.arm_offset(i);
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const ArmSegment& seg = model.arms[i].segments[j];
      joint = joint + rot * seg.joint.mount_offset;
      const Vec3 axis_world = rot * seg.joint.axis;
      rot = rot * Eigen::AngleAxisd(state.joint_angles[off + j], seg.joint.axis)
                      .toRotationMatrix();
      const Vec3 com = joint + rot * seg.link.com_offset;

      const Vec3 joint_vel = parent_vel + parent_omega.cross(joint - parent_com);
      const Vec3 omega = parent_omega + state.joint_rates[off + j] * axis_world;
      const Vec3 com_vel = joint_vel + omega.cross(com - joint);

      bodies.push_back({seg.link.mass, rot * seg.link.inertia * rot.transpose(), com,
                        com_vel, omega});
      parent_com = com;
      parent_vel = com_vel;
      parent_omega = omega;
    }
  }
  return bodies;
}

/// Total [P; L] about the world origin by direct per-body summation.
inline Vec6 momentum_oracle(const RobotModel& model, const SystemState& state) {
  Vec6 h = Vec6::Zero();
  for (const BodyKin& b : per_body_kinematics(model, state)) {
    h.head<3>() += b.mass * b.velocity;
    h.tail<3>() += b.inertia_world * b.omega + b.mass * b.com.cross(b.velocity);
  }
  return h;
}

/// Total kinetic energy by direct per-body summation.
inline double energy_oracle(const RobotModel& model, const SystemState& state) {
  double e = 0.0;
  for (const BodyKin& b : per_body_kinematics(model, state))
    e += 0.5 * b.mass * b.velocity.squaredNorm() +
         0.5 * b.omega.dot(b.inertia_world * b.omega);
  return e;
}

inline Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

inline Quat random_quat(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Quat q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q;
}

/// Physically valid inertia: a random box, randomly oriented.
inline Mat3 random_inertia(std::mt19937& rng, double mass) {
  std::uniform_real_distribution<double> dim(0.1, 1.0);
  const double a = dim(rng), b = dim(rng), c = dim(rng);
  const Vec3 diag(mass / 12.0 * (b * b + c * c), mass / 12.0 * (a * a + c * c),
                  mass / 12.0 * (a * a + b * b));
  const Mat3 rot = random_quat(rng).toRotationMatrix();
  return rot * Mat3(diag.asDiagonal()) * rot.transpose();
}

inline RobotModel random_model(std::mt19937& rng, int max_arms = 2, int max_joints = 3) {
  std::uniform_real_distribution<double> mass(20.0, 200.0);
  std::uniform_real_distribution<double> link_mass(1.0, 8.0);
  std::uniform_real_distribution<double> len(0.2, 0.8);
  std::uniform_real_distribution<double> off(-0.3, 0.3);
  std::uniform_int_distribution<int> arms_dist(1, max_arms);
  std::uniform_int_distribution<int> joints_dist(1, max_joints);

  RobotModel model;
  model.base.mass = mass(rng);
  model.base.inertia = random_inertia(rng, model.base.mass);
  const int arms = arms_dist(rng);
  for (int i = 0; i < arms; ++i) {
    ArmChain arm;
    arm.role = (i == 0) ? ArmRole::kMission : (i == 1 ? ArmRole::kBalance : ArmRole::kPassive);
    const int joints = joints_dist(rng);
    for (int j = 0; j < joints; ++j) {
      ArmSegment seg;
      seg.joint.axis = random_unit(rng);
      seg.joint.mount_offset = Vec3(off(rng), off(rng), off(rng)) +
                               ((j == 0) ? Vec3(0.5, 0.0, 0.0) : Vec3(len(rng), 0.0, 0.0));
      const double m = link_mass(rng);
      seg.link.mass = m;
      seg.link.length = len(rng);
      seg.link.com_offset = Vec3(0.5 * seg.link.length, off(rng) * 0.1, off(rng) * 0.1);
      seg.link.inertia = random_inertia(rng, m);
      arm.segments.push_back(seg);
    }
    model.base.arm_mounts.push_back(arm.segments[0].joint.mount_offset);
    model.arms.push_back(std::move(arm));
  }
  model.validate();
  return model;
}

inline SystemState random_state(std::mt19937& rng, const RobotModel& model,
                                bool with_rates = true) {
  std::uniform_real_distribution<double> ang(-1.5, 1.5);
  std::uniform_real_distribution<double> rate(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  SystemState s = SystemState::rest(model);
  s.base_position = Vec3(pos(rng), pos(rng), pos(rng));
  s.base_attitude = random_quat(rng);
  for (int k = 0; k < model.dof(); ++k) s.joint_angles[k] = ang(rng);
  if (with_rates) {
    for (int k = 0; k < 6; ++k) s.base_twist[k] = rate(rng);
    for (int k = 0; k < model.dof(); ++k) s.joint_rates[k] = rate(rng);
  }
  return s;
}

/// Minimal CSV reader for round-trip and summary-recomputation checks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return static_cast<int>(c);
    return -1;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (first) {
      while (std::getline(ls, cell, ',')) table.header.push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fftest
