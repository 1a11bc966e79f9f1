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

#include <utility>
#include <vector>

#include "freeflyer/errors.hpp"
#include "freeflyer/model.hpp"
#include "freeflyer/state.hpp"
#include "freeflyer/types.hpp"

namespace freeflyer {

struct LinkFrame {
  Mat3 rotation;        // link frame -> world
  Vec3 joint_position;  // joint origin, world
  Vec3 joint_axis;      // world
  Vec3 com;             // link centroid, world
  Mat3 inertia_world;   // about the centroid, world axes
};

struct ArmFrames {
  std::vector<LinkFrame> links;
  Vec3 ee_position;
  Mat3 ee_rotation;
};

/// Every position-level quantity for one (model, state) pair. Recomputed
/// wholesale; the stamp guards against pairing it with a different state.
struct KinematicsCache {
  Mat3 base_rotation;
  Mat3 base_inertia_world;
  Vec3 base_com;
  std::vector<ArmFrames> arms;
  Vec3 system_com;
  double total_mass = 0.0;
  std::uint64_t stamp = 0;
};

namespace detail {

inline void require_fresh(const KinematicsCache& cache, const SystemState& state) {
  if (cache.stamp != state_hash(state))
    throw StaleCache("kinematics cache was built from a different state");
}

}  // namespace detail

inline KinematicsCache forward_kinematics(const RobotModel& model,
                                          const SystemState& state) {
  state.validate_against(model);

  KinematicsCache cache;
  cache.base_rotation = state.base_attitude.toRotationMatrix();
  cache.base_inertia_world =
      cache.base_rotation * model.base.inertia * cache.base_rotation.transpose();
  cache.base_com = state.base_position;
  cache.total_mass = model.total_mass();

  Vec3 weighted = model.base.mass * state.base_position;
  cache.arms.resize(model.arm_count());
  for (int i = 0; i < model.arm_count(); ++i) {
    const ArmChain& arm = model.arms[i];
    ArmFrames& frames = cache.arms[i];
    frames.links.resize(arm.segments.size());

    Mat3 parent_rotation = cache.base_rotation;
    Vec3 parent_origin = state.base_position;
    const int offset = model.arm_offset(i);
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const ArmSegment& seg = arm.segments[j];
      LinkFrame& frame = frames.links[j];
      frame.joint_position = parent_origin + parent_rotation * seg.joint.mount_offset;
      frame.joint_axis = parent_rotation * seg.joint.axis;
      frame.rotation =
          parent_rotation *
          Eigen::AngleAxisd(state.joint_angles[offset + j], seg.joint.axis).toRotationMatrix();
      frame.com = frame.joint_position + frame.rotation * seg.link.com_offset;
      frame.inertia_world = frame.rotation * seg.link.inertia * frame.rotation.transpose();
      weighted += seg.link.mass * frame.com;

      parent_rotation = frame.rotation;
      parent_origin = frame.joint_position;
    }
    const LinkFrame& tip = frames.links.back();
    frames.ee_rotation = tip.rotation;
    frames.ee_position =
        tip.joint_position + tip.rotation * Vec3(arm.segments.back().link.length, 0.0, 0.0);
  }
  cache.system_com = weighted / cache.total_mass;
  cache.stamp = state_hash(state);
  return cache;
}

/// Dense 3xN translational/rotational Jacobians of every link centroid,
/// N = total joint count. Columns of joints on other arms (or distal to the
/// link) are zero. Velocities are base-relative, expressed in world axes.
struct LinkJacobians {
  // jt[i][j], jr[i][j]: link j of arm i.
  std::vector<std::vector<Mat3X>> jt;
  std::vector<std::vector<Mat3X>> jr;
};

inline LinkJacobians link_jacobians(const RobotModel& model, const SystemState& state,
                                    const KinematicsCache& cache) {
  detail::require_fresh(cache, state);
  const int n = model.dof();
  LinkJacobians jac;
  jac.jt.resize(model.arm_count());
  jac.jr.resize(model.arm_count());
  for (int i = 0; i < model.arm_count(); ++i) {
    const int offset = model.arm_offset(i);
    jac.jt[i].resize(model.arm_dof(i));
    jac.jr[i].resize(model.arm_dof(i));
    for (int j = 0; j < model.arm_dof(i); ++j) {
      Mat3X jt = Mat3X::Zero(3, n);
      Mat3X jr = Mat3X::Zero(3, n);
      const Vec3 com = cache.arms[i].links[j].com;
      for (int k = 0; k <= j; ++k) {
        const LinkFrame& ancestor = cache.arms[i].links[k];
        jr.col(offset + k) = ancestor.joint_axis;
        jt.col(offset + k) = ancestor.joint_axis.cross(com - ancestor.joint_position);
      }
      jac.jt[i][j] = std::move(jt);
      jac.jr[i][j] = std::move(jr);
    }
  }
  return jac;
}

/// 6xN base-relative end-effector Jacobian of one arm, world axes, taken at
/// the arm's tip: rows 0-2 linear, rows 3-5 angular.
inline Mat6X end_effector_jacobian(const RobotModel& model, const SystemState& state,
                                   const KinematicsCache& cache, int arm) {
  detail::require_fresh(cache, state);
  if (arm < 0 || arm >= model.arm_count())
    throw DimensionMismatch("arm index out of range");
  const int n = model.dof();
  const int offset = model.arm_offset(arm);
  Mat6X jac = Mat6X::Zero(6, n);
  const Vec3 tip = cache.arms[arm].ee_position;
  for (int k = 0; k < model.arm_dof(arm); ++k) {
    const LinkFrame& ancestor = cache.arms[arm].links[k];
    jac.block<3, 1>(0, offset + k) = ancestor.joint_axis.cross(tip - ancestor.joint_position);
    jac.block<3, 1>(3, offset + k) = ancestor.joint_axis;
  }
  return jac;
}

/// Inertial (world) velocities of every body: base plus each link centroid.
struct LinkVelocities {
  Vec3 base_linear;
  Vec3 base_angular;
  // [arm][link] -> (linear at centroid, angular)
  std::vector<std::vector<std::pair<Vec3, Vec3>>> links;
};

inline LinkVelocities link_velocities(const RobotModel& model, const SystemState& state,
                                      const KinematicsCache& cache) {
  detail::require_fresh(cache, state);
  LinkVelocities vel;
  vel.base_linear = state.linear_velocity();
  vel.base_angular = state.angular_velocity();
  vel.links.resize(model.arm_count());
  for (int i = 0; i < model.arm_count(); ++i) {
    const int offset = model.arm_offset(i);
    vel.links[i].resize(model.arm_dof(i));
    Vec3 parent_omega = vel.base_angular;
    Vec3 parent_com = cache.base_com;
    Vec3 parent_velocity = vel.base_linear;
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      const Vec3 joint_velocity =
          parent_velocity + parent_omega.cross(frame.joint_position - parent_com);
      const Vec3 omega =
          parent_omega + state.joint_rates[offset + j] * frame.joint_axis;
      const Vec3 com_velocity = joint_velocity + omega.cross(frame.com - frame.joint_position);
      vel.links[i][j] = {com_velocity, omega};
      parent_omega = omega;
      parent_com = frame.com;
      parent_velocity = com_velocity;
    }
  }
  return vel;
}

}  // namespace freeflyer
