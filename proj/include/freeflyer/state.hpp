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

#include "freeflyer/errors.hpp"
#include "freeflyer/model.hpp"
#include "freeflyer/types.hpp"

namespace freeflyer {

/// Base pose/twist plus all joint angles and rates at one instant.
/// Attitude is a unit quaternion internally; roll-pitch-yaw is a derived
/// view used only at I/O boundaries. The twist is [V0; Omega0] of the base
/// centroid, world frame.
struct SystemState {
  Vec3 base_position = Vec3::Zero();
  Quat base_attitude = Quat::Identity();
  Vec6 base_twist = Vec6::Zero();
  VecX joint_angles;
  VecX joint_rates;

  static SystemState rest(const RobotModel& model) {
    SystemState s;
    s.joint_angles = VecX::Zero(model.dof());
    s.joint_rates = VecX::Zero(model.dof());
    return s;
  }

  Vec3 linear_velocity() const { return base_twist.head<3>(); }
  Vec3 angular_velocity() const { return base_twist.tail<3>(); }
  Vec3 rpy() const { return rpy_from_quat(base_attitude); }

  void validate_against(const RobotModel& model) const {
    if (joint_angles.size() != model.dof() || joint_rates.size() != model.dof())
      throw DimensionMismatch("state joint vectors do not match the model DOF (" +
                              std::to_string(model.dof()) + ")");
    if (std::abs(base_attitude.norm() - 1.0) > 1e-10)
      throw ValidationError("base_attitude", "quaternion norm must be 1 within 1e-10");
    if (!base_position.allFinite() || !base_twist.allFinite() ||
        !joint_angles.allFinite() || !joint_rates.allFinite())
      throw ValidationError("state", "must be finite");
  }
};

/// Stamp tying caches to the exact state they were computed from.
inline std::uint64_t state_hash(const SystemState& s) {
  std::uint64_t h = fnv1a_doubles(s.base_position.data(), 3);
  h = fnv1a_doubles(s.base_attitude.coeffs().data(), 4, h);
  h = fnv1a_doubles(s.base_twist.data(), 6, h);
  if (s.joint_angles.size() > 0)
    h = fnv1a_doubles(s.joint_angles.data(), static_cast<std::size_t>(s.joint_angles.size()), h);
  if (s.joint_rates.size() > 0)
    h = fnv1a_doubles(s.joint_rates.data(), static_cast<std::size_t>(s.joint_rates.size()), h);
  return h;
}

}  // namespace freeflyer
