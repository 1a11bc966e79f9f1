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

#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "freeflyer/errors.hpp"
#include "freeflyer/types.hpp"

namespace freeflyer {

/// One rigid link. The link frame sits at the link's proximal joint with the
/// link axis along local +x; `length` is the joint-to-joint distance along
/// that axis (for the last link, the end-effector offset). `inertia` is the
/// 3x3 tensor about the link centroid, in the link frame.
struct LinkParams {
  double mass = 0.0;        // kg
  Vec3 com_offset;          // m, centroid in the link frame
  Mat3 inertia;             // kg m^2, about the centroid
  double length = 0.0;      // m
};

/// One revolute joint. `axis` is a unit vector in the parent frame; the joint
/// rotates the child link frame about it. `mount_offset` is the joint origin
/// in the parent link's frame (for joint 1, the mounting point on the base).
struct JointParams {
  Vec3 axis;
  Vec3 mount_offset;
};

struct BaseParams {
  double mass = 0.0;            // kg
  Mat3 inertia;                 // kg m^2, about the base centroid
  std::vector<Vec3> arm_mounts; // one per arm, base frame
};

enum class ArmRole { kMission, kBalance, kPassive };

inline const char* to_string(ArmRole role) {
  switch (role) {
    case ArmRole::kMission: return "mission";
    case ArmRole::kBalance: return "balance";
    case ArmRole::kPassive: return "passive";
  }
  return "passive";
}

struct ArmSegment {
  JointParams joint;
  LinkParams link;
};

struct ArmChain {
  std::vector<ArmSegment> segments;
  ArmRole role = ArmRole::kPassive;
};

/// Immutable description of base + arms. Treated as read-only by every
/// downstream module; safe to share across concurrent runs.
struct RobotModel {
  BaseParams base;
  std::vector<ArmChain> arms;

  int arm_count() const { return static_cast<int>(arms.size()); }
  int arm_dof(int arm) const { return static_cast<int>(arms[arm].segments.size()); }

  /// Column offset of this arm's joints inside the stacked joint vector.
  int arm_offset(int arm) const {
    int off = 0;
    for (int i = 0; i < arm; ++i) off += arm_dof(i);
    return off;
  }

  /// Total joint count across all arms; the free base adds 6 more system DOF.
  int dof() const {
    int n = 0;
    for (const auto& a : arms) n += static_cast<int>(a.segments.size());
    return n;
  }

  double total_mass() const {
    double m = base.mass;
    for (const auto& a : arms)
      for (const auto& s : a.segments) m += s.link.mass;
    return m;
  }

  int mission_arm() const { return find_role(ArmRole::kMission); }
  int balance_arm() const { return find_role(ArmRole::kBalance); }

  /// Checks every structural and physical invariant; throws ValidationError
  /// naming the offending field.
  void validate() const;

 private:
  int find_role(ArmRole role) const {
    for (int i = 0; i < arm_count(); ++i)
      if (arms[i].role == role) return i;
    return -1;
  }
};

namespace detail {

inline void check_inertia(const Mat3& inertia, const std::string& field) {
  const double scale = inertia.cwiseAbs().maxCoeff();
  if (!inertia.allFinite())
    throw ValidationError(field, "inertia must be finite");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (scale + 1e-300))
    throw ValidationError(field, "inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  const Vec3 lambda = eig.eigenvalues();
  const double slack = 1e-9 * (std::abs(lambda.sum()) + 1e-300);
  if (lambda.minCoeff() < -slack)
    throw ValidationError(field, "inertia must be positive semidefinite");
  // Any rigid body satisfies Ixx + Iyy >= Izz about every point.
  for (int i = 0; i < 3; ++i) {
    const double others = lambda.sum() - lambda[i];
    if (lambda[i] > others + slack)
      throw ValidationError(
          field, "inertia eigenvalues violate the physical triangle inequality "
                 "(lambda_i <= lambda_j + lambda_k)");
  }
}

}  // namespace detail

inline void RobotModel::validate() const {
  if (!(base.mass > 0.0)) throw ValidationError("base.mass", "must be > 0");
  detail::check_inertia(base.inertia, "base.inertia");
  if (arms.empty()) throw ValidationError("arms", "at least one arm required");
  if (base.arm_mounts.size() != arms.size())
    throw ValidationError("base.mounts", "must list exactly one mount per arm");

  int mission = 0;
  int balance = 0;
  for (int i = 0; i < arm_count(); ++i) {
    const std::string arm_field = "arms[" + std::to_string(i) + "]";
    const ArmChain& arm = arms[i];
    if (arm.segments.empty())
      throw ValidationError(arm_field + ".joints", "arm needs at least one joint");
    if (arm.role == ArmRole::kMission) ++mission;
    if (arm.role == ArmRole::kBalance) ++balance;
    if ((base.arm_mounts[i] - arm.segments[0].joint.mount_offset).cwiseAbs().maxCoeff() != 0.0)
      throw ValidationError("base.mounts[" + std::to_string(i) + "]",
                            "must equal the arm's joint-1 offset");
    for (int j = 0; j < arm_dof(i); ++j) {
      const std::string joint_field = arm_field + ".joints[" + std::to_string(j) + "]";
      const std::string link_field = arm_field + ".links[" + std::to_string(j) + "]";
      const ArmSegment& seg = arm.segments[j];
      if (!seg.joint.axis.allFinite() || std::abs(seg.joint.axis.norm() - 1.0) > 1e-12)
        throw ValidationError(joint_field + ".axis", "must be a unit vector (|axis| = 1 within 1e-12)");
      if (!seg.joint.mount_offset.allFinite())
        throw ValidationError(joint_field + ".offset", "must be finite");
      if (!(seg.link.mass > 0.0))
        throw ValidationError(link_field + ".mass", "must be > 0");
      if (!(seg.link.length >= 0.0))
        throw ValidationError(link_field + ".length", "must be >= 0");
      if (!seg.link.com_offset.allFinite())
        throw ValidationError(link_field + ".com", "must be finite");
      detail::check_inertia(seg.link.inertia, link_field + ".inertia");
    }
  }
  if (mission != 1)
    throw ValidationError("arms", "exactly one arm must have role \"mission\"");
  if (balance > 1)
    throw ValidationError("arms", "at most one arm may have role \"balance\"");
}

/// The reference two-arm robot: 300 kg cubic base (1.0 m, inertia diag(50)),
/// two identical 3-DOF arms mounted at the centers of opposite base faces
/// (+/-0.5 m on the base y axis). Joint 1 turns about the base z axis,
/// joints 2-3 about the link-local y axis. Links are 0.5 m cylinders of
/// radius 0.04 m with masses (5.0, 5.0, 5.5) kg, centroid at mid-length;
/// inertias are the cylinder values about the centroid.
inline RobotModel table1_model() {
  constexpr double kLinkRadius = 0.04;
  constexpr double kLinkLength = 0.5;

  RobotModel model;
  model.base.mass = 300.0;
  model.base.inertia = 50.0 * Mat3::Identity();
  model.base.arm_mounts = {Vec3(0.0, 0.5, 0.0), Vec3(0.0, -0.5, 0.0)};

  const double link_masses[3] = {5.0, 5.0, 5.5};
  const ArmRole roles[2] = {ArmRole::kMission, ArmRole::kBalance};

  for (int i = 0; i < 2; ++i) {
    ArmChain arm;
    arm.role = roles[i];
    for (int j = 0; j < 3; ++j) {
      ArmSegment seg;
      seg.joint.axis = (j == 0) ? Vec3::UnitZ() : Vec3::UnitY();
      seg.joint.mount_offset =
          (j == 0) ? model.base.arm_mounts[i] : Vec3(kLinkLength, 0.0, 0.0);
      const double m = link_masses[j];
      seg.link.mass = m;
      seg.link.length = kLinkLength;
      seg.link.com_offset = Vec3(0.5 * kLinkLength, 0.0, 0.0);
      const double axial = 0.5 * m * kLinkRadius * kLinkRadius;
      const double transverse =
          m * (kLinkLength * kLinkLength / 12.0 + kLinkRadius * kLinkRadius / 4.0);
      seg.link.inertia = Vec3(axial, transverse, transverse).asDiagonal();
      arm.segments.push_back(seg);
    }
    model.arms.push_back(std::move(arm));
  }
  model.validate();
  return model;
}

}  // namespace freeflyer
