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

#include <functional>

#include <Eigen/Cholesky>

#include "freeflyer/momentum.hpp"

namespace freeflyer {

/// Generalized inertia of the free-floating system over v = [V0; Omega0; qdot]:
/// kinetic energy = 0.5 v^T H v. Symmetric positive definite.
struct GeneralizedInertia {
  MatX H;  // (6+N) x (6+N)
};

inline GeneralizedInertia generalized_inertia(const RobotModel& model,
                                              const SystemState& state,
                                              const KinematicsCache& cache) {
  detail::require_fresh(cache, state);
  const int n = model.dof();
  MatX H = MatX::Zero(6 + n, 6 + n);

  // Base body.
  H.topLeftCorner<3, 3>() = model.base.mass * Mat3::Identity();
  H.block<3, 3>(3, 3) = cache.base_inertia_world;

  const LinkJacobians jac = link_jacobians(model, state, cache);
  MatX body_jac(6, 6 + n);  // maps v to [link com velocity; link angular velocity]
  for (int i = 0; i < model.arm_count(); ++i) {
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      const double m = model.arms[i].segments[j].link.mass;
      body_jac.setZero();
      body_jac.topLeftCorner<3, 3>() = Mat3::Identity();
      body_jac.block<3, 3>(0, 3) = -skew(frame.com - cache.base_com);
      body_jac.topRightCorner(3, n) = jac.jt[i][j];
      body_jac.block<3, 3>(3, 3) = Mat3::Identity();
      body_jac.bottomRightCorner(3, n) = jac.jr[i][j];
      H.noalias() += body_jac.topRows<3>().transpose() * m * body_jac.topRows<3>();
      H.noalias() += body_jac.bottomRows<3>().transpose() * frame.inertia_world *
                     body_jac.bottomRows<3>();
    }
  }
  return {std::move(H)};
}

/// Centrifugal/Coriolis generalized forces C(state): the force vector an
/// inverse-dynamics pass returns at zero generalized acceleration.
struct BiasForces {
  VecX C;  // 6+N
};

inline BiasForces bias_forces(const RobotModel& model, const SystemState& state,
                              const KinematicsCache& cache) {
  detail::require_fresh(cache, state);
  const int n = model.dof();
  VecX C = VecX::Zero(6 + n);
  const Vec3 base_omega = state.angular_velocity();

  // Base body: zero acceleration leaves only the gyroscopic moment.
  Vec3 force_sum = Vec3::Zero();
  Vec3 moment_sum = base_omega.cross(cache.base_inertia_world * base_omega);

  for (int i = 0; i < model.arm_count(); ++i) {
    const int offset = model.arm_offset(i);
    const int n_arm = model.arm_dof(i);

    // Outward velocity/acceleration recursion at zero generalized acceleration.
    std::vector<Vec3> force(n_arm), moment(n_arm);
    Vec3 parent_omega = base_omega;
    Vec3 parent_alpha = Vec3::Zero();
    Vec3 parent_com = cache.base_com;
    Vec3 parent_velocity = state.linear_velocity();
    Vec3 parent_accel = Vec3::Zero();
    for (int j = 0; j < n_arm; ++j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      const double m = model.arms[i].segments[j].link.mass;
      const double rate = state.joint_rates[offset + j];

      const Vec3 arm_to_joint = frame.joint_position - parent_com;
      const Vec3 joint_velocity = parent_velocity + parent_omega.cross(arm_to_joint);
      const Vec3 joint_accel = parent_accel + parent_alpha.cross(arm_to_joint) +
                               parent_omega.cross(parent_omega.cross(arm_to_joint));

      const Vec3 omega = parent_omega + rate * frame.joint_axis;
      const Vec3 alpha = parent_alpha + rate * parent_omega.cross(frame.joint_axis);

      const Vec3 joint_to_com = frame.com - frame.joint_position;
      const Vec3 com_accel =
          joint_accel + alpha.cross(joint_to_com) + omega.cross(omega.cross(joint_to_com));

      force[j] = m * com_accel;
      moment[j] = frame.inertia_world * alpha + omega.cross(frame.inertia_world * omega);
      force_sum += force[j];
      moment_sum += moment[j] + (frame.com - cache.base_com).cross(force[j]);

      parent_omega = omega;
      parent_alpha = alpha;
      parent_com = frame.com;
      parent_velocity = joint_velocity + omega.cross(joint_to_com);
      parent_accel = com_accel;
    }

    // Inward projection onto the joint axes.
    Vec3 wrench_force = Vec3::Zero();
    Vec3 wrench_moment = Vec3::Zero();
    Vec3 pivot = cache.arms[i].links[n_arm - 1].joint_position;
    for (int j = n_arm - 1; j >= 0; --j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      wrench_moment += (pivot - frame.joint_position).cross(wrench_force);
      pivot = frame.joint_position;
      wrench_force += force[j];
      wrench_moment += moment[j] + (frame.com - frame.joint_position).cross(force[j]);
      C[6 + offset + j] = frame.joint_axis.dot(wrench_moment);
    }
  }

  C.head<3>() = force_sum;
  C.segment<3>(3) = moment_sum;
  return {std::move(C)};
}

/// Generalized accelerations [V0dot; Omega0dot; qddot] under joint torques tau.
/// The base receives no external wrench (free-floating).
inline VecX forward_dynamics(const RobotModel& model, const SystemState& state,
                             const VecX& tau) {
  if (tau.size() != model.dof())
    throw DimensionMismatch("torque vector does not match the model DOF");
  const KinematicsCache cache = forward_kinematics(model, state);
  const GeneralizedInertia gi = generalized_inertia(model, state, cache);
  const BiasForces bias = bias_forces(model, state, cache);
  VecX rhs = -bias.C;
  rhs.tail(model.dof()) += tau;
  Eigen::LLT<MatX> llt(gi.H);
  if (llt.info() != Eigen::Success)
    throw SolveFailure("generalized inertia is not positive definite");
  return llt.solve(rhs);
}

/// Kinetic energy via the generalized-inertia quadratic form.
inline double kinetic_energy(const RobotModel& model, const SystemState& state,
                             const KinematicsCache& cache) {
  const GeneralizedInertia gi = generalized_inertia(model, state, cache);
  VecX v(6 + model.dof());
  v.head<6>() = state.base_twist;
  v.tail(model.dof()) = state.joint_rates;
  return 0.5 * v.dot(gi.H * v);
}

using TorqueFunction = std::function<VecX(double)>;

namespace detail {

struct StateDerivative {
  Vec3 dposition;
  Vec4 dquat;  // coefficient order (x, y, z, w), matching Quat::coeffs()
  Vec6 dtwist;
  VecX dangles;
  VecX drates;
};

inline StateDerivative derivative(const RobotModel& model, const SystemState& state,
                                  const VecX& tau) {
  StateDerivative d;
  const VecX accel = forward_dynamics(model, state, tau);
  d.dposition = state.linear_velocity();
  const Vec3 omega = state.angular_velocity();
  const Quat omega_quat(0.0, omega.x(), omega.y(), omega.z());
  d.dquat = 0.5 * (omega_quat * state.base_attitude).coeffs();
  d.dtwist = accel.head<6>();
  d.dangles = state.joint_rates;
  d.drates = accel.tail(model.dof());
  return d;
}

inline SystemState advanced(const SystemState& state, const StateDerivative& d,
                            double h) {
  SystemState out = state;
  out.base_position += h * d.dposition;
  out.base_attitude.coeffs() += h * d.dquat;
  out.base_attitude.normalize();
  out.base_twist += h * d.dtwist;
  out.joint_angles += h * d.dangles;
  out.joint_rates += h * d.drates;
  if (!out.base_position.allFinite() || !out.base_twist.allFinite() ||
      !out.base_attitude.coeffs().allFinite() || !out.joint_angles.allFinite() ||
      !out.joint_rates.allFinite())
    throw NonFiniteState("non-finite intermediate state during integration");
  return out;
}

}  // namespace detail

/// One classical RK4 step with torques sampled at the stage times; the
/// quaternion is renormalized after the update.
inline SystemState step(const RobotModel& model, const SystemState& state,
                        const TorqueFunction& tau, double t, double dt) {
  if (!(dt > 0.0)) throw BadDuration("step size must be > 0");
  using detail::StateDerivative;
  const StateDerivative k1 = detail::derivative(model, state, tau(t));
  const VecX tau_mid = tau(t + 0.5 * dt);
  const StateDerivative k2 =
      detail::derivative(model, detail::advanced(state, k1, 0.5 * dt), tau_mid);
  const StateDerivative k3 =
      detail::derivative(model, detail::advanced(state, k2, 0.5 * dt), tau_mid);
  const StateDerivative k4 =
      detail::derivative(model, detail::advanced(state, k3, dt), tau(t + dt));

  SystemState out = state;
  const double w = dt / 6.0;
  out.base_position +=
      w * (k1.dposition + 2.0 * k2.dposition + 2.0 * k3.dposition + k4.dposition);
  out.base_attitude.coeffs() +=
      w * (k1.dquat + 2.0 * k2.dquat + 2.0 * k3.dquat + k4.dquat);
  out.base_attitude.normalize();
  out.base_twist += w * (k1.dtwist + 2.0 * k2.dtwist + 2.0 * k3.dtwist + k4.dtwist);
  out.joint_angles += w * (k1.dangles + 2.0 * k2.dangles + 2.0 * k3.dangles + k4.dangles);
  out.joint_rates += w * (k1.drates + 2.0 * k2.drates + 2.0 * k3.drates + k4.drates);

  if (!out.base_position.allFinite() || !out.base_twist.allFinite() ||
      !out.base_attitude.coeffs().allFinite() || !out.joint_angles.allFinite() ||
      !out.joint_rates.allFinite())
    throw NonFiniteState("non-finite state after integration step");
  return out;
}

/// RK4 step under zero-order-hold torques.
inline SystemState step(const RobotModel& model, const SystemState& state,
                        const VecX& tau, double dt) {
  return step(
      model, state, [&tau](double) -> VecX { return tau; }, 0.0, dt);
}

}  // namespace freeflyer
