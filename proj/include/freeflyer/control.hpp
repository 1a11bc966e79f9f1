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

#include <vector>

#include "freeflyer/dynamics.hpp"
#include "freeflyer/momentum.hpp"
#include "freeflyer/trajectory.hpp"

namespace freeflyer {

/// Condition-number limit above which the balance solve switches to damped
/// least squares and the sample is flagged.
inline constexpr double kBalanceConditionLimit = 1e6;

/// Base motion induced by the mission arm alone, from the zero-momentum map
/// integrated along the planned trajectory. The attitude stream is exactly
/// the trapezoidal quadrature of the stored angular-velocity stream:
/// q[k+1] = quat_exp(dt*(w[k]+w[k+1])/2) * q[k].
struct AttitudePrediction {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Quat> attitudes;
  MatX rpy;                   // samples x 3
  MatX base_positions;        // samples x 3
  MatX angular_velocity;      // samples x 3
  MatX angular_acceleration;  // samples x 3
};

/// Balance-arm trajectory nulling the base angular velocity, with per-sample
/// diagnostics of the 3x3 angular solve and the rollout base states it was
/// synthesized along.
struct BalanceSynthesis {
  JointTrajectory trajectory;
  VecX condition_numbers;
  std::vector<Eigen::Index> damped_samples;
  MatX base_positions;        // samples x 3
  std::vector<Quat> base_attitudes;
};

namespace detail {

inline Mat6X zero_momentum_map_at(const RobotModel& model, const Vec3& position,
                                  const Quat& attitude, const VecX& angles) {
  SystemState s;
  s.base_position = position;
  s.base_attitude = attitude;
  s.joint_angles = angles;
  s.joint_rates = VecX::Zero(angles.size());
  const KinematicsCache cache = forward_kinematics(model, s);
  return zero_momentum_map(momentum_matrices(model, s, cache));
}

inline void check_mission_traj(const RobotModel& model, const SystemState& state,
                               const JointTrajectory& traj, int mission) {
  if (mission < 0) throw ValidationError("arms", "model has no mission arm");
  if (traj.joint_count() != model.arm_dof(mission))
    throw DimensionMismatch("trajectory joint count does not match the mission arm");
  if (traj.sample_count() < 2) throw BadDuration("trajectory needs at least two samples");
  const VecX current =
      state.joint_angles.segment(model.arm_offset(mission), model.arm_dof(mission));
  if ((traj.positions.row(0).transpose() - current).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("mission",
                          "trajectory does not start at the current mission-arm angles");
}

}  // namespace detail

/// Rolls the zero-momentum kinematic flow along the mission trajectory with
/// the other arms held, producing the base angular velocity, its rate, and
/// the integrated attitude. Assumes the system starts at rest (zero total
/// momentum).
inline AttitudePrediction predict_base_motion(const RobotModel& model,
                                              const SystemState& state,
                                              const JointTrajectory& mission_traj) {
  state.validate_against(model);
  const int mission = model.mission_arm();
  detail::check_mission_traj(model, state, mission_traj, mission);
  const int offset = model.arm_offset(mission);
  const int n_arm = model.arm_dof(mission);
  const Eigen::Index samples = mission_traj.sample_count();
  const double dt = mission_traj.dt;

  AttitudePrediction pred;
  pred.dt = dt;
  pred.times = mission_traj.times;
  pred.attitudes.resize(samples);
  pred.rpy.resize(samples, 3);
  pred.base_positions.resize(samples, 3);
  pred.angular_velocity.resize(samples, 3);
  pred.angular_acceleration.resize(samples, 3);

  std::vector<Mat3X> mission_map(samples);  // angular rows, mission columns

  Vec3 position = state.base_position;
  Quat attitude = state.base_attitude.normalized();
  VecX angles = state.joint_angles;
  VecX rates = VecX::Zero(model.dof());

  angles.segment(offset, n_arm) = mission_traj.positions.row(0).transpose();
  Mat6X map = detail::zero_momentum_map_at(model, position, attitude, angles);
  rates.segment(offset, n_arm) = mission_traj.velocities.row(0).transpose();
  Vec6 twist = map * rates;

  for (Eigen::Index k = 0; k < samples; ++k) {
    pred.attitudes[k] = attitude;
    pred.rpy.row(k) = rpy_from_quat(attitude).transpose();
    pred.base_positions.row(k) = position.transpose();
    pred.angular_velocity.row(k) = twist.tail<3>().transpose();
    mission_map[k] = map.block(3, offset, 3, n_arm);
    if (k + 1 == samples) break;

    // Heun predictor-corrector; the stored streams satisfy the trapezoid
    // identity exactly by construction.
    const Vec3 predicted_position = position + dt * twist.head<3>();
    const Quat predicted_attitude = (quat_exp(dt * twist.tail<3>()) * attitude).normalized();
    VecX next_angles = angles;
    next_angles.segment(offset, n_arm) = mission_traj.positions.row(k + 1).transpose();
    const Mat6X next_map = detail::zero_momentum_map_at(model, predicted_position,
                                                        predicted_attitude, next_angles);
    VecX next_rates = VecX::Zero(model.dof());
    next_rates.segment(offset, n_arm) = mission_traj.velocities.row(k + 1).transpose();
    const Vec6 next_twist = next_map * next_rates;

    position += 0.5 * dt * (twist.head<3>() + next_twist.head<3>());
    attitude = (quat_exp(0.5 * dt * (twist.tail<3>() + next_twist.tail<3>())) * attitude)
                   .normalized();
    angles = next_angles;
    map = next_map;
    twist = next_twist;
  }

  // Angular acceleration from the differentiated map: central differences of
  // the mission-column angular map along the rollout.
  for (Eigen::Index k = 0; k < samples; ++k) {
    Mat3X map_dot(3, n_arm);
    if (k == 0)
      map_dot = (mission_map[1] - mission_map[0]) / dt;
    else if (k + 1 == samples)
      map_dot = (mission_map[k] - mission_map[k - 1]) / dt;
    else
      map_dot = (mission_map[k + 1] - mission_map[k - 1]) / (2.0 * dt);
    const Vec3 alpha =
        map_dot * mission_traj.velocities.row(k).transpose() +
        mission_map[k] * mission_traj.accelerations.row(k).transpose();
    pred.angular_acceleration.row(k) = alpha.transpose();
  }
  return pred;
}

/// Synthesizes the balance-arm trajectory that keeps the base angular
/// velocity at zero while the mission arm tracks its trajectory: at each
/// sample the angular rows of the combined zero-momentum map are solved for
/// the balance rates, and positions follow by trapezoidal quadrature. Near
/// singular configurations the solve is damped and the sample recorded.
inline BalanceSynthesis synthesize_balance(const RobotModel& model,
                                           const SystemState& state,
                                           const JointTrajectory& mission_traj) {
  state.validate_against(model);
  const int mission = model.mission_arm();
  const int balance = model.balance_arm();
  detail::check_mission_traj(model, state, mission_traj, mission);
  if (balance < 0) throw ValidationError("arms", "model has no balance arm");
  if (model.arm_dof(balance) < 3)
    throw ValidationError("arms", "balance arm needs at least 3 joints");

  const int m_off = model.arm_offset(mission);
  const int m_dof = model.arm_dof(mission);
  const int b_off = model.arm_offset(balance);
  const int b_dof = model.arm_dof(balance);
  const Eigen::Index samples = mission_traj.sample_count();
  const double dt = mission_traj.dt;

  BalanceSynthesis synth;
  synth.trajectory.dt = dt;
  synth.trajectory.times = mission_traj.times;
  synth.trajectory.positions.resize(samples, b_dof);
  synth.trajectory.velocities.resize(samples, b_dof);
  synth.trajectory.accelerations.resize(samples, b_dof);
  synth.condition_numbers.resize(samples);
  synth.base_positions.resize(samples, 3);
  synth.base_attitudes.resize(samples);

  const auto solve_balance_rates = [&](const Mat6X& map, const VecX& mission_rates,
                                       Eigen::Index k, bool record) -> Vec3 {
    const Mat3 balance_block = map.block(3, b_off, 3, b_dof);
    const Vec3 rhs = -map.block(3, m_off, 3, m_dof) * mission_rates;
    Eigen::JacobiSVD<Mat3> svd(balance_block,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sigma = svd.singularValues();
    const double cond = sigma(2) > 0.0 ? sigma(0) / sigma(2)
                                       : std::numeric_limits<double>::infinity();
    if (record) synth.condition_numbers[k] = cond;
    if (cond <= kBalanceConditionLimit)
      return balance_block.partialPivLu().solve(rhs);
    if (record &&
        (synth.damped_samples.empty() || synth.damped_samples.back() != k))
      synth.damped_samples.push_back(k);
    const double damping = kDampingScale * sigma(0);
    Vec3 inv_sigma;
    for (int q = 0; q < 3; ++q)
      inv_sigma(q) = sigma(q) / (sigma(q) * sigma(q) + damping * damping);
    return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose() * rhs;
  };

  Vec3 position = state.base_position;
  Quat attitude = state.base_attitude.normalized();
  VecX angles = state.joint_angles;
  angles.segment(m_off, m_dof) = mission_traj.positions.row(0).transpose();

  Mat6X map = detail::zero_momentum_map_at(model, position, attitude, angles);
  VecX rates = VecX::Zero(model.dof());
  rates.segment(m_off, m_dof) = mission_traj.velocities.row(0).transpose();
  rates.segment(b_off, b_dof) =
      solve_balance_rates(map, rates.segment(m_off, m_dof), 0, true);
  Vec6 twist = map * rates;

  for (Eigen::Index k = 0; k < samples; ++k) {
    // The stored rates are solved against the stored configuration, so the
    // null-reaction condition holds at every sample to solver precision.
    synth.trajectory.positions.row(k) = angles.segment(b_off, b_dof).transpose();
    synth.trajectory.velocities.row(k) = rates.segment(b_off, b_dof).transpose();
    synth.base_positions.row(k) = position.transpose();
    synth.base_attitudes[k] = attitude;
    if (k + 1 == samples) break;

    // Predictor step of the full configuration.
    const Vec3 predicted_position = position + dt * twist.head<3>();
    const Quat predicted_attitude = (quat_exp(dt * twist.tail<3>()) * attitude).normalized();
    VecX predicted_angles = angles;
    predicted_angles.segment(m_off, m_dof) = mission_traj.positions.row(k + 1).transpose();
    predicted_angles.segment(b_off, b_dof) += dt * rates.segment(b_off, b_dof);

    const Mat6X predicted_map = detail::zero_momentum_map_at(
        model, predicted_position, predicted_attitude, predicted_angles);
    VecX predicted_rates = VecX::Zero(model.dof());
    predicted_rates.segment(m_off, m_dof) = mission_traj.velocities.row(k + 1).transpose();
    predicted_rates.segment(b_off, b_dof) = solve_balance_rates(
        predicted_map, predicted_rates.segment(m_off, m_dof), k + 1, false);
    const Vec6 predicted_twist = predicted_map * predicted_rates;

    // Trapezoidal corrector, then re-solve at the corrected configuration.
    position += 0.5 * dt * (twist.head<3>() + predicted_twist.head<3>());
    attitude = (quat_exp(0.5 * dt * (twist.tail<3>() + predicted_twist.tail<3>())) * attitude)
                   .normalized();
    angles.segment(m_off, m_dof) = mission_traj.positions.row(k + 1).transpose();
    angles.segment(b_off, b_dof) +=
        0.5 * dt *
        (rates.segment(b_off, b_dof) + predicted_rates.segment(b_off, b_dof));

    map = detail::zero_momentum_map_at(model, position, attitude, angles);
    rates.segment(m_off, m_dof) = mission_traj.velocities.row(k + 1).transpose();
    rates.segment(b_off, b_dof) =
        solve_balance_rates(map, rates.segment(m_off, m_dof), k + 1, true);
    twist = map * rates;
  }

  // Accelerations by finite differences of the synthesized rates.
  for (Eigen::Index k = 0; k < samples; ++k) {
    if (k == 0)
      synth.trajectory.accelerations.row(k) =
          (synth.trajectory.velocities.row(1) - synth.trajectory.velocities.row(0)) / dt;
    else if (k + 1 == samples)
      synth.trajectory.accelerations.row(k) =
          (synth.trajectory.velocities.row(k) - synth.trajectory.velocities.row(k - 1)) / dt;
    else
      synth.trajectory.accelerations.row(k) =
          (synth.trajectory.velocities.row(k + 1) - synth.trajectory.velocities.row(k - 1)) /
          (2.0 * dt);
  }
  return synth;
}

}  // namespace freeflyer
