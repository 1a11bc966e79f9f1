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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "freeflyer/control.hpp"
#include "freeflyer/dynamics.hpp"
#include "freeflyer/scenario.hpp"

namespace freeflyer {

/// Sample flag bits.
enum SimFlags : std::uint32_t {
  kFlagBalanceDamped = 1u << 0,  // balance synthesis used a damped solve here
};

/// Full time series of one run. Column layout of the emitted CSV (in order):
/// t, roll, pitch, yaw, qw, qx, qy, qz, x, y, z, v0x..v0z, w0x..w0z,
/// then per arm i: arm{i}_q*, arm{i}_dq*, arm{i}_tau*,
/// then Px, Py, Pz, Lx, Ly, Lz, cond_balance, flags.
struct SimLog {
  std::vector<double> t;
  MatX rpy;         // rows x 3, absolute roll/pitch/yaw
  MatX quat;        // rows x 4, (w, x, y, z)
  MatX base_pos;    // rows x 3
  MatX base_twist;  // rows x 6
  std::vector<MatX> arm_angles;  // per arm: rows x dof
  std::vector<MatX> arm_rates;
  std::vector<MatX> arm_torques;  // commanded
  MatX momentum;                  // rows x 6, [P; L] about the world origin
  VecX cond_balance;              // condition of the 3x3 balance solve at the state
  std::vector<std::uint32_t> flags;

  // Angular momentum of the arms about the base centroid; feeds the reaction
  // torque estimate in the summary (not a CSV column, but recomputable from
  // the CSV plus the model: L_arms = L - R_B x P - I0_world * Omega0).
  MatX arm_momentum_base;  // rows x 3

  std::string model_hash;
  std::string scenario_hash;
  std::string engine_version = kEngineVersion;
  double dt = 0.0;
  bool balance_enabled = false;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(t.size()); }
};

/// Headline numbers of one run. Deviations are roll/pitch/yaw of the base
/// attitude relative to the initial attitude. The reaction torque is the
/// negated finite-difference rate of the arms' angular momentum about the
/// base centroid. The balance effectiveness ratio compares the closed-loop
/// attitude deviation against the mission-arm-only deviation predicted for
/// the same maneuver (so balance-off runs score about 1).
struct RunSummary {
  Vec3 max_rpy_deviation = Vec3::Zero();
  Vec3 final_rpy_deviation = Vec3::Zero();
  double max_linear_momentum = 0.0;
  double max_angular_momentum = 0.0;
  double max_reaction_torque = 0.0;
  double balance_ratio = 0.0;
};

namespace sim_detail {

inline Vec3 rpy_deviation(const Quat& q, const Quat& q0) {
  return rpy_from_quat(q * q0.conjugate());
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace sim_detail

/// Runs one scenario: plans the mission maneuver, predicts the base motion
/// it would cause on its own, synthesizes the balance-arm trajectory when
/// enabled, and executes one closed-loop simulation with every arm under
/// joint PD control. Deterministic: identical inputs give identical logs.
inline std::pair<SimLog, RunSummary> run_scenario(const Scenario& scenario) {
  scenario.validate();
  const RobotModel& model = scenario.model;
  const double dt = scenario.dt;
  const auto total_steps = detail::checked_step_count(scenario.t_end, dt);
  const int n = model.dof();
  const int mission = model.mission_arm();
  const int m_off = model.arm_offset(mission);
  const int m_dof = model.arm_dof(mission);
  const int balance = model.balance_arm();

  const VecX mission_start =
      scenario.initial_state.joint_angles.segment(m_off, m_dof);
  const JointTrajectory mission_traj =
      plan_ptp_via(mission_start, scenario.mission_vias, scenario.mission_target,
                   scenario.mission_duration, dt);

  const AttitudePrediction prediction =
      predict_base_motion(model, scenario.initial_state, mission_traj);
  const Quat q0 = scenario.initial_state.base_attitude.normalized();
  double predicted_max_deviation = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(prediction.attitudes.size()); ++k)
    predicted_max_deviation =
        std::max(predicted_max_deviation,
                 sim_detail::rpy_deviation(prediction.attitudes[k], q0)
                     .cwiseAbs()
                     .maxCoeff());

  BalanceSynthesis synthesis;
  if (scenario.balance_enabled)
    synthesis = synthesize_balance(model, scenario.initial_state, mission_traj);

  SimLog log;
  const Eigen::Index rows = total_steps + 1;
  log.t.resize(rows);
  log.rpy.resize(rows, 3);
  log.quat.resize(rows, 4);
  log.base_pos.resize(rows, 3);
  log.base_twist.resize(rows, 6);
  log.arm_angles.resize(model.arm_count());
  log.arm_rates.resize(model.arm_count());
  log.arm_torques.resize(model.arm_count());
  for (int i = 0; i < model.arm_count(); ++i) {
    log.arm_angles[i].resize(rows, model.arm_dof(i));
    log.arm_rates[i].resize(rows, model.arm_dof(i));
    log.arm_torques[i].resize(rows, model.arm_dof(i));
  }
  log.momentum.resize(rows, 6);
  log.cond_balance = VecX::Zero(rows);
  log.flags.assign(rows, 0u);
  log.arm_momentum_base.resize(rows, 3);
  log.model_hash = scenario.model_hash;
  log.scenario_hash = scenario.scenario_hash;
  log.dt = dt;
  log.balance_enabled = scenario.balance_enabled;

  // Reference at sample k for the full joint vector: mission arm tracks the
  // plan, the balance arm its synthesized trajectory when enabled; every
  // other joint holds its initial angle. Profiles hold their final sample.
  const VecX hold_angles = scenario.initial_state.joint_angles;
  const auto reference = [&](Eigen::Index k, VecX& q_des, VecX& qd_des) {
    q_des = hold_angles;
    qd_des.setZero(n);
    const Eigen::Index km = std::min<Eigen::Index>(k, mission_traj.sample_count() - 1);
    q_des.segment(m_off, m_dof) = mission_traj.positions.row(km).transpose();
    qd_des.segment(m_off, m_dof) = mission_traj.velocities.row(km).transpose();
    if (scenario.balance_enabled) {
      const Eigen::Index kb =
          std::min<Eigen::Index>(k, synthesis.trajectory.sample_count() - 1);
      const int b_off = model.arm_offset(balance);
      const int b_dof = model.arm_dof(balance);
      q_des.segment(b_off, b_dof) = synthesis.trajectory.positions.row(kb).transpose();
      qd_des.segment(b_off, b_dof) = synthesis.trajectory.velocities.row(kb).transpose();
    }
  };

  SystemState state = scenario.initial_state;
  VecX q_des(n), qd_des(n);
  for (Eigen::Index k = 0; k <= total_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    reference(k, q_des, qd_des);
    const VecX tau =
        pd_torques(scenario.gains, q_des, qd_des, state.joint_angles, state.joint_rates);

    const KinematicsCache cache = forward_kinematics(model, state);
    const MomentumMatrices mm = momentum_matrices(model, state, cache);

    log.t[k] = t;
    log.rpy.row(k) = rpy_from_quat(state.base_attitude).transpose();
    log.quat.row(k) << state.base_attitude.w(), state.base_attitude.x(),
        state.base_attitude.y(), state.base_attitude.z();
    log.base_pos.row(k) = state.base_position.transpose();
    log.base_twist.row(k) = state.base_twist.transpose();
    for (int i = 0; i < model.arm_count(); ++i) {
      const int off = model.arm_offset(i);
      const int dof = model.arm_dof(i);
      log.arm_angles[i].row(k) = state.joint_angles.segment(off, dof).transpose();
      log.arm_rates[i].row(k) = state.joint_rates.segment(off, dof).transpose();
      log.arm_torques[i].row(k) = tau.segment(off, dof).transpose();
    }
    log.momentum.row(k) = (mm.H0 * state.base_twist + mm.Hm * state.joint_rates).transpose();

    if (balance >= 0) {
      const Mat6X map = zero_momentum_map(mm);
      const Mat3 balance_block =
          map.block(3, model.arm_offset(balance), 3, model.arm_dof(balance));
      Eigen::JacobiSVD<Mat3> svd(balance_block);
      const Vec3 sigma = svd.singularValues();
      log.cond_balance[k] = sigma(2) > 0.0
                                ? sigma(0) / sigma(2)
                                : std::numeric_limits<double>::infinity();
    }
    if (scenario.balance_enabled) {
      const Eigen::Index kb =
          std::min<Eigen::Index>(k, synthesis.trajectory.sample_count() - 1);
      for (const Eigen::Index damped : synthesis.damped_samples)
        if (damped == kb) log.flags[k] |= kFlagBalanceDamped;
    }

    const LinkVelocities vel = link_velocities(model, state, cache);
    Vec3 arm_momentum = Vec3::Zero();
    for (int i = 0; i < model.arm_count(); ++i)
      for (int j = 0; j < model.arm_dof(i); ++j) {
        const LinkFrame& frame = cache.arms[i].links[j];
        const double m = model.arms[i].segments[j].link.mass;
        arm_momentum += frame.inertia_world * vel.links[i][j].second +
                        m * (frame.com - cache.base_com).cross(vel.links[i][j].first);
      }
    log.arm_momentum_base.row(k) = arm_momentum.transpose();

    if (k < total_steps) {
      try {
        state = step(model, state, tau, dt);
      } catch (const Error& e) {
        throw SimulationError(t, e.what());
      }
    }
  }

  RunSummary summary;
  Vec3 max_dev = Vec3::Zero();
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Quat q(log.quat(k, 0), log.quat(k, 1), log.quat(k, 2), log.quat(k, 3));
    const Vec3 dev = sim_detail::rpy_deviation(q, q0);
    max_dev = max_dev.cwiseMax(dev.cwiseAbs());
    if (k + 1 == rows) summary.final_rpy_deviation = dev;
    summary.max_linear_momentum =
        std::max(summary.max_linear_momentum, log.momentum.row(k).head<3>().norm());
    summary.max_angular_momentum =
        std::max(summary.max_angular_momentum, log.momentum.row(k).tail<3>().norm());
  }
  summary.max_rpy_deviation = max_dev;
  for (Eigen::Index k = 0; k < rows; ++k) {
    Vec3 torque;
    if (k == 0)
      torque = (log.arm_momentum_base.row(1) - log.arm_momentum_base.row(0)).transpose() / dt;
    else if (k + 1 == rows)
      torque =
          (log.arm_momentum_base.row(k) - log.arm_momentum_base.row(k - 1)).transpose() / dt;
    else
      torque = (log.arm_momentum_base.row(k + 1) - log.arm_momentum_base.row(k - 1))
                   .transpose() /
               (2.0 * dt);
    summary.max_reaction_torque = std::max(summary.max_reaction_torque, torque.norm());
  }
  summary.balance_ratio = predicted_max_deviation > 0.0
                              ? max_dev.maxCoeff() / predicted_max_deviation
                              : 0.0;
  return {std::move(log), summary};
}

inline std::string csv_string(const SimLog& log) {
  std::string out;
  out.reserve(static_cast<std::size_t>(log.rows()) * 512);
  out += "t,roll,pitch,yaw,qw,qx,qy,qz,x,y,z,v0x,v0y,v0z,w0x,w0y,w0z";
  for (std::size_t i = 0; i < log.arm_angles.size(); ++i) {
    const std::string arm = "arm" + std::to_string(i + 1);
    for (Eigen::Index j = 0; j < log.arm_angles[i].cols(); ++j)
      out += "," + arm + "_q" + std::to_string(j + 1);
    for (Eigen::Index j = 0; j < log.arm_angles[i].cols(); ++j)
      out += "," + arm + "_dq" + std::to_string(j + 1);
    for (Eigen::Index j = 0; j < log.arm_angles[i].cols(); ++j)
      out += "," + arm + "_tau" + std::to_string(j + 1);
  }
  out += ",Px,Py,Pz,Lx,Ly,Lz,cond_balance,flags\n";

  const auto append = [&out](double v) {
    out += ',';
    out += sim_detail::format_double(v);
  };
  for (Eigen::Index k = 0; k < log.rows(); ++k) {
    out += sim_detail::format_double(log.t[k]);
    for (int c = 0; c < 3; ++c) append(log.rpy(k, c));
    for (int c = 0; c < 4; ++c) append(log.quat(k, c));
    for (int c = 0; c < 3; ++c) append(log.base_pos(k, c));
    for (int c = 0; c < 6; ++c) append(log.base_twist(k, c));
    for (std::size_t i = 0; i < log.arm_angles.size(); ++i) {
      for (Eigen::Index j = 0; j < log.arm_angles[i].cols(); ++j)
        append(log.arm_angles[i](k, j));
      for (Eigen::Index j = 0; j < log.arm_rates[i].cols(); ++j)
        append(log.arm_rates[i](k, j));
      for (Eigen::Index j = 0; j < log.arm_torques[i].cols(); ++j)
        append(log.arm_torques[i](k, j));
    }
    for (int c = 0; c < 6; ++c) append(log.momentum(k, c));
    append(log.cond_balance[k]);
    out += ',';
    out += std::to_string(log.flags[k]);
    out += '\n';
  }
  return out;
}

inline std::string summary_csv_string(const RunSummary& summary, const SimLog& log) {
  using sim_detail::format_double;
  std::string out =
      "model_hash,scenario_hash,engine_version,dt,balance,"
      "max_roll_dev,max_pitch_dev,max_yaw_dev,"
      "final_roll_dev,final_pitch_dev,final_yaw_dev,"
      "max_linear_momentum,max_angular_momentum,max_reaction_torque,balance_ratio\n";
  out += log.model_hash + "," + log.scenario_hash + "," + log.engine_version + ",";
  out += format_double(log.dt);
  out += log.balance_enabled ? ",1" : ",0";
  for (int c = 0; c < 3; ++c) out += "," + format_double(summary.max_rpy_deviation[c]);
  for (int c = 0; c < 3; ++c) out += "," + format_double(summary.final_rpy_deviation[c]);
  out += "," + format_double(summary.max_linear_momentum);
  out += "," + format_double(summary.max_angular_momentum);
  out += "," + format_double(summary.max_reaction_torque);
  out += "," + format_double(summary.balance_ratio);
  out += "\n";
  return out;
}

inline std::string prediction_csv_string(const AttitudePrediction& pred) {
  using sim_detail::format_double;
  std::string out = "t,roll,pitch,yaw,qw,qx,qy,qz,x,y,z,w0x,w0y,w0z,dw0x,dw0y,dw0z\n";
  for (std::size_t k = 0; k < pred.times.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out += format_double(pred.times[k]);
    for (int c = 0; c < 3; ++c) out += "," + format_double(pred.rpy(row, c));
    const Quat& q = pred.attitudes[k];
    out += "," + format_double(q.w()) + "," + format_double(q.x()) + "," +
           format_double(q.y()) + "," + format_double(q.z());
    for (int c = 0; c < 3; ++c) out += "," + format_double(pred.base_positions(row, c));
    for (int c = 0; c < 3; ++c) out += "," + format_double(pred.angular_velocity(row, c));
    for (int c = 0; c < 3; ++c)
      out += "," + format_double(pred.angular_acceleration(row, c));
    out += "\n";
  }
  return out;
}

inline void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline void emit_csv(const SimLog& log, const std::filesystem::path& path) {
  write_text_file(csv_string(log), path);
}

}  // namespace freeflyer
