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

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace freeflyer;
using fftest::fixture;

namespace {

SystemState bundled_initial(const RobotModel& model) {
  SystemState s = SystemState::rest(model);
  s.joint_angles << 0.0, 0.7, -1.4, 0.0, 0.7, -1.4;
  return s;
}

}  // namespace

TEST_CASE("stationary mission trajectory predicts a still base") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const VecX hold = state.joint_angles.head(3);
  const JointTrajectory traj = plan_ptp(hold, hold, 1.0, 1e-3);
  const AttitudePrediction pred = predict_base_motion(model, state, traj);
  CHECK(pred.angular_velocity.cwiseAbs().maxCoeff() == 0.0);
  for (const Quat& q : pred.attitudes)
    CHECK((q.coeffs() - state.base_attitude.coeffs()).norm() == 0.0);
}

TEST_CASE("prediction starts at the initial attitude") {
  const RobotModel model = table1_model();
  SystemState state = bundled_initial(model);
  state.base_attitude = quat_from_rpy(Vec3(0.05, -0.03, 0.2));
  const JointTrajectory traj =
      plan_ptp(state.joint_angles.head(3), Vec3(0.9, 0.2, -0.4), 2.0, 1e-3);
  const AttitudePrediction pred = predict_base_motion(model, state, traj);
  CHECK((pred.attitudes.front().coeffs() - state.base_attitude.coeffs()).norm() == 0.0);
}

TEST_CASE("angular-velocity stream re-integrates to the stored attitudes") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const JointTrajectory traj =
      plan_ptp(state.joint_angles.head(3), Vec3(0.9, 0.2, -0.4), 2.0, 1e-3);
  const AttitudePrediction pred = predict_base_motion(model, state, traj);

  Quat q = pred.attitudes.front();
  for (std::size_t k = 0; k + 1 < pred.attitudes.size(); ++k) {
    const Vec3 w0 = pred.angular_velocity.row(static_cast<Eigen::Index>(k)).transpose();
    const Vec3 w1 = pred.angular_velocity.row(static_cast<Eigen::Index>(k + 1)).transpose();
    q = (quat_exp(0.5 * pred.dt * (w0 + w1)) * q).normalized();
    const double angle = quat_log(q * pred.attitudes[k + 1].conjugate()).norm();
    CHECK(angle < 1e-9);
  }
}

TEST_CASE("prediction tracks a stiff closed-loop simulation within 1e-3 rad") {
  Scenario scn = load_scenario(fixture("table1_nobalance.scenario"));
  const int mission = scn.model.mission_arm();
  const JointTrajectory traj = plan_ptp(
      scn.initial_state.joint_angles.segment(scn.model.arm_offset(mission), 3),
      scn.mission_target, scn.mission_duration, scn.dt);
  const AttitudePrediction pred =
      predict_base_motion(scn.model, scn.initial_state, traj);
  const auto [log, summary] = run_scenario(scn);

  double worst = 0.0;
  for (Eigen::Index k = 0; k < pred.rpy.rows(); ++k) {
    const Quat sim_q(log.quat(k, 0), log.quat(k, 1), log.quat(k, 2), log.quat(k, 3));
    worst = std::max(worst,
                     quat_log(sim_q * pred.attitudes[static_cast<std::size_t>(k)]
                                          .conjugate())
                         .norm());
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("equal endpoints, different paths, different final attitudes") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const VecX start = state.joint_angles.head(3);
  const Vec3 goal(0.9, 0.2, -0.4);
  const JointTrajectory direct = plan_ptp(start, goal, 5.0, 1e-3);
  const JointTrajectory detour =
      plan_ptp_via(start, {Vec3(-0.8, 1.1, -2.0)}, goal, 5.0, 1e-3);

  const AttitudePrediction a = predict_base_motion(model, state, direct);
  const AttitudePrediction b = predict_base_motion(model, state, detour);
  const double angle =
      quat_log(a.attitudes.back() * b.attitudes.back().conjugate()).norm();
  CHECK(angle > 1e-3);
}

TEST_CASE("stationary mission keeps the balance trajectory constant") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const VecX hold = state.joint_angles.head(3);
  const JointTrajectory traj = plan_ptp(hold, hold, 1.0, 1e-3);
  const BalanceSynthesis synth = synthesize_balance(model, state, traj);
  CHECK(synth.trajectory.velocities.cwiseAbs().maxCoeff() == 0.0);
  CHECK((synth.trajectory.positions.rowwise() -
         state.joint_angles.tail(3).transpose())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("synthesized rates null the base angular velocity at every sample") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const JointTrajectory traj =
      plan_ptp(state.joint_angles.head(3), Vec3(0.9, 0.2, -0.4), 2.0, 1e-3);
  const BalanceSynthesis synth = synthesize_balance(model, state, traj);
  REQUIRE(synth.trajectory.sample_count() == traj.sample_count());

  double worst = 0.0;
  for (Eigen::Index k = 0; k < traj.sample_count(); ++k) {
    SystemState s = SystemState::rest(model);
    s.base_position = synth.base_positions.row(k).transpose();
    s.base_attitude = synth.base_attitudes[static_cast<std::size_t>(k)];
    s.joint_angles.head(3) = traj.positions.row(k).transpose();
    s.joint_angles.tail(3) = synth.trajectory.positions.row(k).transpose();
    VecX rates(6);
    rates.head(3) = traj.velocities.row(k).transpose();
    rates.tail(3) = synth.trajectory.velocities.row(k).transpose();
    const KinematicsCache cache = forward_kinematics(model, s);
    const MomentumMatrices mm = momentum_matrices(model, s, cache);
    worst = std::max(worst, base_twist_from_rates(mm, rates).tail<3>().norm());
  }
  CHECK(worst < 1e-9);
  CHECK(synth.damped_samples.empty());
  CHECK(synth.condition_numbers.maxCoeff() < kBalanceConditionLimit);
}

TEST_CASE("synthesized trajectory is rest-to-rest with consistent derivatives") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);
  const JointTrajectory traj =
      plan_ptp(state.joint_angles.head(3), Vec3(0.9, 0.2, -0.4), 2.0, 1e-3);
  const BalanceSynthesis synth = synthesize_balance(model, state, traj);
  const JointTrajectory& b = synth.trajectory;
  CHECK(b.velocities.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.velocities.row(b.sample_count() - 1).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index k = 1; k + 1 < b.sample_count(); k += 50) {
    const auto fd = (b.positions.row(k + 1) - b.positions.row(k - 1)) / (2.0 * b.dt);
    CHECK((fd - b.velocities.row(k)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("degenerate balance arm triggers the damped solve and is flagged") {
  // Balance arm with three parallel z joints cannot produce all three
  // angular directions; the solve must fall back to damped least squares.
  RobotModel m;
  m.base.mass = 100.0;
  m.base.inertia = Vec3(10.0, 10.0, 10.0).asDiagonal();
  m.base.arm_mounts = {Vec3(0.0, 0.5, 0.0), Vec3(0.0, -0.5, 0.0)};
  for (int i = 0; i < 2; ++i) {
    ArmChain arm;
    arm.role = (i == 0) ? ArmRole::kMission : ArmRole::kBalance;
    for (int j = 0; j < 3; ++j) {
      ArmSegment seg;
      if (i == 0)
        seg.joint.axis = (j == 0) ? Vec3::UnitZ() : Vec3::UnitY();
      else
        seg.joint.axis = Vec3::UnitZ();
      seg.joint.mount_offset = (j == 0) ? m.base.arm_mounts[i] : Vec3(0.4, 0.0, 0.0);
      seg.link.mass = 3.0;
      seg.link.length = 0.4;
      seg.link.com_offset = Vec3(0.2, 0.0, 0.0);
      seg.link.inertia = Vec3(0.003, 0.05, 0.05).asDiagonal();
      arm.segments.push_back(seg);
    }
    m.arms.push_back(std::move(arm));
  }
  m.validate();

  SystemState state = SystemState::rest(m);
  state.joint_angles << 0.0, 0.5, -1.0, 0.3, 0.4, -0.2;
  const JointTrajectory traj =
      plan_ptp(state.joint_angles.head(3), Vec3(0.6, 0.1, -0.5), 1.0, 1e-3);
  const BalanceSynthesis synth = synthesize_balance(m, state, traj);
  CHECK_FALSE(synth.damped_samples.empty());
  CHECK(synth.condition_numbers.maxCoeff() > kBalanceConditionLimit);
}

TEST_CASE("synthesis preconditions") {
  const RobotModel model = table1_model();
  const SystemState state = bundled_initial(model);

  SECTION("trajectory must start at the current mission angles") {
    const JointTrajectory traj = plan_ptp(Vec3(1.0, 1.0, 1.0), Vec3(0.0, 0.0, 0.0), 1.0, 1e-3);
    CHECK_THROWS_AS(synthesize_balance(model, state, traj), ValidationError);
    CHECK_THROWS_AS(predict_base_motion(model, state, traj), ValidationError);
  }
  SECTION("model must have a balance arm") {
    RobotModel solo = model;
    solo.arms[1].role = ArmRole::kPassive;
    const JointTrajectory traj =
        plan_ptp(state.joint_angles.head(3), Vec3(0.9, 0.2, -0.4), 1.0, 1e-3);
    CHECK_THROWS_AS(synthesize_balance(solo, state, traj), ValidationError);
  }
  SECTION("trajectory joint count must match the mission arm") {
    const JointTrajectory traj = plan_ptp(VecX::Zero(2), VecX::Ones(2), 1.0, 1e-3);
    CHECK_THROWS_AS(predict_base_motion(model, state, traj), DimensionMismatch);
  }
}
