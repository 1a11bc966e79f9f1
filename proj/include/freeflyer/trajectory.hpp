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

#include <cmath>
#include <vector>

#include "freeflyer/errors.hpp"
#include "freeflyer/types.hpp"

namespace freeflyer {

/// Sampled joint-space trajectory for one arm: positions, velocities and
/// accelerations on a uniform time grid (row k = sample at times[k]).
struct JointTrajectory {
  double dt = 0.0;
  std::vector<double> times;
  MatX positions;
  MatX velocities;
  MatX accelerations;

  Eigen::Index sample_count() const { return positions.rows(); }
  Eigen::Index joint_count() const { return positions.cols(); }

  /// Grid index for time t, clamped to the final sample (hold at the goal).
  Eigen::Index index_at(double t) const {
    const auto k = static_cast<Eigen::Index>(std::llround(t / dt));
    return std::min(std::max<Eigen::Index>(k, 0), sample_count() - 1);
  }
};

namespace detail {

inline Eigen::Index checked_step_count(double duration, double dt) {
  if (!(duration > 0.0)) throw BadDuration("duration must be > 0");
  if (!(dt > 0.0)) throw BadDuration("dt must be > 0");
  const auto steps = static_cast<Eigen::Index>(std::llround(duration / dt));
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - duration) >
                       1e-9 * std::max(1.0, duration))
    throw BadDuration("dt must divide the duration");
  return steps;
}

// Rest-to-rest quintic between rows [first, first+steps] of the output.
inline void fill_quintic(const VecX& start, const VecX& goal, double dt,
                         Eigen::Index first, Eigen::Index steps, JointTrajectory& out) {
  const double duration = static_cast<double>(steps) * dt;
  const VecX delta = goal - start;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(steps);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double p = s3 * (10.0 - 15.0 * s + 6.0 * s2);
    const double v = 30.0 * s2 * (1.0 - s) * (1.0 - s) / duration;
    const double a = (60.0 * s - 180.0 * s2 + 120.0 * s3) / (duration * duration);
    out.positions.row(first + k) = (start + p * delta).transpose();
    out.velocities.row(first + k) = (v * delta).transpose();
    out.accelerations.row(first + k) = (a * delta).transpose();
  }
}

}  // namespace detail

/// Rest-to-rest point-to-point trajectory: per-joint quintic with zero
/// boundary velocity and acceleration, sampled every dt.
inline JointTrajectory plan_ptp(const VecX& start, const VecX& goal, double duration,
                                double dt) {
  if (start.size() != goal.size())
    throw DimensionMismatch("start and goal must have the same size");
  const Eigen::Index steps = detail::checked_step_count(duration, dt);

  JointTrajectory traj;
  traj.dt = dt;
  traj.times.resize(steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) traj.times[k] = static_cast<double>(k) * dt;
  traj.positions.resize(steps + 1, start.size());
  traj.velocities.resize(steps + 1, start.size());
  traj.accelerations.resize(steps + 1, start.size());
  detail::fill_quintic(start, goal, dt, 0, steps, traj);
  return traj;
}

/// Point-to-point trajectory through intermediate waypoints. The total
/// duration is split into near-equal whole-sample segments, each a
/// rest-to-rest quintic, so the arm pauses momentarily at each waypoint.
inline JointTrajectory plan_ptp_via(const VecX& start, const std::vector<VecX>& vias,
                                    const VecX& goal, double duration, double dt) {
  if (vias.empty()) return plan_ptp(start, goal, duration, dt);
  for (const VecX& v : vias)
    if (v.size() != start.size())
      throw DimensionMismatch("waypoint size does not match the joint count");
  if (start.size() != goal.size())
    throw DimensionMismatch("start and goal must have the same size");
  const Eigen::Index steps = detail::checked_step_count(duration, dt);
  const auto segments = static_cast<Eigen::Index>(vias.size()) + 1;

  JointTrajectory traj;
  traj.dt = dt;
  traj.times.resize(steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) traj.times[k] = static_cast<double>(k) * dt;
  traj.positions.resize(steps + 1, start.size());
  traj.velocities.resize(steps + 1, start.size());
  traj.accelerations.resize(steps + 1, start.size());

  Eigen::Index first = 0;
  VecX from = start;
  for (Eigen::Index s = 0; s < segments; ++s) {
    const Eigen::Index last = (s + 1 == segments)
                                  ? steps
                                  : static_cast<Eigen::Index>(std::llround(
                                        static_cast<double>(steps) *
                                        static_cast<double>(s + 1) /
                                        static_cast<double>(segments)));
    if (last <= first) throw BadDuration("segment too short for the sample step");
    const VecX to = (s + 1 == segments) ? goal : vias[static_cast<std::size_t>(s)];
    detail::fill_quintic(from, to, dt, first, last - first, traj);
    from = to;
    first = last;
  }
  return traj;
}

/// Per-joint PD gains.
struct PDGains {
  VecX kp;
  VecX kd;

  void validate(Eigen::Index dof) const {
    if (kp.size() != dof || kd.size() != dof)
      throw DimensionMismatch("gain vectors must match the joint count");
    if ((kp.array() < 0.0).any() || (kd.array() < 0.0).any())
      throw ValidationError("control", "kp and kd must be >= 0");
  }
};

/// tau = kp o (q_des - q) + kd o (qd_des - qd).
inline VecX pd_torques(const PDGains& gains, const VecX& q_des, const VecX& qd_des,
                       const VecX& q, const VecX& qd) {
  if (q_des.size() != q.size() || qd_des.size() != qd.size() || q.size() != qd.size() ||
      gains.kp.size() != q.size() || gains.kd.size() != q.size())
    throw DimensionMismatch("PD inputs must all match the joint count");
  return gains.kp.cwiseProduct(q_des - q) + gains.kd.cwiseProduct(qd_des - qd);
}

}  // namespace freeflyer
