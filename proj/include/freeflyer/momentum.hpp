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

#include <limits>

#include <Eigen/SVD>

#include "freeflyer/kinematics.hpp"

namespace freeflyer {

/// Factorization of the total momentum: [P; L] = H0 [V0; Omega0] + Hm qdot.
/// P is the linear momentum; L the angular momentum about the world origin.
/// H0 is the locked-system 6x6 factor (top-left block = total mass * I,
/// off-diagonal blocks are mass-weighted cross operators), Hm the 6xN joint
/// factor whose columns are per-joint momentum contributions.
struct MomentumMatrices {
  Mat6 H0;
  Mat6X Hm;
  std::uint64_t stamp = 0;
};

inline MomentumMatrices momentum_matrices(const RobotModel& model,
                                          const SystemState& state,
                                          const KinematicsCache& cache) {
  detail::require_fresh(cache, state);
  const int n = model.dof();
  const double total_mass = cache.total_mass;
  const Vec3 base_com = cache.base_com;

  MomentumMatrices mm;
  mm.H0.setZero();
  mm.H0.topLeftCorner<3, 3>() = total_mass * Mat3::Identity();
  mm.H0.topRightCorner<3, 3>() = -total_mass * skew(cache.system_com - base_com);
  mm.H0.bottomLeftCorner<3, 3>() = total_mass * skew(cache.system_com);
  Mat3 locked = cache.base_inertia_world;  // base body: r_b == base_com
  for (int i = 0; i < model.arm_count(); ++i) {
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      const double m = model.arms[i].segments[j].link.mass;
      locked += frame.inertia_world - m * skew(frame.com) * skew(frame.com - base_com);
    }
  }
  mm.H0.bottomRightCorner<3, 3>() = locked;

  mm.Hm = Mat6X::Zero(6, n);
  const LinkJacobians jac = link_jacobians(model, state, cache);
  for (int i = 0; i < model.arm_count(); ++i) {
    for (int j = 0; j < model.arm_dof(i); ++j) {
      const LinkFrame& frame = cache.arms[i].links[j];
      const double m = model.arms[i].segments[j].link.mass;
      mm.Hm.topRows<3>() += m * jac.jt[i][j];
      mm.Hm.bottomRows<3>() +=
          frame.inertia_world * jac.jr[i][j] + m * skew(frame.com) * jac.jt[i][j];
    }
  }
  mm.stamp = cache.stamp;
  return mm;
}

/// Total momentum [P; L] at the state the matrices were built from.
inline Vec6 total_momentum(const MomentumMatrices& mm, const SystemState& state) {
  if (mm.stamp != state_hash(state))
    throw StaleCache("momentum matrices were built from a different state");
  return mm.H0 * state.base_twist + mm.Hm * state.joint_rates;
}

namespace detail {

inline Eigen::FullPivLU<Mat6> h0_decomposition(const MomentumMatrices& mm) {
  Eigen::FullPivLU<Mat6> lu(mm.H0);
  if (!lu.isInvertible())
    throw SingularH0("locked-system inertia H0 is singular");
  return lu;
}

}  // namespace detail

/// Base twist induced by joint rates under zero total momentum:
/// [V0; Omega0] = -H0^-1 Hm qdot.
inline Vec6 base_twist_from_rates(const MomentumMatrices& mm, const VecX& rates) {
  if (rates.size() != mm.Hm.cols())
    throw DimensionMismatch("joint-rate vector does not match Hm");
  return -detail::h0_decomposition(mm).solve(mm.Hm * rates);
}

/// Full zero-momentum map S = -H0^-1 Hm (6xN): qdot -> base twist.
inline Mat6X zero_momentum_map(const MomentumMatrices& mm) {
  return -detail::h0_decomposition(mm).solve(mm.Hm);
}

inline constexpr double kConditionLimit = 1e12;
inline constexpr double kDampingScale = 1e-6;

/// Dynamic coupling factors of one arm under zero total momentum.
/// M maps that arm's joint rates to the inertial end-effector twist
/// (generalized Jacobian); N maps a desired end-effector twist back to the
/// base twist, with a damped pseudo-inverse of M inside.
struct CouplingFactors {
  int arm = 0;
  Mat6X M;       // 6 x arm DOF
  Mat6 N;        // 6 x 6
  double condition_number = 0.0;  // of M
  double damping = 0.0;           // lambda used in the pseudo-inverse
};

inline CouplingFactors coupling_factors(const RobotModel& model, const SystemState& state,
                                        const KinematicsCache& cache,
                                        const MomentumMatrices& mm, int arm) {
  detail::require_fresh(cache, state);
  if (mm.stamp != cache.stamp)
    throw StaleCache("momentum matrices were built from a different state");
  if (arm < 0 || arm >= model.arm_count())
    throw DimensionMismatch("arm index out of range");

  const int offset = model.arm_offset(arm);
  const int n_arm = model.arm_dof(arm);
  const Mat6X jac_full = end_effector_jacobian(model, state, cache, arm);
  const Mat6X jac_arm = jac_full.middleCols(offset, n_arm);
  const Mat6X map_arm = zero_momentum_map(mm).middleCols(offset, n_arm);

  // Transport of the base twist to the end-effector point.
  Mat6 transport = Mat6::Identity();
  transport.topRightCorner<3, 3>() = -skew(cache.arms[arm].ee_position - cache.base_com);

  CouplingFactors cf;
  cf.arm = arm;
  cf.M = jac_arm + transport * map_arm;

  Eigen::JacobiSVD<MatX> svd(cf.M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX sigma = svd.singularValues();
  const double sigma_max = sigma(0);
  const double sigma_min = sigma(sigma.size() - 1);
  cf.condition_number = sigma_min > 0.0 ? sigma_max / sigma_min
                                        : std::numeric_limits<double>::infinity();
  if (cf.condition_number > kConditionLimit)
    throw IllConditioned("coupling factor M is rank deficient at this configuration",
                         cf.condition_number);

  cf.damping = kDampingScale * sigma_max;
  VecX inv_sigma(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    inv_sigma(k) = sigma(k) / (sigma(k) * sigma(k) + cf.damping * cf.damping);
  const MatX pinv = svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
  cf.N = map_arm * pinv;
  return cf;
}

/// Static estimate of the base wrench produced by an end-effector wrench,
/// F_B = N^-T F_e, via a damped least-squares solve of N^T F_B = F_e.
/// An impact-budget figure, not a contact model.
inline Vec6 base_force_from_ee_force(const CouplingFactors& cf, const Vec6& ee_wrench) {
  Eigen::JacobiSVD<Mat6> svd(cf.N.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec6 sigma = svd.singularValues();
  const double sigma_max = sigma(0);
  if (!(sigma_max > 0.0))
    throw IllConditioned("coupling factor N vanishes; no force path to the base",
                         std::numeric_limits<double>::infinity());
  const double damping = kDampingScale * sigma_max;
  Vec6 inv_sigma;
  for (int k = 0; k < 6; ++k)
    inv_sigma(k) = sigma(k) / (sigma(k) * sigma(k) + damping * damping);
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose() * ee_wrench;
}

}  // namespace freeflyer
