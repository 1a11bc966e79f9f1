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
#include <cstdint>
#include <cstring>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace freeflyer {

inline constexpr char kEngineVersion[] = "0.1.0";

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Quat = Eigen::Quaterniond;

/// Cross-product matrix: skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -a.z(),  a.y(),
        a.z(),    0.0, -a.x(),
       -a.y(),  a.x(),    0.0;
  // clang-format on
  return s;
}

/// Unit quaternion rotating by |w| radians about w/|w|.
inline Quat quat_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    q.normalize();
    return q;
  }
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

/// Rotation vector of a unit quaternion; inverse of quat_exp.
inline Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vec_norm = q.vec().norm();
  if (vec_norm < 1e-12) return 2.0 * q.vec();
  return (2.0 * std::atan2(vec_norm, q.w()) / vec_norm) * q.vec();
}

/// Roll-pitch-yaw (about world x, then y, then z): R = Rz(yaw) Ry(pitch) Rx(roll).
inline Vec3 rpy_from_quat(const Quat& q) {
  const Mat3 r = q.normalized().toRotationMatrix();
  const double pitch_sin = std::clamp(-r(2, 0), -1.0, 1.0);
  Vec3 rpy;
  rpy.x() = std::atan2(r(2, 1), r(2, 2));
  rpy.y() = std::asin(pitch_sin);
  rpy.z() = std::atan2(r(1, 0), r(0, 0));
  return rpy;
}

inline Quat quat_from_rpy(const Vec3& rpy) {
  return Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
              Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
              Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
}

/// FNV-1a over raw bytes; stamps caches against the state they were built from.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t seed = 1469598103934665603ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_doubles(const double* data, std::size_t count,
                                   std::uint64_t seed = 1469598103934665603ull) {
  return fnv1a(data, count * sizeof(double), seed);
}

}  // namespace freeflyer
