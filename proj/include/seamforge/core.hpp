/*
 * Copyright (C) 2026 The Seamforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "seamforge/error.hpp"

namespace seamforge {

/// Millimetres, everywhere.
using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;

inline bool is_finite(const Point3& p) { return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z()); }

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Rotation + translation. Construction validates orthonormality and
/// det = +1; a matrix that is only approximately orthonormal (within the
/// caller's tolerance) is snapped to the nearest rotation.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}

  RigidTransform(const Matrix3& rotation, const Vector3& translation, double tolerance = kTolerance)
      : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw Error(ErrorCode::InvalidTransform, "non-finite transform entries");
    }
    const double ortho_err = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
    const double det_err = std::abs(rotation.determinant() - 1.0);
    if (ortho_err > tolerance || det_err > tolerance) {
      throw Error(ErrorCode::InvalidTransform,
                  "rotation is not orthonormal (max |R^T R - I| = " + std::to_string(ortho_err) +
                      ", |det - 1| = " + std::to_string(det_err) + ")");
    }
    if (ortho_err > 1e-12) {
      Eigen::JacobiSVD<Matrix3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      rotation_ = svd.matrixU() * svd.matrixV().transpose();
    }
  }

  static RigidTransform from_matrix(const Matrix4& m, double tolerance = kTolerance) {
    const Eigen::RowVector4d bottom = m.row(3);
    if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > tolerance) {
      throw Error(ErrorCode::InvalidTransform, "bottom row of homogeneous matrix must be [0 0 0 1]");
    }
    return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(), tolerance);
  }

  static RigidTransform translation(const Vector3& t) { return RigidTransform(Matrix3::Identity(), t); }

  static RigidTransform rotation_about(const Vector3& axis, double angle_deg, const Vector3& t = Vector3::Zero()) {
    return RigidTransform(Eigen::AngleAxisd(deg2rad(angle_deg), axis.normalized()).toRotationMatrix(), t);
  }

  const Matrix3& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Vector3 apply_direction(const Vector3& v) const { return rotation_ * v; }

  Matrix4 matrix() const {
    Matrix4 m = Matrix4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

 private:
  Matrix3 rotation_;
  Vector3 translation_;
};

inline Point3 apply_transform(const RigidTransform& t, const Point3& p) { return t.apply(p); }

/// compose(a, b) applies b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation(), 1e-6);
}

inline RigidTransform invert(const RigidTransform& t) {
  const Matrix3 rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()), 1e-6);
}

// Orientation ---------------------------------------------------------------

/// Fixed-axis X/Y/Z angles in degrees: R = Rz(r) * Ry(p) * Rx(w).
/// This is the teach-pendant convention used by Fanuc and UR controllers.
struct OrientationWPR {
  double w = 0.0;
  double p = 0.0;
  double r = 0.0;
};

struct WprDecomposition {
  OrientationWPR angles;
  bool gimbal_lock = false;
};

namespace detail {
inline double canonical_angle(double deg) {
  // (-180, 180]
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}
}  // namespace detail

inline Matrix3 wpr_to_rotation(const OrientationWPR& o) {
  return (Eigen::AngleAxisd(deg2rad(o.r), Vector3::UnitZ()) * Eigen::AngleAxisd(deg2rad(o.p), Vector3::UnitY()) *
          Eigen::AngleAxisd(deg2rad(o.w), Vector3::UnitX()))
      .toRotationMatrix();
}

/// At gimbal lock (|cos p| < 1e-9) only w - r is observable; r is pinned to 0
/// and the flag is raised.
inline WprDecomposition rotation_to_wpr(const Matrix3& m) {
  WprDecomposition out;
  const double cos_p = std::hypot(m(0, 0), m(1, 0));
  if (cos_p < 1e-9) {
    out.gimbal_lock = true;
    const double p = m(2, 0) < 0.0 ? 90.0 : -90.0;
    const double w = p > 0.0 ? std::atan2(m(0, 1), m(1, 1)) : std::atan2(-m(0, 1), m(1, 1));
    out.angles = {detail::canonical_angle(rad2deg(w)), p, 0.0};
    return out;
  }
  const double w = std::atan2(m(2, 1), m(2, 2));
  const double p = std::atan2(-m(2, 0), cos_p);
  const double r = std::atan2(m(1, 0), m(0, 0));
  out.angles = {detail::canonical_angle(rad2deg(w)), detail::canonical_angle(rad2deg(p)),
                detail::canonical_angle(rad2deg(r))};
  return out;
}

// Point clouds --------------------------------------------------------------

struct Organization {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Ordered point set. When organized, point (row, col) sits at index
/// row * cols + col and `valid` marks which pixels carry a measurement;
/// invalid entries hold a zero position.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<Organization> organization;
  std::vector<std::uint8_t> valid;  // empty means every point is valid
  std::vector<Vector3> normals;     // empty or one per point
  std::vector<double> curvatures;   // empty or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool is_organized() const { return organization.has_value(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_curvatures() const { return !curvatures.empty(); }
  bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }

  std::size_t valid_count() const {
    if (valid.empty()) return points.size();
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }

  /// Throws InvalidArgument if a structural invariant is broken.
  void check() const {
    if (organization && organization->rows * organization->cols != points.size()) {
      throw Error(ErrorCode::DimensionMismatch, "organized rows*cols does not match point count");
    }
    if (!valid.empty() && valid.size() != points.size()) {
      throw Error(ErrorCode::InvalidArgument, "validity mask length differs from point count");
    }
    if (!normals.empty() && normals.size() != points.size()) {
      throw Error(ErrorCode::InvalidArgument, "normal count differs from point count");
    }
    if (!curvatures.empty() && curvatures.size() != points.size()) {
      throw Error(ErrorCode::InvalidArgument, "curvature count differs from point count");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (is_valid(i) && !is_finite(points[i])) {
        throw Error(ErrorCode::InvalidArgument, "non-finite coordinate at point " + std::to_string(i));
      }
    }
    for (const auto& n : normals) {
      if (std::abs(n.norm() - 1.0) > 1e-6) throw Error(ErrorCode::InvalidArgument, "normal is not unit length");
    }
  }

  /// Organized points only; NaN coordinates become invalid entries.
  static PointCloud organized(std::size_t rows, std::size_t cols, std::vector<Point3> pts) {
    PointCloud cloud;
    if (rows * cols != pts.size()) throw Error(ErrorCode::DimensionMismatch, "rows*cols does not match point count");
    cloud.organization = Organization{rows, cols};
    cloud.valid.assign(pts.size(), 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!is_finite(pts[i])) {
        pts[i] = Point3::Zero();
        cloud.valid[i] = 0;
      }
    }
    cloud.points = std::move(pts);
    return cloud;
  }

  /// Positions of the valid points only, input order preserved.
  std::vector<Point3> valid_points() const {
    std::vector<Point3> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (is_valid(i)) out.push_back(points[i]);
    }
    return out;
  }
};

/// Applies the transform to every point and normal; organization is kept.
inline PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out = cloud;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.is_valid(i)) out.points[i] = t.apply(out.points[i]);
  }
  for (auto& n : out.normals) n = t.apply_direction(n);
  return out;
}

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;

  void check() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
    if (!(cx >= 0.0 && cx < static_cast<double>(width)) || !(cy >= 0.0 && cy < static_cast<double>(height))) {
      throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
    }
  }
};

}  // namespace seamforge
