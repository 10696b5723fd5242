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

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "seamforge/core.hpp"
#include "seamforge/edges.hpp"
#include "seamforge/features.hpp"
#include "seamforge/kdtree.hpp"

namespace seamforge {

using Point2 = Eigen::Vector2d;

enum class SeamKind { Linear, Curved };

inline std::string_view to_string(SeamKind k) { return k == SeamKind::Linear ? "linear" : "curved"; }

/// A x + B y + C z + D = 0 with a unit normal (A, B, C).
struct Plane {
  Vector3 normal = Vector3::UnitZ();
  double d = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + d; }
  Point3 project(const Point3& p) const { return p - signed_distance(p) * normal; }
};

/// Total-least-squares plane through the barycenter. The normal sign is fixed
/// so that C >= 0, then B >= 0, then A >= 0.
inline Plane fit_plane(std::span<const Point3> points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "plane fit needs at least 3 points");
  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(covariance_of(points));
  const Vector3 ev = solver.eigenvalues();
  if (!(ev[1] > 1e-12 * ev[2])) throw Error(ErrorCode::DegenerateGeometry, "points are collinear");
  Vector3 n = solver.eigenvectors().col(0).normalized();
  constexpr double eps = 1e-12;
  const bool flip = n.z() < -eps || (std::abs(n.z()) <= eps && (n.y() < -eps || (std::abs(n.y()) <= eps && n.x() < 0.0)));
  if (flip) n = -n;
  return {n, -n.dot(centroid)};
}

struct PlaneFrame {
  RigidTransform plane_from_input;  // maps projected points to z = 0
  std::vector<Point2> coords;
};

namespace detail {
inline Vector3 any_orthogonal(const Vector3& n) {
  const Vector3 helper = std::abs(n.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  return n.cross(helper).normalized();
}
inline Vector3 canonical_sign(Vector3 v) {
  int i = 0;
  v.cwiseAbs().maxCoeff(&i);
  return v[i] < 0.0 ? Vector3(-v) : v;
}
}  // namespace detail

/// Projects the points onto the plane and expresses them in a frame whose z
/// axis is the plane normal and whose x axis follows the largest in-plane
/// variance. The frame origin is the foot of the input origin on the plane.
inline PlaneFrame to_plane_frame(std::span<const Point3> points, const Plane& plane) {
  const Vector3 z = plane.normal.normalized();
  std::vector<Point3> projected;
  projected.reserve(points.size());
  Point3 mean = Point3::Zero();
  for (const auto& p : points) {
    projected.push_back(plane.project(p));
    mean += projected.back();
  }
  Vector3 x = detail::any_orthogonal(z);
  if (!projected.empty()) {
    mean /= static_cast<double>(projected.size());
    Matrix3 cov = Matrix3::Zero();
    for (const auto& p : projected) cov += (p - mean) * (p - mean).transpose();
    // Restrict to the plane so the principal direction is in-plane.
    const Matrix3 proj = Matrix3::Identity() - z * z.transpose();
    cov = proj * cov * proj;
    Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
    if (solver.eigenvalues()[2] > 0.0) x = (proj * solver.eigenvectors().col(2)).normalized();
  }
  x = detail::canonical_sign(x);
  const Vector3 y = z.cross(x);
  Matrix3 rot;
  rot.row(0) = x.transpose();
  rot.row(1) = y.transpose();
  rot.row(2) = z.transpose();
  const Point3 origin = -plane.d * z;
  PlaneFrame frame{RigidTransform(rot, -(rot * origin), 1e-9), {}};
  frame.coords.reserve(projected.size());
  for (const auto& p : projected) {
    const Point3 q = frame.plane_from_input.apply(p);
    frame.coords.emplace_back(q.x(), q.y());
  }
  return frame;
}

struct FitTolerances {
  double line_tol = 0.5;   // mm RMS
  double curve_tol = 0.8;  // mm RMS
};

/// In-plane seam model: a line, or y(x) as a polynomial of degree 2 or 3.
struct InplaneModel {
  SeamKind kind = SeamKind::Linear;
  Point2 line_point = Point2::Zero();
  Point2 line_dir = Point2::UnitX();
  std::vector<double> coefficients;  // ascending powers of x
  double rms = 0.0;
  double param_min = 0.0;  // t along the line, or x for polynomials
  double param_max = 0.0;

  Point2 at(double s) const {
    if (kind == SeamKind::Linear) return line_point + s * line_dir;
    return {s, poly(s)};
  }
  Point2 tangent(double s) const {
    if (kind == SeamKind::Linear) return line_dir;
    return Point2(1.0, poly_derivative(s)).normalized();
  }
  double poly(double x) const {
    double y = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) y = y * x + *it;
    return y;
  }
  double poly_derivative(double x) const {
    double y = 0.0;
    for (std::size_t j = coefficients.size(); j-- > 1;) y = y * x + static_cast<double>(j) * coefficients[j];
    return y;
  }
  std::size_t degree() const { return kind == SeamKind::Linear ? 1 : coefficients.size() - 1; }
};

/// Least-squares polynomial y(x) of the given degree; returns coefficients
/// and the RMS vertical residual.
inline std::pair<std::vector<double>, double> fit_polynomial(std::span<const Point2> pts, std::size_t degree) {
  // Columns are scaled by s^j (s = max |x|) for conditioning.
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::abs(p.x()));
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(degree + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j <= degree; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      v *= pts[i].x() / scale;
    }
    b(static_cast<Eigen::Index>(i)) = pts[i].y();
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(pts.size()));
  std::vector<double> coef(degree + 1);
  double s = 1.0;
  for (std::size_t j = 0; j <= degree; ++j) {
    coef[j] = c(static_cast<Eigen::Index>(j)) / s;
    s *= scale;
  }
  return {coef, rms};
}

/// Line first; polynomial of degree 2, then 3, when the line residual is
/// above line_tol.
inline InplaneModel fit_inplane(std::span<const Point2> pts, const FitTolerances& tol = {}) {
  if (pts.size() < 2) throw Error(ErrorCode::DegenerateGeometry, "in-plane fit needs at least 2 points");
  Point2 mean = Point2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  if (!(solver.eigenvalues()[1] > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "all seam points coincide");
  Point2 dir = solver.eigenvectors().col(1).normalized();
  if (dir.x() < 0.0 || (dir.x() == 0.0 && dir.y() < 0.0)) dir = -dir;

  InplaneModel line;
  line.kind = SeamKind::Linear;
  line.line_dir = dir;
  double sq = 0.0;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  for (const auto& p : pts) {
    const Point2 d = p - mean;
    const double t = d.dot(dir);
    const double perp = d.x() * dir.y() - d.y() * dir.x();
    sq += perp * perp;
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  line.rms = std::sqrt(sq / static_cast<double>(pts.size()));
  line.line_point = mean;
  line.param_min = tmin;
  line.param_max = tmax;
  if (line.rms <= tol.line_tol) return line;

  if (pts.size() < 5) throw Error(ErrorCode::FitRejected, "too few points for a curved fit");
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
  }
  for (std::size_t degree = 2; degree <= 3; ++degree) {
    auto [coef, rms] = fit_polynomial(pts, degree);
    if (rms <= tol.curve_tol) {
      InplaneModel curve;
      curve.kind = SeamKind::Curved;
      curve.coefficients = std::move(coef);
      curve.rms = rms;
      curve.param_min = xmin;
      curve.param_max = xmax;
      return curve;
    }
  }
  throw Error(ErrorCode::FitRejected, "no polynomial of degree <= 3 fits within " + std::to_string(tol.curve_tol) +
                                          " mm (line residual " + std::to_string(line.rms) + " mm)");
}

struct FittedSeam {
  SeamKind kind = SeamKind::Linear;
  Plane plane;
  RigidTransform plane_from_input;
  InplaneModel model;
  double rms = 0.0;
  Point3 start = Point3::Zero();
  Point3 end = Point3::Zero();

  Point3 to_input(const Point2& q) const { return invert(plane_from_input).apply(Point3(q.x(), q.y(), 0.0)); }
  Point3 at(double s) const { return to_input(model.at(s)); }
  Vector3 tangent(double s) const {
    const Point2 t = model.tangent(s);
    return plane_from_input.rotation().transpose() * Vector3(t.x(), t.y(), 0.0);
  }
};

/// Plane fit, projection, in-plane fit. Collinear input (a straight seam
/// without spread) gets a plane through the line whose normal is the
/// component of `hint_normal` orthogonal to it.
inline FittedSeam fit_seam(std::span<const Point3> points, const FitTolerances& tol = {},
                           const Vector3& hint_normal = Vector3::UnitZ()) {
  if (points.size() < 2) throw Error(ErrorCode::DegenerateGeometry, "seam fit needs at least 2 points");
  Plane plane;
  try {
    plane = fit_plane(points);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateGeometry) throw;
    Point3 centroid = Point3::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    Eigen::SelfAdjointEigenSolver<Matrix3> solver(covariance_of(points));
    if (!(solver.eigenvalues()[2] > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "all seam points coincide");
    const Vector3 axis = solver.eigenvectors().col(2).normalized();
    Vector3 n = hint_normal - hint_normal.dot(axis) * axis;
    if (n.norm() < 1e-6) n = detail::any_orthogonal(axis);
    n.normalize();
    plane = {n, -n.dot(centroid)};
  }
  FittedSeam seam;
  seam.plane = plane;
  auto frame = to_plane_frame(points, plane);
  seam.plane_from_input = frame.plane_from_input;
  seam.model = fit_inplane(frame.coords, tol);
  seam.kind = seam.model.kind;
  seam.rms = seam.model.rms;
  seam.start = seam.at(seam.model.param_min);
  seam.end = seam.at(seam.model.param_max);
  return seam;
}

namespace detail {
// Arc length of y(x) between a and b, 8-point Gauss-Legendre.
inline double arc_length(const InplaneModel& m, double a, double b) {
  static constexpr std::array<double, 8> x{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> w{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = m.poly_derivative(mid + half * x[i]);
    s += w[i] * std::sqrt(1.0 + d * d);
  }
  return s * half;
}
}  // namespace detail

/// Model parameters of waypoints spaced ~step apart in arc length, both
/// endpoints included.
inline std::vector<double> sample_parameters(const FittedSeam& seam, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "waypoint step must be positive");
  const auto& m = seam.model;
  const double a = m.param_min;
  const double b = m.param_max;
  if (m.kind == SeamKind::Linear) {
    const double len = b - a;
    const auto n = std::max<long>(1, std::lround(len / step));
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(a + len * static_cast<double>(i) / static_cast<double>(n));
    return out;
  }
  // Cumulative arc length on a fine grid; each cell is refined by bisection.
  constexpr std::size_t cells = 2048;
  std::vector<double> cum(cells + 1, 0.0);
  const double h = (b - a) / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    cum[i + 1] = cum[i] + detail::arc_length(m, a + h * static_cast<double>(i), a + h * static_cast<double>(i + 1));
  }
  const double total = cum.back();
  const auto n = std::max<long>(1, std::lround(total / step));
  std::vector<double> out{a};
  for (long k = 1; k < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n);
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const std::size_t cell = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
    double lo = a + h * static_cast<double>(cell);
    double hi = lo + h;
    const double base = cum[cell];
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (base + detail::arc_length(m, a + h * static_cast<double>(cell), mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
  out.push_back(b);
  return out;
}

inline std::vector<Point3> sample_waypoints(const FittedSeam& seam, double step) {
  std::vector<Point3> out;
  for (double s : sample_parameters(seam, step)) out.push_back(seam.at(s));
  return out;
}

/// Torch frame {t, a x t, a} with approach a = -(n1 + n2)/|n1 + n2|, made
/// exactly orthogonal to the seam tangent t.
inline Matrix3 torch_frame(const Vector3& tangent, const Vector3& n1, const Vector3& n2) {
  const Vector3 sum = n1 + n2;
  if (sum.norm() < 1e-6) throw Error(ErrorCode::DegenerateGeometry, "flank normals are opposite");
  const Vector3 t = tangent.normalized();
  Vector3 a = -sum.normalized();
  a = a - a.dot(t) * t;
  if (a.norm() < 1e-9) throw Error(ErrorCode::DegenerateGeometry, "approach direction is parallel to the seam");
  a.normalize();
  Matrix3 frame;
  frame.col(0) = t;
  frame.col(1) = a.cross(t);
  frame.col(2) = a;
  return frame;
}

inline OrientationWPR compute_torch_pose(const Vector3& tangent, const Vector3& n1, const Vector3& n2) {
  return rotation_to_wpr(torch_frame(tangent, n1, n2)).angles;
}

struct Waypoint {
  Point3 position = Point3::Zero();
  OrientationWPR orientation;
};

struct WeldPath {
  SeamKind kind = SeamKind::Linear;
  double residual_mm = 0.0;
  std::vector<Waypoint> waypoints;
};

/// Samples the fitted seam and attaches torch poses. Flank normals at each
/// waypoint are the averages over the nearest refined seam points.
inline WeldPath build_weld_path(const SeamPointSet& seam_points, const FittedSeam& fit, double step) {
  WeldPath path;
  path.kind = fit.kind;
  path.residual_mm = fit.rms;
  const KdTree tree{std::span<const Point3>(seam_points.refined)};
  for (double s : sample_parameters(fit, step)) {
    const Point3 pos = fit.at(s);
    Vector3 n1 = Vector3::Zero();
    Vector3 n2 = Vector3::Zero();
    for (const auto& nb : tree.knn(pos, 8)) {
      n1 += seam_points.normal_a[nb.index];
      n2 += seam_points.normal_b[nb.index];
    }
    path.waypoints.push_back({pos, compute_torch_pose(fit.tangent(s), n1.normalized(), n2.normalized())});
  }
  return path;
}

/// Re-expresses a camera-frame path in the world frame:
/// world_from_tool * tool_from_camera.
inline WeldPath to_world(const WeldPath& path, const RigidTransform& tool_from_camera,
                         const RigidTransform& world_from_tool) {
  const RigidTransform world_from_camera = compose(world_from_tool, tool_from_camera);
  WeldPath out = path;
  for (auto& wp : out.waypoints) {
    wp.position = world_from_camera.apply(wp.position);
    wp.orientation = rotation_to_wpr(world_from_camera.rotation() * wpr_to_rotation(wp.orientation)).angles;
  }
  return out;
}

}  // namespace seamforge
