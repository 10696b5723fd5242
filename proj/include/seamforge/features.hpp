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
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "seamforge/core.hpp"
#include "seamforge/kdtree.hpp"

namespace seamforge {

/// Runs body(i) for i in [0, n) on `threads` workers with static contiguous
/// chunks. Each index is written by exactly one worker, so results do not
/// depend on the thread count.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
}

/// Covariance of a point set about its barycenter, normalised by 1/k.
inline Matrix3 covariance_of(std::span<const Point3> pts) {
  Matrix3 m = Matrix3::Zero();
  if (pts.empty()) return m;
  Vector3 mean = Vector3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const Vector3 d = p - mean;
    m.noalias() += d * d.transpose();
  }
  return m / static_cast<double>(pts.size());
}

/// M over the k nearest neighbours of point i (i itself included).
inline Matrix3 neighborhood_covariance(const PointCloud& cloud, const KdTree& tree, std::size_t i, std::size_t k) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "neighbourhood size k must be at least 3");
  if (tree.size() < k) throw Error(ErrorCode::InvalidArgument, "cloud has fewer points than k");
  const auto nn = tree.knn(cloud.points[i], k);
  std::vector<Point3> pts;
  pts.reserve(nn.size());
  for (const auto& n : nn) pts.push_back(cloud.points[n.index]);
  return covariance_of(pts);
}

struct LocalSurfaceStats {
  Vector3 normal = Vector3::UnitZ();
  double curvature = 0.0;  // lambda0 / (lambda0 + lambda1 + lambda2)
  std::size_t k = 0;
  bool degenerate = false;
};

/// Eigen-decomposition of a symmetric 3x3 covariance. Eigenvalues ascend, so
/// column 0 is the surface normal direction.
inline LocalSurfaceStats surface_stats_from_covariance(const Matrix3& m) {
  LocalSurfaceStats s;
  const double trace = m.trace();
  if (!(trace > 0.0)) {
    s.degenerate = true;
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(m);
  const Vector3 ev = solver.eigenvalues().cwiseMax(0.0);
  const double sum = ev.sum();
  s.curvature = sum > 0.0 ? ev[0] / sum : 0.0;
  s.normal = solver.eigenvectors().col(0).normalized();
  return s;
}

struct FeatureStats {
  std::size_t degenerate_points = 0;
};

/// Adds per-point normals and curvature. Normals are flipped to face the
/// viewpoint; points whose neighbourhood collapses to a single position get
/// curvature 0 and the view direction as normal.
inline PointCloud estimate_features(const PointCloud& cloud, const KdTree& tree, std::size_t k,
                                    const Point3& viewpoint = Point3::Zero(), unsigned threads = 1,
                                    FeatureStats* stats = nullptr) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "neighbourhood size k must be at least 3");
  if (tree.size() < k) throw Error(ErrorCode::InvalidArgument, "cloud has fewer points than k");
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vector3::UnitZ());
  out.curvatures.assign(cloud.size(), 0.0);
  std::vector<std::uint8_t> degenerate(cloud.size(), 0);

  parallel_for(cloud.size(), threads, [&](std::size_t i) {
    if (!cloud.is_valid(i)) return;
    const Point3& p = cloud.points[i];
    const auto nn = tree.knn(p, k);
    Vector3 mean = Vector3::Zero();
    for (const auto& n : nn) mean += cloud.points[n.index];
    mean /= static_cast<double>(nn.size());
    Matrix3 m = Matrix3::Zero();
    for (const auto& n : nn) {
      const Vector3 d = cloud.points[n.index] - mean;
      m.noalias() += d * d.transpose();
    }
    m /= static_cast<double>(nn.size());
    auto s = surface_stats_from_covariance(m);
    Vector3 to_view = viewpoint - p;
    if (s.degenerate) {
      degenerate[i] = 1;
      s.normal = to_view.norm() > 0.0 ? to_view.normalized() : Vector3::UnitZ();
    } else if (s.normal.dot(to_view) < 0.0) {
      s.normal = -s.normal;
    }
    out.normals[i] = s.normal;
    out.curvatures[i] = s.curvature;
  });
  if (stats) stats->degenerate_points = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  return out;
}

}  // namespace seamforge
