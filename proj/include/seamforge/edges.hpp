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
#include <cmath>
#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "seamforge/core.hpp"
#include "seamforge/features.hpp"
#include "seamforge/kdtree.hpp"
#include "seamforge/region_grow.hpp"

namespace seamforge {

struct RefineParams {
  std::size_t k = 30;                // neighbourhood used for the two-surface test
  std::size_t m_min = 3;             // required neighbours from each flanking segment
  double link_radius = 7.5;          // component chaining radius, mm (2.5 x voxel)
  std::size_t min_seam_points = 10;
  bool concave_only = true;          // weld joints are inside corners
  std::size_t snap_k = 120;          // neighbourhood for the local flank plane fits
  std::size_t snap_min_side = 6;
  double snap_max_curvature = 0.02;  // flank plane fits use smooth points only
  double snap_normal_tol_deg = 8.0;  // ... whose normal is close to their segment's mean normal
  Point3 viewpoint = Point3::Zero();  // normals are oriented toward it

  void check() const {
    if (k < 3) throw Error(ErrorCode::InvalidArgument, "refine k must be at least 3");
    if (m_min < 1) throw Error(ErrorCode::InvalidArgument, "m_min must be at least 1");
    if (!(link_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "link radius must be positive");
  }
};

/// One seam: indices of refined edge points, the two flanking segments, and
/// each point snapped onto the intersection line of the locally fitted flank
/// planes together with those planes' normals.
struct SeamPointSet {
  std::vector<std::size_t> indices;
  int segment_a = 0;
  int segment_b = 0;
  double extent_mm = 0.0;
  double concavity = 0.0;  // > 0 for an inside corner
  std::vector<Point3> refined;
  std::vector<Vector3> normal_a;
  std::vector<Vector3> normal_b;
};

struct RefineDiagnostics {
  std::size_t candidates = 0;
  std::size_t two_surface_points = 0;
  std::size_t pair_groups = 0;
  std::size_t components = 0;
  std::size_t dropped_small = 0;
  std::size_t dropped_convex = 0;
  std::size_t snapped_points = 0;
  bool no_seams = false;
};

namespace detail {

struct PlaneFit {
  Vector3 normal = Vector3::UnitZ();
  Point3 centroid = Point3::Zero();
  bool ok = false;
};

inline PlaneFit fit_plane_once(const std::vector<Point3>& pts, const Point3& viewpoint) {
  PlaneFit f;
  if (pts.size() < 3) return f;
  for (const auto& p : pts) f.centroid += p;
  f.centroid /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(covariance_of(pts));
  const Vector3 ev = solver.eigenvalues();
  // Needs a 2-d spread: reject slivers.
  if (!(ev[1] > 1e-9 * std::max(ev[2], 1e-300))) return f;
  f.normal = solver.eigenvectors().col(0).normalized();
  if (f.normal.dot(viewpoint - f.centroid) < 0.0) f.normal = -f.normal;
  f.ok = true;
  return f;
}

/// Total least squares plane with repeated residual trimming at three
/// robust standard deviations (1.4826 x median absolute residual).
inline PlaneFit fit_local_plane(std::vector<Point3> pts, const Point3& viewpoint) {
  PlaneFit f = fit_plane_once(pts, viewpoint);
  std::vector<double> res;
  for (int round = 0; round < 8 && f.ok; ++round) {
    res.clear();
    for (const auto& p : pts) res.push_back(std::abs(f.normal.dot(p - f.centroid)));
    std::vector<double> sorted = res;
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double limit = std::max(3.0 * 1.4826 * *mid, 1e-9);
    std::vector<Point3> kept;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (res[i] <= limit) kept.push_back(pts[i]);
    }
    if (kept.size() == pts.size() || kept.size() < 3) break;
    pts = std::move(kept);
    PlaneFit next = fit_plane_once(pts, viewpoint);
    if (!next.ok) break;
    f = next;
  }
  return f;
}

}  // namespace detail

/// Keeps edge candidates that sit between two surface segments, splits them
/// into seams (segment pair, then radius-linked components) and snaps every
/// member onto the intersection of the two flank planes.
inline std::vector<SeamPointSet> refine_edges(const SegmentationResult& seg, const PointCloud& cloud,
                                              const KdTree& tree, const RefineParams& params,
                                              RefineDiagnostics* diagnostics = nullptr) {
  params.check();
  if (!cloud.has_normals() || !cloud.has_curvatures()) {
    throw Error(ErrorCode::MissingFeatures, "edge refinement needs normals and curvatures");
  }
  if (seg.labels.size() != cloud.size()) throw Error(ErrorCode::DimensionMismatch, "segmentation does not cover cloud");
  RefineDiagnostics local;
  RefineDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = RefineDiagnostics{};

  // Two-surface test, grouped by dominant segment pair.
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  std::vector<std::pair<int, std::size_t>> counts;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!seg.edge_candidate[i]) continue;
    ++diag.candidates;
    counts.clear();
    for (const auto& nb : tree.knn(cloud.points[i], params.k)) {
      const int id = seg.labels[nb.index];
      if (id <= 0) continue;
      auto it = std::find_if(counts.begin(), counts.end(), [id](const auto& c) { return c.first == id; });
      if (it == counts.end()) {
        counts.emplace_back(id, 1);
      } else {
        ++it->second;
      }
    }
    std::erase_if(counts, [&](const auto& c) { return c.second < params.m_min; });
    if (counts.size() < 2) continue;
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    const int a = std::min(counts[0].first, counts[1].first);
    const int b = std::max(counts[0].first, counts[1].first);
    groups[{a, b}].push_back(i);
    ++diag.two_surface_points;
  }
  diag.pair_groups = groups.size();

  const double cos_snap = std::cos(deg2rad(params.snap_normal_tol_deg));
  std::vector<SeamPointSet> seams;
  std::vector<Point3> side_a;
  std::vector<Point3> side_b;
  for (const auto& [pair, members] : groups) {
    std::vector<Point3> pts;
    pts.reserve(members.size());
    for (auto i : members) pts.push_back(cloud.points[i]);
    const KdTree local_tree{std::span<const Point3>(pts)};

    std::vector<int> component(members.size(), -1);
    int next = 0;
    for (std::size_t start = 0; start < members.size(); ++start) {
      if (component[start] >= 0) continue;
      std::deque<std::size_t> queue{start};
      component[start] = next;
      std::vector<std::size_t> comp;
      while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        comp.push_back(cur);
        for (const auto& nb : local_tree.radius_search(pts[cur], params.link_radius)) {
          if (component[nb.index] < 0) {
            component[nb.index] = next;
            queue.push_back(nb.index);
          }
        }
      }
      ++next;
      ++diag.components;
      if (comp.size() < params.min_seam_points) {
        ++diag.dropped_small;
        continue;
      }
      std::sort(comp.begin(), comp.end());

      SeamPointSet seam;
      seam.segment_a = pair.first;
      seam.segment_b = pair.second;
      const Vector3 mean_a = seg.find(pair.first)->mean_normal;
      const Vector3 mean_b = seg.find(pair.second)->mean_normal;
      double concavity = 0.0;
      for (auto c : comp) {
        const std::size_t idx = members[c];
        const Point3& p = cloud.points[idx];
        seam.indices.push_back(idx);
        side_a.clear();
        side_b.clear();
        for (const auto& nb : tree.knn(p, params.snap_k)) {
          const int id = seg.labels[nb.index];
          if (!(cloud.curvatures[nb.index] < params.snap_max_curvature)) continue;
          if (id == pair.first && std::abs(cloud.normals[nb.index].dot(mean_a)) < cos_snap) continue;
          if (id == pair.second && std::abs(cloud.normals[nb.index].dot(mean_b)) < cos_snap) continue;
          if (id == pair.first) side_a.push_back(cloud.points[nb.index]);
          if (id == pair.second) side_b.push_back(cloud.points[nb.index]);
        }
        auto fa = detail::fit_local_plane(side_a, params.viewpoint);
        auto fb = detail::fit_local_plane(side_b, params.viewpoint);
        const bool ok = fa.ok && fb.ok && side_a.size() >= params.snap_min_side &&
                        side_b.size() >= params.snap_min_side && fa.normal.cross(fb.normal).norm() > std::sin(deg2rad(5.0));
        Point3 snapped = p;
        Vector3 na = mean_a;
        Vector3 nb = mean_b;
        if (na.dot(params.viewpoint - p) < 0.0) na = -na;
        if (nb.dot(params.viewpoint - p) < 0.0) nb = -nb;
        if (ok) {
          na = fa.normal;
          nb = fb.normal;
          // Closest point to p on {x : na.(x - ca) = 0, nb.(x - cb) = 0}.
          const double ra = na.dot(p - fa.centroid);
          const double rb = nb.dot(p - fb.centroid);
          const double c = na.dot(nb);
          const double det = 1.0 - c * c;
          const double la = (ra - c * rb) / det;
          const double lb = (rb - c * ra) / det;
          snapped = p - la * na - lb * nb;
          concavity += (fb.centroid - fa.centroid).dot(na - nb);
          ++diag.snapped_points;
        }
        seam.refined.push_back(snapped);
        seam.normal_a.push_back(na);
        seam.normal_b.push_back(nb);
      }
      seam.concavity = concavity;
      if (params.concave_only && !(concavity > 0.0)) {
        ++diag.dropped_convex;
        continue;
      }
      // Extent along the principal direction.
      const Matrix3 cov = covariance_of(seam.refined);
      Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
      const Vector3 axis = solver.eigenvectors().col(2);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& q : seam.refined) {
        lo = std::min(lo, q.dot(axis));
        hi = std::max(hi, q.dot(axis));
      }
      seam.extent_mm = hi - lo;
      seams.push_back(std::move(seam));
    }
  }
  diag.no_seams = seams.empty();
  return seams;
}

}  // namespace seamforge
