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
#include <numeric>
#include <vector>

#include "seamforge/core.hpp"
#include "seamforge/kdtree.hpp"

namespace seamforge {

struct GrowthParams {
  double theta1_deg = 20.0;  // normal-angle bound; larger angles mark edge candidates
  double c2 = 0.02;          // curvature below which a joined point becomes a seed
  std::size_t k_grow = 30;
  std::size_t min_segment_size = 50;

  void check() const {
    if (!(theta1_deg > 0.0 && theta1_deg < 90.0)) throw Error(ErrorCode::InvalidArgument, "theta1 must lie in (0, 90)");
    if (!(c2 >= 0.0 && c2 <= 1.0 / 3.0)) throw Error(ErrorCode::InvalidArgument, "curvature seed bound must lie in [0, 1/3]");
    if (k_grow < 3) throw Error(ErrorCode::InvalidArgument, "k_grow must be at least 3");
  }
};

struct SegmentInfo {
  int id = 0;
  std::size_t count = 0;
  Vector3 mean_normal = Vector3::UnitZ();
};

/// labels[i] > 0 names a surface segment, 0 means not on a surface. A point
/// never carries a label and the edge flag at the same time.
struct SegmentationResult {
  std::vector<int> labels;
  std::vector<std::uint8_t> edge_candidate;
  std::vector<SegmentInfo> segments;

  std::size_t edge_count() const {
    return static_cast<std::size_t>(std::count(edge_candidate.begin(), edge_candidate.end(), 1));
  }
  const SegmentInfo* find(int id) const {
    if (id <= 0 || static_cast<std::size_t>(id) > segments.size()) return nullptr;
    return &segments[static_cast<std::size_t>(id - 1)];
  }
};

/// Region growing over a cloud with normals and curvature.
///
/// Each round seeds a new segment at the unvisited point with the smallest
/// curvature (ties by index) and grows it breadth-first through k_grow
/// neighbourhoods. Every unvisited neighbour is compared against the seed
/// normal with |cos|: beyond theta1 it becomes an edge candidate, otherwise it
/// joins the segment and, if its curvature is below c2, is queued as a seed.
/// Segments smaller than min_segment_size are dissolved afterwards.
inline SegmentationResult segment(const PointCloud& cloud, const KdTree& tree, const GrowthParams& params) {
  params.check();
  if (!cloud.has_normals() || !cloud.has_curvatures()) {
    throw Error(ErrorCode::MissingFeatures, "region growing needs normals and curvatures");
  }
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot segment an empty cloud");

  const std::size_t n = cloud.size();
  const double cos_theta = std::cos(deg2rad(params.theta1_deg));

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cloud.is_valid(i)) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cloud.curvatures[a] < cloud.curvatures[b] || (cloud.curvatures[a] == cloud.curvatures[b] && a < b);
  });

  std::vector<int> raw_label(n, 0);
  std::vector<std::uint8_t> edge(n, 0);
  std::vector<std::uint8_t> visited(n, 0);
  for (std::size_t i = 0; i < n; ++i) visited[i] = cloud.is_valid(i) ? 0 : 1;

  std::vector<std::size_t> raw_sizes{0};  // raw_sizes[id]
  std::deque<std::size_t> seeds;
  for (std::size_t start : order) {
    if (visited[start]) continue;
    const int id = static_cast<int>(raw_sizes.size());
    raw_sizes.push_back(1);
    visited[start] = 1;
    raw_label[start] = id;
    const Vector3 seed_normal = cloud.normals[start];
    seeds.clear();
    seeds.push_back(start);
    while (!seeds.empty()) {
      const std::size_t s = seeds.front();
      seeds.pop_front();
      for (const auto& nb : tree.knn(cloud.points[s], params.k_grow)) {
        const std::size_t j = nb.index;
        if (visited[j]) continue;
        visited[j] = 1;
        if (std::abs(seed_normal.dot(cloud.normals[j])) < cos_theta) {
          edge[j] = 1;
          continue;
        }
        raw_label[j] = id;
        ++raw_sizes[static_cast<std::size_t>(id)];
        if (cloud.curvatures[j] < params.c2) seeds.push_back(j);
      }
    }
  }

  // Keep segments that reached the minimum size; renumber them 1..S in
  // creation order.
  std::vector<int> remap(raw_sizes.size(), 0);
  SegmentationResult result;
  for (std::size_t id = 1; id < raw_sizes.size(); ++id) {
    if (raw_sizes[id] >= params.min_segment_size) {
      const int new_id = static_cast<int>(result.segments.size()) + 1;
      remap[id] = new_id;
      result.segments.push_back({new_id, raw_sizes[id], Vector3::Zero()});
    }
  }
  result.labels.assign(n, 0);
  result.edge_candidate = std::move(edge);
  std::vector<Vector3> reference(result.segments.size(), Vector3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const int id = remap[static_cast<std::size_t>(raw_label[i])];
    result.labels[i] = id;
    if (id == 0) continue;
    auto& seg = result.segments[static_cast<std::size_t>(id - 1)];
    Vector3& ref = reference[static_cast<std::size_t>(id - 1)];
    if (ref.isZero()) ref = cloud.normals[i];
    const Vector3& nrm = cloud.normals[i];
    seg.mean_normal += nrm.dot(ref) < 0.0 ? Vector3(-nrm) : nrm;
  }
  for (auto& seg : result.segments) {
    const double len = seg.mean_normal.norm();
    seg.mean_normal = len > 0.0 ? Vector3(seg.mean_normal / len) : Vector3::UnitZ();
  }
  return result;
}

}  // namespace seamforge
