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
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "seamforge/core.hpp"

namespace seamforge {

struct AxisBox {
  Point3 min = Point3::Constant(-std::numeric_limits<double>::infinity());
  Point3 max = Point3::Constant(std::numeric_limits<double>::infinity());

  void check() const {
    if (!(min.array() <= max.array()).all()) throw Error(ErrorCode::InvalidArgument, "pass-through box has min > max");
  }
  bool contains(const Point3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
};

/// Keeps valid points inside the box, in input order. The result is never
/// organized.
inline PointCloud passthrough_filter(const PointCloud& cloud, const AxisBox& box) {
  box.check();
  PointCloud out;
  const bool normals = cloud.has_normals();
  const bool curv = cloud.has_curvatures();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.is_valid(i) || !box.contains(cloud.points[i])) continue;
    out.points.push_back(cloud.points[i]);
    if (normals) out.normals.push_back(cloud.normals[i]);
    if (curv) out.curvatures.push_back(cloud.curvatures[i]);
  }
  return out;
}

using VoxelIndex = std::array<std::int64_t, 3>;

struct VoxelGridSpec {
  double r = 3.0;  // voxel edge, mm
  Point3 origin = Point3::Zero();

  void check() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "voxel size must be positive");
  }

  /// Grid anchored at the componentwise minimum of the valid points.
  static VoxelGridSpec for_cloud(const PointCloud& cloud, double r) {
    VoxelGridSpec spec{r, Point3::Constant(std::numeric_limits<double>::infinity())};
    bool any = false;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!cloud.is_valid(i)) continue;
      spec.origin = spec.origin.cwiseMin(cloud.points[i]);
      any = true;
    }
    if (!any) throw Error(ErrorCode::EmptyCloud, "cannot voxelize an empty cloud");
    return spec;
  }
};

/// h_k = floor((k - k_min) / r) for k in {x, y, z}.
inline VoxelIndex voxel_index(const Point3& p, const VoxelGridSpec& spec) {
  VoxelIndex h{};
  for (int k = 0; k < 3; ++k) h[k] = static_cast<std::int64_t>(std::floor((p[k] - spec.origin[k]) / spec.r));
  return h;
}

/// One centroid per occupied voxel, ordered lexicographically by voxel index.
/// Sums are accumulated in input order inside each voxel so the result is
/// bitwise reproducible.
inline PointCloud voxel_downsample(const PointCloud& cloud, const VoxelGridSpec& spec) {
  spec.check();
  struct Entry {
    VoxelIndex key;
    std::size_t index;
  };
  std::vector<Entry> entries;
  entries.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.is_valid(i)) entries.push_back({voxel_index(cloud.points[i], spec), i});
  }
  if (entries.empty()) throw Error(ErrorCode::EmptyCloud, "cannot downsample an empty cloud");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.key < b.key || (a.key == b.key && a.index < b.index); });

  PointCloud out;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin;
    Vector3 sum = Vector3::Zero();
    while (end < entries.size() && entries[end].key == entries[begin].key) {
      sum += cloud.points[entries[end].index];
      ++end;
    }
    out.points.push_back(sum / static_cast<double>(end - begin));
    begin = end;
  }
  return out;
}

inline PointCloud voxel_downsample(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be positive");
  return voxel_downsample(cloud, VoxelGridSpec::for_cloud(cloud, r));
}

}  // namespace seamforge
