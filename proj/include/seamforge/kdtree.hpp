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
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include "seamforge/core.hpp"

namespace seamforge {

struct Neighbor {
  std::size_t index = 0;  // index into the cloud the tree was built from
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static 3-d tree. Nodes split at the median of their largest-variance axis;
/// leaves hold at most `kLeafSize` points. Immutable after construction, so
/// concurrent queries need no locking.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    // Leaf: [begin, end) into order_. Internal: children at left/right.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
    bool is_leaf() const { return left < 0; }
  };

  KdTree() = default;

  /// Indexes the valid points of the cloud; indices refer to cloud positions.
  explicit KdTree(const PointCloud& cloud) {
    std::vector<std::size_t> ids;
    ids.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (cloud.is_valid(i)) ids.push_back(i);
    }
    build(cloud.points, std::move(ids));
  }

  explicit KdTree(std::span<const Point3> points) {
    std::vector<std::size_t> ids(points.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    build(points, std::move(ids));
  }

  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Original index of the i-th point in tree order (leaves are contiguous).
  std::size_t original_index(std::size_t slot) const { return order_[slot]; }
  const Point3& slot_point(std::size_t slot) const { return coords_[slot]; }

  /// min(k, size) neighbours sorted by (distance, index).
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> out;
    if (k == 0 || order_.empty()) return out;
    k = std::min(k, order_.size());
    Heap heap;
    heap.reserve(k + 1);
    knn_recurse(0, query, k, heap);
    out.reserve(heap.size());
    std::sort(heap.begin(), heap.end(), candidate_less);
    for (const auto& c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

  /// Every point with distance <= radius, sorted by (distance, index).
  std::vector<Neighbor> radius_search(const Point3& query, double radius) const {
    std::vector<Neighbor> out;
    if (order_.empty() || !(radius >= 0.0)) return out;
    std::vector<Candidate> found;
    radius_recurse(0, query, radius * radius, found);
    std::sort(found.begin(), found.end(), candidate_less);
    out.reserve(found.size());
    for (const auto& c : found) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

 private:
  struct Candidate {
    double dist2;
    std::size_t index;
  };
  using Heap = std::vector<Candidate>;

  static bool candidate_less(const Candidate& a, const Candidate& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }

  void build(std::span<const Point3> points, std::vector<std::size_t> ids) {
    if (ids.empty()) throw Error(ErrorCode::EmptyCloud, "cannot build a KD-tree over an empty cloud");
    if (ids.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::InvalidArgument, "cloud too large for KD-tree");
    }
    for (auto id : ids) {
      if (!is_finite(points[id])) throw Error(ErrorCode::InvalidArgument, "non-finite point in KD-tree input");
    }
    order_ = std::move(ids);
    std::vector<Point3> pts(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) pts[i] = points[order_[i]];
    nodes_.reserve(2 * order_.size() / kLeafSize + 1);
    // Work on (point, id) pairs so the median partition moves both together.
    std::vector<std::uint32_t> perm(order_.size());
    std::iota(perm.begin(), perm.end(), 0u);
    build_node(pts, perm, 0, static_cast<std::uint32_t>(perm.size()));
    std::vector<std::size_t> new_order(order_.size());
    coords_.resize(order_.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      new_order[i] = order_[perm[i]];
      coords_[i] = pts[perm[i]];
    }
    order_ = std::move(new_order);
  }

  std::int32_t build_node(const std::vector<Point3>& pts, std::vector<std::uint32_t>& perm, std::uint32_t begin,
                          std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Vector3 mean = Vector3::Zero();
    for (auto i = begin; i < end; ++i) mean += pts[perm[i]];
    mean /= static_cast<double>(end - begin);
    Vector3 var = Vector3::Zero();
    for (auto i = begin; i < end; ++i) var += (pts[perm[i]] - mean).cwiseAbs2();
    int axis = 0;
    var.maxCoeff(&axis);

    const std::uint32_t mid = begin + (end - begin) / 2;
    // Ties on the coordinate are ordered by original index: deterministic.
    std::nth_element(perm.begin() + begin, perm.begin() + mid, perm.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = pts[a][axis];
                       const double cb = pts[b][axis];
                       return ca < cb || (ca == cb && order_[a] < order_[b]);
                     });
    const double split = pts[perm[mid]][axis];
    const auto left = build_node(pts, perm, begin, mid);
    const auto right = build_node(pts, perm, mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.left = left;
    node.right = right;
    node.axis = axis;
    node.split = split;
    return id;
  }

  void push_candidate(Heap& heap, std::size_t k, const Candidate& c) const {
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end(), candidate_less);
    } else if (candidate_less(c, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), candidate_less);
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end(), candidate_less);
    }
  }

  void knn_recurse(std::int32_t node_id, const Point3& q, std::size_t k, Heap& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
      for (auto s = node.begin; s < node.end; ++s) {
        push_candidate(heap, k, {(coords_[s] - q).squaredNorm(), order_[s]});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const auto near = diff < 0.0 ? node.left : node.right;
    const auto far = diff < 0.0 ? node.right : node.left;
    knn_recurse(near, q, k, heap);
    // <= keeps equal-distance candidates reachable for index tie-breaking.
    if (heap.size() < k || diff * diff <= heap.front().dist2) knn_recurse(far, q, k, heap);
  }

  void radius_recurse(std::int32_t node_id, const Point3& q, double r2, std::vector<Candidate>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
      for (auto s = node.begin; s < node.end; ++s) {
        const double d2 = (coords_[s] - q).squaredNorm();
        if (d2 <= r2) out.push_back({d2, order_[s]});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    if (diff <= 0.0 || diff * diff <= r2) radius_recurse(node.left, q, r2, out);
    if (diff >= 0.0 || diff * diff <= r2) radius_recurse(node.right, q, r2, out);
  }

  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  std::vector<Point3> coords_;
};

}  // namespace seamforge
