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

#include <chrono>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seamforge/core.hpp"
#include "seamforge/crop.hpp"
#include "seamforge/edges.hpp"
#include "seamforge/features.hpp"
#include "seamforge/io.hpp"
#include "seamforge/kdtree.hpp"
#include "seamforge/path_fit.hpp"
#include "seamforge/preprocess.hpp"
#include "seamforge/region_grow.hpp"

namespace seamforge {

struct PipelineConfig {
  bool crop = true;
  std::size_t dilate_px = 16;
  AxisBox passthrough;  // world frame
  double voxel_size_mm = 3.0;
  std::size_t knn = 30;
  GrowthParams growth;
  double link_radius_voxels = 2.5;  // seam chaining radius in voxel edge lengths
  std::size_t refine_k = 30;
  std::size_t m_min = 3;
  std::size_t min_seam_points = 10;
  bool concave_only = true;
  std::size_t snap_k = 120;
  FitTolerances fit;
  double step_mm = 2.0;
  unsigned threads = 1;

  void check() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
    if (dilate_px > 1000) bad("dilate_px must lie in [0, 1000]");
    passthrough.check();
    if (!(voxel_size_mm > 0.0) || !std::isfinite(voxel_size_mm)) bad("voxel_size_mm must be positive");
    if (knn < 3) bad("knn must be at least 3");
    try {
      growth.check();
    } catch (const Error& e) {
      bad(e.what());
    }
    if (!(link_radius_voxels > 0.0)) bad("link_radius_voxels must be positive");
    if (refine_k < 3) bad("refine_k must be at least 3");
    if (m_min < 1) bad("m_min must be at least 1");
    if (snap_k < 6) bad("snap_k must be at least 6");
    if (!(fit.line_tol > 0.0) || !(fit.curve_tol > 0.0)) bad("fit tolerances must be positive");
    if (!(step_mm > 0.0)) bad("step_mm must be positive");
    if (threads < 1) bad("threads must be at least 1");
  }

  RefineParams refine_params(const Point3& viewpoint) const {
    RefineParams p;
    p.k = refine_k;
    p.m_min = m_min;
    p.link_radius = link_radius_voxels * voxel_size_mm;
    p.min_seam_points = min_seam_points;
    p.concave_only = concave_only;
    p.snap_k = snap_k;
    p.viewpoint = viewpoint;
    return p;
  }
};

namespace detail {
template <typename T>
T config_number(const std::string& key, const nlohmann::json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned()) {
      throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a non-negative integer");
    }
    return v.get<T>();
  } else {
    if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a number");
    return v.get<T>();
  }
}
}  // namespace detail

/// Strict parse: every key must be known, and types must match. Keys not
/// present keep the values of `base`.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  using detail::config_number;
  for (const auto& [key, v] : j.items()) {
    if (key == "crop") {
      base.crop = config_number<bool>(key, v);
    } else if (key == "dilate_px") {
      base.dilate_px = config_number<std::size_t>(key, v);
    } else if (key == "passthrough") {
      if (!v.is_object()) throw Error(ErrorCode::InvalidConfig, "config key 'passthrough' must be an object");
      for (const auto& [pk, pv] : v.items()) {
        if (pk != "min" && pk != "max") throw Error(ErrorCode::InvalidConfig, "unknown config key 'passthrough." + pk + "'");
        if (!pv.is_array() || pv.size() != 3) {
          throw Error(ErrorCode::InvalidConfig, "config key 'passthrough." + pk + "' must be [x, y, z]");
        }
        Point3& target = pk == "min" ? base.passthrough.min : base.passthrough.max;
        for (int k = 0; k < 3; ++k) {
          const auto& e = pv[static_cast<std::size_t>(k)];
          // null leaves that side of the box open
          target[k] = e.is_null() ? (pk == "min" ? -1.0 : 1.0) * std::numeric_limits<double>::infinity()
                                  : config_number<double>("passthrough." + pk, e);
        }
      }
    } else if (key == "voxel_size_mm") {
      base.voxel_size_mm = config_number<double>(key, v);
    } else if (key == "knn") {
      base.knn = config_number<std::size_t>(key, v);
    } else if (key == "theta1_deg") {
      base.growth.theta1_deg = config_number<double>(key, v);
    } else if (key == "curvature_seed") {
      base.growth.c2 = config_number<double>(key, v);
    } else if (key == "k_grow") {
      base.growth.k_grow = config_number<std::size_t>(key, v);
    } else if (key == "min_segment_size") {
      base.growth.min_segment_size = config_number<std::size_t>(key, v);
    } else if (key == "link_radius_voxels") {
      base.link_radius_voxels = config_number<double>(key, v);
    } else if (key == "refine_k") {
      base.refine_k = config_number<std::size_t>(key, v);
    } else if (key == "m_min") {
      base.m_min = config_number<std::size_t>(key, v);
    } else if (key == "min_seam_points") {
      base.min_seam_points = config_number<std::size_t>(key, v);
    } else if (key == "concave_only") {
      base.concave_only = config_number<bool>(key, v);
    } else if (key == "snap_k") {
      base.snap_k = config_number<std::size_t>(key, v);
    } else if (key == "line_tol_mm") {
      base.fit.line_tol = config_number<double>(key, v);
    } else if (key == "curve_tol_mm") {
      base.fit.curve_tol = config_number<double>(key, v);
    } else if (key == "step_mm") {
      base.step_mm = config_number<double>(key, v);
    } else if (key == "threads") {
      base.threads = config_number<unsigned>(key, v);
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
  base.check();
  return base;
}

inline PipelineConfig read_config(const fs::path& path, PipelineConfig base = {}) {
  return config_from_json(detail::parse_json(detail::read_file(path), path), base);
}

inline nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["crop"] = c.crop;
  j["dilate_px"] = c.dilate_px;
  if (c.passthrough.min.array().isFinite().any() || c.passthrough.max.array().isFinite().any()) {
    auto arr = [](const Point3& p) {
      auto a = nlohmann::ordered_json::array();
      for (int k = 0; k < 3; ++k) a.push_back(std::isfinite(p[k]) ? nlohmann::ordered_json(p[k]) : nlohmann::ordered_json());
      return a;
    };
    j["passthrough"] = {{"min", arr(c.passthrough.min)}, {"max", arr(c.passthrough.max)}};
  }
  j["voxel_size_mm"] = c.voxel_size_mm;
  j["knn"] = c.knn;
  j["theta1_deg"] = c.growth.theta1_deg;
  j["curvature_seed"] = c.growth.c2;
  j["k_grow"] = c.growth.k_grow;
  j["min_segment_size"] = c.growth.min_segment_size;
  j["link_radius_voxels"] = c.link_radius_voxels;
  j["refine_k"] = c.refine_k;
  j["m_min"] = c.m_min;
  j["min_seam_points"] = c.min_seam_points;
  j["concave_only"] = c.concave_only;
  j["snap_k"] = c.snap_k;
  j["line_tol_mm"] = c.fit.line_tol;
  j["curve_tol_mm"] = c.fit.curve_tol;
  j["step_mm"] = c.step_mm;
  j["threads"] = c.threads;
  return j;
}

/// Wall-clock per stage in milliseconds. File I/O is not included.
struct StageTimings {
  double crop = 0.0;
  double downsample = 0.0;  // world transform, passthrough and voxel grid
  double features = 0.0;    // KD-tree and normals / curvature
  double grow = 0.0;
  double refine = 0.0;
  double fit = 0.0;         // curve fit, sampling and torch poses

  double total() const { return crop + downsample + features + grow + refine + fit; }
};

struct PointCounts {
  std::size_t input = 0;
  std::size_t after_crop = 0;
  std::size_t after_passthrough = 0;
  std::size_t after_downsample = 0;  // points entering region growing
};

struct PipelineReport {
  PointCounts counts;
  StageTimings timings_ms;
  bool cropped = false;
  std::size_t roi_pairs = 0;
  std::size_t degenerate_feature_points = 0;
  std::size_t segments = 0;
  std::size_t edge_candidates = 0;
  RefineDiagnostics refine;
  std::vector<std::string> rejected_seams;  // fit failures, one line each
};

struct PipelineResult {
  std::vector<WeldPath> paths;  // world frame
  std::vector<SeamPointSet> seams;
  std::vector<FittedSeam> fits;
  PipelineReport report;
};

namespace detail {
class StageClock {
 public:
  explicit StageClock(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }
  StageClock(const StageClock&) = delete;
  StageClock& operator=(const StageClock&) = delete;

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};
}  // namespace detail

/// Runs the full extraction on an in-memory scene. The cloud is moved to the
/// world frame right after the ROI crop, so every later stage (voxel grid,
/// normals, fits, poses) works in world coordinates. Throws NoSeamsFound when
/// nothing survives refinement and fitting.
inline PipelineResult run_pipeline(const SceneBundle& scene, const PipelineConfig& config) {
  config.check();
  PipelineResult result;
  PipelineReport& rep = result.report;
  rep.counts.input = scene.cloud.valid_count();

  PointCloud cloud;
  {
    detail::StageClock clock(rep.timings_ms.crop);
    if (config.crop && !scene.masks.empty()) {
      const SeamRoi roi = build_seam_roi(scene.masks, config.dilate_px);
      rep.roi_pairs = roi.pairs.size();
      CropStats stats;
      cloud = crop_cloud(scene.cloud, roi, scene.intrinsics, &stats);
      rep.cropped = true;
      if (cloud.empty()) {
        throw Error(ErrorCode::EmptyCloud, "ROI crop kept 0 of " + std::to_string(stats.input_points) +
                                               " points (" + std::to_string(roi.pairs.size()) + " surface pairs, " +
                                               std::to_string(roi.roi.count()) + " ROI pixels, " +
                                               std::to_string(stats.dropped_invalid) + " invalid)");
      }
    } else {
      cloud = scene.cloud;
    }
  }
  rep.counts.after_crop = cloud.valid_count();

  const RigidTransform world_from_camera = scene.world_from_camera();
  const Point3 viewpoint = world_from_camera.translation();
  {
    detail::StageClock clock(rep.timings_ms.downsample);
    cloud = passthrough_filter(transform_cloud(world_from_camera, cloud), config.passthrough);
    rep.counts.after_passthrough = cloud.size();
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "pass-through filter removed every point");
    cloud = voxel_downsample(cloud, config.voxel_size_mm);
    rep.counts.after_downsample = cloud.size();
  }
  if (cloud.size() < std::max(config.knn, config.growth.k_grow)) {
    throw Error(ErrorCode::EmptyCloud, "only " + std::to_string(cloud.size()) +
                                           " points left after downsampling; need at least knn");
  }

  std::optional<KdTree> tree;
  {
    detail::StageClock clock(rep.timings_ms.features);
    tree.emplace(cloud);
    FeatureStats fstats;
    cloud = estimate_features(cloud, *tree, config.knn, viewpoint, config.threads, &fstats);
    rep.degenerate_feature_points = fstats.degenerate_points;
  }

  SegmentationResult seg;
  {
    detail::StageClock clock(rep.timings_ms.grow);
    seg = segment(cloud, *tree, config.growth);
    rep.segments = seg.segments.size();
    rep.edge_candidates = seg.edge_count();
  }

  {
    detail::StageClock clock(rep.timings_ms.refine);
    result.seams = refine_edges(seg, cloud, *tree, config.refine_params(viewpoint), &rep.refine);
  }

  {
    detail::StageClock clock(rep.timings_ms.fit);
    std::vector<SeamPointSet> kept;
    for (auto& seam : result.seams) {
      Vector3 hint = Vector3::Zero();
      for (std::size_t i = 0; i < seam.refined.size(); ++i) hint += seam.normal_a[i] + seam.normal_b[i];
      try {
        FittedSeam fit = fit_seam(seam.refined, config.fit, hint.norm() > 0.0 ? Vector3(hint.normalized()) : Vector3::UnitZ());
        result.paths.push_back(build_weld_path(seam, fit, config.step_mm));
        result.fits.push_back(std::move(fit));
        kept.push_back(std::move(seam));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::FitRejected && e.code() != ErrorCode::DegenerateGeometry) throw;
        rep.rejected_seams.push_back("segments " + std::to_string(seam.segment_a) + "/" +
                                     std::to_string(seam.segment_b) + ": " + e.what());
      }
    }
    result.seams = std::move(kept);
  }
  if (result.paths.empty()) {
    throw Error(ErrorCode::NoSeamsFound,
                "no weld seams found (" + std::to_string(rep.segments) + " segments, " +
                    std::to_string(rep.edge_candidates) + " edge candidates, " +
                    std::to_string(rep.refine.two_surface_points) + " two-surface points, " +
                    std::to_string(rep.rejected_seams.size()) + " seams rejected by the fit)");
  }
  return result;
}

inline nlohmann::ordered_json report_to_json(const PipelineReport& r, std::span<const WeldPath> paths = {},
                                             std::span<const SeamPointSet> seams = {}) {
  nlohmann::ordered_json j;
  j["points"] = {{"input", r.counts.input},
                 {"after_crop", r.counts.after_crop},
                 {"after_passthrough", r.counts.after_passthrough},
                 {"after_downsample", r.counts.after_downsample}};
  j["cropped"] = r.cropped;
  j["roi_pairs"] = r.roi_pairs;
  j["timings_ms"] = {{"crop", r.timings_ms.crop},           {"downsample", r.timings_ms.downsample},
                     {"features", r.timings_ms.features},   {"grow", r.timings_ms.grow},
                     {"refine", r.timings_ms.refine},       {"fit", r.timings_ms.fit},
                     {"total", r.timings_ms.total()}};
  j["degenerate_feature_points"] = r.degenerate_feature_points;
  j["segments"] = r.segments;
  j["edge_candidates"] = r.edge_candidates;
  j["refine"] = {{"candidates", r.refine.candidates},
                 {"two_surface_points", r.refine.two_surface_points},
                 {"pair_groups", r.refine.pair_groups},
                 {"components", r.refine.components},
                 {"dropped_small", r.refine.dropped_small},
                 {"dropped_convex", r.refine.dropped_convex},
                 {"snapped_points", r.refine.snapped_points}};
  j["rejected_seams"] = r.rejected_seams;
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < seams.size(); ++i) {
    nlohmann::ordered_json s;
    s["segments"] = {seams[i].segment_a, seams[i].segment_b};
    s["points"] = seams[i].indices.size();
    s["extent_mm"] = detail::round6(seams[i].extent_mm);
    if (i < paths.size()) {
      s["type"] = std::string(to_string(paths[i].kind));
      s["waypoints"] = paths[i].waypoints.size();
    }
    arr.push_back(std::move(s));
  }
  j["seams"] = std::move(arr);
  return j;
}

}  // namespace seamforge
