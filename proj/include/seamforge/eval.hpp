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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "seamforge/pipeline.hpp"
#include "seamforge/synth.hpp"

namespace seamforge {

inline constexpr double kDefaultMatchRadius = 5.0;

/// Root mean square of nearest-point deviations to one truth seam.
inline double rmse_to_seam(std::span<const Point3> path, const TruthSeam& seam) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "rmse needs at least one waypoint");
  double sum = 0.0;
  for (const auto& p : path) {
    const double d = point_to_seam_distance(p, seam);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(path.size()));
}

inline double max_error_to_seam(std::span<const Point3> path, const TruthSeam& seam) {
  double m = 0.0;
  for (const auto& p : path) m = std::max(m, point_to_seam_distance(p, seam));
  return m;
}

/// Directed Hausdorff distance from the path to the seam.
inline double hausdorff_to_seam(std::span<const Point3> path, const TruthSeam& seam) {
  return max_error_to_seam(path, seam);
}

/// RMSE against the truth seam closest to the path (by Hausdorff distance).
inline double rmse(std::span<const Point3> path, const GroundTruth& truth, double match_radius = kDefaultMatchRadius) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "rmse needs at least one waypoint");
  if (truth.seams.empty()) throw Error(ErrorCode::UnmatchedSeam, "ground truth has no seams");
  std::size_t best = 0;
  double best_h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < truth.seams.size(); ++i) {
    const double h = hausdorff_to_seam(path, truth.seams[i]);
    if (h < best_h) {
      best_h = h;
      best = i;
    }
  }
  if (!(best_h <= match_radius)) {
    throw Error(ErrorCode::UnmatchedSeam, "no truth seam within " + std::to_string(match_radius) +
                                              " mm (closest Hausdorff " + std::to_string(best_h) + " mm)");
  }
  return rmse_to_seam(path, truth.seams[best]);
}

inline std::vector<Point3> positions(const WeldPath& path) {
  std::vector<Point3> out;
  out.reserve(path.waypoints.size());
  for (const auto& w : path.waypoints) out.push_back(w.position);
  return out;
}

struct SeamMatch {
  std::size_t detected = 0;
  std::size_t truth = 0;
  double hausdorff = 0.0;
};

/// One-to-one greedy assignment by ascending Hausdorff distance; pairs
/// further apart than `match_radius` stay unmatched.
inline std::vector<SeamMatch> match_seams(std::span<const WeldPath> paths, const GroundTruth& truth,
                                          double match_radius = kDefaultMatchRadius) {
  std::vector<SeamMatch> all;
  for (std::size_t d = 0; d < paths.size(); ++d) {
    const auto pos = positions(paths[d]);
    if (pos.empty()) continue;
    for (std::size_t t = 0; t < truth.seams.size(); ++t) {
      const double h = hausdorff_to_seam(pos, truth.seams[t]);
      if (h <= match_radius) all.push_back({d, t, h});
    }
  }
  std::sort(all.begin(), all.end(), [](const SeamMatch& a, const SeamMatch& b) {
    return std::tie(a.hausdorff, a.detected, a.truth) < std::tie(b.hausdorff, b.detected, b.truth);
  });
  std::vector<std::uint8_t> used_d(paths.size(), 0);
  std::vector<std::uint8_t> used_t(truth.seams.size(), 0);
  std::vector<SeamMatch> out;
  for (const auto& m : all) {
    if (used_d[m.detected] || used_t[m.truth]) continue;
    used_d[m.detected] = used_t[m.truth] = 1;
    out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const SeamMatch& a, const SeamMatch& b) { return a.truth < b.truth; });
  return out;
}

struct SeamScore {
  std::size_t truth_index = 0;
  std::size_t detected_index = 0;
  std::size_t waypoints = 0;
  double rmse = 0.0;
  double max_error = 0.0;
  double hausdorff = 0.0;
};

struct EvalReport {
  std::vector<SeamScore> seams;  // matched seams, ordered by truth index
  std::size_t matched = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
  std::size_t detected = 0;
  std::size_t truth_count = 0;
  double pooled_rmse = 0.0;  // over every waypoint of every matched seam
  double mean_rmse = 0.0;    // mean of per-seam values
  double max_error = 0.0;
  PipelineReport pipeline;
  bool failed = false;
  std::string error;
};

inline EvalReport evaluate(std::span<const WeldPath> paths, const GroundTruth& truth,
                           double match_radius = kDefaultMatchRadius) {
  EvalReport rep;
  rep.detected = paths.size();
  rep.truth_count = truth.seams.size();
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& m : match_seams(paths, truth, match_radius)) {
    const auto pos = positions(paths[m.detected]);
    SeamScore s;
    s.truth_index = m.truth;
    s.detected_index = m.detected;
    s.waypoints = pos.size();
    s.rmse = rmse_to_seam(pos, truth.seams[m.truth]);
    s.max_error = max_error_to_seam(pos, truth.seams[m.truth]);
    s.hausdorff = m.hausdorff;
    sum_sq += s.rmse * s.rmse * static_cast<double>(pos.size());
    n += pos.size();
    rep.mean_rmse += s.rmse;
    rep.max_error = std::max(rep.max_error, s.max_error);
    rep.seams.push_back(s);
  }
  rep.matched = rep.seams.size();
  rep.missed = rep.truth_count - rep.matched;
  rep.spurious = rep.detected - rep.matched;
  if (rep.matched > 0) {
    rep.mean_rmse /= static_cast<double>(rep.matched);
    rep.pooled_rmse = std::sqrt(sum_sq / static_cast<double>(n));
  }
  return rep;
}

/// Runs the pipeline and scores it. Pipeline errors are captured in the
/// report instead of propagating.
inline EvalReport evaluate_scene(const SceneBundle& scene, const GroundTruth& truth, const PipelineConfig& config,
                                 double match_radius = kDefaultMatchRadius) {
  try {
    const auto result = run_pipeline(scene, config);
    EvalReport rep = evaluate(result.paths, truth, match_radius);
    rep.pipeline = result.report;
    return rep;
  } catch (const Error& e) {
    EvalReport rep;
    rep.truth_count = truth.seams.size();
    rep.missed = rep.truth_count;
    rep.failed = true;
    rep.error = e.what();
    return rep;
  }
}

struct SweepRow {
  double r = 0.0;
  std::size_t points = 0;  // entering region growing
  EvalReport report;
};

/// One full pipeline run per voxel size, rows ordered by r. Failed runs are
/// kept as rows with `report.failed` set. Point counts are taken from a
/// separate downsampling pass so failed rows still carry them.
inline std::vector<SweepRow> run_sweep(const SceneBundle& scene, const GroundTruth& truth, const PipelineConfig& config,
                                       std::vector<double> r_values) {
  std::sort(r_values.begin(), r_values.end());
  std::vector<SweepRow> rows;
  for (double r : r_values) {
    PipelineConfig c = config;
    c.voxel_size_mm = r;
    SweepRow row;
    row.r = r;
    row.report = evaluate_scene(scene, truth, c);
    row.points = row.report.pipeline.counts.after_downsample;
    if (row.report.failed) {
      try {
        PipelineConfig probe = c;
        PointCloud cloud = scene.cloud;
        if (probe.crop && !scene.masks.empty()) {
          cloud = crop_cloud(scene.cloud, build_seam_roi(scene.masks, probe.dilate_px), scene.intrinsics);
        }
        cloud = passthrough_filter(transform_cloud(scene.world_from_camera(), cloud), probe.passthrough);
        row.points = cloud.empty() ? 0 : voxel_downsample(cloud, r).size();
      } catch (const Error&) {
        row.points = 0;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct AblationResult {
  EvalReport cropped;
  EvalReport uncropped;
};

/// Same configuration with and without the ROI crop.
inline AblationResult run_ablation(const SceneBundle& scene, const GroundTruth& truth, const PipelineConfig& config) {
  if (scene.masks.empty()) throw Error(ErrorCode::InvalidArgument, "crop ablation needs surface masks");
  PipelineConfig with = config;
  with.crop = true;
  PipelineConfig without = config;
  without.crop = false;
  return {evaluate_scene(scene, truth, with), evaluate_scene(scene, truth, without)};
}

// Reports -------------------------------------------------------------------------

inline nlohmann::ordered_json eval_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["failed"] = r.failed;
  if (r.failed) j["error"] = r.error;
  j["truth"] = r.truth_count;
  j["detected"] = r.detected;
  j["matched"] = r.matched;
  j["missed"] = r.missed;
  j["spurious"] = r.spurious;
  j["pooled_rmse_mm"] = r.pooled_rmse;
  j["mean_rmse_mm"] = r.mean_rmse;
  j["max_error_mm"] = r.max_error;
  auto seams = nlohmann::ordered_json::array();
  for (const auto& s : r.seams) {
    seams.push_back({{"truth", s.truth_index},
                     {"detected", s.detected_index},
                     {"waypoints", s.waypoints},
                     {"rmse_mm", s.rmse},
                     {"max_error_mm", s.max_error},
                     {"hausdorff_mm", s.hausdorff}});
  }
  j["seams"] = std::move(seams);
  j["pipeline"] = report_to_json(r.pipeline);
  return j;
}

inline nlohmann::ordered_json sweep_to_json(std::span<const SweepRow> rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["r_mm"] = row.r;
    j["points"] = row.points;
    j["report"] = eval_to_json(row.report);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "r_mm,points,detected,matched,pooled_rmse_mm,mean_rmse_mm,max_error_mm,total_ms,status\n";
  char buf[256];
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof buf, "%.3f,%zu,%zu,%zu,%.6f,%.6f,%.6f,%.3f,%s\n", row.r, row.points, r.detected,
                  r.matched, r.pooled_rmse, r.mean_rmse, r.max_error, r.pipeline.timings_ms.total(),
                  r.failed ? "failed" : "ok");
    out += buf;
  }
  return out;
}

inline std::string ablation_to_csv(const AblationResult& a) {
  std::string out = "arm,points_grow,detected,matched,mean_rmse_mm,max_error_mm,crop_ms,downsample_ms,features_ms,"
                    "grow_ms,refine_ms,fit_ms,total_ms,status\n";
  char buf[512];
  for (const auto& [name, r] : {std::pair<const char*, const EvalReport*>{"cropped", &a.cropped},
                                {"uncropped", &a.uncropped}}) {
    const auto& t = r->pipeline.timings_ms;
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%.6f,%.6f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%s\n", name,
                  r->pipeline.counts.after_downsample, r->detected, r->matched, r->mean_rmse, r->max_error, t.crop,
                  t.downsample, t.features, t.grow, t.refine, t.fit, t.total(), r->failed ? "failed" : "ok");
    out += buf;
  }
  return out;
}

}  // namespace seamforge
