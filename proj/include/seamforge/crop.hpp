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
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "seamforge/core.hpp"

namespace seamforge {

/// Binary image, row-major, values 0 (background) or 255 (surface).
struct MaskImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  MaskImage() = default;
  MaskImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), data(w * h, fill) {}

  bool at(std::size_t row, std::size_t col) const { return data[row * width + col] != 0; }
  void set(std::size_t row, std::size_t col, bool on = true) { data[row * width + col] = on ? 255 : 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](auto v) { return v != 0; }));
  }
  bool same_shape(const MaskImage& o) const { return width == o.width && height == o.height; }

  friend bool operator==(const MaskImage&, const MaskImage&) = default;
};

namespace detail {
// One pass of a 1-d box dilation over `n` samples spaced by `stride`.
inline void dilate_line(const std::uint8_t* in, std::uint8_t* out, std::size_t n, std::size_t stride, std::size_t d,
                        std::vector<std::uint32_t>& prefix) {
  prefix.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (in[i * stride] != 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= d ? i - d : 0;
    const std::size_t hi = std::min(n, i + d + 1);
    out[i * stride] = prefix[hi] - prefix[lo] > 0 ? 255 : 0;
  }
}
}  // namespace detail

/// Chebyshev dilation: square structuring element of side 2d+1, separable.
inline MaskImage dilate_mask(const MaskImage& mask, std::size_t d) {
  if (d == 0) return mask;
  MaskImage tmp(mask.width, mask.height);
  MaskImage out(mask.width, mask.height);
  std::vector<std::uint32_t> prefix;
  for (std::size_t r = 0; r < mask.height; ++r) {
    detail::dilate_line(&mask.data[r * mask.width], &tmp.data[r * mask.width], mask.width, 1, d, prefix);
  }
  for (std::size_t c = 0; c < mask.width; ++c) {
    detail::dilate_line(&tmp.data[c], &out.data[c], mask.height, mask.width, d, prefix);
  }
  return out;
}

/// Seam region of interest: union of pairwise intersections of dilated
/// surface masks, plus which surface pairs contributed.
struct SeamRoi {
  MaskImage roi;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline SeamRoi build_seam_roi(std::span<const MaskImage> masks, std::size_t d) {
  if (masks.size() < 2) throw Error(ErrorCode::TooFewMasks, "at least two surface masks are required");
  for (const auto& m : masks) {
    if (!m.same_shape(masks.front())) throw Error(ErrorCode::DimensionMismatch, "surface masks differ in size");
  }
  std::vector<MaskImage> dilated;
  dilated.reserve(masks.size());
  for (const auto& m : masks) dilated.push_back(dilate_mask(m, d));

  SeamRoi out{MaskImage(masks.front().width, masks.front().height), {}};
  for (std::size_t i = 0; i < dilated.size(); ++i) {
    for (std::size_t j = i + 1; j < dilated.size(); ++j) {
      bool any = false;
      const auto& a = dilated[i].data;
      const auto& b = dilated[j].data;
      for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p] != 0 && b[p] != 0) {
          out.roi.data[p] = 255;
          any = true;
        }
      }
      if (any) out.pairs.emplace_back(i, j);
    }
  }
  return out;
}

struct CropStats {
  std::size_t input_points = 0;
  std::size_t kept_points = 0;
  std::size_t dropped_invalid = 0;
  std::size_t dropped_out_of_frame = 0;  // unorganized path only
  std::size_t dropped_behind_camera = 0;
};

/// Nearest integer pixel, ties toward +infinity.
inline long round_pixel(double v) { return static_cast<long>(std::floor(v + 0.5)); }

/// Keeps points whose pixel lies in the ROI, in input order. Organized clouds
/// index the ROI directly; unorganized ones are projected through the pinhole
/// intrinsics (z <= 0 and out-of-frame points are dropped).
inline PointCloud crop_cloud(const PointCloud& cloud, const SeamRoi& roi,
                             const std::optional<CameraIntrinsics>& intrinsics, CropStats* stats = nullptr) {
  CropStats local;
  CropStats& st = stats ? *stats : local;
  st = CropStats{};
  st.input_points = cloud.size();
  PointCloud out;
  const bool normals = cloud.has_normals();
  const bool curv = cloud.has_curvatures();
  auto keep = [&](std::size_t i) {
    out.points.push_back(cloud.points[i]);
    if (normals) out.normals.push_back(cloud.normals[i]);
    if (curv) out.curvatures.push_back(cloud.curvatures[i]);
  };

  if (cloud.is_organized()) {
    const auto& org = *cloud.organization;
    if (org.rows != roi.roi.height || org.cols != roi.roi.width) {
      throw Error(ErrorCode::DimensionMismatch, "organized cloud is " + std::to_string(org.rows) + "x" +
                                                    std::to_string(org.cols) + " but the ROI is " +
                                                    std::to_string(roi.roi.height) + "x" +
                                                    std::to_string(roi.roi.width));
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!cloud.is_valid(i)) {
        ++st.dropped_invalid;
        continue;
      }
      if (roi.roi.data[i] != 0) keep(i);
    }
  } else {
    if (!intrinsics) {
      throw Error(ErrorCode::MissingCorrespondence, "unorganized cloud needs camera intrinsics to be cropped");
    }
    intrinsics->check();
    if (intrinsics->width != roi.roi.width || intrinsics->height != roi.roi.height) {
      throw Error(ErrorCode::DimensionMismatch, "intrinsics image size differs from the ROI size");
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!cloud.is_valid(i)) {
        ++st.dropped_invalid;
        continue;
      }
      const Point3& p = cloud.points[i];
      if (!(p.z() > 0.0)) {
        ++st.dropped_behind_camera;
        continue;
      }
      const long u = round_pixel(intrinsics->fx * p.x() / p.z() + intrinsics->cx);
      const long v = round_pixel(intrinsics->fy * p.y() / p.z() + intrinsics->cy);
      if (u < 0 || v < 0 || u >= static_cast<long>(roi.roi.width) || v >= static_cast<long>(roi.roi.height)) {
        ++st.dropped_out_of_frame;
        continue;
      }
      if (roi.roi.at(static_cast<std::size_t>(v), static_cast<std::size_t>(u))) keep(i);
    }
  }
  st.kept_points = out.size();
  return out;
}

}  // namespace seamforge
