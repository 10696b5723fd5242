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
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seamforge/core.hpp"
#include "seamforge/crop.hpp"
#include "seamforge/features.hpp"
#include "seamforge/io.hpp"
#include "seamforge/path_fit.hpp"

namespace seamforge {

enum class WorkpieceKind { Butt, TeeRibArray, CurvedSinusoid };

inline std::string_view to_string(WorkpieceKind k) {
  switch (k) {
    case WorkpieceKind::Butt: return "butt";
    case WorkpieceKind::TeeRibArray: return "tee-rib-array";
    case WorkpieceKind::CurvedSinusoid: return "curved-sinusoid";
  }
  return "?";
}

inline WorkpieceKind workpiece_kind_from_string(std::string_view s) {
  if (s == "butt") return WorkpieceKind::Butt;
  if (s == "tee-rib-array") return WorkpieceKind::TeeRibArray;
  if (s == "curved-sinusoid") return WorkpieceKind::CurvedSinusoid;
  throw Error(ErrorCode::InvalidSpec, "unknown workpiece kind '" + std::string(s) + "'");
}

/// Workpiece and scan description. The world frame has z up with the base
/// plate at z = 0; the camera sits at (0, 0, standoff) looking straight down
/// and its image footprint on the base is width x length.
///
///  butt            V-groove z = tan(a)|y|, seam along x at y = 0
///  tee-rib-array   tent-shaped ribs running along y, two fillet seams each
///  curved-sinusoid ramp rising from the seam y = A sin(2 pi x / wavelength)
struct WorkpieceSpec {
  WorkpieceKind kind = WorkpieceKind::Butt;
  double width_mm = 300.0;   // footprint along x
  double length_mm = 300.0;  // footprint along y
  double height_mm = 40.0;   // rib height
  int rib_count = 1;
  double dihedral_deg = 140.0;  // interior angle between the two surfaces at a seam
  double pitch_mm = 1.0;        // pixel footprint on the base plate
  double noise_sigma_mm = 0.1;
  std::uint64_t seed = 1;
  double amplitude_mm = 20.0;
  double wavelength_mm = 800.0;
  double standoff_mm = 2000.0;

  /// Face slope angle from the horizontal, degrees.
  double face_slope_deg() const {
    return kind == WorkpieceKind::Butt ? (180.0 - dihedral_deg) / 2.0 : 180.0 - dihedral_deg;
  }
  std::size_t cols() const { return static_cast<std::size_t>(std::llround(width_mm / pitch_mm)); }
  std::size_t rows() const { return static_cast<std::size_t>(std::llround(length_mm / pitch_mm)); }

  void check() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
    if (!(pitch_mm > 0.0) || !std::isfinite(pitch_mm)) bad("pitch must be positive");
    if (!(noise_sigma_mm >= 0.0) || !std::isfinite(noise_sigma_mm)) bad("noise sigma must be non-negative");
    if (!(width_mm > 0.0) || !(length_mm > 0.0)) bad("footprint dimensions must be positive");
    if (cols() < 8 || rows() < 8) bad("footprint must span at least 8 x 8 pixels");
    if (!(dihedral_deg > 0.0 && dihedral_deg < 180.0)) bad("dihedral angle must lie in (0, 180)");
    if (kind != WorkpieceKind::Butt && !(dihedral_deg > 90.0)) bad("dihedral angle must exceed 90 for this kind");
    if (kind == WorkpieceKind::TeeRibArray) {
      if (rib_count < 1) bad("rib count must be at least 1");
      if (!(height_mm > 0.0)) bad("rib height must be positive");
      const double half = height_mm / std::tan(deg2rad(face_slope_deg()));
      if (!(width_mm / rib_count > 2.0 * half)) bad("ribs overlap: reduce rib count or height");
    }
    if (kind == WorkpieceKind::CurvedSinusoid) {
      if (!(amplitude_mm >= 0.0) || !(wavelength_mm > 0.0)) bad("sinusoid needs amplitude >= 0 and wavelength > 0");
      if (!(length_mm / 2.0 > amplitude_mm)) bad("sinusoid leaves the footprint");
    }
    const double top = max_height();
    if (!(standoff_mm > top + 1.0)) bad("camera standoff must clear the workpiece");
    // The depth search needs each camera ray to cross every face once.
    const double reach = std::hypot(width_mm, length_mm) / 2.0 / standoff_mm;
    if (!(std::tan(deg2rad(face_slope_deg())) * reach < 0.95)) bad("faces too steep for the camera footprint");
  }

  double max_height() const {
    const double s = std::tan(deg2rad(face_slope_deg()));
    switch (kind) {
      case WorkpieceKind::Butt: return s * length_mm / 2.0;
      case WorkpieceKind::TeeRibArray: return height_mm;
      case WorkpieceKind::CurvedSinusoid: return s * (length_mm / 2.0 + amplitude_mm);
    }
    return 0.0;
  }
};

/// One analytic seam in the world frame. Linear seams are segments; curved
/// seams follow (x, A sin(2 pi x / wavelength), 0) for x in [x_min, x_max].
struct TruthSeam {
  SeamKind kind = SeamKind::Linear;
  Point3 start = Point3::Zero();
  Point3 end = Point3::Zero();
  double amplitude = 0.0;
  double wavelength = 1.0;
  double x_min = 0.0;
  double x_max = 0.0;
  int surface_a = 0;
  int surface_b = 0;

  Point3 curve_at(double x) const {
    return {x, amplitude * std::sin(2.0 * std::numbers::pi * x / wavelength), 0.0};
  }
};

struct GroundTruth {
  std::vector<TruthSeam> seams;
  std::vector<MaskImage> masks;  // one per surface, indexed by surface id
  std::vector<int> surface_ids;  // per cloud point; -1 for invalid pixels
};

struct GeneratedScene {
  SceneBundle scene;
  GroundTruth truth;
  WorkpieceSpec spec;
};

inline constexpr std::string_view kRngAlgorithm = "splitmix64-seeded mt19937_64 per image row, Box-Muller normals";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Portable normal sampler; std::normal_distribution is not specified
/// bit-for-bit across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Heightfield {
  const WorkpieceSpec& spec;
  double slope;
  std::vector<double> rib_centres;
  double rib_half = 0.0;

  explicit Heightfield(const WorkpieceSpec& s) : spec(s), slope(std::tan(deg2rad(s.face_slope_deg()))) {
    if (s.kind == WorkpieceKind::TeeRibArray) {
      rib_half = s.height_mm / slope;
      const double pitch = s.width_mm / s.rib_count;
      for (int i = 0; i < s.rib_count; ++i) rib_centres.push_back(-s.width_mm / 2.0 + (i + 0.5) * pitch);
    }
  }

  double sinus(double x) const {
    return spec.amplitude_mm * std::sin(2.0 * std::numbers::pi * x / spec.wavelength_mm);
  }

  double height(double x, double y) const {
    switch (spec.kind) {
      case WorkpieceKind::Butt: return slope * std::abs(y);
      case WorkpieceKind::TeeRibArray: {
        double h = 0.0;
        for (double c : rib_centres) h = std::max(h, spec.height_mm - slope * std::abs(x - c));
        return h;
      }
      case WorkpieceKind::CurvedSinusoid: return slope * std::max(0.0, y - sinus(x));
    }
    return 0.0;
  }

  int surface(double x, double y) const {
    switch (spec.kind) {
      case WorkpieceKind::Butt: return y < 0.0 ? 0 : 1;
      case WorkpieceKind::TeeRibArray:
        for (std::size_t i = 0; i < rib_centres.size(); ++i) {
          if (std::abs(x - rib_centres[i]) < rib_half) return static_cast<int>(i) + 1;
        }
        return 0;
      case WorkpieceKind::CurvedSinusoid: return y > sinus(x) ? 1 : 0;
    }
    return 0;
  }

  int surface_count() const {
    return spec.kind == WorkpieceKind::TeeRibArray ? spec.rib_count + 1 : 2;
  }
};

}  // namespace detail

/// Pinhole intrinsics whose footprint on the base plate has the requested pitch.
inline CameraIntrinsics fixture_intrinsics(const WorkpieceSpec& spec) {
  CameraIntrinsics ci;
  ci.width = spec.cols();
  ci.height = spec.rows();
  ci.fx = spec.standoff_mm / spec.pitch_mm;
  ci.fy = ci.fx;
  ci.cx = (static_cast<double>(ci.width) - 1.0) / 2.0;
  ci.cy = (static_cast<double>(ci.height) - 1.0) / 2.0;
  return ci;
}

/// Camera pose in the world: at (0, 0, standoff), optical axis along -z,
/// image rows running along -y.
inline RigidTransform fixture_world_from_camera(const WorkpieceSpec& spec) {
  Matrix3 r = Matrix3::Zero();
  r(0, 0) = 1.0;
  r(1, 1) = -1.0;
  r(2, 2) = -1.0;
  return RigidTransform(r, Vector3(0.0, 0.0, spec.standoff_mm));
}

/// Hand-eye calibration used by every fixture.
inline RigidTransform fixture_tool_from_camera() {
  return RigidTransform::rotation_about(Vector3::UnitZ(), 90.0, Vector3(35.0, -20.0, 110.0));
}

inline std::vector<TruthSeam> truth_seams(const WorkpieceSpec& spec) {
  const detail::Heightfield hf(spec);
  const double x_lo = -(static_cast<double>(spec.cols()) - 1.0) / 2.0 * spec.pitch_mm;
  const double y_lo = -(static_cast<double>(spec.rows()) - 1.0) / 2.0 * spec.pitch_mm;
  std::vector<TruthSeam> out;
  switch (spec.kind) {
    case WorkpieceKind::Butt: {
      TruthSeam s;
      s.start = {x_lo, 0.0, 0.0};
      s.end = {-x_lo, 0.0, 0.0};
      s.surface_a = 0;
      s.surface_b = 1;
      out.push_back(s);
      break;
    }
    case WorkpieceKind::TeeRibArray:
      for (std::size_t i = 0; i < hf.rib_centres.size(); ++i) {
        for (double side : {-1.0, 1.0}) {
          TruthSeam s;
          const double x = hf.rib_centres[i] + side * hf.rib_half;
          s.start = {x, y_lo, 0.0};
          s.end = {x, -y_lo, 0.0};
          s.surface_a = 0;
          s.surface_b = static_cast<int>(i) + 1;
          out.push_back(s);
        }
      }
      break;
    case WorkpieceKind::CurvedSinusoid: {
      TruthSeam s;
      s.kind = SeamKind::Curved;
      s.amplitude = spec.amplitude_mm;
      s.wavelength = spec.wavelength_mm;
      s.x_min = x_lo;
      s.x_max = -x_lo;
      s.surface_a = 0;
      s.surface_b = 1;
      out.push_back(s);
      break;
    }
  }
  return out;
}

/// Renders the organized cloud (camera frame), the per-surface masks and the
/// truth. Rows use independent random streams, so the result does not depend
/// on `threads`.
inline GeneratedScene generate(const WorkpieceSpec& spec, unsigned threads = 1) {
  spec.check();
  const detail::Heightfield hf(spec);
  const CameraIntrinsics ci = fixture_intrinsics(spec);
  const std::size_t rows = ci.height;
  const std::size_t cols = ci.width;
  const double h_max = spec.max_height();

  std::vector<Point3> pts(rows * cols, Point3::Zero());
  std::vector<int> ids(rows * cols, -1);
  parallel_for(rows, threads, [&](std::size_t v) {
    detail::NormalStream noise(detail::splitmix64(spec.seed ^ detail::splitmix64(v + 1)));
    for (std::size_t u = 0; u < cols; ++u) {
      const Vector3 d((static_cast<double>(u) - ci.cx) / ci.fx, (static_cast<double>(v) - ci.cy) / ci.fy, 1.0);
      // World position along the ray at camera depth t: (t dx, -t dy, standoff - t).
      auto g = [&](double t) { return spec.standoff_mm - t - hf.height(t * d.x(), -t * d.y()); };
      double lo = spec.standoff_mm - h_max - 1.0;
      double hi = spec.standoff_mm + 1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
      }
      const double t = 0.5 * (lo + hi);
      const std::size_t idx = v * cols + u;
      ids[idx] = hf.surface(t * d.x(), -t * d.y());
      const double e = spec.noise_sigma_mm > 0.0 ? spec.noise_sigma_mm * noise.next() : 0.0;
      pts[idx] = t * d + e * d.normalized();
    }
  });

  GeneratedScene out;
  out.spec = spec;
  out.scene.cloud = PointCloud::organized(rows, cols, std::move(pts));
  out.scene.intrinsics = ci;
  out.scene.tool_from_camera = fixture_tool_from_camera();
  out.scene.world_from_tool = compose(fixture_world_from_camera(spec), invert(out.scene.tool_from_camera));
  for (int s = 0; s < hf.surface_count(); ++s) {
    MaskImage m(cols, rows);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == s) m.data[i] = 255;
    }
    out.scene.masks.push_back(std::move(m));
  }
  out.truth.seams = truth_seams(spec);
  out.truth.masks = out.scene.masks;
  out.truth.surface_ids = std::move(ids);
  return out;
}

// Distances -------------------------------------------------------------------

inline double point_to_segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Vector3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

/// Nearest point on a curved seam: dense bracketing, then golden-section
/// refinement of every sampled local minimum to 1e-9 mm in x.
inline double point_to_curve_distance(const Point3& p, const TruthSeam& s) {
  constexpr std::size_t kSamples = 1024;
  auto d2 = [&](double x) { return (p - s.curve_at(x)).squaredNorm(); };
  const double step = (s.x_max - s.x_min) / static_cast<double>(kSamples);
  std::vector<double> vals(kSamples + 1);
  for (std::size_t i = 0; i <= kSamples; ++i) vals[i] = d2(s.x_min + step * static_cast<double>(i));
  double best = std::min(vals.front(), vals.back());
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 0; i <= kSamples; ++i) {
    const bool left_ok = i == 0 || vals[i] <= vals[i - 1];
    const bool right_ok = i == kSamples || vals[i] <= vals[i + 1];
    if (!left_ok || !right_ok) continue;
    double a = s.x_min + step * static_cast<double>(i == 0 ? 0 : i - 1);
    double b = s.x_min + step * static_cast<double>(std::min(i + 1, kSamples));
    double c = b - inv_phi * (b - a);
    double e = a + inv_phi * (b - a);
    double fc = d2(c);
    double fe = d2(e);
    while (b - a > 1e-9) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - inv_phi * (b - a);
        fc = d2(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + inv_phi * (b - a);
        fe = d2(e);
      }
    }
    best = std::min({best, fc, fe, d2(0.5 * (a + b))});
  }
  return std::sqrt(best);
}

inline double point_to_seam_distance(const Point3& p, const TruthSeam& s) {
  return s.kind == SeamKind::Linear ? point_to_segment_distance(p, s.start, s.end) : point_to_curve_distance(p, s);
}

inline double point_to_seam_distance(const Point3& p, const GroundTruth& truth) {
  if (truth.seams.empty()) throw Error(ErrorCode::InvalidArgument, "ground truth has no seams");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : truth.seams) best = std::min(best, point_to_seam_distance(p, s));
  return best;
}

/// Points along a truth seam, `step` apart in the curve parameter.
inline std::vector<Point3> sample_truth(const TruthSeam& s, double step) {
  std::vector<Point3> out;
  if (s.kind == SeamKind::Linear) {
    const double len = (s.end - s.start).norm();
    const auto n = std::max<long>(1, std::lround(len / step));
    for (long i = 0; i <= n; ++i) out.push_back(s.start + (s.end - s.start) * (static_cast<double>(i) / n));
  } else {
    const auto n = std::max<long>(1, std::lround((s.x_max - s.x_min) / step));
    for (long i = 0; i <= n; ++i) out.push_back(s.curve_at(s.x_min + (s.x_max - s.x_min) * static_cast<double>(i) / n));
  }
  return out;
}

// Serialization -----------------------------------------------------------------

inline nlohmann::ordered_json spec_to_json(const WorkpieceSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(s.kind));
  j["width_mm"] = s.width_mm;
  j["length_mm"] = s.length_mm;
  j["height_mm"] = s.height_mm;
  j["rib_count"] = s.rib_count;
  j["dihedral_deg"] = s.dihedral_deg;
  j["pitch_mm"] = s.pitch_mm;
  j["noise_sigma_mm"] = s.noise_sigma_mm;
  j["seed"] = s.seed;
  j["amplitude_mm"] = s.amplitude_mm;
  j["wavelength_mm"] = s.wavelength_mm;
  j["standoff_mm"] = s.standoff_mm;
  return j;
}

/// Strict: unknown keys and wrong types raise InvalidSpec; missing keys keep
/// the defaults of `base`.
inline WorkpieceSpec spec_from_json(const nlohmann::json& j, WorkpieceSpec base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "workpiece spec must be a JSON object");
  auto num = [&](const std::string& key, const nlohmann::json& v) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidSpec, "'" + key + "' must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") {
      if (!v.is_string()) throw Error(ErrorCode::InvalidSpec, "'kind' must be a string");
      base.kind = workpiece_kind_from_string(v.get<std::string>());
    } else if (key == "width_mm") {
      base.width_mm = num(key, v);
    } else if (key == "length_mm") {
      base.length_mm = num(key, v);
    } else if (key == "height_mm") {
      base.height_mm = num(key, v);
    } else if (key == "rib_count") {
      if (!v.is_number_integer()) throw Error(ErrorCode::InvalidSpec, "'rib_count' must be an integer");
      base.rib_count = v.get<int>();
    } else if (key == "dihedral_deg") {
      base.dihedral_deg = num(key, v);
    } else if (key == "pitch_mm") {
      base.pitch_mm = num(key, v);
    } else if (key == "noise_sigma_mm") {
      base.noise_sigma_mm = num(key, v);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidSpec, "'seed' must be a non-negative integer");
      base.seed = v.get<std::uint64_t>();
    } else if (key == "amplitude_mm") {
      base.amplitude_mm = num(key, v);
    } else if (key == "wavelength_mm") {
      base.wavelength_mm = num(key, v);
    } else if (key == "standoff_mm") {
      base.standoff_mm = num(key, v);
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown workpiece spec key '" + key + "'");
    }
  }
  base.check();
  return base;
}

inline nlohmann::ordered_json truth_to_json(const GroundTruth& truth) {
  auto vec = [](const Point3& p) { return nlohmann::ordered_json::array({p.x(), p.y(), p.z()}); };
  nlohmann::ordered_json root;
  root["seams"] = nlohmann::ordered_json::array();
  for (const auto& s : truth.seams) {
    nlohmann::ordered_json js;
    js["type"] = std::string(to_string(s.kind));
    nlohmann::ordered_json params;
    if (s.kind == SeamKind::Linear) {
      params["start"] = vec(s.start);
      params["end"] = vec(s.end);
    } else {
      params["amplitude"] = s.amplitude;
      params["wavelength"] = s.wavelength;
      params["x_min"] = s.x_min;
      params["x_max"] = s.x_max;
    }
    params["surfaces"] = {s.surface_a, s.surface_b};
    js["params"] = std::move(params);
    root["seams"].push_back(std::move(js));
  }
  return root;
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth truth;
  try {
    for (const auto& js : j.at("seams")) {
      TruthSeam s;
      const auto& params = js.at("params");
      const auto type = js.at("type").get<std::string>();
      auto vec = [](const nlohmann::json& a) {
        return Point3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
      };
      if (type == "linear") {
        s.start = vec(params.at("start"));
        s.end = vec(params.at("end"));
      } else if (type == "curved") {
        s.kind = SeamKind::Curved;
        s.amplitude = params.at("amplitude").get<double>();
        s.wavelength = params.at("wavelength").get<double>();
        s.x_min = params.at("x_min").get<double>();
        s.x_max = params.at("x_max").get<double>();
      } else {
        throw Error(ErrorCode::ParseError, "unknown truth seam type '" + type + "'");
      }
      if (params.contains("surfaces")) {
        s.surface_a = params.at("surfaces").at(0).get<int>();
        s.surface_b = params.at("surfaces").at(1).get<int>();
      }
      truth.seams.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("truth JSON: ") + e.what());
  }
  return truth;
}

/// Writes manifest, cloud, masks and truth.json into `dir`.
inline fs::path write_generated(const GeneratedScene& g, const fs::path& dir) {
  nlohmann::ordered_json extra;
  extra["truth"] = "truth.json";
  extra["generator"] = {{"rng", std::string(kRngAlgorithm)}, {"spec", spec_to_json(g.spec)}};
  const fs::path manifest = write_scene(g.scene, dir, extra);
  detail::write_file(dir / "truth.json", truth_to_json(g.truth).dump(2) + "\n");
  return manifest;
}

/// Truth seams referenced by a scene manifest ("truth" key).
inline GroundTruth read_truth_for_scene(const fs::path& manifest_path) {
  const auto j = detail::parse_json(detail::read_file(manifest_path), manifest_path);
  if (!j.contains("truth")) throw Error(ErrorCode::InvalidArgument, "scene manifest has no ground truth");
  const fs::path p = manifest_path.parent_path() / j.at("truth").get<std::string>();
  return truth_from_json(detail::parse_json(detail::read_file(p), p));
}

// Fixture suite ---------------------------------------------------------------

inline std::vector<std::string> fixture_names() { return {"butt", "tee-1", "tee-5", "curved"}; }

inline WorkpieceSpec fixture_spec(std::string_view name) {
  WorkpieceSpec s;
  if (name == "butt") {
    s.kind = WorkpieceKind::Butt;
    s.width_mm = 300.0;
    s.length_mm = 300.0;
    s.dihedral_deg = 140.0;
    s.seed = 11;
  } else if (name == "tee-1") {
    s.kind = WorkpieceKind::TeeRibArray;
    s.width_mm = 400.0;
    s.length_mm = 300.0;
    s.rib_count = 1;
    s.dihedral_deg = 135.0;
    s.seed = 12;
  } else if (name == "tee-5") {
    s.kind = WorkpieceKind::TeeRibArray;
    s.width_mm = 2400.0;
    s.length_mm = 300.0;
    s.rib_count = 5;
    s.dihedral_deg = 135.0;
    s.seed = 13;
  } else if (name == "curved") {
    s.kind = WorkpieceKind::CurvedSinusoid;
    s.width_mm = 400.0;
    s.length_mm = 300.0;
    s.amplitude_mm = 20.0;
    s.wavelength_mm = 800.0;
    s.dihedral_deg = 150.0;
    s.seed = 14;
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown fixture '" + std::string(name) + "'");
  }
  s.check();
  return s;
}

/// Generates several specs concurrently, one worker per spec.
inline std::vector<GeneratedScene> generate_all(std::span<const WorkpieceSpec> specs, unsigned threads = 1) {
  std::vector<GeneratedScene> out(specs.size());
  parallel_for(specs.size(), threads, [&](std::size_t i) { out[i] = generate(specs[i]); });
  return out;
}

}  // namespace seamforge
