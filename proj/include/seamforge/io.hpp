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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seamforge/core.hpp"
#include "seamforge/crop.hpp"
#include "seamforge/path_fit.hpp"

namespace seamforge {

namespace fs = std::filesystem;

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(tok) + "' on line " + std::to_string(line_no));
  }
  return v;
}

inline std::size_t parse_size(std::string_view tok, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "bad " + std::string(what) + " '" + std::string(tok) + "'");
  }
  return v;
}

inline void append_fixed6(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "nan";
    return;
  }
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string_view s(buf, static_cast<std::size_t>(n));
  if (s == "-0.000000") s = "0.000000";
  out += s;
}

/// Rounds to 6 decimals and clears negative zero, for stable JSON output.
inline double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace detail

// PLY ------------------------------------------------------------------------

/// ASCII PLY with vertex x, y, z and optional nx, ny, nz and curvature. An
/// organized cloud is announced with a `comment organized <rows> <cols>`
/// header line; invalid entries are written as nan.
inline PointCloud read_ply(const fs::path& path) {
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "ply") throw Error(ErrorCode::ParseError, "missing 'ply' magic in " + path.string());

  std::optional<Organization> org;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool saw_vertex = false;
  bool saw_format = false;
  std::vector<std::string> props;
  for (;;) {
    if (!next_line()) throw Error(ErrorCode::ParseError, "unterminated PLY header");
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw Error(ErrorCode::ParseError, "malformed format line");
      if (tok[1] != "ascii") throw Error(ErrorCode::UnsupportedFormat, "only ASCII PLY is supported, got " + std::string(tok[1]));
      saw_format = true;
    } else if (tok[0] == "comment") {
      if (tok.size() == 4 && tok[1] == "organized") {
        org = Organization{detail::parse_size(tok[2], "row count"), detail::parse_size(tok[3], "column count")};
      }
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw Error(ErrorCode::ParseError, "malformed element line");
      in_vertex = tok[1] == "vertex";
      if (in_vertex) {
        if (saw_vertex) throw Error(ErrorCode::ParseError, "duplicate vertex element");
        vertex_count = detail::parse_size(tok[2], "vertex count");
        saw_vertex = true;
      } else if (detail::parse_size(tok[2], "element count") != 0) {
        throw Error(ErrorCode::UnsupportedFormat, "elements other than vertex are not supported");
      }
    } else if (tok[0] == "property") {
      if (tok.size() < 3) throw Error(ErrorCode::ParseError, "malformed property line");
      if (tok[1] == "list") throw Error(ErrorCode::UnsupportedFormat, "list properties are not supported");
      if (in_vertex) props.emplace_back(tok[2]);
    } else if (tok[0] != "obj_info") {
      throw Error(ErrorCode::ParseError, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_format) throw Error(ErrorCode::ParseError, "PLY header has no format line");
  if (!saw_vertex) throw Error(ErrorCode::ParseError, "PLY header has no vertex element");

  auto column = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int cx = column("x"), cy = column("y"), cz = column("z");
  if (cx < 0 || cy < 0 || cz < 0) throw Error(ErrorCode::ParseError, "vertex element lacks x, y or z");
  const int cnx = column("nx"), cny = column("ny"), cnz = column("nz"), ccurv = column("curvature");
  const bool has_normals = cnx >= 0 && cny >= 0 && cnz >= 0;

  std::vector<Point3> pts;
  std::vector<Vector3> normals;
  std::vector<double> curv;
  pts.reserve(vertex_count);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!next_line()) throw Error(ErrorCode::ParseError, "expected " + std::to_string(vertex_count) + " vertices, got " + std::to_string(v));
    const auto tok = detail::split_ws(line);
    if (tok.size() != props.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " + std::to_string(tok.size()) +
                                             " values, expected " + std::to_string(props.size()));
    }
    auto val = [&](int c) { return detail::parse_double(tok[static_cast<std::size_t>(c)], line_no); };
    pts.emplace_back(val(cx), val(cy), val(cz));
    if (has_normals) normals.emplace_back(val(cnx), val(cny), val(cnz));
    if (ccurv >= 0) curv.push_back(val(ccurv));
  }
  while (next_line()) {
    if (!detail::split_ws(line).empty()) throw Error(ErrorCode::ParseError, "trailing data after vertices");
  }

  PointCloud cloud;
  if (org) {
    if (org->rows * org->cols != vertex_count) {
      throw Error(ErrorCode::ParseError, "organized comment does not match the vertex count");
    }
    cloud = PointCloud::organized(org->rows, org->cols, std::move(pts));
  } else {
    for (const auto& p : pts) {
      if (!is_finite(p)) throw Error(ErrorCode::ParseError, "non-finite coordinate in unorganized cloud");
    }
    cloud.points = std::move(pts);
  }
  if (has_normals) {
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (!cloud.is_valid(i)) {
        normals[i] = Vector3::UnitZ();
        continue;
      }
      const double len = normals[i].norm();
      if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::ParseError, "zero or non-finite normal");
      normals[i] /= len;
    }
    cloud.normals = std::move(normals);
  }
  if (ccurv >= 0) cloud.curvatures = std::move(curv);
  return cloud;
}

inline std::string format_ply(const PointCloud& cloud) {
  cloud.check();
  std::string out = "ply\nformat ascii 1.0\n";
  if (cloud.organization) {
    out += "comment organized " + std::to_string(cloud.organization->rows) + " " +
           std::to_string(cloud.organization->cols) + "\n";
  }
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out += "property double nx\nproperty double ny\nproperty double nz\n";
  if (cloud.has_curvatures()) out += "property double curvature\n";
  out += "end_header\n";
  out.reserve(out.size() + cloud.size() * 40);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const bool ok = cloud.is_valid(i);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < 3; ++k) {
      if (k) out += ' ';
      detail::append_fixed6(out, ok ? cloud.points[i][k] : nan);
    }
    if (cloud.has_normals()) {
      for (int k = 0; k < 3; ++k) {
        out += ' ';
        detail::append_fixed6(out, cloud.normals[i][k]);
      }
    }
    if (cloud.has_curvatures()) {
      out += ' ';
      detail::append_fixed6(out, cloud.curvatures[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_ply(const PointCloud& cloud, const fs::path& path) { detail::write_file(path, format_ply(cloud)); }

// PGM ------------------------------------------------------------------------

/// Binary PGM (P5, maxval 255). Pixels >= 128 are surface.
inline MaskImage read_mask_pgm(const fs::path& path) {
  const std::string data = detail::read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw Error(ErrorCode::ParseError, "truncated PGM header in " + path.string());
    return data.substr(start, pos - start);
  };
  const std::string magic = next_token();
  if (magic == "P2") throw Error(ErrorCode::UnsupportedFormat, "ASCII PGM (P2) is not supported");
  if (magic != "P5") throw Error(ErrorCode::ParseError, "not a PGM file: " + path.string());
  const std::size_t w = detail::parse_size(next_token(), "PGM width");
  const std::size_t h = detail::parse_size(next_token(), "PGM height");
  const std::size_t maxval = detail::parse_size(next_token(), "PGM maxval");
  if (maxval != 255) throw Error(ErrorCode::UnsupportedFormat, "PGM maxval must be 255");
  if (w == 0 || h == 0) throw Error(ErrorCode::ParseError, "PGM has zero size");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw Error(ErrorCode::ParseError, "missing separator before PGM raster");
  }
  ++pos;
  if (data.size() - pos != w * h) {
    throw Error(ErrorCode::ParseError, "PGM raster has " + std::to_string(data.size() - pos) + " bytes, expected " +
                                           std::to_string(w * h));
  }
  MaskImage mask(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    mask.data[i] = static_cast<unsigned char>(data[pos + i]) >= 128 ? 255 : 0;
  }
  return mask;
}

inline void write_mask_pgm(const MaskImage& mask, const fs::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(mask.data.data()), mask.data.size());
  detail::write_file(path, out);
}

// Scene manifest --------------------------------------------------------------

struct SceneBundle {
  PointCloud cloud;
  std::vector<MaskImage> masks;
  std::optional<CameraIntrinsics> intrinsics;
  RigidTransform tool_from_camera;
  RigidTransform world_from_tool;

  RigidTransform world_from_camera() const { return compose(world_from_tool, tool_from_camera); }

  void check() const {
    for (const auto& m : masks) {
      if (!m.same_shape(masks.front())) throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
    }
    if (!masks.empty() && cloud.organization) {
      if (cloud.organization->rows != masks.front().height || cloud.organization->cols != masks.front().width) {
        throw Error(ErrorCode::DimensionMismatch, "mask size differs from the organized cloud size");
      }
    }
    if (intrinsics) intrinsics->check();
  }
};

namespace detail {
inline Matrix4 matrix_from_json(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::ParseError, std::string(key) + " must be a 4x4 array");
  Matrix4 m;
  for (int r = 0; r < 4; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4) throw Error(ErrorCode::ParseError, std::string(key) + " must be a 4x4 array");
    for (int c = 0; c < 4; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string(key) + " has a non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

inline nlohmann::ordered_json matrix_to_json(const Matrix4& m) {
  auto out = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    auto row = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline nlohmann::json parse_json(const std::string& text, const fs::path& path) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}
}  // namespace detail

/// Manifest paths are resolved relative to the manifest's directory.
inline SceneBundle read_scene(const fs::path& manifest_path) {
  const auto j = detail::parse_json(detail::read_file(manifest_path), manifest_path);
  const fs::path base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    SceneBundle scene;
    if (!j.is_object() || !j.contains("cloud")) throw Error(ErrorCode::ParseError, "manifest lacks 'cloud'");
    scene.cloud = read_ply(resolve(j.at("cloud").get<std::string>()));
    if (j.contains("masks")) {
      for (const auto& m : j.at("masks")) scene.masks.push_back(read_mask_pgm(resolve(m.get<std::string>())));
    }
    if (j.contains("intrinsics") && !j.at("intrinsics").is_null()) {
      const auto& in = j.at("intrinsics");
      CameraIntrinsics ci;
      ci.fx = in.at("fx").get<double>();
      ci.fy = in.at("fy").get<double>();
      ci.cx = in.at("cx").get<double>();
      ci.cy = in.at("cy").get<double>();
      ci.width = in.at("width").get<std::size_t>();
      ci.height = in.at("height").get<std::size_t>();
      scene.intrinsics = ci;
    }
    scene.tool_from_camera =
        RigidTransform::from_matrix(detail::matrix_from_json(j.at("tool_from_camera"), "tool_from_camera"), 1e-6);
    scene.world_from_tool =
        RigidTransform::from_matrix(detail::matrix_from_json(j.at("world_from_tool"), "world_from_tool"), 1e-6);
    scene.check();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, manifest_path.string() + ": " + e.what());
  }
}

/// Writes cloud.ply, surface_<i>.pgm and manifest.json into `dir`.
inline fs::path write_scene(const SceneBundle& scene, const fs::path& dir,
                            const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
  fs::create_directories(dir);
  write_ply(scene.cloud, dir / "cloud.ply");
  nlohmann::ordered_json j;
  j["cloud"] = "cloud.ply";
  j["masks"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < scene.masks.size(); ++i) {
    const std::string name = "surface_" + std::to_string(i) + ".pgm";
    write_mask_pgm(scene.masks[i], dir / name);
    j["masks"].push_back(name);
  }
  if (scene.intrinsics) {
    const auto& ci = *scene.intrinsics;
    j["intrinsics"] = {{"fx", ci.fx}, {"fy", ci.fy}, {"cx", ci.cx}, {"cy", ci.cy}, {"width", ci.width}, {"height", ci.height}};
  }
  j["tool_from_camera"] = detail::matrix_to_json(scene.tool_from_camera.matrix());
  j["world_from_tool"] = detail::matrix_to_json(scene.world_from_tool.matrix());
  for (const auto& [k, v] : extra.items()) j[k] = v;
  const fs::path manifest = dir / "manifest.json";
  detail::write_file(manifest, j.dump(2) + "\n");
  return manifest;
}

// Weld paths ------------------------------------------------------------------

inline nlohmann::ordered_json weld_paths_to_json(std::span<const WeldPath> paths) {
  nlohmann::ordered_json root;
  root["seams"] = nlohmann::ordered_json::array();
  for (const auto& path : paths) {
    nlohmann::ordered_json seam;
    seam["type"] = std::string(to_string(path.kind));
    seam["residual_mm"] = detail::round6(path.residual_mm);
    seam["waypoints"] = nlohmann::ordered_json::array();
    for (const auto& wp : path.waypoints) {
      nlohmann::ordered_json w;
      w["x"] = detail::round6(wp.position.x());
      w["y"] = detail::round6(wp.position.y());
      w["z"] = detail::round6(wp.position.z());
      w["w"] = detail::round6(wp.orientation.w);
      w["p"] = detail::round6(wp.orientation.p);
      w["r"] = detail::round6(wp.orientation.r);
      seam["waypoints"].push_back(std::move(w));
    }
    root["seams"].push_back(std::move(seam));
  }
  return root;
}

inline std::string format_weld_paths(std::span<const WeldPath> paths) { return weld_paths_to_json(paths).dump(2) + "\n"; }

inline void write_weld_path(std::span<const WeldPath> paths, const fs::path& path) {
  detail::write_file(path, format_weld_paths(paths));
}

inline std::vector<WeldPath> read_weld_path(const fs::path& path) {
  const auto j = detail::parse_json(detail::read_file(path), path);
  std::vector<WeldPath> out;
  try {
    for (const auto& s : j.at("seams")) {
      WeldPath wp;
      const auto type = s.at("type").get<std::string>();
      if (type == "linear") {
        wp.kind = SeamKind::Linear;
      } else if (type == "curved") {
        wp.kind = SeamKind::Curved;
      } else {
        throw Error(ErrorCode::ParseError, "unknown seam type '" + type + "'");
      }
      wp.residual_mm = s.at("residual_mm").get<double>();
      for (const auto& w : s.at("waypoints")) {
        wp.waypoints.push_back({Point3(w.at("x").get<double>(), w.at("y").get<double>(), w.at("z").get<double>()),
                                {w.at("w").get<double>(), w.at("p").get<double>(), w.at("r").get<double>()}});
      }
      out.push_back(std::move(wp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace seamforge
