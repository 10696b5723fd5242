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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seamforge/seamforge.hpp"

namespace sf = seamforge;
namespace fs = std::filesystem;
using sf::Point3;
using sf::Vector3;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  void fail(const std::string& why) {
    pass_ = false;
    add(why);
  }
  void add(const std::string& s) { out_ << (out_.tellp() > 0 ? "; " : "") << s; }
  void require(bool ok, const std::string& what) {
    if (!ok) fail("failed: " + what);
  }
  Outcome done() const { return {pass_, out_.str()}; }

 private:
  bool pass_ = true;
  std::ostringstream out_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

fs::path scratch_root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("seamforge_accept_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SEAMFORGE_CLI + "\" " + args + " >/dev/null 2>>\"" +
                          (scratch_root() / "cli_stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

const sf::GeneratedScene& fixture(const std::string& name) {
  static std::map<std::string, sf::GeneratedScene> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, sf::generate(sf::fixture_spec(name))).first;
  return it->second;
}

// Oracles -----------------------------------------------------------------------

std::vector<sf::Neighbor> sorted_by_distance(std::vector<sf::Neighbor> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return v;
}

std::vector<sf::Neighbor> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k) {
  std::vector<sf::Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) all.push_back({i, (pts[i] - q).norm()});
  all = sorted_by_distance(std::move(all));
  all.resize(std::min(k, all.size()));
  return all;
}

std::vector<sf::Neighbor> brute_radius(const std::vector<Point3>& pts, const Point3& q, double r) {
  std::vector<sf::Neighbor> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - q).norm();
    if (d <= r) out.push_back({i, d});
  }
  return sorted_by_distance(std::move(out));
}

bool same_neighbors(const std::vector<sf::Neighbor>& a, const std::vector<sf::Neighbor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].index != b[i].index || std::abs(a[i].distance - b[i].distance) > 1e-12) return false;
  }
  return true;
}

sf::PointCloud cloud_of(const std::vector<Point3>& pts) {
  sf::PointCloud c;
  c.points = pts;
  return c;
}

sf::Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

// Criteria ----------------------------------------------------------------------

Outcome oracle_equivalence() {
  Notes notes;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  std::size_t knn_bad = 0, radius_bad = 0, queries = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<Point3> pts(500);
    for (auto& p : pts) p = Point3(u(rng), u(rng), u(rng));
    if (trial % 10 == 0) {
      // lattice-snapped coordinates produce distance ties
      for (auto& p : pts) p = (p / 5.0).array().round().matrix() * 5.0;
    }
    const sf::KdTree tree(cloud_of(pts));
    std::uniform_int_distribution<std::size_t> uk(1, 40);
    std::uniform_real_distribution<double> ur(0.5, 25.0);
    for (int q = 0; q < 50; ++q) {
      const Point3 query = q % 5 == 0 ? pts[static_cast<std::size_t>(q)] : Point3(u(rng), u(rng), u(rng));
      const std::size_t k = uk(rng);
      const double r = q % 7 == 0 ? 5.0 : ur(rng);
      knn_bad += !same_neighbors(tree.knn(query, k), brute_knn(pts, query, k));
      radius_bad += !same_neighbors(tree.radius_search(query, r), brute_radius(pts, query, r));
      ++queries;
    }
  }
  notes.require(knn_bad == 0, std::to_string(knn_bad) + " knn mismatches");
  notes.require(radius_bad == 0, std::to_string(radius_bad) + " radius mismatches");
  notes.add(std::to_string(queries) + " knn + radius queries");

  double worst = 0.0;
  std::size_t count_bad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    std::vector<Point3> pts(5000);
    for (auto& p : pts) p = Point3(u(rng), u(rng), u(rng));
    const double r = 1.0 + trial * 0.37;
    Point3 lo = pts[0];
    for (const auto& p : pts) lo = lo.cwiseMin(p);
    std::map<std::array<long long, 3>, std::pair<Vector3, std::size_t>> groups;
    for (const auto& p : pts) {
      std::array<long long, 3> key{};
      for (int k = 0; k < 3; ++k) key[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor((p[k] - lo[k]) / r));
      auto& g = groups[key];
      if (g.second == 0) g.first.setZero();
      g.first += p;
      ++g.second;
    }
    const auto out = sf::voxel_downsample(cloud_of(pts), r);
    if (out.size() != groups.size()) {
      ++count_bad;
      continue;
    }
    std::size_t i = 0;
    for (const auto& [key, g] : groups) {
      worst = std::max(worst, (out.points[i++] - g.first / static_cast<double>(g.second)).cwiseAbs().maxCoeff());
    }
  }
  notes.require(count_bad == 0, std::to_string(count_bad) + " voxel count mismatches");
  notes.require(worst <= 1e-12, "voxel centroid error " + std::to_string(worst));
  notes.add("voxel max dev " + fmt(worst * 1e15, 2) + "e-15");
  const double secs = seconds_since(t0);
  notes.require(secs < 10.0, "runtime " + fmt(secs, 2) + " s >= 10 s");
  notes.add(fmt(secs, 2) + " s");
  return notes.done();
}

Outcome grid_and_curvature_suites() {
  Notes notes;
  using I = sf::VoxelIndex;
  const sf::VoxelGridSpec spec{3.0, Point3(10, -5, 2)};
  const std::vector<std::pair<Point3, I>> cases{
      {spec.origin, {0, 0, 0}},
      {spec.origin + Vector3(3, 3, 3), {1, 1, 1}},
      {spec.origin + Vector3(2.999999, 5.999999, 6), {0, 1, 2}},
      {spec.origin + Vector3(-1e-9, -3, -3.000001), {-1, -1, -2}},
      {spec.origin + Vector3(7.5, -0.0, 300), {2, 0, 100}},
  };
  std::size_t idx_bad = 0;
  for (const auto& [p, want] : cases) idx_bad += sf::voxel_index(p, spec) != want;
  const sf::VoxelGridSpec unit{1.0, Point3::Zero()};
  idx_bad += sf::voxel_index({0.9999999999, 1.0, -1.0}, unit) != I{0, 1, -1};
  notes.require(idx_bad == 0, std::to_string(idx_bad) + " voxel_index boundary cases wrong");

  auto features = [](const std::vector<Point3>& pts, std::size_t k, const Point3& view) {
    const auto c = cloud_of(pts);
    const sf::KdTree tree(c);
    return sf::estimate_features(c, tree, k, view, 1);
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Point3> blob(2000);
  for (auto& p : blob) p = Point3(u(rng), u(rng), u(rng));
  const auto fb = features(blob, 20, {0, 0, 500});
  const auto [dmin, dmax] = std::minmax_element(fb.curvatures.begin(), fb.curvatures.end());
  notes.require(*dmin >= 0.0 && *dmax <= 1.0 / 3.0, "delta outside [0, 1/3]");

  std::vector<Point3> plane;
  const sf::Matrix3 tilt = random_rotation(rng);
  for (int i = -15; i <= 15; ++i)
    for (int j = -15; j <= 15; ++j) plane.push_back(tilt * Point3(i * 0.8, j * 1.1, 0.0) + Vector3(3, -2, 7));
  const auto fp = features(plane, 30, tilt * Point3(0, 0, 200));
  const double plane_max = *std::max_element(fp.curvatures.begin(), fp.curvatures.end());
  notes.require(plane_max < 1e-9, "planar delta " + std::to_string(plane_max));

  const std::vector<Point3> octa{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  const double octa_delta = sf::surface_stats_from_covariance(sf::covariance_of(octa)).curvature;
  notes.require(std::abs(octa_delta - 1.0 / 3.0) <= 1e-9, "octahedron delta " + std::to_string(octa_delta));

  const Point3 view(0, 0, 500);
  const sf::Matrix3 rot = random_rotation(rng);
  std::vector<Point3> moved, scaled;
  for (const auto& p : blob) {
    moved.push_back(rot * p + Vector3(40, -7, 12));
    scaled.push_back(4.25 * p);
  }
  const auto fr = features(moved, 20, rot * view + Vector3(40, -7, 12));
  const auto fs_ = features(scaled, 20, 4.25 * view);
  double inv = 0.0;
  for (std::size_t i = 0; i < blob.size(); ++i) {
    inv = std::max({inv, std::abs(fr.curvatures[i] - fb.curvatures[i]), std::abs(fs_.curvatures[i] - fb.curvatures[i])});
  }
  notes.require(inv <= 1e-9, "delta invariance error " + std::to_string(inv));
  notes.add("planar " + fmt(plane_max * 1e12, 2) + "e-12, octahedron |d-1/3| " +
            fmt(std::abs(octa_delta - 1.0 / 3.0) * 1e15, 2) + "e-15, invariance " + fmt(inv * 1e12, 2) + "e-12");
  return notes.done();
}

Outcome accuracy() {
  Notes notes;
  const sf::PipelineConfig config;  // r = 3 mm, crop on
  const std::map<std::string, double> rmse_cap{{"butt", 0.6}, {"tee-5", 1.0}, {"curved", 1.0}};
  for (const auto& [name, cap] : rmse_cap) {
    const auto& g = fixture(name);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = sf::evaluate_scene(g.scene, g.truth, config);
    const double secs = seconds_since(t0);
    if (rep.failed) {
      notes.fail(name + " pipeline error: " + rep.error);
      continue;
    }
    double worst_seam = 0.0;
    for (const auto& s : rep.seams) worst_seam = std::max(worst_seam, s.rmse);
    notes.require(rep.matched == rep.truth_count, name + " detected " + std::to_string(rep.matched) + "/" +
                                                      std::to_string(rep.truth_count));
    notes.require(rep.spurious == 0, name + " has " + std::to_string(rep.spurious) + " spurious seams");
    notes.require(worst_seam <= cap, name + " seam RMSE " + fmt(worst_seam) + " > " + fmt(cap, 1));
    if (name == "tee-5") notes.require(rep.mean_rmse <= 0.6, "tee-5 mean RMSE " + fmt(rep.mean_rmse) + " > 0.6");
    notes.require(rep.max_error <= 1.0, name + " max error " + fmt(rep.max_error) + " > 1 mm");
    notes.require(secs <= 60.0, name + " took " + fmt(secs, 1) + " s");
    notes.add(name + ": " + std::to_string(rep.matched) + "/" + std::to_string(rep.truth_count) + " rmse " +
              (name == "tee-5" ? "mean " + fmt(rep.mean_rmse) + " worst " : "") + fmt(worst_seam) + " max " +
              fmt(rep.max_error) + " " + fmt(secs, 1) + " s");
  }
  return notes.done();
}

Outcome sweep() {
  Notes notes;
  const auto& g = fixture("tee-5");
  sf::PipelineConfig config;
  config.crop = false;
  std::vector<double> rs;
  for (int r = 1; r <= 10; ++r) rs.push_back(r);
  const auto rows = sf::run_sweep(g.scene, g.truth, config, rs);
  std::ostringstream table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    table << (i ? " " : "") << "r" << row.r << ":" << row.points << "/" << row.report.matched << "/"
          << (row.report.failed ? std::string("fail") : fmt(row.report.pooled_rmse));
    if (i > 0) {
      notes.require(row.points <= rows[i - 1].points,
                    "point count rises from r=" + fmt(rows[i - 1].r, 0) + " to r=" + fmt(row.r, 0));
    }
  }
  auto row_at = [&](double r) -> const sf::SweepRow& {
    return *std::find_if(rows.begin(), rows.end(), [&](const auto& x) { return x.r == r; });
  };
  const auto& r3 = row_at(3);
  const auto& r10 = row_at(10);
  const double inf = std::numeric_limits<double>::infinity();
  const double e3 = r3.report.failed || r3.report.matched == 0 ? inf : r3.report.pooled_rmse;
  const double e10 = r10.report.failed || r10.report.matched == 0 ? inf : r10.report.pooled_rmse;
  notes.require(e3 < 1.0, "RMSE at r=3 is " + fmt(e3));
  notes.require(e10 > e3, "RMSE at r=10 (" + fmt(e10) + ") is not worse than at r=3 (" + fmt(e3) + ")");
  notes.add("r:points/matched/rmse " + table.str());
  return notes.done();
}

Outcome crop_ablation() {
  Notes notes;
  const auto& g = fixture("tee-5");
  sf::PipelineConfig with;
  sf::PipelineConfig without;
  without.crop = false;
  auto timed = [&](const sf::PipelineConfig& c, double& best) {
    best = std::numeric_limits<double>::infinity();
    sf::PipelineResult res;
    for (int rep = 0; rep < 2; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      res = sf::run_pipeline(g.scene, c);
      best = std::min(best, seconds_since(t0));
    }
    return res;
  };
  double t_with = 0.0, t_without = 0.0;
  const auto a = timed(with, t_with);
  const auto b = timed(without, t_without);
  const double pa = static_cast<double>(a.report.counts.after_downsample);
  const double pb = static_cast<double>(b.report.counts.after_downsample);
  notes.require(pa <= 0.2 * pb, "cropped points " + fmt(pa, 0) + " exceed 20% of " + fmt(pb, 0));
  notes.require(t_with <= 0.5 * t_without, "cropped time " + fmt(t_with, 2) + " s exceeds half of " + fmt(t_without, 2));
  const auto ea = sf::evaluate(a.paths, g.truth);
  const auto eb = sf::evaluate(b.paths, g.truth);
  notes.require(ea.detected == eb.detected && ea.matched == eb.matched,
                "seam counts differ: " + std::to_string(ea.matched) + " vs " + std::to_string(eb.matched));
  double worst = 0.0;
  for (const auto& s : ea.seams) {
    auto it = std::find_if(eb.seams.begin(), eb.seams.end(), [&](const auto& x) { return x.truth_index == s.truth_index; });
    if (it == eb.seams.end()) {
      notes.fail("truth seam " + std::to_string(s.truth_index) + " only found with the crop");
      continue;
    }
    worst = std::max(worst, std::abs(it->rmse - s.rmse));
  }
  notes.require(worst <= 0.2, "per-seam RMSE changes by " + fmt(worst));
  notes.add("points " + fmt(pa, 0) + " vs " + fmt(pb, 0) + " (" + fmt(100.0 * pa / pb, 1) + "%), time " + fmt(t_with, 2) +
            " s vs " + fmt(t_without, 2) + " s (" + fmt(100.0 * t_with / t_without, 1) + "%), seams " +
            std::to_string(ea.matched) + " vs " + std::to_string(eb.matched) + ", max per-seam RMSE change " + fmt(worst));
  return notes.done();
}

Outcome determinism() {
  Notes notes;
  const fs::path dir = scratch_root() / "determinism";
  fs::create_directories(dir);
  if (run_cli("gen --fixture tee-5 --out " + quoted(dir / "scene")) != 0) {
    notes.fail("gen failed");
    return notes.done();
  }
  const auto manifest = dir / "scene" / "manifest.json";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"a.json", ""}, {"b.json", ""}, {"t1.json", " --threads 1"}, {"t4.json", " --threads 4"}};
  for (const auto& [out, extra] : runs) {
    const int code = run_cli("run " + quoted(manifest) + " --out " + quoted(dir / out) + extra);
    notes.require(code == 0, "run " + out + " exited " + std::to_string(code));
  }
  const auto a = slurp(dir / "a.json");
  notes.require(!a.empty(), "empty output");
  notes.require(a == slurp(dir / "b.json"), "repeat run differs");
  notes.require(slurp(dir / "t1.json") == slurp(dir / "t4.json"), "--threads 1 and --threads 4 differ");
  notes.require(a == slurp(dir / "t1.json"), "default and --threads 1 differ");
  notes.add(std::to_string(a.size()) + " bytes, 4 runs identical");
  return notes.done();
}

Outcome equivariance() {
  Notes notes;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut(-300.0, 300.0);
  double worst = 0.0;
  std::size_t waypoints = 0;
  for (const std::string name : {"butt", "tee-1", "curved"}) {
    const auto& g = fixture(name);
    const auto base = sf::run_pipeline(g.scene, sf::PipelineConfig{});
    for (int trial = 0; trial < 2; ++trial) {
      const sf::RigidTransform m(random_rotation(rng), Vector3(ut(rng), ut(rng), ut(rng)));
      sf::SceneBundle moved = g.scene;
      moved.cloud = sf::transform_cloud(m, g.scene.cloud);
      moved.tool_from_camera = sf::compose(g.scene.tool_from_camera, sf::invert(m));
      const auto res = sf::run_pipeline(moved, sf::PipelineConfig{});
      if (res.paths.size() != base.paths.size()) {
        notes.fail(name + ": seam count changed");
        continue;
      }
      for (std::size_t s = 0; s < res.paths.size(); ++s) {
        const auto& pa = base.paths[s].waypoints;
        const auto& pb = res.paths[s].waypoints;
        if (pa.size() != pb.size()) {
          notes.fail(name + ": waypoint count changed");
          continue;
        }
        for (std::size_t i = 0; i < pa.size(); ++i) {
          worst = std::max(worst, (pa[i].position - pb[i].position).norm());
          ++waypoints;
        }
      }
    }
  }
  notes.require(worst < 1e-6, "waypoint moved by " + std::to_string(worst) + " mm");
  notes.add(std::to_string(waypoints) + " waypoints, max shift " + fmt(worst * 1e9, 3) + "e-9 mm");
  return notes.done();
}

Outcome degenerate_inputs() {
  Notes notes;
  const fs::path dir = scratch_root() / "degenerate";
  fs::create_directories(dir);

  sf::SceneBundle plane;
  for (int i = -60; i <= 60; ++i)
    for (int j = -60; j <= 60; ++j) plane.cloud.points.emplace_back(i, j, 800.0);
  const auto manifest = sf::write_scene(plane, dir / "plane");
  const int code = run_cli("run " + quoted(manifest) + " --out " + quoted(dir / "plane.json"));
  notes.require(code == 2, "single plane exit code " + std::to_string(code));

  auto g = fixture("butt");
  for (auto& m : g.scene.masks) std::fill(m.data.begin(), m.data.end(), std::uint8_t{0});
  for (std::size_t r = 0; r < g.scene.masks[0].height; ++r) {
    g.scene.masks[0].set(r, 0);
    g.scene.masks[1].set(r, g.scene.masks[1].width - 1);
  }
  try {
    sf::run_pipeline(g.scene, sf::PipelineConfig{});
    notes.fail("empty ROI did not throw");
  } catch (const sf::Error& e) {
    const std::string msg = e.what();
    notes.require(e.code() == sf::ErrorCode::EmptyCloud && msg.find("ROI crop kept 0") != std::string::npos,
                  "empty ROI gave '" + msg + "'");
  }

  const std::vector<Point3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {5, 5, 5}};
  try {
    sf::fit_plane(line);
    notes.fail("collinear plane fit did not throw");
  } catch (const sf::Error& e) {
    notes.require(e.code() == sf::ErrorCode::DegenerateGeometry, std::string("collinear fit gave ") + e.what());
  }
  notes.add("plane exit " + std::to_string(code) + ", empty ROI EmptyCloud, collinear DegenerateGeometry");
  return notes.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence (kd-tree, voxel grid)", oracle_equivalence},
      {"voxel index and surface variation suites", grid_and_curvature_suites},
      {"accuracy on butt, 5-rib and curved fixtures", accuracy},
      {"voxel size sweep on the 5-rib fixture", sweep},
      {"ROI crop ablation", crop_ablation},
      {"determinism of the run command", determinism},
      {"pipeline equivariance", equivariance},
      {"degenerate inputs", degenerate_inputs},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail << "] (" << fmt(seconds_since(t0), 1)
              << " s)" << std::endl;
  }
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
