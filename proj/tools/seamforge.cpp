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

// seamforge command line: gen | run | eval | sweep.
//
// Exit codes: 0 success (run: at least one seam), 2 no seams found,
// 1 any other error. SEAMFORGE_LOG selects the log level
// (trace, debug, info, warn, error, off; default warn).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "seamforge/seamforge.hpp"

namespace sf = seamforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoSeams = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("seamforge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("SEAMFORGE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::vector<double> parse_csv_numbers(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw sf::Error(sf::ErrorCode::InvalidConfig, flag + " has a malformed number '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (expected && out.size() != expected) {
    throw sf::Error(sf::ErrorCode::InvalidConfig, flag + " needs " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

/// "1:10" (step 1), "1:10:0.5" or "1,3,5".
std::vector<double> parse_range(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_csv_numbers(text, 0, "--sweep");
  std::string spec = text;
  for (auto& c : spec) c = c == ':' ? ',' : c;
  const auto v = parse_csv_numbers(spec, 0, "--sweep");
  if (v.size() < 2 || v.size() > 3) throw sf::Error(sf::ErrorCode::InvalidConfig, "--sweep expects lo:hi[:step]");
  const double step = v.size() == 3 ? v[2] : 1.0;
  if (!(step > 0.0) || !(v[1] >= v[0])) throw sf::Error(sf::ErrorCode::InvalidConfig, "--sweep range is empty");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double r = v[0] + step * static_cast<double>(i);
    if (r > v[1] + 1e-9) break;
    out.push_back(r);
  }
  return out;
}

/// Command-line overrides on top of the JSON config.
struct Overrides {
  std::optional<std::string> config_path;
  bool no_crop = false;
  std::optional<std::size_t> dilate_px;
  std::optional<std::string> passthrough;
  std::optional<double> voxel_size;
  std::optional<std::size_t> knn;
  std::optional<double> theta1_deg;
  std::optional<double> curv_seed;
  std::optional<std::size_t> min_segment;
  std::optional<double> step_mm;
  std::optional<double> line_tol;
  std::optional<double> curve_tol;
  std::optional<unsigned> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "pipeline config JSON (strict keys)")->check(CLI::ExistingFile);
    app->add_flag("--no-crop", no_crop, "skip the mask ROI crop");
    app->add_option("--dilate-px", dilate_px, "ROI dilation radius in pixels");
    app->add_option("--passthrough", passthrough, "world box xmin,xmax,ymin,ymax,zmin,zmax");
    app->add_option("--voxel-size", voxel_size, "voxel edge length, mm");
    app->add_option("--knn", knn, "neighbours for normals and curvature");
    app->add_option("--theta1-deg", theta1_deg, "region-growing normal angle bound, degrees");
    app->add_option("--curv-seed", curv_seed, "curvature bound for seed promotion");
    app->add_option("--min-segment", min_segment, "minimum segment size, points");
    app->add_option("--step-mm", step_mm, "waypoint spacing, mm");
    app->add_option("--line-tol", line_tol, "line fit RMS tolerance, mm");
    app->add_option("--curve-tol", curve_tol, "polynomial fit RMS tolerance, mm");
    app->add_option("--threads", threads, "worker threads for per-point stages");
  }

  sf::PipelineConfig build() const {
    sf::PipelineConfig c;
    if (config_path) c = sf::read_config(*config_path);
    if (no_crop) c.crop = false;
    if (dilate_px) c.dilate_px = *dilate_px;
    if (passthrough) {
      const auto v = parse_csv_numbers(*passthrough, 6, "--passthrough");
      c.passthrough.min = sf::Point3(v[0], v[2], v[4]);
      c.passthrough.max = sf::Point3(v[1], v[3], v[5]);
    }
    if (voxel_size) c.voxel_size_mm = *voxel_size;
    if (knn) c.knn = *knn;
    if (theta1_deg) c.growth.theta1_deg = *theta1_deg;
    if (curv_seed) c.growth.c2 = *curv_seed;
    if (min_segment) c.growth.min_segment_size = *min_segment;
    if (step_mm) c.step_mm = *step_mm;
    if (line_tol) c.fit.line_tol = *line_tol;
    if (curve_tol) c.fit.curve_tol = *curve_tol;
    if (threads) c.threads = *threads;
    c.check();
    return c;
  }
};

void log_report(const sf::PipelineReport& r) {
  const auto& t = r.timings_ms;
  spdlog::info("points: input {} / crop {} / passthrough {} / downsample {}", r.counts.input, r.counts.after_crop,
               r.counts.after_passthrough, r.counts.after_downsample);
  spdlog::info("timings ms: crop {:.1f} downsample {:.1f} features {:.1f} grow {:.1f} refine {:.1f} fit {:.1f}", t.crop,
               t.downsample, t.features, t.grow, t.refine, t.fit);
  spdlog::info("segments {}, edge candidates {}, seams {}", r.segments, r.edge_candidates,
               r.refine.two_surface_points);
  for (const auto& s : r.rejected_seams) spdlog::warn("seam rejected: {}", s);
}

int cmd_gen(const std::optional<std::string>& spec_path, const std::optional<std::string>& fixture,
            const std::string& out, unsigned threads) {
  sf::WorkpieceSpec spec;
  if (spec_path) {
    spec = sf::spec_from_json(sf::detail::parse_json(sf::detail::read_file(*spec_path), *spec_path));
  } else if (fixture) {
    spec = sf::fixture_spec(*fixture);
  } else {
    throw sf::Error(sf::ErrorCode::InvalidSpec, "gen needs --spec or --fixture");
  }
  const auto g = sf::generate(spec, threads);
  const auto manifest = sf::write_generated(g, out);
  spdlog::info("wrote {} ({} points, {} masks, {} seams)", manifest.string(), g.scene.cloud.size(),
               g.scene.masks.size(), g.truth.seams.size());
  std::cout << manifest.string() << "\n";
  return kExitOk;
}

int cmd_run(const std::string& manifest, const std::vector<std::string>& masks, const Overrides& ov,
            const std::string& out, const std::optional<std::string>& report_path) {
  const auto config = ov.build();
  auto scene = sf::read_scene(manifest);
  if (!masks.empty()) {
    scene.masks.clear();
    for (const auto& m : masks) scene.masks.push_back(sf::read_mask_pgm(m));
    scene.check();
  }
  const auto result = sf::run_pipeline(scene, config);
  log_report(result.report);
  sf::write_weld_path(result.paths, out);
  if (report_path) {
    sf::detail::write_file(*report_path,
                           sf::report_to_json(result.report, result.paths, result.seams).dump(2) + "\n");
  }
  std::cout << result.paths.size() << " seam(s) written to " << out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string scene_dir;
  std::optional<std::string> sweep;
  bool ablation = false;
  std::optional<std::string> out;
  std::optional<std::string> csv;
};

int cmd_eval(const EvalArgs& a, const Overrides& ov) {
  const auto config = ov.build();
  const sf::fs::path manifest = sf::fs::is_directory(a.scene_dir) ? sf::fs::path(a.scene_dir) / "manifest.json"
                                                                   : sf::fs::path(a.scene_dir);
  const auto scene = sf::read_scene(manifest);
  const auto truth = sf::read_truth_for_scene(manifest);
  const sf::fs::path dir = manifest.parent_path();
  nlohmann::ordered_json report;
  std::string csv;
  if (a.sweep) {
    const auto rows = sf::run_sweep(scene, truth, config, parse_range(*a.sweep));
    report["sweep"] = sf::sweep_to_json(rows);
    csv = sf::sweep_to_csv(rows);
    for (const auto& row : rows) {
      spdlog::info("r {:.2f}: {} points, {} matched, rmse {:.4f} mm{}", row.r, row.points, row.report.matched,
                   row.report.pooled_rmse, row.report.failed ? " (failed: " + row.report.error + ")" : "");
    }
  }
  if (a.ablation) {
    const auto ab = sf::run_ablation(scene, truth, config);
    report["ablation"] = {{"cropped", sf::eval_to_json(ab.cropped)}, {"uncropped", sf::eval_to_json(ab.uncropped)}};
    csv += sf::ablation_to_csv(ab);
  }
  if (!a.sweep && !a.ablation) {
    const auto rep = sf::evaluate_scene(scene, truth, config);
    report["evaluation"] = sf::eval_to_json(rep);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f,%.6f,%.6f,%s\n", rep.detected, rep.matched, rep.truth_count,
                  rep.mean_rmse, rep.pooled_rmse, rep.max_error, rep.failed ? "failed" : "ok");
    csv = std::string("detected,matched,truth,mean_rmse_mm,pooled_rmse_mm,max_error_mm,status\n") + buf;
    if (rep.failed) spdlog::warn("pipeline failed: {}", rep.error);
  }
  const sf::fs::path out = a.out ? sf::fs::path(*a.out) : dir / "eval.json";
  const sf::fs::path csv_out = a.csv ? sf::fs::path(*a.csv) : dir / "eval.csv";
  sf::detail::write_file(out, report.dump(2) + "\n");
  sf::detail::write_file(csv_out, csv);
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"seamforge: weld seam extraction from scanned point clouds"};
  app.require_subcommand(1);

  std::optional<std::string> gen_spec;
  std::optional<std::string> gen_fixture;
  std::string gen_out;
  unsigned gen_threads = 1;
  auto* gen = app.add_subcommand("gen", "generate a synthetic scene with ground truth");
  gen->add_option("--spec", gen_spec, "workpiece spec JSON")->check(CLI::ExistingFile);
  gen->add_option("--fixture", gen_fixture, "built-in fixture: butt, tee-1, tee-5, curved");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--threads", gen_threads, "generator threads");

  std::string run_manifest;
  std::vector<std::string> run_masks;
  std::string run_out;
  std::optional<std::string> run_report;
  Overrides run_ov;
  auto* run = app.add_subcommand("run", "extract weld paths from a scene");
  run->add_option("manifest", run_manifest, "scene manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--masks", run_masks, "surface masks (PGM) replacing the manifest's");
  run->add_option("--out", run_out, "weld path JSON")->required();
  run->add_option("--report", run_report, "diagnostics JSON");
  run_ov.attach(run);

  EvalArgs eval_args;
  Overrides eval_ov;
  auto* eval = app.add_subcommand("eval", "score a generated scene against its ground truth");
  eval->add_option("--scene", eval_args.scene_dir, "scene directory or manifest")->required();
  eval->add_option("--sweep", eval_args.sweep, "voxel sizes, lo:hi[:step] or a,b,c");
  eval->add_flag("--ablation", eval_args.ablation, "compare with and without the ROI crop");
  eval->add_option("--out", eval_args.out, "report JSON (default <scene>/eval.json)");
  eval->add_option("--csv", eval_args.csv, "report CSV (default <scene>/eval.csv)");
  eval_ov.attach(eval);

  EvalArgs sweep_args;
  std::string sweep_range = "1:10";
  Overrides sweep_ov;
  auto* sweep = app.add_subcommand("sweep", "voxel size sweep (same as eval --sweep)");
  sweep->add_option("--scene", sweep_args.scene_dir, "scene directory or manifest")->required();
  sweep->add_option("--r", sweep_range, "voxel sizes, lo:hi[:step] or a,b,c");
  sweep->add_option("--out", sweep_args.out, "report JSON");
  sweep->add_option("--csv", sweep_args.csv, "report CSV");
  sweep_ov.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen) return cmd_gen(gen_spec, gen_fixture, gen_out, gen_threads);
    if (*run) return cmd_run(run_manifest, run_masks, run_ov, run_out, run_report);
    if (*eval) return cmd_eval(eval_args, eval_ov);
    if (*sweep) {
      sweep_args.sweep = sweep_range;
      return cmd_eval(sweep_args, sweep_ov);
    }
  } catch (const sf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == sf::ErrorCode::NoSeamsFound ? kExitNoSeams : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
