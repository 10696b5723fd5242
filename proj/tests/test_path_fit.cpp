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

#include <functional>

#include "test_support.hpp"

namespace sf = seamforge;
using sf::Point2;
using sf::Point3;
using sf::Vector3;

namespace {

sf::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const sf::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no seamforge::Error thrown";
  return sf::ErrorCode::InvalidArgument;
}

double angle_deg(const Vector3& a, const Vector3& b) {
  return sf::rad2deg(std::acos(std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0)));
}

/// Arc length of the fitted model between two parameters by a fine polyline.
double polyline_length(const sf::FittedSeam& fit, double a, double b) {
  constexpr int n = 4000;
  double len = 0.0;
  Point3 prev = fit.at(a);
  for (int i = 1; i <= n; ++i) {
    const Point3 cur = fit.at(a + (b - a) * i / n);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

sf::SeamPointSet seam_set(const std::vector<Point3>& pts, const Vector3& na, const Vector3& nb) {
  sf::SeamPointSet s;
  s.refined = pts;
  s.normal_a.assign(pts.size(), na);
  s.normal_b.assign(pts.size(), nb);
  return s;
}

}  // namespace

TEST(FitPlane, HorizontalPlane) {
  const std::vector<Point3> pts{{0, 0, 5}, {1, 0, 5}, {0, 1, 5}, {3, 7, 5}, {-2, 4, 5}};
  const auto p = sf::fit_plane(pts);
  EXPECT_LT((p.normal - Vector3(0, 0, 1)).norm(), 1e-12);
  EXPECT_NEAR(p.d, -5.0, 1e-12);
  std::vector<Point3> flipped = pts;
  std::reverse(flipped.begin(), flipped.end());
  EXPECT_LT((sf::fit_plane(flipped).normal - Vector3(0, 0, 1)).norm(), 1e-12);
}

TEST(FitPlane, VerticalPlaneSignConvention) {
  const std::vector<Point3> pts{{1, -1, 0}, {-1, 1, 0}, {2, -2, 3}, {0, 0, -4}, {-3, 3, 1}};
  const auto p = sf::fit_plane(pts);
  EXPECT_LT((p.normal - Vector3(1, 1, 0) / std::sqrt(2.0)).norm(), 1e-12);
  EXPECT_NEAR(p.d, 0.0, 1e-12);
  const std::vector<Point3> yz{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 2, 3}};
  EXPECT_LT((sf::fit_plane(yz).normal - Vector3(1, 0, 0)).norm(), 1e-12);
}

TEST(FitPlane, NoisyPlaneNormalWithinHalfDegree) {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> u(-50, 50);
  const Vector3 n = Vector3(0.2, -0.4, 1.0).normalized();
  const Vector3 e1 = sf::detail::any_orthogonal(n), e2 = n.cross(e1);
  std::vector<Point3> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back(Point3(5, 6, 7) + u(rng) * e1 + u(rng) * e2 + noise(rng) * n);
  EXPECT_LT(angle_deg(sf::fit_plane(pts).normal, n), 0.5);
}

TEST(FitPlane, CollinearIsDegenerate) {
  const std::vector<Point3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {5, 5, 5}};
  EXPECT_EQ(code_of([&] { sf::fit_plane(line); }), sf::ErrorCode::DegenerateGeometry);
  const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(code_of([&] { sf::fit_plane(two); }), sf::ErrorCode::DegenerateGeometry);
}

TEST(PlaneFrame, HorizontalPlanePassesThrough) {
  const std::vector<Point3> pts{{-10, 1, 0}, {0, -1, 0}, {10, 2, 0}, {20, 0, 0}};
  const auto f = sf::to_plane_frame(pts, sf::fit_plane(pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(f.coords[i].x(), pts[i].x(), 1e-12);
    EXPECT_NEAR(f.coords[i].y(), pts[i].y(), 1e-12);
  }
}

TEST(PlaneFrame, TiltedPlaneFlattensAndRoundTrips) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = sft::random_transform(rng, 300.0);
    std::vector<Point3> pts;
    for (const auto& p : sft::random_points(100, 700 + trial)) pts.push_back(t.apply(Point3(p.x(), p.y(), 0.0)));
    const auto plane = sf::fit_plane(pts);
    const auto f = sf::to_plane_frame(pts, plane);
    double zmin = 1e300, zmax = -1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point3 q = f.plane_from_input.apply(pts[i]);
      zmin = std::min(zmin, q.z());
      zmax = std::max(zmax, q.z());
      const Point3 back = sf::invert(f.plane_from_input).apply(Point3(f.coords[i].x(), f.coords[i].y(), 0.0));
      EXPECT_LT((back - plane.project(pts[i])).norm(), 1e-9);
    }
    EXPECT_LT(zmax - zmin, 1e-9);
  }
}

TEST(FitInplane, CollinearIsLinearWithZeroResidual) {
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(0.5 * i, 3.0 - 0.25 * i);
  const auto m = sf::fit_inplane(pts);
  EXPECT_EQ(m.kind, sf::SeamKind::Linear);
  EXPECT_NEAR(m.rms, 0.0, 1e-12);
}

TEST(FitInplane, ParabolaRecoversCoefficients) {
  std::vector<Point2> pts;
  for (int i = -20; i <= 20; ++i) pts.emplace_back(0.5 * i, 0.25 * i * i);
  const auto m = sf::fit_inplane(pts);
  ASSERT_EQ(m.kind, sf::SeamKind::Curved);
  ASSERT_EQ(m.degree(), 2u);
  EXPECT_NEAR(m.coefficients[0], 0.0, 1e-9);
  EXPECT_NEAR(m.coefficients[1], 0.0, 1e-9);
  EXPECT_NEAR(m.coefficients[2], 1.0, 1e-9);
}

TEST(FitInplane, CubicNeedsDegreeThree) {
  std::vector<Point2> pts;
  for (int i = -30; i <= 30; ++i) {
    const double x = i;
    pts.emplace_back(x, 0.001 * x * x * x - 0.02 * x + 1.0);
  }
  const auto m = sf::fit_inplane(pts);
  ASSERT_EQ(m.degree(), 3u);
  EXPECT_NEAR(m.coefficients[3], 0.001, 1e-12);
  EXPECT_NEAR(m.coefficients[1], -0.02, 1e-10);
}

TEST(FitInplane, HookIsRejected) {
  std::vector<Point2> pts;
  for (int i = 0; i < 60; ++i) {
    const double a = sf::deg2rad(6.0 * i);
    pts.emplace_back(20.0 * std::cos(a), 20.0 * std::sin(a));
  }
  EXPECT_EQ(code_of([&] { sf::fit_inplane(pts); }), sf::ErrorCode::FitRejected);
  const std::vector<Point2> same(4, Point2(1, 1));
  EXPECT_EQ(code_of([&] { sf::fit_inplane(same); }), sf::ErrorCode::DegenerateGeometry);
}

TEST(FitSeam, PointsStayCloseToFittedCurve) {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<Point3> pts;
  for (int i = 0; i <= 200; ++i) {
    const double x = -100.0 + i;
    pts.emplace_back(x, 15.0 * std::sin(x / 60.0) + noise(rng), 0.3 * x + noise(rng));
  }
  const auto fit = sf::fit_seam(pts);
  EXPECT_EQ(fit.kind, sf::SeamKind::Curved);
  const double bound = std::max(5.0 * fit.rms, 2.0);
  for (const auto& p : pts) {
    double best = 1e300;
    for (int i = 0; i <= 20000; ++i) {
      const double s = fit.model.param_min + (fit.model.param_max - fit.model.param_min) * i / 20000.0;
      best = std::min(best, (fit.at(s) - p).norm());
    }
    EXPECT_LE(best, bound);
  }
}

TEST(Sampling, TenMillimetreLine) {
  std::vector<Point3> pts;
  for (int i = 0; i <= 10; ++i) pts.emplace_back(i, 0, 0);
  const auto fit = sf::fit_seam(pts);
  ASSERT_EQ(fit.kind, sf::SeamKind::Linear);
  const auto wp = sf::sample_waypoints(fit, 5.0);
  ASSERT_EQ(wp.size(), 3u);
  const auto lo = std::min(wp.front().x(), wp.back().x());
  EXPECT_NEAR(lo, 0.0, 1e-9);
  EXPECT_NEAR(wp[1].x(), 5.0, 1e-9);
  EXPECT_NEAR(std::max(wp.front().x(), wp.back().x()), 10.0, 1e-9);
  for (const auto& p : wp) EXPECT_LT(std::hypot(p.y(), p.z()), 1e-9);
}

TEST(Sampling, StepLongerThanSeamGivesEndpoints) {
  std::vector<Point3> pts;
  for (int i = 0; i <= 10; ++i) pts.emplace_back(i, 2 * i, 1);
  const auto fit = sf::fit_seam(pts);
  const auto wp = sf::sample_waypoints(fit, 100.0);
  ASSERT_EQ(wp.size(), 2u);
  EXPECT_NEAR((wp[0] - wp[1]).norm(), std::sqrt(500.0), 1e-9);
  EXPECT_THROW(sf::sample_waypoints(fit, 0.0), sf::Error);
}

TEST(Sampling, ParabolaArcGapsAreUniform) {
  std::vector<Point3> pts;
  for (int i = -60; i <= 60; ++i) pts.emplace_back(i, 0.02 * i * i, 5.0);
  const auto fit = sf::fit_seam(pts);
  ASSERT_EQ(fit.kind, sf::SeamKind::Curved);
  for (double step : {2.0, 5.0}) {
    const auto params = sf::sample_parameters(fit, step);
    ASSERT_GE(params.size(), 3u);
    for (std::size_t i = 1; i < params.size(); ++i) {
      const double gap = polyline_length(fit, params[i - 1], params[i]);
      EXPECT_GE(gap, 0.9 * step);
      EXPECT_LE(gap, 1.1 * step);
      EXPECT_GT(params[i], params[i - 1]);
    }
    EXPECT_EQ(params.front(), fit.model.param_min);
    EXPECT_EQ(params.back(), fit.model.param_max);
  }
}

TEST(TorchPose, TeeJointBisector) {
  const sf::Matrix3 f = sf::torch_frame({1, 0, 0}, {0, 0, 1}, {0, 1, 0});
  const double h = std::sqrt(2.0) / 2.0;
  EXPECT_LT((f.col(2) - Vector3(0, -h, -h)).norm(), 1e-12);
  EXPECT_LT((f.col(0) - Vector3(1, 0, 0)).norm(), 1e-12);
  EXPECT_NEAR(f.determinant(), 1.0, 1e-12);
  const auto o = sf::compute_torch_pose({1, 0, 0}, {0, 0, 1}, {0, 1, 0});
  EXPECT_LT((sf::wpr_to_rotation(o) - f).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TorchPose, ButtJointPointsDown) {
  const sf::Matrix3 f = sf::torch_frame({0, 1, 0}, {0, 0, 1}, {0, 0, 1});
  EXPECT_LT((f.col(2) - Vector3(0, 0, -1)).norm(), 1e-12);
}

TEST(TorchPose, ApproachIsOrthogonalToTangent) {
  std::mt19937_64 rng(74);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Vector3 t(n(rng), n(rng), n(rng)), n1 = Vector3(n(rng), n(rng), n(rng)).normalized(),
        n2 = Vector3(n(rng), n(rng), n(rng)).normalized();
    if ((n1 + n2).norm() < 1e-3) continue;
    try {
      const sf::Matrix3 f = sf::torch_frame(t, n1, n2);
      EXPECT_LT(std::abs(f.col(2).dot(t.normalized())), 1e-9);
      EXPECT_LT((f.transpose() * f - sf::Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    } catch (const sf::Error& e) {
      EXPECT_EQ(e.code(), sf::ErrorCode::DegenerateGeometry);
    }
  }
  EXPECT_EQ(code_of([] { sf::torch_frame({1, 0, 0}, {0, 0, 1}, {0, 0, -1}); }), sf::ErrorCode::DegenerateGeometry);
}

TEST(WeldPath, SpacingAndPerpendicularity) {
  std::vector<Point3> pts;
  for (int i = 0; i <= 100; ++i) pts.emplace_back(i, 0.0, 0.0);
  const auto fit = sf::fit_seam(pts);
  const auto path = sf::build_weld_path(seam_set(pts, {0, 0, 1}, {0, 1, 0}), fit, 2.0);
  ASSERT_EQ(path.waypoints.size(), 51u);
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    const sf::Matrix3 r = sf::wpr_to_rotation(path.waypoints[i].orientation);
    EXPECT_LT(std::abs(r.col(2).dot(Vector3::UnitX())), 1e-9);
    if (i > 0) {
      const double gap = (path.waypoints[i].position - path.waypoints[i - 1].position).norm();
      EXPECT_GE(gap, 1.0);
      EXPECT_LE(gap, 3.0);
    }
  }
}

TEST(ToWorld, IdentityTranslationAndIsometry) {
  sf::WeldPath path;
  for (int i = 0; i < 20; ++i) path.waypoints.push_back({{i * 2.0, std::sin(i), 0.1 * i}, {10.0 * i - 90, 15, -30}});
  const auto same = sf::to_world(path, {}, {});
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    EXPECT_LT((same.waypoints[i].position - path.waypoints[i].position).norm(), 1e-12);
    EXPECT_LT((sf::wpr_to_rotation(same.waypoints[i].orientation) - sf::wpr_to_rotation(path.waypoints[i].orientation))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
  }
  const auto shifted = sf::to_world(path, sf::RigidTransform::translation({1, 2, 3}),
                                    sf::RigidTransform::translation({10, 0, 0}));
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    EXPECT_LT((shifted.waypoints[i].position - path.waypoints[i].position - Vector3(11, 2, 3)).norm(), 1e-12);
    EXPECT_NEAR(shifted.waypoints[i].orientation.w, path.waypoints[i].orientation.w, 1e-9);
    EXPECT_NEAR(shifted.waypoints[i].orientation.p, path.waypoints[i].orientation.p, 1e-9);
    EXPECT_NEAR(shifted.waypoints[i].orientation.r, path.waypoints[i].orientation.r, 1e-9);
  }
  std::mt19937_64 rng(75);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = sft::random_transform(rng), b = sft::random_transform(rng);
    const auto moved = sf::to_world(path, a, b);
    const sf::Matrix3 rot = sf::compose(b, a).rotation();
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
      EXPECT_NEAR((moved.waypoints[i].position - moved.waypoints[i - 1].position).norm(),
                  (path.waypoints[i].position - path.waypoints[i - 1].position).norm(), 1e-9);
    }
    for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
      EXPECT_LT((sf::wpr_to_rotation(moved.waypoints[i].orientation) -
                 rot * sf::wpr_to_rotation(path.waypoints[i].orientation))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-6);
    }
  }
}

TEST(FitSeam, CollinearPointsUseTheHintPlane) {
  std::vector<Point3> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(i, 2 * i, -i);
  const auto fit = sf::fit_seam(pts, {}, Vector3::UnitZ());
  EXPECT_EQ(fit.kind, sf::SeamKind::Linear);
  EXPECT_NEAR(fit.plane.normal.dot(Vector3(1, 2, -1).normalized()), 0.0, 1e-12);
  const std::vector<Point3> same(5, Point3(1, 2, 3));
  EXPECT_EQ(code_of([&] { sf::fit_seam(same); }), sf::ErrorCode::DegenerateGeometry);
}
