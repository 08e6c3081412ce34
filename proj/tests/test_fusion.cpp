#include <doctest.h>

#include <random>

#include "cvp/fusion.hpp"
#include "cvp/synth.hpp"

using namespace cvp;

TEST_CASE("nn_distances equals O(n^2) brute force exactly") {
  std::mt19937_64 rng(201);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec3> q(400), t(350);
  for (auto& p : q) p = Vec3(u(rng), u(rng), u(rng));
  for (auto& p : t) p = Vec3(u(rng), u(rng), u(rng));

  const std::vector<double> fast = nn_distances(q, t);
  REQUIRE(fast.size() == q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    double best = 1e300;
    for (const auto& p : t) best = std::min(best, (p - q[i]).squaredNorm());
    CHECK(fast[i] == std::sqrt(best));  // bit-exact: same min + sqrt
  }
}

TEST_CASE("cloud_metrics on shifted grids and degenerate inputs") {
  PointCloud gt, est;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      gt.points.emplace_back(i, j, 0.0);
      est.points.emplace_back(i, j, 0.001);  // uniform vertical offset
    }
  const CloudMetrics m = cloud_metrics(est, gt);
  CHECK(m.accuracy == doctest::Approx(0.001).epsilon(1e-9));
  CHECK(m.completeness == doctest::Approx(0.001).epsilon(1e-9));
  CHECK(m.overall == doctest::Approx(0.001).epsilon(1e-9));

  const CloudMetrics zero = cloud_metrics(gt, gt);
  CHECK(zero.overall == 0.0);

  CHECK_THROWS_AS(cloud_metrics(PointCloud{}, gt), EmptyCloud);

  // Outliers beyond the cap are excluded, not averaged in.
  PointCloud with_outlier = est;
  with_outlier.points.emplace_back(0.0, 0.0, 1000.0);
  const CloudMetrics capped = cloud_metrics(with_outlier, gt, 20.0);
  CHECK(capped.accuracy == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("perfect synthetic depths survive filtering and fuse onto the plane") {
  const auto cams = make_camera_ring(6, 2.0, Vec3::Zero(),
                                     {.width = 80, .height = 64, .focal = 80.0});
  const SceneSpec scene = SceneSpec::plane_for(cams[0], 10.0, 11);

  std::vector<DepthMap> depths;
  for (const auto& c : cams) depths.push_back(render(scene, c).second);

  FusionConfig cfg;
  const std::vector<DepthMap> kept = consistency_filter(depths, cams, cfg);

  size_t before = 0, after = 0;
  for (size_t i = 0; i < depths[0].valid.size(); ++i) {
    before += depths[0].valid[i];
    after += kept[0].valid[i];
  }
  REQUIRE(before > 0);
  CHECK(double(after) / before > 0.9);

  const PointCloud cloud = fuse(kept, cams, nullptr, cfg);
  REQUIRE(cloud.size() > before / 2);
  const Vec3 n = scene.plane_normal;
  double worst = 0.0;
  for (const auto& p : cloud.points)
    worst = std::max(worst, std::abs(n.dot(p - scene.plane_point)));
  CHECK(worst < 0.02);
}

TEST_CASE("low-confidence pixels are rejected by the gate") {
  const auto cams = make_camera_ring(4, 2.0, Vec3::Zero(),
                                     {.width = 40, .height = 32, .focal = 40.0});
  const SceneSpec scene = SceneSpec::plane_for(cams[0], 10.0, 3);
  std::vector<DepthMap> depths;
  for (const auto& c : cams) depths.push_back(render(scene, c).second);
  for (float& c : depths[0].confidence) c = 0.1f;  // below conf_min=0.8

  const auto kept = consistency_filter(depths, cams, {});
  for (const uint8_t v : kept[0].valid) CHECK(v == 0);
}

TEST_CASE("disjoint frustums yield an empty fused cloud") {
  CameraView a;
  a.K = Mat3::Identity();
  a.K(0, 0) = a.K(1, 1) = 50.0;
  a.K(0, 2) = 20.0;
  a.K(1, 2) = 16.0;
  a.width = 40;
  a.height = 32;
  a.d_min = 1.0;
  a.d_max = 20.0;
  CameraView b = a;
  b.R = Eigen::AngleAxisd(M_PI, Vec3::UnitY()).toRotationMatrix();
  b.t = -b.R * Vec3(0, 0, 100.0);  // behind a, looking away

  DepthMap d(40, 32, 0);
  for (size_t i = 0; i < d.depth.size(); ++i) {
    d.depth[i] = 5.f;
    d.valid[i] = 1;
    d.confidence[i] = 1.f;
  }
  FusionConfig cfg;
  cfg.min_consistent_views = 2;
  const auto kept = consistency_filter({d, d}, {a, b}, cfg);
  const PointCloud cloud = fuse(kept, {a, b}, nullptr, cfg);
  CHECK(cloud.size() == 0);
}

TEST_CASE("fused points reproject onto their source pixel") {
  const auto cams = make_camera_ring(5, 2.0, Vec3::Zero(),
                                     {.width = 64, .height = 48, .focal = 64.0});
  const SceneSpec scene = SceneSpec::sphere(Vec3(0, 0, 0), 3.0, 17);
  std::vector<DepthMap> depths;
  for (const auto& c : cams) depths.push_back(render(scene, c).second);
  const auto kept = consistency_filter(depths, cams, {});
  const PointCloud cloud = fuse(kept, cams, nullptr, {});
  REQUIRE(cloud.size() > 0);
  // Every fused point lies on some view's pixel ray: its projection into
  // that view lands back on integer pixel coordinates.
  size_t on_grid = 0;
  for (const auto& p : cloud.points) {
    for (const auto& c : cams) {
      const Projection pr = project(c, p);
      if (!pr.valid) continue;
      const double fx = pr.pixel.x(), fy = pr.pixel.y();
      if (std::abs(fx - std::round(fx)) < 1e-6 &&
          std::abs(fy - std::round(fy)) < 1e-6) {
        ++on_grid;
        break;
      }
    }
  }
  CHECK(on_grid == cloud.size());
}
