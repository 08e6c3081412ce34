#include <doctest.h>

#include <random>

#include "cvp/cost_volume.hpp"
#include "cvp/synth.hpp"
#include "helpers.hpp"

using namespace cvp;

TEST_CASE("variance_cost matches brute force on randomized inputs") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<float> u(-2.f, 2.f);
  std::uniform_int_distribution<int> nd(2, 8), cd(1, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = nd(rng), ch = cd(rng);
    std::vector<float> feats(size_t(n) * ch);
    std::vector<uint8_t> valid(n);
    for (float& v : feats) v = u(rng);
    int n_valid = 0;
    for (auto& v : valid) {
      v = rng() % 4 ? 1 : 0;
      n_valid += v;
    }
    if (n_valid < 2) {
      CHECK(variance_cost(feats.data(), valid.data(), n, ch) == kSentinelCost);
      continue;
    }
    // Independent reference: per-channel mean/variance over valid views.
    double expect = 0.0;
    for (int c = 0; c < ch; ++c) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i)
        if (valid[i]) mean += feats[size_t(i) * ch + c] / n_valid;
      double var = 0.0;
      for (int i = 0; i < n; ++i)
        if (valid[i]) {
          const double d = feats[size_t(i) * ch + c] - mean;
          var += d * d / n_valid;
        }
      expect += var / ch;
    }
    int got_valid = 0;
    const double got =
        variance_cost(feats.data(), valid.data(), n, ch, &got_valid);
    CHECK(got_valid == n_valid);
    CHECK(std::abs(got - expect) < 1e-12);
  }
}

TEST_CASE("variance_cost of identical features is zero") {
  const float feats[12] = {1.f, -2.f, 0.5f, 1.f, -2.f, 0.5f,
                           1.f, -2.f, 0.5f, 1.f, -2.f, 0.5f};
  const uint8_t valid[4] = {1, 1, 1, 1};
  CHECK(variance_cost(feats, valid, 4, 3) == 0.0);
}

TEST_CASE("residual hypothesis indexing is symmetric around the base") {
  HypothesisSet hs;
  hs.kind = HypothesisSet::Kind::residual;
  hs.count = 8;
  hs.width = hs.height = 1;
  hs.base = {10.f};
  hs.delta = {0.25f};
  CHECK(hs.depth_at(0, 0, 0) == doctest::Approx(9.0));
  CHECK(hs.depth_at(0, 0, 4) == doctest::Approx(10.0));
  CHECK(hs.depth_at(0, 0, 7) == doctest::Approx(10.75));
}

TEST_CASE("coarse sweep argmin recovers a textured plane") {
  const auto cams = make_camera_ring(5, 2.0, Vec3::Zero(),
                                     {.width = 96, .height = 80, .focal = 96.0});
  const SceneSpec scene = SceneSpec::plane_for(cams[0], 10.0, 42);

  std::vector<FeatureMap> feats;
  DepthMap gt;
  for (size_t i = 0; i < cams.size(); ++i) {
    auto [img, d] = render(scene, cams[i]);
    feats.push_back(extract_features(img));
    if (i == 0) gt = std::move(d);
  }
  const std::vector<CameraView> srcs(cams.begin() + 1, cams.end());
  const std::vector<FeatureMap> src_feats(feats.begin() + 1, feats.end());

  const int M = 32;
  const CostVolume cv = aggregate(
      build_coarse_volume(feats[0], src_feats, cams[0], srcs, M, 0));

  int good = 0, total = 0;
  for (int y = 8; y < cv.height - 8; ++y)
    for (int x = 8; x < cv.width - 8; ++x) {
      if (!gt.ok(x, y)) continue;
      int best = -1;
      float cb = kSentinelCost;
      for (int m = 0; m < M; ++m)
        if (cv.costs[cv.cell(x, y, m)] < cb) {
          cb = cv.costs[cv.cell(x, y, m)];
          best = m;
        }
      REQUIRE(best >= 0);
      // Nearest hypothesis to the true depth.
      int want = 0;
      double derr = 1e30;
      for (int m = 0; m < M; ++m) {
        const double e = std::abs(cv.hypotheses.absolute_depth(m) - gt.d(x, y));
        if (e < derr) {
          derr = e;
          want = m;
        }
      }
      good += std::abs(best - want) <= 1 ? 1 : 0;
      ++total;
    }
  REQUIRE(total > 1000);
  CHECK(double(good) / total > 0.99);
}

TEST_CASE("aggregate keeps constants fixed and sentinels sentinel") {
  CostVolume cv(6, 5, 0, HypothesisSet::uniform(1.0, 2.0, 4, 6, 5));
  for (float& c : cv.costs) c = 0.75f;
  cv.costs[cv.cell(2, 2, 1)] = kSentinelCost;
  const CostVolume out = aggregate(cv);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      for (int m = 0; m < 4; ++m) {
        const float v = out.costs[out.cell(x, y, m)];
        if (x == 2 && y == 2 && m == 1)
          CHECK(v == kSentinelCost);
        else
          CHECK(v == doctest::Approx(0.75f).epsilon(1e-6));
      }
}

TEST_CASE("aggregate diffuses an impulse spatially") {
  CostVolume cv(9, 9, 0, HypothesisSet::uniform(1.0, 2.0, 2, 9, 9));
  for (float& c : cv.costs) c = 0.f;
  cv.costs[cv.cell(4, 4, 0)] = 1.f;
  const CostVolume out = aggregate(cv);
  CHECK(out.costs[out.cell(4, 4, 0)] < 1.f);
  CHECK(out.costs[out.cell(3, 4, 0)] > 0.f);
  CHECK(out.costs[out.cell(4, 6, 0)] > 0.f);
  // Hypothesis filter leaks some mass into the m=1 slice too.
  CHECK(out.costs[out.cell(4, 4, 1)] > 0.f);
  // Nothing reaches beyond the 5x5 footprint of two box passes.
  CHECK(out.costs[out.cell(4, 8, 0)] == 0.f);
}

TEST_CASE("to_probability is a proper softmax over valid hypotheses") {
  CostVolume cv(2, 1, 0, HypothesisSet::uniform(1.0, 2.0, 4, 2, 1));
  cv.costs[cv.cell(0, 0, 0)] = 0.1f;
  cv.costs[cv.cell(0, 0, 1)] = 0.3f;
  cv.costs[cv.cell(0, 0, 2)] = 0.2f;
  cv.costs[cv.cell(0, 0, 3)] = kSentinelCost;
  // Pixel (1,0) stays all-sentinel.

  const ProbabilityVolume pv = to_probability(cv, 0.1);
  double sum = 0.0;
  for (int m = 0; m < 4; ++m) sum += pv.probs[pv.cell(0, 0, m)];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(pv.probs[pv.cell(0, 0, 0)] > pv.probs[pv.cell(0, 0, 2)]);
  CHECK(pv.probs[pv.cell(0, 0, 2)] > pv.probs[pv.cell(0, 0, 1)]);
  CHECK(pv.probs[pv.cell(0, 0, 3)] == 0.f);
  CHECK(pv.low_conf[0] == 0);

  CHECK(pv.low_conf[1] == 1);
  for (int m = 0; m < 4; ++m)
    CHECK(pv.probs[pv.cell(1, 0, m)] == doctest::Approx(0.25f));

  CHECK_THROWS_AS(to_probability(cv, 0.0), InvalidTemperature);
  CHECK_THROWS_AS(to_probability(cv, -1.0), InvalidTemperature);
}

TEST_CASE("partial volume allocates exactly M hypotheses per pixel") {
  const auto cams = make_camera_ring(3, 2.0, Vec3::Zero(),
                                     {.width = 48, .height = 40, .focal = 48.0});
  const SceneSpec scene = SceneSpec::plane_for(cams[0], 10.0, 7);
  std::vector<FeatureMap> feats;
  for (const auto& c : cams) feats.push_back(extract_features(render(scene, c).first));
  const std::vector<CameraView> srcs(cams.begin() + 1, cams.end());
  const std::vector<FeatureMap> src_feats(feats.begin() + 1, feats.end());

  DepthMap d_up(48, 40, 0);
  for (size_t i = 0; i < d_up.depth.size(); ++i) {
    d_up.depth[i] = 10.2f;
    d_up.valid[i] = 1;
  }
  for (const int M : {4, 8, 16}) {
    const CostVolume cv = build_partial_volume(feats[0], src_feats, cams[0],
                                               srcs, d_up, M, 0);
    CHECK(cv.hypotheses_per_pixel() == M);
    CHECK(cv.allocated_cells() == size_t(48) * 40 * M);
  }
}

TEST_CASE("partial volume centers hypotheses on the upsampled depth") {
  const auto cams = make_camera_ring(3, 2.0, Vec3::Zero(),
                                     {.width = 48, .height = 40, .focal = 48.0});
  const SceneSpec scene = SceneSpec::plane_for(cams[0], 10.0, 7);
  std::vector<FeatureMap> feats;
  for (const auto& c : cams) feats.push_back(extract_features(render(scene, c).first));
  const std::vector<CameraView> srcs(cams.begin() + 1, cams.end());
  const std::vector<FeatureMap> src_feats(feats.begin() + 1, feats.end());

  DepthMap d_up(48, 40, 0);
  for (size_t i = 0; i < d_up.depth.size(); ++i) {
    d_up.depth[i] = 9.7f;
    d_up.valid[i] = 1;
  }
  // One invalid pixel must stay all-sentinel.
  d_up.valid[d_up.idx(5, 5)] = 0;

  const CostVolume cv = build_partial_volume(feats[0], src_feats, cams[0],
                                             srcs, d_up, 8, 0);
  CHECK(cv.hypotheses.base[cv.hypotheses.width * 20 + 20] == 9.7f);
  CHECK(cv.hypotheses.delta[cv.hypotheses.width * 20 + 20] > 0.f);
  CHECK(cv.hypotheses.depth_at(20, 20, 4) == doctest::Approx(9.7).epsilon(1e-6));
  for (int m = 0; m < 8; ++m)
    CHECK(cv.costs[cv.cell(5, 5, m)] == kSentinelCost);
}
