#include <doctest.h>

#include <random>

#include "cvp/pyramid.hpp"

using namespace cvp;

TEST_CASE("pyramid of a constant image stays constant") {
  Image img(64, 48, 0.37f);
  const ImagePyramid pyr = build_pyramid(img, 2);
  REQUIRE(pyr.levels.size() == 3);
  for (const Image& lvl : pyr.levels)
    for (const float v : lvl.data()) CHECK(v == doctest::Approx(0.37f));
}

TEST_CASE("pyramid level sizes halve with ceil") {
  {
    const ImagePyramid p = build_pyramid(Image(160, 128), 1);
    CHECK(p.levels[1].width() == 80);
    CHECK(p.levels[1].height() == 64);
  }
  {
    const ImagePyramid p = build_pyramid(Image(1600, 1152), 4);
    REQUIRE(p.levels.size() == 5);
    CHECK(p.levels[4].width() == 100);
    CHECK(p.levels[4].height() == 72);
  }
}

TEST_CASE("pyramid refuses to shrink below 8 px") {
  CHECK_THROWS_AS(build_pyramid(Image(32, 32), 3), TooSmall);
}

TEST_CASE("pyramid roughly preserves mean intensity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  Image img(128, 96);
  for (float& v : img.data()) v = u(rng);
  const ImagePyramid pyr = build_pyramid(img, 2);
  for (size_t l = 1; l < pyr.levels.size(); ++l) {
    double m0 = 0.0, m1 = 0.0;
    for (const float v : pyr.levels[l - 1].data()) m0 += v;
    for (const float v : pyr.levels[l].data()) m1 += v;
    m0 /= pyr.levels[l - 1].data().size();
    m1 /= pyr.levels[l].data().size();
    CHECK(std::abs(m1 - m0) / m0 < 0.02);
  }
}

TEST_CASE("features of a constant image are all zero") {
  const FeatureMap fm = extract_features(Image(32, 24, 0.5f));
  REQUIRE(fm.channels() == 16);
  for (const float v : fm.data()) CHECK(v == 0.f);
}

TEST_CASE("ramp image: gradient responds along x only") {
  // I(x, y) = x^2 so the x-gradient is strictly increasing in x.
  Image img(32, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = float(x * x) / 1024.f;
  const FeatureMap fm = extract_features(img);
  for (int x = 2; x < 29; ++x)
    CHECK(fm.px(x + 1, 12)[1] > fm.px(x, 12)[1]);
  // Linear ramp: dy is constant zero -> standardized to zero.
  Image ramp(32, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) ramp.at(x, y) = float(x) / 32.f;
  const FeatureMap fr = extract_features(ramp);
  for (int x = 0; x < 32; ++x) CHECK(fr.px(x, 10)[2] == 0.f);
}

TEST_CASE("feature extraction is deterministic") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  Image img(40, 30);
  for (float& v : img.data()) v = u(rng);
  const FeatureMap a = extract_features(img);
  const FeatureMap b = extract_features(img);
  CHECK(a.data() == b.data());
}

TEST_CASE("sample_feature interpolates and rejects out-of-bounds") {
  FeatureMap fm(4, 3, 2);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) {
      fm.px(x, y)[0] = float(x);
      fm.px(x, y)[1] = float(10 * y);
    }
  float out[2];
  CHECK(sample_feature(fm, 2.0, 1.0, out));
  CHECK(out[0] == 2.f);
  CHECK(out[1] == 10.f);

  CHECK(sample_feature(fm, 1.5, 1.0, out));
  CHECK(out[0] == doctest::Approx(1.5f));

  CHECK_FALSE(sample_feature(fm, -0.5, 0.0, out));
  CHECK(out[0] == 0.f);
  CHECK(out[1] == 0.f);
  CHECK_FALSE(sample_feature(fm, 3.5, 0.0, out));
}
