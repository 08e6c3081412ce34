#include "cvp/pyramid.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

namespace {

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

// Separable [1 4 6 4 1]/16 with clamped borders.
Image binomial5(const Image& in) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16,
                                 1.f / 16};
  const int w = in.width(), h = in.height();
  Image tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * in.at(clampi(x + i, 0, w - 1), y);
      tmp.at(x, y) = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.at(x, clampi(y + i, 0, h - 1));
      out.at(x, y) = s;
    }
  return out;
}

Image decimate2(const Image& in) {
  const int w = (in.width() + 1) / 2, h = (in.height() + 1) / 2;
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = in.at(2 * x, 2 * y);
  return out;
}

}  // namespace

ImagePyramid build_pyramid(const Image& image, int top_level) {
  ImagePyramid pyr;
  pyr.levels.push_back(image);
  for (int l = 1; l <= top_level; ++l) {
    const Image& prev = pyr.levels.back();
    if ((prev.width() + 1) / 2 < 8 || (prev.height() + 1) / 2 < 8)
      throw TooSmall("pyramid level would drop below 8 px");
    pyr.levels.push_back(decimate2(binomial5(prev)));
  }
  return pyr;
}

namespace {

void standardize_channel(FeatureMap& fm, int c) {
  const size_t n = size_t(fm.width()) * fm.height();
  double mean = 0.0;
  for (int y = 0; y < fm.height(); ++y)
    for (int x = 0; x < fm.width(); ++x) mean += fm.px(x, y)[c];
  mean /= double(n);
  double var = 0.0;
  for (int y = 0; y < fm.height(); ++y)
    for (int x = 0; x < fm.width(); ++x) {
      const double d = fm.px(x, y)[c] - mean;
      var += d * d;
    }
  var /= double(n);
  const float inv = var < 1e-12 ? 1.f : float(1.0 / std::sqrt(var));
  for (int y = 0; y < fm.height(); ++y)
    for (int x = 0; x < fm.width(); ++x)
      fm.px(x, y)[c] = float((fm.px(x, y)[c] - mean) * inv);
}

}  // namespace

FeatureMap extract_features(const Image& image) {
  const int w = image.width(), h = image.height();
  FeatureMap fm(w, h, kFeatureChannels);

  // Blur stack for difference-of-Gaussians (binomial passes 1, 2, 4, 8).
  Image b1 = binomial5(image);
  Image b2 = binomial5(b1);
  Image b4 = binomial5(binomial5(b2));
  Image b8 = b4;
  for (int i = 0; i < 4; ++i) b8 = binomial5(b8);

  // 8 census offsets at radius 2.
  static constexpr int off[8][2] = {{2, 0},  {-2, 0}, {0, 2},  {0, -2},
                                    {2, 2},  {-2, 2}, {2, -2}, {-2, -2}};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* f = fm.px(x, y);
      const float c = image.at(x, y);
      const float xm = image.at(clampi(x - 1, 0, w - 1), y);
      const float xp = image.at(clampi(x + 1, 0, w - 1), y);
      const float ym = image.at(x, clampi(y - 1, 0, h - 1));
      const float yp = image.at(x, clampi(y + 1, 0, h - 1));
      f[0] = c;
      f[1] = 0.5f * (xp - xm);
      f[2] = 0.5f * (yp - ym);
      f[3] = b1.at(x, y) - b2.at(x, y);
      f[4] = b2.at(x, y) - b4.at(x, y);
      f[5] = b4.at(x, y) - b8.at(x, y);
      for (int k = 0; k < 8; ++k) {
        const float nb =
            image.at(clampi(x + off[k][0], 0, w - 1), clampi(y + off[k][1], 0, h - 1));
        f[6 + k] = std::tanh(8.f * (nb - c));
      }
      float sum = 0.f, sum2 = 0.f;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const float v = image.at(clampi(x + dx, 0, w - 1), clampi(y + dy, 0, h - 1));
          sum += v;
          sum2 += v * v;
        }
      const float m = sum / 9.f;
      f[14] = std::sqrt(std::max(0.f, sum2 / 9.f - m * m));
      f[15] = std::clamp(xm + xp + ym + yp - 4.f * c, -0.5f, 0.5f);
    }
  }
  for (int c = 0; c < kFeatureChannels; ++c) standardize_channel(fm, c);
  return fm;
}

bool sample_feature(const FeatureMap& fm, double x, double y, float* out) {
  const int w = fm.width(), h = fm.height(), F = fm.channels();
  if (!(x >= 0.0 && x <= w - 1 && y >= 0.0 && y <= h - 1)) {
    std::fill(out, out + F, 0.f);
    return false;
  }
  const int x0 = std::min(int(x), w - 2 >= 0 ? w - 2 : 0);
  const int y0 = std::min(int(y), h - 2 >= 0 ? h - 2 : 0);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const float fx = float(x - x0), fy = float(y - y0);
  const float* p00 = fm.px(x0, y0);
  const float* p10 = fm.px(x1, y0);
  const float* p01 = fm.px(x0, y1);
  const float* p11 = fm.px(x1, y1);
  const float w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
  const float w01 = (1 - fx) * fy, w11 = fx * fy;
  for (int c = 0; c < F; ++c)
    out[c] = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
  return true;
}

Image to_grayscale(const ColorImage& rgb) {
  Image out(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      const uint8_t* p = rgb.px(x, y);
      out.at(x, y) =
          (0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2]) / 255.f;
    }
  return out;
}

}  // namespace cvp
