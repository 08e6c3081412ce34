#pragma once

#include <vector>

#include "cvp/error.hpp"
#include "cvp/image.hpp"

namespace cvp {

struct ImagePyramid {
  std::vector<Image> levels;  // levels[0] is the input image
  int top() const { return static_cast<int>(levels.size()) - 1; }
};

/// H x W x F descriptor map; each channel standardized to zero mean,
/// unit variance over the image.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, int channels)
      : width_(width),
        height_(height),
        channels_(channels),
        data_(size_t(width) * height * channels, 0.f) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  float* px(int x, int y) {
    return &data_[(size_t(y) * width_ + x) * channels_];
  }
  const float* px(int x, int y) const {
    return &data_[(size_t(y) * width_ + x) * channels_];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

inline constexpr int kFeatureChannels = 16;

/// 5-tap binomial filter + 2x decimation per level; level dimensions are
/// ceil(previous/2). Throws TooSmall below 8 px in either dimension.
ImagePyramid build_pyramid(const Image& image, int top_level);

/// Fixed 16-channel descriptor: intensity, gradients, 3-scale DoG,
/// 8-direction soft census bits, local stddev, truncated Laplacian.
FeatureMap extract_features(const Image& image);

/// Bilinear feature lookup; false (and zeros) outside [0,W-1]x[0,H-1].
bool sample_feature(const FeatureMap& fm, double x, double y, float* out);

/// Rec. 601 luma, mapped to [0,1].
Image to_grayscale(const ColorImage& rgb);

}  // namespace cvp
