#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace cvp {

/// Single-channel float raster, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.f)
      : width_(width), height_(height), data_(size_t(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y) { return data_[size_t(y) * width_ + x]; }
  float at(int x, int y) const { return data_[size_t(y) * width_ + x]; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Interleaved 8-bit RGB raster.
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int width, int height)
      : width_(width), height_(height), data_(size_t(width) * height * 3, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  uint8_t* px(int x, int y) { return &data_[(size_t(y) * width_ + x) * 3]; }
  const uint8_t* px(int x, int y) const {
    return &data_[(size_t(y) * width_ + x) * 3];
  }

  const std::vector<uint8_t>& data() const { return data_; }
  std::vector<uint8_t>& data() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> data_;
};

}  // namespace cvp
